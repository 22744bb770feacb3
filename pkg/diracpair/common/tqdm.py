"""Progress bars that respect the quiet flag."""
from typing import Iterable, TypeVar

from tqdm import tqdm as tqdm_original

from .quiet import is_quiet

Item = TypeVar("Item")


def tqdm(iterable: Iterable[Item], **kwargs: object) -> Iterable[Item]:
    """Wrap tqdm; hand back the bare iterable when quiet."""
    if is_quiet():
        return iterable
    return tqdm_original(iterable, **kwargs)  # type: ignore[no-any-return]
