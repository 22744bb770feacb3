"""Common types used in the project."""

from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

DictStrAny = Dict[str, Any]  # type: ignore[misc]

NDArrayF64 = npt.NDArray[np.float64]
NDArrayObj = npt.NDArray[np.object_]

# A point of a coordinate patch. Entries are floats, or jets when the
# caller differentiates through an evaluator.
Point = Sequence[Any]  # type: ignore[misc]
Box = List[Tuple[float, float]]
Number = Union[int, float]
