"""Test parallel."""
from typing import Tuple

from .parallel import pmap


def add(num: Tuple[int, int]) -> int:
    """Add two numbers."""
    return num[0] + num[1]


def test_pmap() -> None:
    """Test pmap on two processes."""
    res = pmap(add, zip(range(10), range(10, 20)), 2)
    assert len(res) == 10
    assert res[0] == 10
    assert res[9] == 28


def test_pmap_serial() -> None:
    """A single process maps in order without spawning."""
    offset = 3
    res = pmap(lambda x: x + offset, range(5), 1)
    assert res == [3, 4, 5, 6, 7]


def test_pmap_closure() -> None:
    """Forked workers accept closures."""
    offset = 5
    res = pmap(lambda x: x * offset, range(6), 2)
    assert res == [0, 5, 10, 15, 20, 25]
