"""Sample points of coordinate boxes."""
import itertools
from typing import List

import numpy as np

from .typing import Box

SAMPLE_COUNT = 100
SAMPLE_SEED = 42
GRID_SIZE = 5


def sample_box(
    box: Box, count: int = SAMPLE_COUNT, seed: int = SAMPLE_SEED
) -> List[List[float]]:
    """Draw reproducible uniform points from a box."""
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in box], dtype=np.float64)
    highs = np.array([hi for _, hi in box], dtype=np.float64)
    points = lows + (highs - lows) * rng.random((count, len(box)))
    return [[float(x) for x in row] for row in points]


def grid_points(box: Box, per_axis: int = GRID_SIZE) -> List[List[float]]:
    """Tensor grid with per_axis nodes on every side, endpoints included."""
    axes = [
        np.linspace(lo, hi, per_axis) if per_axis > 1 else [(lo + hi) / 2]
        for lo, hi in box
    ]
    return [[float(x) for x in node] for node in itertools.product(*axes)]


def box_center(box: Box) -> List[float]:
    """Midpoint of a box."""
    return [(lo + hi) / 2 for lo, hi in box]


def shrink_box(box: Box, factor: float) -> Box:
    """Scale a box about its center."""
    shrunk = []
    for lo, hi in box:
        mid = (lo + hi) / 2
        half = factor * (hi - lo) / 2
        shrunk.append((mid - half, mid + half))
    return shrunk
