"""Exceptions raised by the library."""
from typing import Optional, Sequence


def _fmt_point(point: Optional[Sequence[float]]) -> str:
    if point is None:
        return ""
    return " at (" + ", ".join(f"{float(v):.6g}" for v in point) + ")"


class DiracError(Exception):
    """Base class of all library errors."""


class ExprSyntaxError(DiracError):
    """Malformed expression text."""

    def __init__(self, message: str, offset: int) -> None:
        """Keep the byte offset of the failure."""
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ExprNameError(DiracError):
    """Unknown identifier or variable outside the declared dimension."""


class ExprDomainError(DiracError):
    """Evaluation left the domain of a function."""

    def __init__(self, message: str, subtree: str) -> None:
        """Keep the printed offending subtree."""
        super().__init__(f"{message}: {subtree}")
        self.subtree = subtree


class DimensionError(DiracError, ValueError):
    """Shapes or dimensions do not agree."""


class RankDropError(DiracError):
    """A map or frame lost rank."""

    def __init__(self, message: str, point: Optional[Sequence[float]]) -> None:
        """Keep the point where the rank dropped."""
        super().__init__(message + _fmt_point(point))
        self.point = None if point is None else [float(v) for v in point]


class TransversalityError(RankDropError):
    """An embedding is not transverse to a Dirac structure."""


class ChartExitError(DiracError):
    """A flow trajectory left its chart."""

    def __init__(self, step: int) -> None:
        """Keep the integration step at which the chart was left."""
        super().__init__(f"trajectory left the chart at step {step}")
        self.step = step


class FlowError(DiracError):
    """The flow produced non-finite values."""


class QuadratureError(DiracError):
    """The epsilon quadrature did not converge."""


class ChartConsistencyError(DiracError):
    """A user supplied chart does not parametrize what it claims to."""


class DualPairError(RankDropError):
    """A lift system is singular because the dual pair condition fails."""


class ManifestError(DiracError):
    """Manifest content is invalid."""
