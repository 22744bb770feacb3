"""Closedness of omega relative to twists on the two targets."""
from typing import Optional, Sequence

import numpy as np

from ..calculus.fields import FormLike, MapLike
from ..common.errors import DimensionError
from ..common.logger import logger
from .result import Check, Report
from .typing import FD_STEP, exterior_derivative_at, pull_back_at
from .verify import VERIFY_TOL


def twisted_residual(
    s: MapLike,
    t: MapLike,
    omega: FormLike,
    phi0: Optional[FormLike],
    phi1: Optional[FormLike],
    point: Sequence[float],
    step: float = FD_STEP,
) -> float:
    """max |d omega - s^* phi0 + t^* phi1| at point."""
    tensor = exterior_derivative_at(omega, point, step)
    if phi0 is not None:
        tensor = tensor - pull_back_at(s, phi0, point)
    if phi1 is not None:
        tensor = tensor + pull_back_at(t, phi1, point)
    return float(np.max(np.abs(tensor), initial=0.0))


def twisted_closedness_check(
    s: MapLike,
    t: MapLike,
    omega: FormLike,
    phi0: Optional[FormLike],
    phi1: Optional[FormLike],
    points: Sequence[Sequence[float]],
    tol: float = VERIFY_TOL,
    step: float = FD_STEP,
) -> Report:
    """Check d omega = s^* phi0 - t^* phi1 on points.

    A missing twist counts as zero, so phi0 = phi1 = None checks that
    omega is closed.
    """
    for phi, leg in ((phi0, s), (phi1, t)):
        if phi is None:
            continue
        if phi.degree != 3 or phi.dim != leg.target_dim:
            raise DimensionError("twists must be three-forms on the targets")
    if s.source_dim != omega.dim or t.source_dim != omega.dim:
        raise DimensionError("legs and omega live on different patches")
    logger.info("checking twisted closedness on %d points", len(points))
    residuals = [
        twisted_residual(s, t, omega, phi0, phi1, p, step) for p in points
    ]
    return Report(
        checks=[
            Check.from_residuals(
                "twisted_closed",
                residuals,
                points,
                tol,
                detail="d omega - s^* phi0 + t^* phi1",
            )
        ]
    )
