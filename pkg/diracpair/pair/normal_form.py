"""Normal form of a Dirac structure around a transversal."""
from typing import Optional, Sequence

import numpy as np

from ..calculus.fields import MapLike
from ..common.errors import DimensionError, RankDropError
from ..common.logger import logger
from ..common.sampling import grid_points
from ..common.typing import Box, NDArrayF64
from ..dirac.frame import DiracFrame, transversality_check
from ..linalg.lindirac import gauge, pullback_pt, row_basis
from .realization import RealizationPair, build_realization
from .result import Check, Report
from .typing import ComposedMap
from .verify import PAIR_RANK_TOL, VERIFY_TOL

NORMAL_GRID = 5


class TransversalData:
    """A transversal i: X -> M with a model of its normal bundle.

    U is a box in R^n standing for a neighbourhood of X in NX, p: U -> X
    is the bundle projection and rho: U -> Sigma a splitting into the
    frame chart (x, c) of the realization, with x = i(p(u)).
    """

    def __init__(
        self,
        i: MapLike,
        p: MapLike,
        rho: MapLike,
        box: Box,
        name: str = "",
    ) -> None:
        """Check that the maps fit together."""
        dim = len(box)
        if p.source_dim != dim or rho.source_dim != dim:
            raise DimensionError("p and rho do not start on the box")
        if p.target_dim != i.source_dim:
            raise DimensionError("p does not end on X")
        if i.target_dim != dim or rho.target_dim != 2 * dim:
            raise DimensionError("i and rho do not end on M and Sigma")
        self.i = i
        self.p = p
        self.rho = rho
        self.box = [(float(lo), float(hi)) for lo, hi in box]
        self.name = name

    def __repr__(self) -> str:
        """Short description."""
        return (
            f"TransversalData({self.name or 'unnamed'}, "
            f"dim X = {self.i.source_dim})"
        )


def alpha_at(
    pair: RealizationPair, rho: MapLike, point: Sequence[float]
) -> NDArrayF64:
    """-rho^* omega_0 at a point of U."""
    jac = rho.jacobian(point)
    return np.asarray(-jac.T @ pair.omega_at(rho.value(point)) @ jac)


def normal_form_check(
    frame: DiracFrame,
    data: TransversalData,
    grid: Optional[Sequence[Sequence[float]]] = None,
    pair: Optional[RealizationPair] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
) -> Report:
    """Compare phi^!(L) with R_alpha(p^! i^!(L)) on a grid of U.

    phi = t o rho embeds U in M and alpha = -rho^* omega. The
    realization is built from frame unless one is passed in.
    """
    if data.i.target_dim != frame.dim:
        raise DimensionError("transversal does not end on M")
    if grid is None:
        grid = grid_points(data.box, NORMAL_GRID)
    grid = [list(q) for q in grid]
    base = [data.p.value(q) for q in grid]
    transversality_check(data.i, frame, base)
    if pair is None:
        pair = build_realization(frame)
    phi = ComposedMap(pair.t, data.rho)
    n = frame.dim
    logger.info(
        "checking the normal form of %s on %d points", frame, len(grid)
    )
    splitting, gaps = [], []
    for q, y in zip(grid, base):
        chart = data.rho.value(q)
        splitting.append(
            float(np.max(np.abs(chart[:n] - data.i.value(y)), initial=0.0))
        )
        jac = phi.jacobian(q)
        if row_basis(jac, rank_tol).shape[0] != n:
            raise RankDropError("t o rho is not a local embedding", q)
        embedded = pullback_pt(jac, frame.lagrangian(phi.value(q)))
        induced = pullback_pt(
            data.i.jacobian(y), frame.lagrangian(data.i.value(y))
        )
        model = pullback_pt(data.p.jacobian(q), induced)
        gauged = gauge(alpha_at(pair, data.rho, q).T, model)
        gaps.append(embedded.gap(gauged))
    return Report(
        checks=[
            Check.from_residuals(
                "splitting", splitting, grid, tol, "s o rho - i o p"
            ),
            Check.from_residuals(
                "normal_form",
                gaps,
                grid,
                tol,
                "phi^!(L) vs R_alpha(p^! i^!(L))",
            ),
        ]
    )
