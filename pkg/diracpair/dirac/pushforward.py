"""The pushforward family L^s of a Dirac frame along a submersion."""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pandas import DataFrame
from pydantic import BaseModel

from ..calculus.fields import MapLike
from ..common.errors import DimensionError, RankDropError
from ..common.logger import logger
from ..common.sampling import box_center
from ..common.typing import NDArrayF64
from ..linalg.lindirac import (
    RANK_TOL,
    LagrangianSubspace,
    Subspace,
    kernel_of_map,
    perp,
    pullback_pt,
    pushforward_pt,
    tangent_part,
)
from ..pair.result import Check, Report
from .frame import DiracFrame, SubmersionSplitting

NEWTON_STEPS = 50
NEWTON_TOL = 1e-13
FAMILY_STEP = 1e-5


def _submersion_jacobian(
    fmap: MapLike, point: Sequence[float]
) -> NDArrayF64:
    jac = fmap.jacobian(point)
    scale = max(1.0, float(np.max(np.abs(jac), initial=0.0)))
    if np.linalg.matrix_rank(jac, tol=RANK_TOL * scale) < fmap.target_dim:
        raise RankDropError("ds is not surjective", point)
    return jac


def vertical(fmap: MapLike, point: Sequence[float]) -> Subspace:
    """V = ker ds at point, embedded as tangent vectors of TM + T*M."""
    jac = _submersion_jacobian(fmap, point)
    return tangent_part(fmap.source_dim, kernel_of_map(jac))


def family_Ls(  # pylint: disable=invalid-name
    frame: DiracFrame, fmap: MapLike, point: Sequence[float]
) -> LagrangianSubspace:
    """L^s_p = L_p cap V^perp + V with V = ker ds(p)."""
    if frame.dim != fmap.source_dim:
        raise DimensionError("frame and map live on different patches")
    space = frame.lagrangian(point)
    kernel = vertical(fmap, point)
    return LagrangianSubspace.from_subspace(
        space.intersect(perp(kernel)) + kernel
    )


def pushforward_family(
    frame: DiracFrame, fmap: MapLike, point: Sequence[float]
) -> LagrangianSubspace:
    """s_!(L_p) as a Lagrangian subspace of the target."""
    if frame.dim != fmap.source_dim:
        raise DimensionError("frame and map live on different patches")
    jac = _submersion_jacobian(fmap, point)
    return pushforward_pt(jac, frame.lagrangian(point))


class RankProfile(BaseModel):
    """Dimensions of L cap V, L cap V^perp and V^omega over a grid.

    V^omega is the tangent projection of L cap V^perp, which for
    L = Gr(omega) is the omega-orthogonal of V. A jump in the first two
    columns certifies that L^s is not a smooth bundle; constant columns
    on a grid prove nothing.
    """

    points: List[List[float]]
    dims: Dict[str, List[int]]

    @property
    def jumps(self) -> Dict[str, bool]:
        """Whether each dimension changes over the grid."""
        return {key: len(set(values)) > 1 for key, values in self.dims.items()}

    @property
    def smooth(self) -> bool:
        """No jump of L cap V, so no obstruction to L^s being smooth."""
        return not (self.jumps["L^V"] or self.jumps["L^Vperp"])

    def report(self) -> Report:
        """One check per dimension, failing at the first jump."""
        checks = []
        for key, values in self.dims.items():
            flags = [value == values[0] for value in values]
            checks.append(
                Check.from_flags(
                    f"constant dim {key}",
                    flags,
                    self.points,
                    detail="grid-level heuristic",
                )
            )
        return Report(checks=checks)

    def pd_frame(self) -> DataFrame:
        """One row per point."""
        data_frame = DataFrame(self.dims)
        data_frame.index = [
            ", ".join(f"{x:.4g}" for x in point) for point in self.points
        ]
        return data_frame


def rank_profile(
    frame: DiracFrame, fmap: MapLike, points: Sequence[Sequence[float]]
) -> RankProfile:
    """Record the dimensions that decide smoothness of L^s on points."""
    dims: Dict[str, List[int]] = {"L^V": [], "L^Vperp": [], "V^omega": []}
    n = frame.dim
    for point in points:
        space = frame.lagrangian(point)
        kernel = vertical(fmap, point)
        meet = space.intersect(perp(kernel))
        dims["L^V"].append(space.intersect(kernel).dim)
        dims["L^Vperp"].append(meet.dim)
        dims["V^omega"].append(
            Subspace(n, meet.basis[:, :n]).dim if meet.dim else 0
        )
    profile = RankProfile(points=[list(p) for p in points], dims=dims)
    if not profile.smooth:
        logger.info("rank of L cap V jumps on the grid")
    return profile


class FiberSection:
    """Local section of s through a reference point.

    The pivot coordinates of ds at the reference are solved for by
    Newton's method, the remaining coordinates stay at the reference
    values, so s(section(y)) = y near s(reference).
    """

    def __init__(self, fmap: MapLike, reference: Sequence[float]) -> None:
        """Fix the pivot columns at reference."""
        self.fmap = fmap
        self.reference = np.asarray(reference, dtype=np.float64)
        self.pivots = SubmersionSplitting(fmap, reference).pivots
        self.source_dim = fmap.target_dim
        self.target_dim = fmap.source_dim

    def value(self, target: Sequence[float]) -> NDArrayF64:
        """Point q over target."""
        goal = np.asarray(target, dtype=np.float64)
        point = self.reference.copy()
        for _ in range(NEWTON_STEPS):
            error = self.fmap.value(point) - goal
            if np.max(np.abs(error), initial=0.0) <= NEWTON_TOL * max(
                1.0, np.max(np.abs(goal), initial=0.0)
            ):
                return point
            block = self.fmap.jacobian(point)[:, self.pivots]
            point[self.pivots] -= np.linalg.solve(block, error)
        raise RankDropError("fiber section did not converge", list(target))

    def jacobian(self, target: Sequence[float]) -> NDArrayF64:
        """d(section) at target."""
        point = self.value(target)
        block = self.fmap.jacobian(point)[:, self.pivots]
        result = np.zeros((self.target_dim, self.source_dim))
        result[self.pivots, :] = np.linalg.inv(block)
        return result


LocalSection = Union[MapLike, FiberSection]


class BasicVerdict:
    """Outcome of the basic criterion V subset L.

    When the criterion holds, `target_at(y)` recovers L_M at y as
    sigma^!(L) for the local section sigma.
    """

    def __init__(
        self,
        report: Report,
        frame: DiracFrame,
        section: Optional[LocalSection],
    ) -> None:
        """Store the report and, on success, the section used."""
        self.report = report
        self.frame = frame
        self.section = section

    @property
    def passed(self) -> bool:
        """Whether V is contained in L on the grid."""
        return self.report.passed

    def target_at(self, target: Sequence[float]) -> LagrangianSubspace:
        """L_M at a target point."""
        if self.section is None:
            raise RankDropError("L is not basic", list(target))
        point = self.section.value(target)
        return pullback_pt(
            self.section.jacobian(target), self.frame.lagrangian(point)
        )


def basic_check(
    frame: DiracFrame,
    fmap: MapLike,
    points: Sequence[Sequence[float]],
    section: Optional[LocalSection] = None,
    tol: float = RANK_TOL,
) -> BasicVerdict:
    """Test V(p) subset L(p); on success recover L_M through a section.

    The default section is the fiber section through the box center.
    """
    residuals = []
    for point in points:
        space = frame.subspace(point)
        kernel = vertical(fmap, point)
        residuals.append(
            max((space.distance(v) for v in kernel.basis), default=0.0)
        )
    report = Report(
        checks=[Check.from_residuals("vertical_in_L", residuals, points, tol)]
    )
    if not report.passed:
        return BasicVerdict(report, frame, None)
    if section is None:
        section = FiberSection(fmap, box_center(frame.box))
    return BasicVerdict(report, frame, section)


def family_courant(
    frame: DiracFrame,
    fmap: MapLike,
    point: Sequence[float],
    step: float = FAMILY_STEP,
) -> float:
    """Largest entry of the Courant tensor of L^s at point.

    L^s carries no symbolic frame, so the frame used projects a basis of
    L^s at point onto L^s nearby and is differentiated by central
    differences. It is smooth only while the dimensions of the family
    stay constant around point.
    """
    n = frame.dim
    reference = family_Ls(frame, fmap, point).basis

    def sections(at: NDArrayF64) -> NDArrayF64:
        basis = family_Ls(frame, fmap, at).basis
        return np.asarray(reference @ basis.T @ basis)

    center = np.asarray(point, dtype=np.float64)
    values = sections(center)
    # grads[a, j, k] = d_k of component j of section a
    grads = np.zeros((n, 2 * n, n))
    for k in range(n):
        shift = np.zeros(n)
        shift[k] = step
        grads[:, :, k] = (
            sections(center + shift) - sections(center - shift)
        ) / (2.0 * step)
    tensor = np.zeros((n, n, n))
    for a in range(n):
        u, xi = values[a, :n], values[a, n:]
        du, dxi = grads[a, :n], grads[a, n:]
        for b in range(n):
            v, eta = values[b, :n], values[b, n:]
            dv, deta = grads[b, :n], grads[b, n:]
            tangent = dv @ u - du @ v
            cotangent = deta @ u + du.T @ eta - (dxi - dxi.T) @ v
            tensor[a, b] = values[:, n:] @ tangent + values[:, :n] @ cotangent
    tensor = (
        tensor
        - tensor.transpose(1, 0, 2)
        + tensor.transpose(1, 2, 0)
        - tensor.transpose(2, 1, 0)
        + tensor.transpose(2, 0, 1)
        - tensor.transpose(0, 2, 1)
    ) / 6.0
    return float(np.max(np.abs(tensor), initial=0.0))
