"""Coupling (Vorobjev) data (H, omega, pi) of a Dirac structure.

For a submersion s with vertical bundle V, a Dirac structure L with
V^perp-part transverse to V is described by a horizontal complement H,
a two-form omega vanishing on V, and a vertical bivector pi:

    L = {u + iota_u omega : u in H} + {xi + pi#xi : xi in ann H}.

L is involutive exactly when
    (a) [pi, pi] = 0,
    (b) L_u pi lies in H ^ TM for horizontal u,
    (c) [u1, u2] + pi# iota_u1 iota_u2 d omega is horizontal,
    (d) d omega(u1, u2, u3) = 0 on horizontal vectors.
"""
from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..calculus.fields import (
    BivectorField,
    Flat,
    FormLike,
    FunctionSection,
    MapLike,
    Section,
    VectorLike,
    exterior_d,
    lie_bracket,
    schouten_jacobiator,
)
from ..calculus.jet import jacobian, real_part
from ..common.errors import DimensionError
from ..common.logger import logger
from ..common.sampling import box_center
from ..common.typing import Box, NDArrayF64, Point
from ..linalg.lindirac import RANK_TOL, Subspace, kernel_of_map, null_space
from ..pair.result import Check, Report
from .frame import (
    DIRAC_TOL,
    DiracFrame,
    SubmersionSplitting,
    courant_tensor,
    solve_generic,
)

CONDITIONS = ("jacobi", "lie_pi", "curvature", "domega")


class CouplingTriple:
    """Horizontal frame, horizontal two-form and vertical bivector.

    The horizontal frame holds one vector field per target coordinate and
    must complement ker ds; `invariants` checks this together with
    iota_V omega = 0 and pi# landing in V.
    """

    def __init__(
        self,
        fmap: MapLike,
        horizontal: Sequence[VectorLike],
        omega: FormLike,
        pi: BivectorField,
        box: Box,
    ) -> None:
        """Check that all parts live on the source patch of fmap."""
        n = fmap.source_dim
        if len(horizontal) != fmap.target_dim:
            raise DimensionError(
                f"{len(horizontal)} horizontal fields for a map onto "
                f"R^{fmap.target_dim}"
            )
        if any(u.dim != n for u in horizontal):
            raise DimensionError("horizontal fields live on another patch")
        if omega.degree != 2 or omega.dim != n or pi.dim != n:
            raise DimensionError("omega and pi must live on the source")
        if len(box) != n:
            raise DimensionError("box does not match the source dimension")
        self.fmap = fmap
        self.horizontal = list(horizontal)
        self.omega = omega
        self.pi = pi
        self.box = box
        self.dim = n
        self.domega = exterior_d(omega)
        self.splitting = SubmersionSplitting(fmap, box_center(box))

    def horizontal_at(self, point: Sequence[float]) -> NDArrayF64:
        """Rows u_a(point)."""
        return np.array(
            [u.at(point) for u in self.horizontal], dtype=np.float64
        ).reshape(len(self.horizontal), self.dim)

    def annihilator(self, point: Sequence[float]) -> NDArrayF64:
        """Rows spanning ann H at point."""
        return null_space(self.horizontal_at(point))

    def invariants(
        self, points: Sequence[Sequence[float]], tol: float = RANK_TOL
    ) -> Report:
        """TM = H + V, iota_V omega = 0 and pi# T*M inside V."""
        splits, omega_res, pi_res = [], [], []
        n = self.dim
        for point in points:
            jac = self.fmap.jacobian(point)
            kernel = kernel_of_map(jac).basis
            both = np.vstack([self.horizontal_at(point), kernel])
            splits.append(Subspace(n, both).dim == n)
            omega_res.append(
                float(
                    np.max(
                        np.abs(kernel @ self.omega.at(point)), initial=0.0
                    )
                )
            )
            pi_res.append(
                float(
                    np.max(np.abs(jac @ self.pi.sharp(point)), initial=0.0)
                )
            )
        return Report(
            checks=[
                Check.from_flags("splitting", splits, points),
                Check.from_residuals(
                    "omega_horizontal", omega_res, points, tol
                ),
                Check.from_residuals("pi_vertical", pi_res, points, tol),
            ]
        )

    def frame(self) -> DiracFrame:
        """L = {u + iota_u omega} + {theta + pi# theta : theta in ann H}.

        The annihilator frame is dual to the kernel fields of ds along
        the splitting TM = H + V.
        """
        n = self.dim
        m = len(self.horizontal)
        vertical = self.splitting.kernel_fields()

        def dual_rows(point: Point) -> List[List[object]]:
            columns = [u.evaluate(point) for u in self.horizontal] + [
                w.evaluate(point) for w in vertical
            ]
            matrix = [[col[i] for col in columns] for i in range(n)]
            rhs = [[float(i == j) for j in range(n)] for i in range(n)]
            return solve_generic(matrix, rhs, point)

        def horizontal_section(u: VectorLike) -> FunctionSection:
            def value(point: Point) -> Flat:
                u_val = u.evaluate(point)
                tensor = self.omega.evaluate(point)
                return list(u_val) + [
                    sum(u_val[i] * tensor[i * n + j] for i in range(n))
                    for j in range(n)
                ]

            return FunctionSection(n, value)

        def vertical_section(slot: int) -> FunctionSection:
            def value(point: Point) -> Flat:
                theta = dual_rows(point)[m + slot]
                tensor = self.pi.evaluate(point)
                sharp = [
                    sum(tensor[i * n + j] * theta[i] for i in range(n))
                    for j in range(n)
                ]
                return sharp + list(theta)

            return FunctionSection(n, value)

        sections: List[Section] = [
            horizontal_section(u) for u in self.horizontal
        ]
        sections.extend(vertical_section(b) for b in range(n - m))
        return DiracFrame(sections, self.box, "coupling")


def _lie_derivative_pi(
    u: VectorLike, pi: BivectorField, point: Sequence[float]
) -> NDArrayF64:
    """(L_u pi)^{ij} = u^l d_l pi^{ij} - pi^{lj} d_l u^i - pi^{il} d_l u^j."""
    n = pi.dim
    u_val, u_rows = jacobian(u.evaluate, list(point))
    pi_val, pi_rows = jacobian(pi.evaluate, list(point))
    u_vec = np.array([real_part(x) for x in u_val])
    du = np.array([[real_part(d) for d in row] for row in u_rows])
    tensor = np.array([real_part(x) for x in pi_val]).reshape(n, n)
    dpi = np.array(
        [[real_part(d) for d in row] for row in pi_rows]
    ).reshape(n, n, n)
    return np.asarray(
        np.einsum("l,ijl->ij", u_vec, dpi)
        - np.einsum("lj,il->ij", tensor, du)
        - np.einsum("il,jl->ij", tensor, du)
    )


def condition_residuals(
    triple: CouplingTriple, point: Sequence[float]
) -> Tuple[float, float, float, float]:
    """Residuals of conditions (a) to (d) at point."""
    jacobi = float(
        np.max(np.abs(schouten_jacobiator(triple.pi, point)), initial=0.0)
    )
    ann = triple.annihilator(point)
    fields = triple.horizontal
    lie_pi = 0.0
    for u in fields:
        derived = _lie_derivative_pi(u, triple.pi, point)
        lie_pi = max(
            lie_pi, float(np.max(np.abs(ann @ derived @ ann.T), initial=0.0))
        )
    sharp = triple.pi.sharp(point)
    dtensor = triple.domega.at(point)
    frame = triple.horizontal_at(point)
    curvature = 0.0
    m = len(fields)
    for a in range(m):
        for b in range(a + 1, m):
            bracket = lie_bracket(fields[a], fields[b]).at(point)
            # iota_u1 iota_u2 d omega = d omega(u2, u1, .)
            twist = np.einsum("i,j,ijk->k", frame[b], frame[a], dtensor)
            residual = ann @ (bracket + sharp @ twist)
            curvature = max(
                curvature, float(np.max(np.abs(residual), initial=0.0))
            )
    on_horizontal = np.einsum(
        "ai,bj,ck,ijk->abc", frame, frame, frame, dtensor
    )
    domega = float(np.max(np.abs(on_horizontal), initial=0.0))
    return jacobi, lie_pi, curvature, domega


def coupling_verify(
    triple: CouplingTriple,
    points: Sequence[Sequence[float]],
    tol: float = DIRAC_TOL,
) -> Report:
    """Evaluate conditions (a) to (d) against the assembled frame.

    Besides the invariants and one check per condition, the report holds
    the Courant residual of the assembled frame and whether both verdicts
    agree at every point.
    """
    frame = triple.frame()
    residuals: Dict[str, List[float]] = {name: [] for name in CONDITIONS}
    courant = []
    agree = []
    for point in points:
        values = condition_residuals(triple, point)
        for name, value in zip(CONDITIONS, values):
            residuals[name].append(value)
        upsilon = float(
            np.max(np.abs(courant_tensor(frame, point)), initial=0.0)
        )
        courant.append(upsilon)
        agree.append((max(values) <= tol) == (upsilon <= tol))
    if not all(agree):
        logger.warning("coupling conditions and Courant tensor disagree")
    checks = triple.invariants(points).checks
    checks.extend(
        Check.from_residuals(name, residuals[name], points, tol)
        for name in CONDITIONS
    )
    checks.append(
        Check.from_residuals("assembled_dirac", courant, points, tol)
    )
    checks.append(Check.from_flags("agreement", agree, points))
    return Report(checks=checks)
