"""Dirac structures as frames of n sections over a coordinate box."""
from __future__ import annotations

from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from ..calculus.fields import (
    BivectorField,
    Flat,
    FormLike,
    FunctionSection,
    MapLike,
    Section,
    VectorEvaluator,
    dorfman,
    dorfman_twisted,
    schouten_jacobiator,
)
from ..calculus.jet import jacobian, real_part
from ..common.errors import (
    DimensionError,
    RankDropError,
    TransversalityError,
)
from ..common.logger import logger
from ..common.parallel import pmap
from ..common.sampling import box_center
from ..common.tqdm import tqdm
from ..common.typing import Box, NDArrayF64, Point
from ..linalg.lindirac import (
    RANK_TOL,
    LagrangianSubspace,
    Subspace,
    is_transverse,
    isotropy_residual,
    pairing_matrix,
    pullback_pt,
)
from ..pair.result import Check, Report

DIRAC_TOL = 1e-8


class DiracFrame:
    """n sections e_1..e_n of the generalized tangent bundle over a box.

    The frame stands for the family L_p = span{e_i(p)}; constructors
    guarantee full rank on the box, and `is_dirac` checks that the family
    is Lagrangian and involutive on sample points.
    """

    def __init__(
        self, sections: Sequence[Section], box: Box, name: str = ""
    ) -> None:
        """Check that there are n sections on an n-dimensional box."""
        if not sections:
            if box:
                raise DimensionError("an empty frame lives on R^0")
        elif any(sec.dim != len(box) for sec in sections):
            raise DimensionError("sections and box have different dimension")
        if len(sections) != len(box):
            raise DimensionError(
                f"{len(sections)} sections for a frame on R^{len(box)}"
            )
        self.sections = list(sections)
        self.box = [(float(lo), float(hi)) for lo, hi in box]
        self.dim = len(box)
        self.name = name

    def __repr__(self) -> str:
        """Short description."""
        return f"DiracFrame({self.name or 'unnamed'}, dim={self.dim})"

    def evaluate(self, point: Point) -> List[Flat]:
        """Section values at a point of floats or jets."""
        return [sec.evaluate(point) for sec in self.sections]

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Matrix whose rows are the sections at point."""
        if not self.sections:
            return np.zeros((0, 0))
        return np.array([sec.at(point) for sec in self.sections])

    def subspace(self, point: Sequence[float]) -> Subspace:
        """span{e_i(point)}, whatever its rank."""
        return Subspace(2 * self.dim, self.at(point))

    def lagrangian(self, point: Sequence[float]) -> LagrangianSubspace:
        """L_point, raising when the frame loses rank."""
        space = self.subspace(point)
        if space.dim != self.dim:
            raise RankDropError(
                f"frame {self.name} has rank {space.dim} < {self.dim}", point
            )
        return LagrangianSubspace.from_subspace(space)

    def contains(self, point: Sequence[float]) -> bool:
        """Whether point lies in the box."""
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.box))


def _unit(dim: int, index: int) -> Flat:
    return [1.0 if i == index else 0.0 for i in range(dim)]


def graph_two_form(
    omega: FormLike, box: Box, name: str = "graph"
) -> DiracFrame:
    """Gr(omega) with e_i = d_i + iota_{d_i} omega."""
    if omega.degree != 2:
        raise DimensionError("Gr needs a two-form")
    n = omega.dim

    def make(i: int) -> FunctionSection:
        def value(point: Point) -> Flat:
            tensor = omega.evaluate(point)
            return _unit(n, i) + list(tensor[i * n : (i + 1) * n])

        return FunctionSection(n, value)

    return DiracFrame([make(i) for i in range(n)], box, name)


def graph_bivector(
    pi: BivectorField, box: Box, name: str = "graph"
) -> DiracFrame:
    """Gr(pi) with e_i = pi#(dx_i) + dx_i."""
    n = pi.dim

    def make(i: int) -> FunctionSection:
        def value(point: Point) -> Flat:
            tensor = pi.evaluate(point)
            return list(tensor[i * n : (i + 1) * n]) + _unit(n, i)

        return FunctionSection(n, value)

    return DiracFrame([make(i) for i in range(n)], box, name)


def gauge_frame(
    frame: DiracFrame, beta: FormLike, name: str = "gauge"
) -> DiracFrame:
    """R_beta applied to every section: u + xi -> u + xi + iota_u beta."""
    if beta.degree != 2 or beta.dim != frame.dim:
        raise DimensionError("gauge needs a two-form on the same patch")
    n = frame.dim

    def make(sec: Section) -> FunctionSection:
        def value(point: Point) -> Flat:
            values = sec.evaluate(point)
            tensor = beta.evaluate(point)
            shift = [
                sum(values[i] * tensor[i * n + j] for i in range(n))
                for j in range(n)
            ]
            return list(values[:n]) + [
                x + y for x, y in zip(values[n:], shift)
            ]

        return FunctionSection(n, value)

    return DiracFrame([make(sec) for sec in frame.sections], frame.box, name)


def solve_generic(
    matrix: Sequence[Sequence[Any]],
    rhs: Sequence[Sequence[Any]],
    point: Point,
    tol: float = RANK_TOL,
) -> List[List[Any]]:
    """Solve matrix X = rhs by Gauss-Jordan elimination on floats or jets.

    Row pivots are chosen by the magnitude of the plain values; a pivot
    below tol relative to the largest entry raises RankDropError.
    """
    k = len(matrix)
    aug = [list(matrix[r]) + list(rhs[r]) for r in range(k)]
    scale = max([abs(real_part(x)) for row in aug for x in row[:k]] + [1.0])
    for col in range(k):
        sizes = [abs(real_part(aug[r][col])) for r in range(col, k)]
        best = col + int(np.argmax(sizes))
        if abs(real_part(aug[best][col])) <= tol * scale:
            raise RankDropError(
                "linear system is singular", [real_part(x) for x in point]
            )
        aug[col], aug[best] = aug[best], aug[col]
        for r in range(k):
            if r == col:
                continue
            factor = aug[r][col] / aug[col][col]
            aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [[x / aug[r][r] for x in aug[r][k:]] for r in range(k)]


class SubmersionSplitting:
    """Kernel frame and right inverse of ds with pivots fixed at a point.

    The k pivot columns of ds are chosen by pivoted QR at the reference
    point; on the rest of the box the same pivots are used, and a pivot
    block that becomes singular raises RankDropError.
    """

    def __init__(
        self, fmap: MapLike, reference: Sequence[float], tol: float = RANK_TOL
    ) -> None:
        """Pick pivot columns of ds at reference."""
        self.fmap = fmap
        self.tol = tol
        m, k = fmap.source_dim, fmap.target_dim
        jac = fmap.jacobian(reference)
        if k > m:
            raise RankDropError(
                f"a map R^{m} -> R^{k} cannot be a submersion", reference
            )
        if k:
            _, r_factor, perm = linalg.qr(jac, pivoting=True)
            diag = np.abs(np.diag(r_factor))
            if diag.size < k or diag[k - 1] <= tol * max(diag[0], 1.0):
                raise RankDropError("ds is not surjective", reference)
            self.pivots = sorted(int(c) for c in perm[:k])
        else:
            self.pivots = []
        self.free = [c for c in range(m) if c not in self.pivots]

    def _rows(self, point: Point) -> List[List[Any]]:
        _, rows = jacobian(self.fmap.evaluate, list(point))
        return [list(row) for row in rows]

    def _solve(
        self, rows: List[List[Any]], rhs: List[List[Any]], point: Point
    ) -> List[List[Any]]:
        """Solve ds[:, pivots] X = rhs."""
        block = [[row[c] for c in self.pivots] for row in rows]
        try:
            return solve_generic(block, rhs, point, self.tol)
        except RankDropError as error:
            raise RankDropError("ds lost rank", error.point) from error

    def kernel_fields(self) -> List[VectorEvaluator]:
        """Vector fields spanning ker ds, one per free column."""
        m = self.fmap.source_dim

        def make(slot: int) -> VectorEvaluator:
            free_col = self.free[slot]

            def value(point: Point) -> Flat:
                rows = self._rows(point)
                rhs = [[row[free_col]] for row in rows]
                coeffs = self._solve(rows, rhs, point) if self.pivots else []
                vector: Flat = [0.0] * m
                vector[free_col] = 1.0
                for p_idx, col in enumerate(self.pivots):
                    vector[col] = -coeffs[p_idx][0]
                return vector

            return VectorEvaluator(m, value)

        return [make(slot) for slot in range(len(self.free))]

    def lift(self, point: Point, target_vector: Flat) -> Flat:
        """A u with ds(point) u = target_vector, zero on free columns."""
        m = self.fmap.source_dim
        vector: Flat = [0.0] * m
        if not self.pivots:
            return vector
        rows = self._rows(point)
        coeffs = self._solve(rows, [[y] for y in target_vector], point)
        for p_idx, col in enumerate(self.pivots):
            vector[col] = coeffs[p_idx][0]
        return vector

    def differential_rows(self, point: Point) -> List[List[Any]]:
        """ds at point as generic rows."""
        return self._rows(point)


def _cotangent_pullback(rows: List[List[Any]], xi: Flat, m: int) -> Flat:
    return [
        sum(xi[a] * rows[a][i] for a in range(len(rows))) for i in range(m)
    ]


def foliation_dirac(
    fmap: MapLike, box: Box, name: str = "foliation"
) -> DiracFrame:
    """ker ds + image of ds^T, the Dirac structure of the fibres of s."""
    if len(box) != fmap.source_dim:
        raise DimensionError("box does not match the source dimension")
    m, k = fmap.source_dim, fmap.target_dim
    split = SubmersionSplitting(fmap, box_center(box))
    sections: List[Section] = []
    for field in split.kernel_fields():
        sections.append(
            FunctionSection(
                m, lambda p, f=field: list(f.evaluate(p)) + [0.0] * m
            )
        )

    def make(a: int) -> FunctionSection:
        def value(point: Point) -> Flat:
            rows = split.differential_rows(point)
            return [0.0] * m + list(rows[a])

        return FunctionSection(m, value)

    sections.extend(make(a) for a in range(k))
    return DiracFrame(sections, box, name)


def pullback_dirac(
    fmap: MapLike, target: DiracFrame, box: Box, name: str = "pullback"
) -> DiracFrame:
    """s^!(L_M) = {u + s^* xi : s_* u + xi in L_M} for a submersion s.

    Each target section b is lifted to (u, ds^T xi) with u a right-inverse
    preimage of its tangent part; together with a frame of ker ds these
    are n independent sections.
    """
    if target.dim != fmap.target_dim or len(box) != fmap.source_dim:
        raise DimensionError("map, target frame and box do not match")
    m, k = fmap.source_dim, fmap.target_dim
    split = SubmersionSplitting(fmap, box_center(box))
    sections: List[Section] = []
    for field in split.kernel_fields():
        sections.append(
            FunctionSection(
                m, lambda p, f=field: list(f.evaluate(p)) + [0.0] * m
            )
        )

    def make(sec: Section) -> FunctionSection:
        def value(point: Point) -> Flat:
            image = fmap.evaluate(point)
            values = sec.evaluate(image)
            rows = split.differential_rows(point)
            tangent = split.lift(point, list(values[:k]))
            return list(tangent) + _cotangent_pullback(rows, values[k:], m)

        return FunctionSection(m, value)

    sections.extend(make(sec) for sec in target.sections)
    return DiracFrame(sections, box, name)


def transversality_check(
    fmap: MapLike, target: DiracFrame, points: Sequence[Sequence[float]]
) -> None:
    """Raise at the first point where fmap is not transverse to L."""
    if target.dim != fmap.target_dim:
        raise DimensionError("map and target frame do not match")
    for point in points:
        space = target.lagrangian(fmap.value(point))
        if not is_transverse(fmap.jacobian(point), space):
            raise TransversalityError(
                f"map is not transverse to {target.name}", point
            )


def restrict_frame(
    fmap: MapLike, target: DiracFrame, box: Box, name: str = "restriction"
) -> DiracFrame:
    """i^!(L) for a map transverse to L, computed point by point.

    Sections are orthonormal rows of the pointwise pullback, so the
    frame only evaluates on floats and has no brackets.
    """
    if target.dim != fmap.target_dim or len(box) != fmap.source_dim:
        raise DimensionError("map, target frame and box do not match")
    m = fmap.source_dim

    def rows(point: Point) -> NDArrayF64:
        floats = [float(x) for x in point]
        space = target.lagrangian(fmap.value(floats))
        return pullback_pt(fmap.jacobian(floats), space).basis

    def make(i: int) -> FunctionSection:
        return FunctionSection(m, lambda p: list(rows(p)[i]))

    frame = DiracFrame([make(i) for i in range(m)], box, name)
    setattr(frame, "numeric", True)
    return frame


def pairing_value(a: Sequence[float], b: Sequence[float]) -> float:
    """<a, b> for concatenated (u, xi) vectors."""
    n = len(a) // 2
    return float(np.dot(a[n:], b[:n]) + np.dot(b[n:], a[:n]))


def courant_tensor(
    frame: DiracFrame,
    point: Sequence[float],
    twist: Optional[FormLike] = None,
) -> NDArrayF64:
    """Antisymmetrized Y[i, j, k] = <[e_i, e_j], e_k> at point.

    With a twist phi the phi-twisted bracket is used.
    """
    n = frame.dim
    values = frame.at(point)
    tensor = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            if twist is None:
                bracket = dorfman(frame.sections[i], frame.sections[j])
            else:
                bracket = dorfman_twisted(
                    frame.sections[i], frame.sections[j], twist
                )
            bracket_value = bracket.at(point)
            for k in range(n):
                tensor[i, j, k] = pairing_value(bracket_value, values[k])
    return (
        tensor
        - tensor.transpose(1, 0, 2)
        + tensor.transpose(1, 2, 0)
        - tensor.transpose(2, 1, 0)
        + tensor.transpose(2, 0, 1)
        - tensor.transpose(0, 2, 1)
    ) / 6.0


def _dirac_residuals(
    frame: DiracFrame, point: Sequence[float], twist: Optional[FormLike]
) -> Tuple[int, float, float]:
    values = frame.at(point)
    space = Subspace(2 * frame.dim, values)
    iso = isotropy_residual(space) if frame.dim else 0.0
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    upsilon = courant_tensor(frame, point, twist) if frame.dim else None
    courant = (
        0.0
        if upsilon is None
        else float(np.max(np.abs(upsilon))) / scale**3
    )
    return space.dim, iso, courant


def is_dirac(
    frame: DiracFrame,
    points: Sequence[Sequence[float]],
    tol: float = DIRAC_TOL,
    twist: Optional[FormLike] = None,
    nprocs: int = 1,
) -> Report:
    """Check rank, isotropy and vanishing Courant tensor on points."""
    logger.info("checking %s on %d points", frame, len(points))
    results = pmap(
        lambda p: _dirac_residuals(frame, p, twist),
        tqdm(points) if nprocs <= 1 else points,
        nprocs,
    )
    return Report(
        checks=[
            Check.from_flags(
                "full_rank",
                [rank == frame.dim for rank, _, _ in results],
                points,
            ),
            Check.from_residuals(
                "lagrangian", [iso for _, iso, _ in results], points, tol
            ),
            Check.from_residuals(
                "involutive", [c for _, _, c in results], points, tol
            ),
        ]
    )


def is_poisson(
    pi: BivectorField,
    points: Sequence[Sequence[float]],
    tol: float = DIRAC_TOL,
) -> Report:
    """Check [pi, pi] = 0 on points."""
    residuals = [
        float(np.max(np.abs(schouten_jacobiator(pi, p)), initial=0.0))
        for p in points
    ]
    return Report(
        checks=[Check.from_residuals("jacobi", residuals, points, tol)]
    )


def pairing_gram(frame: DiracFrame, point: Sequence[float]) -> NDArrayF64:
    """Gram matrix of the pairing on the frame at point."""
    values = frame.at(point)
    return np.asarray(values @ pairing_matrix(frame.dim) @ values.T)
