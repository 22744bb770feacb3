"""Pointwise linear algebra of T_x M + T*_x M.

Conventions:
    An element u + xi of the generalized tangent space at a point of an
    n-dimensional patch is stored as the vector (u, xi) of length 2n.
    A two-form at a point is an antisymmetric matrix W with
    iota_u omega = W u, so omega(u, v) = <W u, v>. For dx^dy this gives
    W = [[0, -1], [1, 0]].
    Subspaces keep an orthonormal row basis. Rank decisions use the
    relative cutoff RANK_TOL times the largest singular value.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from scipy import linalg

from ..common.errors import DimensionError
from ..common.typing import NDArrayF64

RANK_TOL = 1e-9
ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class SplitVector:
    """An element u + xi of the generalized tangent space at a point."""

    tangent: NDArrayF64
    cotangent: NDArrayF64

    def __post_init__(self) -> None:
        """Check matching dimensions."""
        if self.tangent.shape != self.cotangent.shape:
            raise DimensionError(
                f"tangent {self.tangent.shape} and cotangent "
                f"{self.cotangent.shape} differ"
            )

    @classmethod
    def of(
        cls, tangent: Sequence[float], cotangent: Sequence[float]
    ) -> SplitVector:
        """Build from plain sequences."""
        return cls(
            np.asarray(tangent, dtype=np.float64),
            np.asarray(cotangent, dtype=np.float64),
        )

    @classmethod
    def from_array(cls, vector: NDArrayF64) -> SplitVector:
        """Split a length-2n vector."""
        if vector.shape[0] % 2:
            raise DimensionError(f"odd length {vector.shape[0]}")
        n = vector.shape[0] // 2
        return cls(vector[:n].copy(), vector[n:].copy())

    @property
    def dim(self) -> int:
        """Dimension n of the underlying patch."""
        return int(self.tangent.shape[0])

    def as_array(self) -> NDArrayF64:
        """Concatenate to (u, xi)."""
        return np.concatenate([self.tangent, self.cotangent])


def pairing(a: SplitVector, b: SplitVector) -> float:
    """Return <u + xi, v + eta> = xi(v) + eta(u)."""
    if a.dim != b.dim:
        raise DimensionError(f"dimensions {a.dim} and {b.dim} differ")
    return float(a.cotangent @ b.tangent + b.cotangent @ a.tangent)


def pairing_matrix(n: int) -> NDArrayF64:
    """The Gram matrix [[0, I], [I, 0]] of the pairing."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [eye, zero]])


def _cutoff(singular: NDArrayF64, tol: float) -> float:
    top = float(singular[0]) if singular.size else 0.0
    return tol * (top if top > 0.0 else 1.0)


def row_basis(matrix: NDArrayF64, tol: float = RANK_TOL) -> NDArrayF64:
    """Orthonormal basis (rows) of the row space of matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if matrix.shape[0] == 0 or matrix.shape[1] == 0:
        return np.zeros((0, matrix.shape[1]))
    if not np.all(np.isfinite(matrix)):
        raise ValueError("basis vectors must be finite")
    _, singular, vt = linalg.svd(matrix, full_matrices=False)
    rank = int(np.sum(singular > _cutoff(singular, tol)))
    return np.asarray(vt[:rank], dtype=np.float64)


def null_space(matrix: NDArrayF64, tol: float = RANK_TOL) -> NDArrayF64:
    """Orthonormal basis (rows) of the kernel of matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    cols = matrix.shape[1]
    if cols == 0:
        return np.zeros((0, 0))
    if matrix.shape[0] == 0:
        return np.eye(cols)
    return np.asarray(linalg.null_space(matrix, rcond=tol).T, np.float64)


class Subspace:
    """A linear subspace of R^m kept as an orthonormal row basis."""

    def __init__(
        self, ambient_dim: int, basis: NDArrayF64, tol: float = RANK_TOL
    ) -> None:
        """Orthonormalize basis (rows) under the rank tolerance."""
        basis = np.asarray(basis, dtype=np.float64)
        if ambient_dim == 0 or basis.size == 0:
            basis = np.zeros((0, ambient_dim))
        else:
            basis = basis.reshape(-1, ambient_dim)
        self.ambient_dim = ambient_dim
        self.tol = tol
        self.basis = row_basis(basis, tol)

    @classmethod
    def span(
        cls,
        vectors: Sequence[Sequence[float]],
        ambient_dim: Optional[int] = None,
        tol: float = RANK_TOL,
    ) -> Subspace:
        """Span of a list of vectors."""
        array = np.asarray(vectors, dtype=np.float64)
        if ambient_dim is None:
            if array.ndim != 2:
                raise DimensionError("cannot infer the ambient dimension")
            ambient_dim = int(array.shape[1])
        if ambient_dim == 0 or array.size == 0:
            return cls.zero(ambient_dim)
        return cls(ambient_dim, array.reshape(-1, ambient_dim), tol)

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        """The zero subspace."""
        return cls(ambient_dim, np.zeros((0, ambient_dim)))

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        """The whole space."""
        return cls(ambient_dim, np.eye(ambient_dim))

    @property
    def dim(self) -> int:
        """Dimension of the subspace."""
        return int(self.basis.shape[0])

    def __repr__(self) -> str:
        """Short description."""
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"

    def _check(self, other: Subspace) -> None:
        if other.ambient_dim != self.ambient_dim:
            raise DimensionError(
                f"ambient dimensions {self.ambient_dim} and "
                f"{other.ambient_dim} differ"
            )

    def project(self, vector: NDArrayF64) -> NDArrayF64:
        """Orthogonal projection of vector onto the subspace."""
        return np.asarray(self.basis.T @ (self.basis @ vector))

    def distance(self, vector: NDArrayF64) -> float:
        """Euclidean distance of vector from the subspace."""
        return float(np.linalg.norm(vector - self.project(vector)))

    def contains(
        self, vector: NDArrayF64, tol: Optional[float] = None
    ) -> bool:
        """Membership relative to the vector length."""
        tol = self.tol if tol is None else tol
        scale = max(1.0, float(np.linalg.norm(vector)))
        return self.distance(vector) <= tol * scale

    def gap(self, other: Subspace) -> float:
        """Largest sine of a principal angle, or 1 if dimensions differ."""
        self._check(other)
        if self.dim != other.dim:
            return 1.0
        if self.dim == 0 or self.dim == self.ambient_dim:
            return 0.0
        angles = linalg.subspace_angles(self.basis.T, other.basis.T)
        return float(np.max(np.sin(angles)))

    def equals(self, other: Subspace, tol: Optional[float] = None) -> bool:
        """Basis-independent equality through principal angles."""
        tol = max(self.tol, ANGLE_TOL) if tol is None else tol
        return self.gap(other) < tol

    def includes(self, other: Subspace, tol: Optional[float] = None) -> bool:
        """Whether other is contained in self."""
        self._check(other)
        return all(self.contains(v, tol) for v in other.basis)

    def __add__(self, other: Subspace) -> Subspace:
        """Sum of subspaces."""
        self._check(other)
        return Subspace(
            self.ambient_dim, np.vstack([self.basis, other.basis]), self.tol
        )

    def intersect(self, other: Subspace) -> Subspace:
        """Intersection of subspaces."""
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        kernel = null_space(
            np.hstack([self.basis.T, -other.basis.T]), self.tol
        )
        return Subspace(
            self.ambient_dim, kernel[:, : self.dim] @ self.basis, self.tol
        )

    def image(self, matrix: NDArrayF64) -> Subspace:
        """Image under a linear map given as a matrix."""
        if matrix.shape[1] != self.ambient_dim:
            raise DimensionError("map and subspace do not match")
        return Subspace(matrix.shape[0], self.basis @ matrix.T, self.tol)


class LagrangianSubspace(Subspace):
    """A subspace of dimension n in 2n-dimensional generalized space."""

    def __init__(
        self, ambient_dim: int, basis: NDArrayF64, tol: float = RANK_TOL
    ) -> None:
        """Build and check the dimension count."""
        super().__init__(ambient_dim, basis, tol)
        if ambient_dim % 2 or 2 * self.dim != ambient_dim:
            raise DimensionError(
                f"a Lagrangian subspace of R^{ambient_dim} has dimension "
                f"{ambient_dim // 2}, got {self.dim}"
            )

    @property
    def n(self) -> int:
        """Dimension of the underlying patch."""
        return self.ambient_dim // 2

    @classmethod
    def from_subspace(cls, subspace: Subspace) -> LagrangianSubspace:
        """Promote a subspace, checking the dimension."""
        return cls(subspace.ambient_dim, subspace.basis, subspace.tol)

    @classmethod
    def graph(cls, matrix: NDArrayF64) -> LagrangianSubspace:
        """Gr(omega) = {u + W u}; for W = 0 this is the tangent space."""
        n = matrix.shape[0]
        return cls(2 * n, np.hstack([np.eye(n), matrix.T]))

    @classmethod
    def cograph(cls, matrix: NDArrayF64) -> LagrangianSubspace:
        """Gr(pi) = {P xi + xi} for a sharp map P."""
        n = matrix.shape[0]
        return cls(2 * n, np.hstack([matrix.T, np.eye(n)]))

    @classmethod
    def tangent(cls, n: int) -> LagrangianSubspace:
        """T_x M."""
        return cls.graph(np.zeros((n, n)))

    @classmethod
    def cotangent(cls, n: int) -> LagrangianSubspace:
        """T*_x M."""
        return cls.cograph(np.zeros((n, n)))


def tangent_part(n: int, subspace: Subspace) -> Subspace:
    """Embed a subspace of R^n as u + 0 in R^2n."""
    if subspace.ambient_dim != n:
        raise DimensionError("tangent subspace does not match n")
    return Subspace(
        2 * n, np.hstack([subspace.basis, np.zeros((subspace.dim, n))])
    )


def cotangent_part(n: int, subspace: Subspace) -> Subspace:
    """Embed a subspace of (R^n)* as 0 + xi in R^2n."""
    if subspace.ambient_dim != n:
        raise DimensionError("cotangent subspace does not match n")
    return Subspace(
        2 * n, np.hstack([np.zeros((subspace.dim, n)), subspace.basis])
    )


def _even(ambient_dim: int) -> int:
    if ambient_dim % 2:
        raise DimensionError(f"ambient dimension {ambient_dim} is odd")
    return ambient_dim // 2


def _check_antisymmetric(matrix: NDArrayF64, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 0.0)
    if matrix.shape[0] != matrix.shape[1] or not np.allclose(
        matrix, -matrix.T, atol=tol * scale, rtol=0.0
    ):
        raise ValueError("two-form matrix is not antisymmetric")


def perp(subspace: Subspace) -> Subspace:
    """Orthogonal complement with respect to the pairing."""
    n = _even(subspace.ambient_dim)
    if subspace.dim == 0:
        return Subspace.full(2 * n)
    return Subspace(
        2 * n,
        null_space(subspace.basis @ pairing_matrix(n), subspace.tol),
        subspace.tol,
    )


def is_lagrangian(subspace: Subspace, tol: Optional[float] = None) -> bool:
    """Maximal isotropic: dimension n and the pairing vanishes."""
    n = _even(subspace.ambient_dim)
    if subspace.dim != n:
        return False
    tol = subspace.tol if tol is None else tol
    gram = subspace.basis @ pairing_matrix(n) @ subspace.basis.T
    return bool(np.max(np.abs(gram), initial=0.0) <= max(tol, 1e-12) * 10)


def isotropy_residual(subspace: Subspace) -> float:
    """Largest pairing between orthonormal basis vectors."""
    n = _even(subspace.ambient_dim)
    gram = subspace.basis @ pairing_matrix(n) @ subspace.basis.T
    return float(np.max(np.abs(gram), initial=0.0))


def _map_rows(
    subspace: Subspace, func: Callable[[NDArrayF64, NDArrayF64], NDArrayF64]
) -> NDArrayF64:
    n = _even(subspace.ambient_dim)
    tangents = subspace.basis[:, :n]
    cotangents = subspace.basis[:, n:]
    return func(tangents, cotangents)


def rescale(factor: float, subspace: Subspace) -> Subspace:
    """Apply u + xi -> u + factor xi."""
    if factor == 0:
        raise ValueError("rescaling factor must be nonzero")
    rows = _map_rows(subspace, lambda u, xi: np.hstack([u, factor * xi]))
    return type(subspace)(subspace.ambient_dim, rows, subspace.tol)


def gauge(matrix: NDArrayF64, subspace: Subspace) -> Subspace:
    """Gauge transformation u + xi -> u + xi + iota_u omega."""
    n = _even(subspace.ambient_dim)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (n, n):
        raise DimensionError(f"two-form of shape {matrix.shape} on R^{n}")
    _check_antisymmetric(matrix, 1e-9)
    rows = _map_rows(
        subspace, lambda u, xi: np.hstack([u, xi + u @ matrix.T])
    )
    return type(subspace)(subspace.ambient_dim, rows, subspace.tol)


def pullback_pt(
    jacobian: NDArrayF64, target: Subspace
) -> LagrangianSubspace:
    """phi^!(L) = {(u, A^T xi) : (A u, xi) in L} for A: R^m -> R^n."""
    jacobian = np.atleast_2d(np.asarray(jacobian, dtype=np.float64))
    n, m = jacobian.shape
    if target.ambient_dim != 2 * n:
        raise DimensionError(
            f"map into R^{n} but structure on R^{target.ambient_dim // 2}"
        )
    k = target.dim
    tangents = target.basis[:, :n]
    cotangents = target.basis[:, n:]
    system = np.hstack([jacobian, -tangents.T]).reshape(n, m + k)
    kernel = null_space(system, target.tol)
    u = kernel[:, :m]
    coeffs = kernel[:, m:]
    rows = np.hstack([u, coeffs @ cotangents @ jacobian])
    return LagrangianSubspace(2 * m, rows, target.tol)


def pushforward_pt(
    jacobian: NDArrayF64, source: Subspace
) -> LagrangianSubspace:
    """phi_!(L) = {(A u, xi) : (u, A^T xi) in L} for A: R^m -> R^n."""
    jacobian = np.atleast_2d(np.asarray(jacobian, dtype=np.float64))
    n, m = jacobian.shape
    if source.ambient_dim != 2 * m:
        raise DimensionError(
            f"map from R^{m} but structure on R^{source.ambient_dim // 2}"
        )
    k = source.dim
    tangents = source.basis[:, :m]
    cotangents = source.basis[:, m:]
    system = np.hstack([cotangents.T, -jacobian.T]).reshape(m, k + n)
    kernel = null_space(system, source.tol)
    coeffs = kernel[:, :k]
    xi = kernel[:, k:]
    rows = np.hstack([coeffs @ tangents @ jacobian.T, xi])
    return LagrangianSubspace(2 * n, rows, source.tol)


def is_transverse(jacobian: NDArrayF64, target: Subspace) -> bool:
    """L cap ker(A^*) = 0, i.e. A is transverse to L at this point."""
    jacobian = np.atleast_2d(np.asarray(jacobian, dtype=np.float64))
    n = jacobian.shape[0]
    if target.ambient_dim != 2 * n:
        raise DimensionError("map and structure do not match")
    annihilator = null_space(jacobian.T, target.tol)
    rows = np.hstack([np.zeros(annihilator.shape), annihilator])
    killed = Subspace(2 * n, rows, target.tol)
    return target.intersect(killed).dim == 0


def omega_orthogonal(space: Subspace, matrix: NDArrayF64) -> Subspace:
    """E^omega = {u : omega(u, e) = 0 for all e in E}."""
    matrix = np.asarray(matrix, dtype=np.float64)
    m = space.ambient_dim
    if matrix.shape != (m, m):
        raise DimensionError("two-form does not match the subspace")
    if space.dim == 0:
        return Subspace.full(m)
    return Subspace(m, null_space(space.basis @ matrix, space.tol), space.tol)


def kernel_of_form(matrix: NDArrayF64, tol: float = RANK_TOL) -> Subspace:
    """K = ker omega."""
    matrix = np.asarray(matrix, dtype=np.float64)
    return Subspace(matrix.shape[0], null_space(matrix, tol), tol)


def kernel_of_map(jacobian: NDArrayF64, tol: float = RANK_TOL) -> Subspace:
    """ker A for A: R^m -> R^n."""
    jacobian = np.atleast_2d(np.asarray(jacobian, dtype=np.float64))
    return Subspace(jacobian.shape[1], null_space(jacobian, tol), tol)


def graph_over(
    space: Subspace, matrix: NDArrayF64, sign: float = 1.0
) -> Subspace:
    """R_{sign omega}(E) = {u + sign iota_u omega : u in E} in R^2m."""
    rows = np.hstack([space.basis, sign * space.basis @ matrix.T])
    return Subspace(2 * space.ambient_dim, rows, space.tol)


def form_on(
    space_a: Subspace, space_b: Subspace, matrix: NDArrayF64
) -> float:
    """Largest |omega(a, b)| over orthonormal bases."""
    if space_a.dim == 0 or space_b.dim == 0:
        return 0.0
    values = space_b.basis @ matrix @ space_a.basis.T
    return float(np.max(np.abs(values)))


def weak_conditions(
    space_b: Subspace, space_c: Subspace, matrix: NDArrayF64
) -> Dict[str, bool]:
    """Evaluate the five equivalent weak conditions (a)-(e).

    (a) B + R_w(B^w) = B + R_w(C)
    (b) C + R_-w(C^w) = C + R_-w(B)
    (c) B^w = C + B n K
    (d) C^w = B + C n K
    (e) w(B, C) = 0 and dim(B n K n C) = dim B + dim C - dim A
    """
    algebra = _FloatAlgebra(space_b.tol)
    return evaluate_conditions(algebra, space_b, space_c, matrix, False)


def dual_conditions(
    space_b: Subspace, space_c: Subspace, matrix: NDArrayF64
) -> Dict[str, bool]:
    """Evaluate the five equivalent dual conditions (a)-(e).

    Same as `weak_conditions` with direct sums, and (e) reads
    w(B, C) = 0, B n K n C = 0 and dim A = dim B + dim C.
    """
    algebra = _FloatAlgebra(space_b.tol)
    return evaluate_conditions(algebra, space_b, space_c, matrix, True)


class _FloatAlgebra:
    """Subspace arithmetic used by the shared condition code."""

    def __init__(self, tol: float) -> None:
        self.tol = tol

    def ambient(self, space: Subspace) -> int:
        return space.ambient_dim

    def dim(self, space: Subspace) -> int:
        return space.dim

    def add(self, a: Subspace, b: Subspace) -> Subspace:
        return a + b

    def meet(self, a: Subspace, b: Subspace) -> Subspace:
        return a.intersect(b)

    def equal(self, a: Subspace, b: Subspace) -> bool:
        return a.equals(b, max(self.tol * 1e3, ANGLE_TOL))

    def orthogonal(self, space: Subspace, matrix: NDArrayF64) -> Subspace:
        return omega_orthogonal(space, matrix)

    def kernel(self, matrix: NDArrayF64) -> Subspace:
        return kernel_of_form(matrix, self.tol)

    def tangent(self, space: Subspace) -> Subspace:
        return tangent_part(space.ambient_dim, space)

    def graph(self, space: Subspace, matrix: NDArrayF64) -> Subspace:
        return graph_over(space, matrix)

    def form_vanishes(
        self, a: Subspace, b: Subspace, matrix: NDArrayF64
    ) -> bool:
        scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
        return form_on(a, b, matrix) <= 1e3 * self.tol * scale

    def negate(self, matrix: NDArrayF64) -> NDArrayF64:
        return -np.asarray(matrix)


def evaluate_conditions(
    alg: Any, space_b: Any, space_c: Any, matrix: Any, direct: bool
) -> Dict[str, bool]:
    """Shared evaluation of the five conditions for any backend.

    `direct` turns every sum into a direct sum, as in the dual version.
    """
    dim_a = alg.ambient(space_b)
    kernel = alg.kernel(matrix)
    neg = alg.negate(matrix)
    b_orth = alg.orthogonal(space_b, matrix)
    c_orth = alg.orthogonal(space_c, matrix)
    b_k = alg.meet(space_b, kernel)
    c_k = alg.meet(space_c, kernel)
    b_k_c = alg.meet(b_k, space_c)

    def summed(left: Any, right: Any, equal_to: Any) -> bool:
        total = alg.add(left, right)
        if not alg.equal(total, equal_to):
            return False
        if direct:
            return alg.dim(total) == alg.dim(left) + alg.dim(right)
        return True

    b_t = alg.tangent(space_b)
    c_t = alg.tangent(space_c)
    cond_a = summed(
        b_t,
        alg.graph(space_c, matrix),
        alg.add(b_t, alg.graph(b_orth, matrix)),
    )
    cond_b = summed(
        c_t,
        alg.graph(space_b, neg),
        alg.add(c_t, alg.graph(c_orth, neg)),
    )
    cond_c = summed(space_c, b_k, b_orth)
    cond_d = summed(space_b, c_k, c_orth)
    vanishes = alg.form_vanishes(space_b, space_c, matrix)
    if direct:
        cond_e = (
            vanishes
            and alg.dim(b_k_c) == 0
            and dim_a == alg.dim(space_b) + alg.dim(space_c)
        )
    else:
        cond_e = vanishes and alg.dim(b_k_c) == (
            alg.dim(space_b) + alg.dim(space_c) - dim_a
        )
    return {"a": cond_a, "b": cond_b, "c": cond_c, "d": cond_d, "e": cond_e}
