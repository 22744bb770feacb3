"""Rational backend for the weak and dual conditions."""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Sequence, Union

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from ..common.errors import DimensionError
from .lindirac import evaluate_conditions

Rational = Union[int, Fraction]


def to_domain(rows: Sequence[Sequence[Rational]], cols: int) -> DomainMatrix:
    """Convert nested ints or fractions to a matrix over QQ."""
    entries = [
        [QQ(Fraction(x).numerator, Fraction(x).denominator) for x in row]
        for row in rows
    ]
    for row in entries:
        if len(row) != cols:
            raise DimensionError(f"row of length {len(row)}, expected {cols}")
    return DomainMatrix(entries, (len(entries), cols), QQ)


def _rows(matrix: DomainMatrix) -> int:
    return int(matrix.shape[0])


class ExactSubspace:
    """Subspace of Q^m given by a reduced row echelon basis."""

    def __init__(self, ambient_dim: int, basis: DomainMatrix) -> None:
        """Reduce basis (rows) to echelon form and drop zero rows."""
        self.ambient_dim = ambient_dim
        if _rows(basis) == 0 or ambient_dim == 0:
            self.basis = DomainMatrix.zeros((0, ambient_dim), QQ).to_dense()
            return
        reduced, pivots = basis.rref()
        self.basis = reduced[: len(pivots), :]

    @classmethod
    def span(
        cls, vectors: Sequence[Sequence[Rational]], ambient_dim: int
    ) -> ExactSubspace:
        """Span of rational vectors."""
        return cls(ambient_dim, to_domain(vectors, ambient_dim))

    @classmethod
    def zero(cls, ambient_dim: int) -> ExactSubspace:
        """The zero subspace."""
        return cls(ambient_dim, DomainMatrix.zeros((0, ambient_dim), QQ).to_dense())

    @property
    def dim(self) -> int:
        """Dimension."""
        return _rows(self.basis)

    def __repr__(self) -> str:
        """Short description."""
        return f"ExactSubspace(dim={self.dim}, ambient={self.ambient_dim})"

    def __add__(self, other: ExactSubspace) -> ExactSubspace:
        """Sum of subspaces."""
        if self.dim == 0:
            return other
        if other.dim == 0:
            return self
        return ExactSubspace(self.ambient_dim, self.basis.vstack(other.basis))

    def equals(self, other: ExactSubspace) -> bool:
        """Equality as mutual containment."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return self.dim == 0 or (self + other).dim == self.dim

    def intersect(self, other: ExactSubspace) -> ExactSubspace:
        """Intersection through the kernel of [B1^T, -B2^T]."""
        if self.dim == 0 or other.dim == 0:
            return ExactSubspace.zero(self.ambient_dim)
        stacked = self.basis.transpose().hstack(-other.basis.transpose())
        kernel = null_rows(stacked)
        if _rows(kernel) == 0:
            return ExactSubspace.zero(self.ambient_dim)
        coeffs = kernel[:, : self.dim]
        return ExactSubspace(self.ambient_dim, coeffs.matmul(self.basis))


def null_rows(matrix: DomainMatrix) -> DomainMatrix:
    """Row basis of the kernel of matrix."""
    rows, cols = matrix.shape
    if cols == 0:
        return DomainMatrix.zeros((0, 0), QQ).to_dense()
    if rows == 0:
        return DomainMatrix.eye(cols, QQ).to_dense()
    return matrix.nullspace()


class _ExactAlgebra:
    """Subspace arithmetic over QQ for the shared condition code."""

    def ambient(self, space: ExactSubspace) -> int:
        return space.ambient_dim

    def dim(self, space: ExactSubspace) -> int:
        return space.dim

    def add(self, a: ExactSubspace, b: ExactSubspace) -> ExactSubspace:
        return a + b

    def meet(self, a: ExactSubspace, b: ExactSubspace) -> ExactSubspace:
        return a.intersect(b)

    def equal(self, a: ExactSubspace, b: ExactSubspace) -> bool:
        return a.equals(b)

    def orthogonal(
        self, space: ExactSubspace, matrix: DomainMatrix
    ) -> ExactSubspace:
        m = space.ambient_dim
        if space.dim == 0:
            return ExactSubspace(m, DomainMatrix.eye(m, QQ).to_dense())
        return ExactSubspace(m, null_rows(space.basis.matmul(matrix)))

    def kernel(self, matrix: DomainMatrix) -> ExactSubspace:
        return ExactSubspace(matrix.shape[0], null_rows(matrix))

    def tangent(self, space: ExactSubspace) -> ExactSubspace:
        m = space.ambient_dim
        zeros = DomainMatrix.zeros((space.dim, m), QQ).to_dense()
        if space.dim == 0:
            return ExactSubspace(2 * m, zeros)
        return ExactSubspace(2 * m, space.basis.hstack(zeros))

    def graph(
        self, space: ExactSubspace, matrix: DomainMatrix
    ) -> ExactSubspace:
        m = space.ambient_dim
        if space.dim == 0:
            return ExactSubspace(2 * m, DomainMatrix.zeros((0, 2 * m), QQ).to_dense())
        lifted = space.basis.matmul(matrix.transpose())
        return ExactSubspace(2 * m, space.basis.hstack(lifted))

    def form_vanishes(
        self, a: ExactSubspace, b: ExactSubspace, matrix: DomainMatrix
    ) -> bool:
        if a.dim == 0 or b.dim == 0:
            return True
        values = b.basis.matmul(matrix).matmul(a.basis.transpose())
        return bool(values.is_zero_matrix)

    def negate(self, matrix: DomainMatrix) -> DomainMatrix:
        return -matrix


def _two_form(
    matrix: Sequence[Sequence[Rational]], dim: int
) -> DomainMatrix:
    form = to_domain(matrix, dim)
    if dim and not (form + form.transpose()).is_zero_matrix:
        raise ValueError("two-form matrix is not antisymmetric")
    return form


def exact_weak_conditions(
    space_b: ExactSubspace,
    space_c: ExactSubspace,
    matrix: Sequence[Sequence[Rational]],
) -> Dict[str, bool]:
    """Rational version of `lindirac.weak_conditions`."""
    form = _two_form(matrix, space_b.ambient_dim)
    algebra = _ExactAlgebra()
    return evaluate_conditions(algebra, space_b, space_c, form, False)


def exact_dual_conditions(
    space_b: ExactSubspace,
    space_c: ExactSubspace,
    matrix: Sequence[Sequence[Rational]],
) -> Dict[str, bool]:
    """Rational version of `lindirac.dual_conditions`."""
    form = _two_form(matrix, space_b.ambient_dim)
    algebra = _ExactAlgebra()
    return evaluate_conditions(algebra, space_b, space_c, form, True)


def exact_omega_orthogonal(
    space: ExactSubspace, matrix: Sequence[Sequence[Rational]]
) -> ExactSubspace:
    """Rational version of `lindirac.omega_orthogonal`."""
    form = _two_form(matrix, space.ambient_dim)
    return _ExactAlgebra().orthogonal(space, form)
