"""Maps, two-forms and the diagram data of a candidate dual pair."""
from __future__ import annotations

from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..calculus.fields import (
    Flat,
    FormEvaluator,
    FormLike,
    MapLike,
    exterior_d,
    pullback_form,
)
from ..common.errors import DimensionError
from ..common.sampling import SAMPLE_COUNT, SAMPLE_SEED, sample_box
from ..common.typing import Box, NDArrayF64, Point
from ..dirac.frame import DiracFrame

FD_STEP = 1e-4

ArrayFn = Callable[[Sequence[float]], NDArrayF64]


def is_numeric(obj: object) -> bool:
    """Whether obj only evaluates on floats, so jets cannot go through."""
    return bool(getattr(obj, "numeric", False))


def _check_dim(dim: int, point: Sequence[float]) -> None:
    if len(point) != dim:
        raise DimensionError(f"point of length {len(point)} on R^{dim}")


class NumericMap(MapLike):
    """Map given by float callables for its value and Jacobian."""

    numeric = True

    def __init__(
        self,
        source_dim: int,
        target_dim: int,
        value_fn: ArrayFn,
        jacobian_fn: ArrayFn,
    ) -> None:
        """Wrap the callables."""
        self.source_dim = source_dim
        self.target_dim = target_dim
        self.value_fn = value_fn
        self.jacobian_fn = jacobian_fn

    def evaluate(self, point: Point) -> Flat:
        """Image components; point must hold floats."""
        return [float(v) for v in self.value(point)]

    def value(self, point: Sequence[float]) -> NDArrayF64:
        """Image as floats."""
        _check_dim(self.source_dim, point)
        return np.asarray(self.value_fn(point), np.float64).reshape(
            self.target_dim
        )

    def jacobian(self, point: Sequence[float]) -> NDArrayF64:
        """Jacobian matrix of shape (target_dim, source_dim)."""
        _check_dim(self.source_dim, point)
        return np.asarray(self.jacobian_fn(point), np.float64).reshape(
            self.target_dim, self.source_dim
        )


class ComposedMap(MapLike):
    """outer o inner, differentiated by the chain rule."""

    def __init__(self, outer: MapLike, inner: MapLike) -> None:
        """Check that the maps compose."""
        if outer.source_dim != inner.target_dim:
            raise DimensionError(
                f"cannot compose R^{outer.source_dim} <- R^{inner.target_dim}"
            )
        self.outer = outer
        self.inner = inner
        self.source_dim = inner.source_dim
        self.target_dim = outer.target_dim
        self.numeric = is_numeric(outer) or is_numeric(inner)

    def evaluate(self, point: Point) -> Flat:
        """Image components."""
        return self.outer.evaluate(self.inner.evaluate(point))

    def value(self, point: Sequence[float]) -> NDArrayF64:
        """Image as floats."""
        return self.outer.value(self.inner.value(point))

    def jacobian(self, point: Sequence[float]) -> NDArrayF64:
        """D(outer)(inner(p)) D(inner)(p)."""
        inner_jac = self.inner.jacobian(point)
        outer_jac = self.outer.jacobian(self.inner.value(point))
        return np.asarray(outer_jac @ inner_jac)


class SliceMap(MapLike):
    """Components start..stop of another map, e.g. a chart projection."""

    def __init__(self, fmap: MapLike, start: int, stop: int) -> None:
        """Check the range."""
        if not 0 <= start <= stop <= fmap.target_dim:
            raise DimensionError(
                f"components {start}:{stop} of a map into "
                f"R^{fmap.target_dim}"
            )
        self.fmap = fmap
        self.start = start
        self.stop = stop
        self.source_dim = fmap.source_dim
        self.target_dim = stop - start
        self.numeric = is_numeric(fmap)

    def evaluate(self, point: Point) -> Flat:
        """Image components."""
        return list(self.fmap.evaluate(point))[self.start : self.stop]

    def value(self, point: Sequence[float]) -> NDArrayF64:
        """Image as floats."""
        return np.asarray(self.fmap.value(point)[self.start : self.stop])

    def jacobian(self, point: Sequence[float]) -> NDArrayF64:
        """Rows start..stop of the Jacobian."""
        return np.asarray(self.fmap.jacobian(point)[self.start : self.stop])


class NumericForm(FormLike):
    """Two-form given by a callable returning T[i, j] = omega(d_i, d_j)."""

    numeric = True

    def __init__(self, dim: int, func: ArrayFn) -> None:
        """Wrap func."""
        self.dim = dim
        self.degree = 2
        self.func = func

    def evaluate(self, point: Point) -> Flat:
        """Flattened tensor; point must hold floats."""
        return [float(v) for v in self.at(point).ravel()]

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Component matrix at point."""
        _check_dim(self.dim, point)
        return np.asarray(self.func(point), np.float64).reshape(
            self.dim, self.dim
        )


def pull_back(fmap: MapLike, form: FormLike) -> FormLike:
    """F^* omega, symbolic when both inputs are."""
    if fmap.target_dim != form.dim:
        raise DimensionError(
            f"map into R^{fmap.target_dim}, form on R^{form.dim}"
        )
    if not (is_numeric(fmap) or is_numeric(form)):
        return pullback_form(fmap, form)
    if form.degree != 2:
        raise DimensionError("numeric pullback needs a two-form")

    def pulled(point: Sequence[float]) -> NDArrayF64:
        jac = fmap.jacobian(point)
        return np.asarray(jac.T @ form.at(fmap.value(point)) @ jac)

    return NumericForm(fmap.source_dim, pulled)


def pull_back_at(
    fmap: MapLike, form: FormLike, point: Sequence[float]
) -> NDArrayF64:
    """(F^* alpha)(point) as an (m,)*k tensor, for any degree k."""
    jac = fmap.jacobian(point)
    tensor = np.asarray(form.at(fmap.value(point)))
    for _ in range(form.degree):
        tensor = np.tensordot(tensor, jac, axes=([0], [0]))
    return np.asarray(tensor)


def form_sum(terms: Sequence[Tuple[float, FormLike]]) -> FormLike:
    """sum c_k omega_k of two-forms on one patch."""
    if not terms:
        raise ValueError("empty sum")
    dim = terms[0][1].dim
    if any(form.dim != dim or form.degree != 2 for _, form in terms):
        raise DimensionError("summands are not two-forms on one patch")
    if any(is_numeric(form) for _, form in terms):
        return NumericForm(
            dim,
            lambda p: sum(
                (coef * form.at(p) for coef, form in terms),
                np.zeros((dim, dim)),
            ),
        )

    def summed(point: Point) -> Flat:
        parts = [(coef, form.evaluate(point)) for coef, form in terms]
        return [
            sum(coef * values[i] for coef, values in parts)
            for i in range(dim * dim)
        ]

    return FormEvaluator(dim, 2, summed)


def _central(
    form: FormLike, point: Sequence[float], axis: int, step: float
) -> NDArrayF64:
    plus = np.array(point, dtype=np.float64)
    minus = plus.copy()
    plus[axis] += step
    minus[axis] -= step
    return np.asarray((form.at(plus) - form.at(minus)) / (2 * step))


def exterior_derivative_at(
    form: FormLike, point: Sequence[float], step: float = FD_STEP
) -> NDArrayF64:
    """d omega at point as an (n, n, n) tensor.

    Symbolic forms are differentiated exactly. Numeric ones use central
    differences with one Richardson extrapolation step.
    """
    if form.degree != 2:
        raise DimensionError("expected a two-form")
    if not is_numeric(form):
        return exterior_d(form).at(point)
    n = form.dim
    # grads[l, i, j] = d_l omega_ij
    grads = np.zeros((n, n, n))
    for axis in range(n):
        coarse = _central(form, point, axis, step)
        fine = _central(form, point, axis, step / 2)
        grads[axis] = (4 * fine - coarse) / 3
    return np.asarray(
        grads + grads.transpose(1, 2, 0) + grads.transpose(2, 0, 1)
    )


class PairData:
    """The diagram (M0, L0) <-s- (Sigma, Gr(omega)) -t-> (M1, -L1).

    L0 and L1 are frames on the targets and are evaluated at s(q) and
    t(q); the box of Sigma is where samples are drawn from.
    """

    def __init__(
        self,
        s: MapLike,
        t: MapLike,
        omega: FormLike,
        l0: DiracFrame,
        l1: DiracFrame,
        box: Box,
        name: str = "",
    ) -> None:
        """Check that the pieces fit together."""
        dim = len(box)
        if s.source_dim != dim or t.source_dim != dim:
            raise DimensionError("legs do not start on the box")
        if omega.degree != 2 or omega.dim != dim:
            raise DimensionError("omega is not a two-form on the box")
        if l0.dim != s.target_dim or l1.dim != t.target_dim:
            raise DimensionError("target frames do not match the legs")
        self.s = s
        self.t = t
        self.omega = omega
        self.l0 = l0
        self.l1 = l1
        self.box = [(float(lo), float(hi)) for lo, hi in box]
        self.name = name

    def __repr__(self) -> str:
        """Short description."""
        return (
            f"PairData({self.name or 'unnamed'}, dim {self.sigma_dim} -> "
            f"{self.m0} + {self.m1})"
        )

    @property
    def sigma_dim(self) -> int:
        """dim Sigma."""
        return len(self.box)

    @property
    def m0(self) -> int:
        """dim M0."""
        return self.s.target_dim

    @property
    def m1(self) -> int:
        """dim M1."""
        return self.t.target_dim

    def dims(self) -> Dict[str, int]:
        """Dimensions of the three manifolds."""
        return {"Sigma": self.sigma_dim, "M0": self.m0, "M1": self.m1}

    def samples(
        self, count: int = SAMPLE_COUNT, seed: int = SAMPLE_SEED
    ) -> List[List[float]]:
        """Seeded uniform samples of the box."""
        return sample_box(self.box, count, seed)

    def omega_at(self, point: Sequence[float]) -> NDArrayF64:
        """T[i, j] = omega(d_i, d_j) at point."""
        return np.asarray(self.omega.at(point))
