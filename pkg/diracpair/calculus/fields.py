"""Vector fields, forms, bivectors and sections on a coordinate patch.

Every field exposes ``evaluate(point)``, which works on points of floats
or of jets, so brackets of brackets can be differentiated again. Forms
of degree k evaluate to their full antisymmetric component tensor
``T[i1, ..., ik] = alpha(d_i1, ..., d_ik)`` flattened in row-major order;
``at(point)`` returns the same tensor as a float array of shape (n,)*k.

Sign conventions: dx^dy(d_x, d_y) = +1, the interior product inserts
into the first slot, and a bivector pi has sharp map
pi#(xi) = pi(xi, .), so (pi# dx_i)^j = pi^{ij}.
"""
from __future__ import annotations

import itertools
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from ..common.errors import DimensionError
from ..common.typing import NDArrayF64, Point
from .expr import Expr, Var, parse_expr
from .jet import jacobian, real_part

Index = Tuple[int, ...]
Flat = List[Any]  # type: ignore[misc]


def _to_float(values: Sequence[Any]) -> NDArrayF64:
    return np.array([real_part(v) for v in values], dtype=np.float64)


def _check_point(dim: int, point: Point) -> None:
    if len(point) != dim:
        raise DimensionError(f"point of length {len(point)} on R^{dim}")


def _flat_index(index: Index, dim: int) -> int:
    flat = 0
    for i in index:
        flat = flat * dim + i
    return flat


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i, p_i in enumerate(perm):
        for p_j in perm[i + 1 :]:
            if p_i > p_j:
                sign = -sign
    return sign


def _parse_key(key: Union[str, Sequence[int]], degree: int) -> Index:
    """Read "1,2" style 1-based keys; tuples are taken as 0-based."""
    if isinstance(key, str):
        index = tuple(int(part) - 1 for part in key.split(","))
    else:
        index = tuple(int(part) for part in key)
    if len(index) != degree:
        raise DimensionError(f"key {key} is not of degree {degree}")
    return index


def parse_components(
    dim: int, degree: int, texts: Mapping[str, str]
) -> Dict[Index, Expr]:
    """Parse {"1,2": "x3", ...} with 1-based increasing keys."""
    return {
        _parse_key(key, degree): parse_expr(text, dim)
        for key, text in texts.items()
    }


class VectorLike:
    """Anything that evaluates to tangent components."""

    dim: int

    def evaluate(self, point: Point) -> Flat:
        """Components at a point of floats or jets."""
        raise NotImplementedError

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Float components."""
        _check_point(self.dim, point)
        return _to_float(self.evaluate(point))


class VectorField(VectorLike):
    """Vector field sum u^i d_i with expression coefficients."""

    def __init__(self, components: Sequence[Expr]) -> None:
        """Store the n components."""
        self.dim = len(components)
        self.components = tuple(components)
        for comp in self.components:
            if comp.variables() and max(comp.variables()) >= self.dim:
                raise DimensionError(
                    f"component {comp} uses variables beyond x{self.dim}"
                )

    @classmethod
    def parse(cls, texts: Sequence[str]) -> VectorField:
        """Parse one expression per component."""
        return cls([parse_expr(text, len(texts)) for text in texts])

    def evaluate(self, point: Point) -> Flat:
        """Evaluate each component."""
        return [comp.evaluate(point) for comp in self.components]


class VectorEvaluator(VectorLike):
    """Vector field given by a function of the point."""

    def __init__(self, dim: int, func: Callable[[Point], Flat]) -> None:
        """Wrap func, which returns n components."""
        self.dim = dim
        self.func = func

    def evaluate(self, point: Point) -> Flat:
        """Call the wrapped function."""
        return self.func(point)


class FormLike:
    """Anything that evaluates to a flattened k-form tensor."""

    dim: int
    degree: int

    def evaluate(self, point: Point) -> Flat:
        """Flattened component tensor at a point of floats or jets."""
        raise NotImplementedError

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Component tensor of shape (n,)*k as floats."""
        _check_point(self.dim, point)
        values = _to_float(self.evaluate(point))
        return values.reshape((self.dim,) * self.degree)


class FormField(FormLike):
    """A k-form sum over i1 < ... < ik of c dx_i1^...^dx_ik."""

    def __init__(
        self, dim: int, degree: int, components: Mapping[Index, Expr]
    ) -> None:
        """Store strictly increasing components; others must be absent."""
        if degree < 0 or degree > 3:
            raise DimensionError(f"forms of degree {degree} are unsupported")
        self.dim = dim
        self.degree = degree
        self.components: Dict[Index, Expr] = {}
        for index, comp in components.items():
            if len(index) != degree or any(
                a >= b for a, b in zip(index, index[1:])
            ):
                raise DimensionError(f"index {index} is not increasing")
            if any(i < 0 or i >= dim for i in index):
                raise DimensionError(f"index {index} outside R^{dim}")
            if comp.variables() and max(comp.variables()) >= dim:
                raise DimensionError(
                    f"component {comp} uses variables beyond x{dim}"
                )
            if not comp.is_zero():
                self.components[index] = comp

    def evaluate(self, point: Point) -> Flat:
        """Expand to the full antisymmetric tensor."""
        tensor: Flat = [0.0] * (self.dim**self.degree)
        for index, comp in self.components.items():
            value = comp.evaluate(point)
            for perm in itertools.permutations(range(self.degree)):
                permuted = tuple(index[p] for p in perm)
                sign = _permutation_sign(perm)
                tensor[_flat_index(permuted, self.dim)] = (
                    value if sign > 0 else -value
                )
        return tensor


class OneFormField(FormField):
    """One-form sum xi_i dx_i."""

    def __init__(self, components: Sequence[Expr]) -> None:
        """Store the n coefficients."""
        super().__init__(
            len(components),
            1,
            {(i,): comp for i, comp in enumerate(components)},
        )

    @classmethod
    def parse_list(cls, texts: Sequence[str]) -> OneFormField:
        """Parse one expression per coefficient."""
        return cls([parse_expr(text, len(texts)) for text in texts])


class TwoFormField(FormField):
    """Two-form sum over i < j of c dx_i^dx_j."""

    def __init__(self, dim: int, components: Mapping[Index, Expr]) -> None:
        """Store components keyed by increasing (i, j)."""
        super().__init__(dim, 2, components)

    @classmethod
    def from_texts(cls, dim: int, texts: Mapping[str, str]) -> TwoFormField:
        """Parse {"1,2": "x1", ...}."""
        return cls(dim, parse_components(dim, 2, texts))


class ThreeFormField(FormField):
    """Three-form sum over i < j < k of c dx_i^dx_j^dx_k."""

    def __init__(self, dim: int, components: Mapping[Index, Expr]) -> None:
        """Store components keyed by increasing (i, j, k)."""
        super().__init__(dim, 3, components)

    @classmethod
    def from_texts(
        cls, dim: int, texts: Mapping[str, str]
    ) -> ThreeFormField:
        """Parse {"1,2,3": "1", ...}."""
        return cls(dim, parse_components(dim, 3, texts))


class FormEvaluator(FormLike):
    """A k-form given by a function returning the flattened tensor."""

    def __init__(
        self, dim: int, degree: int, func: Callable[[Point], Flat]
    ) -> None:
        """Wrap func."""
        self.dim = dim
        self.degree = degree
        self.func = func

    def evaluate(self, point: Point) -> Flat:
        """Call the wrapped function."""
        return self.func(point)


class BivectorField:
    """Bivector sum over i < j of c d_i^d_j."""

    def __init__(self, dim: int, components: Mapping[Index, Expr]) -> None:
        """Store components keyed by increasing (i, j)."""
        self.form = FormField(dim, 2, components)
        self.dim = dim
        self.components = self.form.components

    @classmethod
    def from_texts(
        cls, dim: int, texts: Mapping[str, str]
    ) -> BivectorField:
        """Parse {"1,2": "x3", ...}."""
        return cls(dim, parse_components(dim, 2, texts))

    def evaluate(self, point: Point) -> Flat:
        """Flattened pi^{ij} = pi(dx_i, dx_j)."""
        return self.form.evaluate(point)

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Matrix pi^{ij} as floats."""
        return self.form.at(point)

    def sharp(self, point: Sequence[float]) -> NDArrayF64:
        """Matrix P with pi#(xi) = P xi."""
        return self.at(point).T


class Section:
    """Anything that evaluates to a split vector (u, xi)."""

    dim: int

    def evaluate(self, point: Point) -> Flat:
        """Concatenated tangent and cotangent components."""
        raise NotImplementedError

    def at(self, point: Sequence[float]) -> NDArrayF64:
        """Float vector of length 2n."""
        _check_point(self.dim, point)
        return _to_float(self.evaluate(point))


class SectionField(Section):
    """Section u + xi from a vector field and a one-form."""

    def __init__(
        self, vector: Optional[VectorLike], form: Optional[FormLike]
    ) -> None:
        """Either part may be omitted and is then zero."""
        if vector is None and form is None:
            raise DimensionError("a section needs a tangent or a form part")
        dims = {part.dim for part in (vector, form) if part is not None}
        if len(dims) != 1:
            raise DimensionError(f"parts live on different patches {dims}")
        if form is not None and form.degree != 1:
            raise DimensionError("the cotangent part must be a one-form")
        self.dim = dims.pop()
        self.vector = vector
        self.form = form

    def evaluate(self, point: Point) -> Flat:
        """Evaluate both parts."""
        zeros: Flat = [0.0] * self.dim
        tangent = zeros if self.vector is None else self.vector.evaluate(point)
        cotangent = zeros if self.form is None else self.form.evaluate(point)
        return list(tangent) + list(cotangent)


class FunctionSection(Section):
    """Section given by a function returning (u, xi) concatenated."""

    def __init__(self, dim: int, func: Callable[[Point], Flat]) -> None:
        """Wrap func."""
        self.dim = dim
        self.func = func

    def evaluate(self, point: Point) -> Flat:
        """Call the wrapped function."""
        return self.func(point)


class MapLike:
    """Smooth map between coordinate patches."""

    source_dim: int
    target_dim: int

    def evaluate(self, point: Point) -> Flat:
        """Image components at a point of floats or jets."""
        raise NotImplementedError

    def value(self, point: Sequence[float]) -> NDArrayF64:
        """Image as floats."""
        _check_point(self.source_dim, point)
        return _to_float(self.evaluate(point))

    def jacobian(self, point: Sequence[float]) -> NDArrayF64:
        """Jacobian matrix of shape (target_dim, source_dim)."""
        _check_point(self.source_dim, point)
        _, rows = jacobian(self.evaluate, list(point))
        return np.array(
            [[real_part(d) for d in row] for row in rows], dtype=np.float64
        ).reshape(self.target_dim, self.source_dim)

    def coordinate_indices(self) -> Optional[Tuple[int, ...]]:
        """Source indices if the map is a coordinate projection."""
        return None


class MapField(MapLike):
    """Map R^m -> R^n with expression components."""

    def __init__(self, source_dim: int, components: Sequence[Expr]) -> None:
        """Store n components in the variables x1..xm."""
        self.source_dim = source_dim
        self.target_dim = len(components)
        self.components = tuple(components)
        for comp in self.components:
            if comp.variables() and max(comp.variables()) >= source_dim:
                raise DimensionError(
                    f"component {comp} uses variables beyond x{source_dim}"
                )

    @classmethod
    def parse(cls, source_dim: int, texts: Sequence[str]) -> MapField:
        """Parse one expression per target coordinate."""
        return cls(source_dim, [parse_expr(t, source_dim) for t in texts])

    @classmethod
    def identity(cls, dim: int) -> MapField:
        """Identity map."""
        return cls(dim, [Var(i) for i in range(dim)])

    def evaluate(self, point: Point) -> Flat:
        """Evaluate every component."""
        return [comp.evaluate(point) for comp in self.components]

    def coordinate_indices(self) -> Optional[Tuple[int, ...]]:
        """Source indices if every component is a bare distinct variable."""
        indices = []
        for comp in self.components:
            if not isinstance(comp, Var):
                return None
            indices.append(comp.index)
        if len(set(indices)) != len(indices):
            return None
        return tuple(indices)


def _derivatives(
    func: Callable[[Point], Flat], point: Point
) -> Tuple[Flat, List[Flat]]:
    """Values and rows[a][i] = d_i value_a, keeping outer jet levels."""
    values, rows = jacobian(func, list(point))
    return values, [list(row) for row in rows]


def lie_bracket(u: VectorLike, v: VectorLike) -> VectorEvaluator:
    """[u, v]^a = u^i d_i v^a - v^i d_i u^a."""
    if u.dim != v.dim:
        raise DimensionError(f"dimensions {u.dim} and {v.dim} differ")
    n = u.dim

    def bracket(point: Point) -> Flat:
        u_val, du = _derivatives(u.evaluate, point)
        v_val, dv = _derivatives(v.evaluate, point)
        return [
            sum(u_val[i] * dv[a][i] - v_val[i] * du[a][i] for i in range(n))
            for a in range(n)
        ]

    return VectorEvaluator(n, bracket)


def differential(function: Expr, dim: int) -> FormEvaluator:
    """df as a one-form."""

    def grad(point: Point) -> Flat:
        _, rows = _derivatives(lambda p: [function.evaluate(p)], point)
        return rows[0]

    return FormEvaluator(dim, 1, grad)


def exterior_d(form: FormLike) -> FormEvaluator:
    """(d alpha)_{i0..ik} = sum_m (-1)^m d_{i_m} alpha_{i0..^i_m..ik}."""
    if form.degree > 2:
        raise DimensionError("exterior derivative of degree > 2 forms")
    n, k = form.dim, form.degree

    def derivative(point: Point) -> Flat:
        _, rows = _derivatives(form.evaluate, point)
        out: Flat = [0.0] * (n ** (k + 1))
        for index in itertools.product(range(n), repeat=k + 1):
            total: Any = 0.0
            for m, i_m in enumerate(index):
                rest = index[:m] + index[m + 1 :]
                term = rows[_flat_index(rest, n)][i_m]
                total = total + term if m % 2 == 0 else total - term
            out[_flat_index(index, n)] = total
        return out

    return FormEvaluator(n, k + 1, derivative)


def interior(u: VectorLike, form: FormLike) -> FormEvaluator:
    """iota_u alpha, inserting u into the first slot."""
    if form.degree == 0:
        raise DimensionError("cannot contract a function")
    if u.dim != form.dim:
        raise DimensionError(f"dimensions {u.dim} and {form.dim} differ")
    n, k = form.dim, form.degree
    size = n ** (k - 1)

    def contract(point: Point) -> Flat:
        u_val = u.evaluate(point)
        tensor = form.evaluate(point)
        return [
            sum(u_val[i] * tensor[i * size + rest] for i in range(n))
            for rest in range(size)
        ]

    return FormEvaluator(n, k - 1, contract)


def _split(values: Flat, n: int) -> Tuple[Flat, Flat]:
    return values[:n], values[n:]


def dorfman(a: Section, b: Section) -> FunctionSection:
    """[u + xi, v + eta] = [u, v] + L_u eta - iota_v d xi."""
    if a.dim != b.dim:
        raise DimensionError(f"dimensions {a.dim} and {b.dim} differ")
    n = a.dim

    def bracket(point: Point) -> Flat:
        a_val, da = _derivatives(a.evaluate, point)
        b_val, db = _derivatives(b.evaluate, point)
        u, xi = _split(a_val, n)
        v, eta = _split(b_val, n)
        tangent = [
            sum(u[i] * db[c][i] - v[i] * da[c][i] for i in range(n))
            for c in range(n)
        ]
        # rows n.. of da, db hold the one-form partials
        cotangent = [
            sum(
                u[i] * db[n + j][i]
                + eta[i] * da[i][j]
                - v[i] * (da[n + j][i] - da[n + i][j])
                for i in range(n)
            )
            for j in range(n)
        ]
        return tangent + cotangent

    return FunctionSection(n, bracket)


def dorfman_twisted(
    a: Section, b: Section, phi: FormLike
) -> FunctionSection:
    """[a, b] + iota_u iota_v phi, where iota_u iota_v phi = phi(v, u, .)."""
    if phi.degree != 3 or phi.dim != a.dim:
        raise DimensionError("twist must be a three-form on the same patch")
    n = a.dim
    plain = dorfman(a, b)

    def bracket(point: Point) -> Flat:
        values = plain.evaluate(point)
        u = a.evaluate(point)[:n]
        v = b.evaluate(point)[:n]
        tensor = phi.evaluate(point)
        twist = [
            sum(
                v[i] * u[j] * tensor[_flat_index((i, j, k), n)]
                for i in range(n)
                for j in range(n)
            )
            for k in range(n)
        ]
        return values[:n] + [x + y for x, y in zip(values[n:], twist)]

    return FunctionSection(n, bracket)


def pullback_form(fmap: MapLike, form: FormLike) -> FormEvaluator:
    """(F^* alpha)_{i..} = alpha_{a..}(F(p)) DF[a][i] ..."""
    if fmap.target_dim != form.dim:
        raise DimensionError(
            f"map into R^{fmap.target_dim}, form on R^{form.dim}"
        )
    m, n, k = fmap.source_dim, fmap.target_dim, form.degree

    def pulled(point: Point) -> Flat:
        image, rows = _derivatives(fmap.evaluate, point)
        tensor = form.evaluate(image)
        out: Flat = [0.0] * (m**k)
        for index in itertools.product(range(m), repeat=k):
            total: Any = 0.0
            for target in itertools.product(range(n), repeat=k):
                coeff = tensor[_flat_index(target, n)]
                if isinstance(coeff, float) and coeff == 0.0:
                    continue
                term = coeff
                for a, i in zip(target, index):
                    term = term * rows[a][i]
                total = total + term
            out[_flat_index(index, m)] = total
        return out

    return FormEvaluator(m, k, pulled)


def phi_related(
    fmap: MapLike,
    source: Section,
    target: Section,
    point: Sequence[float],
    tol: float = 1e-8,
) -> Tuple[bool, float]:
    """Check F_* u0 = u1(F(p)) and xi0 = F^* xi1 at p; return the residual."""
    if source.dim != fmap.source_dim or target.dim != fmap.target_dim:
        raise DimensionError("sections do not match the map")
    m = fmap.source_dim
    n = fmap.target_dim
    jac = fmap.jacobian(point)
    a0 = source.at(point)
    a1 = target.at(fmap.value(point))
    tangent = jac @ a0[:m] - a1[:n]
    cotangent = a0[m:] - jac.T @ a1[n:]
    residual = float(
        np.max(np.abs(np.concatenate([tangent, cotangent])), initial=0.0)
    )
    return residual <= tol, residual


def schouten_jacobiator(
    pi: BivectorField, point: Sequence[float]
) -> NDArrayF64:
    """Components of [pi, pi] up to a factor 2.

    J^{ijk} = pi^{il} d_l pi^{jk} + pi^{jl} d_l pi^{ki} + pi^{kl} d_l pi^{ij},
    which vanishes exactly when pi is Poisson.
    """
    n = pi.dim
    values, rows = _derivatives(pi.evaluate, point)
    tensor = _to_float(values).reshape(n, n)
    grads = np.array(
        [[real_part(d) for d in row] for row in rows], dtype=np.float64
    ).reshape(n, n, n)
    # grads[j, k, l] = d_l pi^{jk}
    term = np.einsum("il,jkl->ijk", tensor, grads)
    return np.asarray(
        term + np.transpose(term, (1, 2, 0)) + np.transpose(term, (2, 0, 1))
    )
