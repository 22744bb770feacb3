"""Forward-mode jets: a value together with its first partials.

Jets nest. A jet whose value and partials are themselves jets carries
second derivatives, which is how the exterior derivative of a form built
from first derivatives is evaluated. Every seeding gets a fresh tag so
that jets from different differentiation levels never get mixed up:
the jet with the larger tag is the outer one and treats the other as a
constant.
"""
from __future__ import annotations

import itertools
import math
from typing import Any, Callable, List, Optional, Sequence, Tuple

Partials = Tuple[Any, ...]  # type: ignore[misc]

_TAGS = itertools.count()


class Jet:
    """Value plus gradient with respect to the seeded coordinates."""

    __slots__ = ("value", "partials", "tag")
    # Let numpy scalars defer to the reflected jet operators.
    __array_ufunc__ = None

    def __init__(self, value: Any, partials: Partials, tag: int) -> None:
        """Create a jet; use `seed` to start a differentiation."""
        self.value = value
        self.partials = partials
        self.tag = tag

    def __repr__(self) -> str:
        """Show value and partials."""
        return f"Jet({self.value!r}, {self.partials!r}, tag={self.tag})"

    def __add__(self, other: Any) -> Any:
        """Add."""
        return _binary(self, other, _add)

    def __radd__(self, other: Any) -> Any:
        """Add from the right."""
        return _binary(other, self, _add)

    def __sub__(self, other: Any) -> Any:
        """Subtract."""
        return _binary(self, other, _sub)

    def __rsub__(self, other: Any) -> Any:
        """Subtract from the right."""
        return _binary(other, self, _sub)

    def __mul__(self, other: Any) -> Any:
        """Multiply with the product rule."""
        return _binary(self, other, _mul)

    def __rmul__(self, other: Any) -> Any:
        """Multiply from the right."""
        return _binary(other, self, _mul)

    def __truediv__(self, other: Any) -> Any:
        """Divide with the quotient rule."""
        return _binary(self, other, _div)

    def __rtruediv__(self, other: Any) -> Any:
        """Divide from the right."""
        return _binary(other, self, _div)

    def __neg__(self) -> Jet:
        """Negate."""
        return Jet(-self.value, tuple(-d for d in self.partials), self.tag)

    def __pos__(self) -> Jet:
        """Return self."""
        return self

    def __pow__(self, exponent: int) -> Any:
        """Raise to an integer power."""
        if not isinstance(exponent, int):
            raise TypeError("jets only support integer exponents")
        if exponent == 0:
            return 1.0
        scale = exponent * self.value ** (exponent - 1)
        return Jet(
            self.value**exponent,
            tuple(scale * d for d in self.partials),
            self.tag,
        )


Split = Tuple[Any, Optional[Partials]]  # type: ignore[misc]


def _split(x: Any, tag: int) -> Split:
    if isinstance(x, Jet) and x.tag == tag:
        return x.value, x.partials
    return x, None


def _binary(
    a: Any, b: Any, rule: Callable[[Split, Split, int], Any]
) -> Any:
    tag_a = a.tag if isinstance(a, Jet) else -1
    tag_b = b.tag if isinstance(b, Jet) else -1
    tag = max(tag_a, tag_b)
    return rule(_split(a, tag), _split(b, tag), tag)


def _combine(
    value: Any,
    terms: Sequence[Tuple[Any, Optional[Partials]]],
    tag: int,
) -> Any:
    partials: Optional[List[Any]] = None
    for coeff, dx in terms:
        if dx is None:
            continue
        scaled = [coeff * d for d in dx]
        if partials is None:
            partials = scaled
        else:
            partials = [p + s for p, s in zip(partials, scaled)]
    if partials is None:
        return value
    return Jet(value, tuple(partials), tag)


def _add(a: Split, b: Split, tag: int) -> Any:
    return _combine(a[0] + b[0], [(1, a[1]), (1, b[1])], tag)


def _sub(a: Split, b: Split, tag: int) -> Any:
    return _combine(a[0] - b[0], [(1, a[1]), (-1, b[1])], tag)


def _mul(a: Split, b: Split, tag: int) -> Any:
    return _combine(a[0] * b[0], [(b[0], a[1]), (a[0], b[1])], tag)


def _div(a: Split, b: Split, tag: int) -> Any:
    value = a[0] / b[0]
    inv = 1 / b[0]
    return _combine(value, [(inv, a[1]), (-value * inv, b[1])], tag)


def real_part(x: Any) -> float:
    """Strip all jet layers and return the plain value."""
    while isinstance(x, Jet):
        x = x.value
    return float(x)


def _unary(
    x: Any, fn: Callable[[float], float], dfn: Callable[[Any], Any]
) -> Any:
    if isinstance(x, Jet):
        scale = dfn(x.value)
        return Jet(
            _unary(x.value, fn, dfn),
            tuple(scale * d for d in x.partials),
            x.tag,
        )
    return fn(x)


def sin(x: Any) -> Any:
    """Sine of a float or jet."""
    return _unary(x, math.sin, cos)


def cos(x: Any) -> Any:
    """Cosine of a float or jet."""
    return _unary(x, math.cos, lambda v: -sin(v))


def exp(x: Any) -> Any:
    """Exponential of a float or jet."""
    return _unary(x, math.exp, exp)


def log(x: Any) -> Any:
    """Natural logarithm of a float or jet."""
    return _unary(x, math.log, lambda v: 1 / v)


def seed(point: Sequence[Any]) -> List[Jet]:
    """Wrap each coordinate in a jet with a unit partial."""
    tag = next(_TAGS)
    n = len(point)
    return [
        Jet(x, tuple(1 if j == i else 0 for j in range(n)), tag)
        for i, x in enumerate(point)
    ]


def unpack(y: Any, tag: int, dim: int) -> Tuple[Any, Partials]:
    """Split an output into its value and partials for a given seed tag."""
    if isinstance(y, Jet) and y.tag == tag:
        return y.value, y.partials
    return y, (0,) * dim


def jacobian(
    fn: Callable[[List[Any]], Sequence[Any]], point: Sequence[Any]
) -> Tuple[List[Any], List[Partials]]:
    """Evaluate fn and its Jacobian at point.

    fn maps a coordinate list to a sequence of scalars. The point may
    itself hold jets, in which case the outputs are jets of one lower
    level.
    """
    seeded = seed(point)
    tag = seeded[0].tag if seeded else -1
    values = []
    rows = []
    for y in fn(seeded):
        value, partials = unpack(y, tag, len(point))
        values.append(value)
        rows.append(partials)
    return values, rows
