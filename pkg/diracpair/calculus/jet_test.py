"""Test jet arithmetic and nesting."""
import math
from typing import Any, List

from .jet import Jet, jacobian, real_part, seed, sin, unpack


def test_seed_unit_partials() -> None:
    """Seeding gives unit partials under one tag."""
    x, y = seed([1.5, 2.5])
    assert x.partials == (1, 0)
    assert y.partials == (0, 1)
    assert x.tag == y.tag


def test_reflected_operators() -> None:
    """Scalars on the left still differentiate."""
    (x,) = seed([2.0])
    y = 1 - 3 / x + 2 * x
    assert isinstance(y, Jet)
    assert math.isclose(y.value, 1 - 1.5 + 4)
    assert math.isclose(y.partials[0], 3 / 4 + 2)


def test_power() -> None:
    """Integer powers."""
    (x,) = seed([3.0])
    y = x**3
    assert y.value == 27.0
    assert y.partials[0] == 27.0
    assert x**0 == 1.0


def test_nested_second_derivative() -> None:
    """A jet of jets carries the Hessian."""

    def grad(point: List[Any]) -> List[Any]:
        _, rows = jacobian(lambda p: [p[0] ** 2 * p[1] + sin(p[1])], point)
        return list(rows[0])

    values, hessian = jacobian(grad, [1.0, 0.5])
    assert math.isclose(values[0], 2 * 1.0 * 0.5)
    assert math.isclose(values[1], 1.0 + math.cos(0.5))
    assert math.isclose(hessian[0][0], 1.0)
    assert math.isclose(hessian[0][1], 2.0)
    assert math.isclose(hessian[1][0], 2.0)
    assert math.isclose(hessian[1][1], -math.sin(0.5))


def test_tags_keep_levels_apart() -> None:
    """An outer-level jet used inside an inner derivative is a constant."""
    (outer,) = seed([2.0])

    def inner(point: List[Any]) -> List[Any]:
        return [point[0] * outer]

    values, rows = jacobian(inner, [3.0])
    assert real_part(values[0]) == 6.0
    # d/dy (y * x) = x, which is still a jet in the outer variable.
    assert isinstance(rows[0][0], Jet)
    assert rows[0][0].value == 2.0
    assert rows[0][0].partials == (1,)


def test_unpack_constant() -> None:
    """Values independent of the seed have zero partials."""
    value, partials = unpack(4.0, tag=10**9, dim=3)
    assert value == 4.0
    assert partials == (0, 0, 0)
