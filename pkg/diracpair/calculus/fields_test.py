"""Test fields, brackets, exterior derivatives and pullbacks."""
import unittest
from typing import List

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ..common.errors import DimensionError
from .expr import parse_expr
from .fields import (
    BivectorField,
    FunctionSection,
    MapField,
    OneFormField,
    Section,
    SectionField,
    ThreeFormField,
    TwoFormField,
    VectorField,
    differential,
    dorfman,
    dorfman_twisted,
    exterior_d,
    interior,
    lie_bracket,
    phi_related,
    pullback_form,
    schouten_jacobiator,
)


def random_poly(rng: np.random.Generator, dim: int, terms: int = 3) -> str:
    """A random polynomial text in x1..x{dim}."""
    monomials = []
    for _ in range(terms):
        coeff = int(rng.integers(1, 4))
        powers = [
            f"x{i + 1}^{int(rng.integers(0, 3))}" for i in range(dim)
        ]
        sign = "-" if rng.random() < 0.5 else "+"
        monomials.append(f"{sign} {coeff} * " + " * ".join(powers))
    return "0 " + " ".join(monomials)


def random_section(rng: np.random.Generator, dim: int) -> SectionField:
    """A section with random polynomial coefficients."""
    return SectionField(
        VectorField.parse([random_poly(rng, dim) for _ in range(dim)]),
        OneFormField.parse_list([random_poly(rng, dim) for _ in range(dim)]),
    )


def section(vector: List[str], form: List[str]) -> SectionField:
    """Section from component texts."""
    return SectionField(
        VectorField.parse(vector), OneFormField.parse_list(form)
    )


class TestFields(unittest.TestCase):
    """Test field construction and evaluation."""

    def test_two_form_tensor(self) -> None:
        """Only increasing keys are stored; the tensor is antisymmetric."""
        omega = TwoFormField.from_texts(2, {"1,2": "x1"})
        np.testing.assert_allclose(
            omega.at([3.0, 0.0]), [[0.0, 3.0], [-3.0, 0.0]]
        )
        with self.assertRaises(DimensionError):
            TwoFormField.from_texts(2, {"2,1": "1"})
        with self.assertRaises(DimensionError):
            TwoFormField.from_texts(2, {"1,3": "1"})

    def test_three_form_sign(self) -> None:
        """dx^dy^dz(d_x, d_y, d_z) = +1 and odd permutations flip."""
        phi = ThreeFormField.from_texts(3, {"1,2,3": "1"})
        tensor = phi.at([0.0, 0.0, 0.0])
        self.assertEqual(tensor[0, 1, 2], 1.0)
        self.assertEqual(tensor[1, 0, 2], -1.0)
        self.assertEqual(tensor[1, 2, 0], 1.0)

    def test_bivector_sharp(self) -> None:
        """pi = d_x^d_y sends dx to d_y."""
        pi = BivectorField.from_texts(2, {"1,2": "1"})
        np.testing.assert_allclose(pi.sharp([0.0, 0.0]) @ [1.0, 0.0], [0, 1])

    def test_map(self) -> None:
        """Values, Jacobians and coordinate projections."""
        fmap = MapField.parse(3, ["x1^2 * x2", "x3"])
        np.testing.assert_allclose(fmap.value([2.0, 3.0, 4.0]), [12.0, 4.0])
        np.testing.assert_allclose(
            fmap.jacobian([2.0, 3.0, 4.0]), [[12.0, 4.0, 0.0], [0, 0, 1]]
        )
        self.assertIsNone(fmap.coordinate_indices())
        self.assertEqual(
            MapField.parse(3, ["x3", "x1"]).coordinate_indices(), (2, 0)
        )
        with self.assertRaises(DimensionError):
            MapField(1, [parse_expr("x2", 2)])

    def test_interior(self) -> None:
        """iota_{d_x} dx^dy = dy."""
        omega = TwoFormField.from_texts(2, {"1,2": "1"})
        contracted = interior(VectorField.parse(["1", "0"]), omega)
        np.testing.assert_allclose(contracted.at([0.0, 0.0]), [0.0, 1.0])


class TestDerivatives(unittest.TestCase):
    """Test Lie brackets and exterior derivatives."""

    def test_lie_bracket(self) -> None:
        """Brackets of simple vector fields."""
        d_z = VectorField.parse(["0", "0", "1"])
        z_dx = VectorField.parse(["x3", "0", "0"])
        np.testing.assert_allclose(
            lie_bracket(d_z, z_dx).at([1.0, 2.0, 3.0]), [1.0, 0.0, 0.0]
        )
        np.testing.assert_allclose(
            lie_bracket(z_dx, z_dx).at([1.0, 2.0, 3.0]), [0.0, 0.0, 0.0]
        )
        x_dy = VectorField.parse(["0", "x1"])
        y_dx = VectorField.parse(["x2", "0"])
        np.testing.assert_allclose(
            lie_bracket(x_dy, y_dx).at([1.0, 1.0]), [1.0, -1.0]
        )

    def test_exterior_d(self) -> None:
        """d(x^2 y dz) = 2xy dx^dz + x^2 dy^dz."""
        alpha = OneFormField.parse_list(["0", "0", "x1^2 * x2"])
        d_alpha = exterior_d(alpha).at([1.0, 2.0, 3.0])
        self.assertAlmostEqual(d_alpha[0, 2], 4.0)
        self.assertAlmostEqual(d_alpha[1, 2], 1.0)
        self.assertAlmostEqual(d_alpha[0, 1], 0.0)
        np.testing.assert_allclose(d_alpha, -d_alpha.T)
        constant = OneFormField.parse_list(["1", "2"])
        np.testing.assert_allclose(exterior_d(constant).at([0.3, 0.4]), 0)
        top = TwoFormField.from_texts(2, {"1,2": "x1"})
        np.testing.assert_allclose(exterior_d(top).at([0.3, 0.4]), 0)

    def test_differential(self) -> None:
        """d(x^2 y)."""
        grad = differential(parse_expr("x1^2 * x2", 3), 3)
        np.testing.assert_allclose(grad.at([1.0, 2.0, 3.0]), [4.0, 1.0, 0])

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(min_value=2, max_value=4), st.integers(0, 2**31))
    def test_d_squared(self, dim: int, seed: int) -> None:
        """d(d alpha) = 0 for polynomial one-forms."""
        rng = np.random.default_rng(seed)
        alpha = OneFormField.parse_list(
            [random_poly(rng, dim) for _ in range(dim)]
        )
        point = rng.uniform(-1, 1, size=dim).tolist()
        dd_alpha = exterior_d(exterior_d(alpha)).at(point)
        np.testing.assert_allclose(dd_alpha, 0.0, atol=1e-8)


class TestDorfman(unittest.TestCase):
    """Test the Dorfman bracket and its twisted version."""

    def test_examples(self) -> None:
        """Hand-computed brackets."""
        s1 = section(["x3", "0", "0"], ["0", "-1", "0"])
        s3 = section(["0", "0", "1"], ["0", "0", "0"])
        np.testing.assert_allclose(
            dorfman(s3, s1).at([0.5, 0.5, 2.0]), [1, 0, 0, 0, 0, 0]
        )
        a = section(["1", "0"], ["0", "1"])
        b = section(["0", "1"], ["1", "0"])
        np.testing.assert_allclose(dorfman(a, b).at([0.2, 0.7]), 0.0)
        exact = section(["1", "0"], ["1", "0"])
        np.testing.assert_allclose(dorfman(exact, exact).at([0.2, 0.7]), 0)

    def test_twisted(self) -> None:
        """[d_x, d_y]_phi = phi(d_y, d_x, .) = -dz."""
        d_x = section(["1", "0", "0"], ["0", "0", "0"])
        d_y = section(["0", "1", "0"], ["0", "0", "0"])
        phi = ThreeFormField.from_texts(3, {"1,2,3": "1"})
        np.testing.assert_allclose(
            dorfman_twisted(d_x, d_y, phi).at([0.0, 0.0, 0.0]),
            [0, 0, 0, 0, 0, -1],
        )
        np.testing.assert_allclose(
            dorfman_twisted(d_x, d_x, phi).at([0.0, 0.0, 0.0]), 0.0
        )
        zero = ThreeFormField(3, {})
        point = [0.3, -0.2, 0.9]
        np.testing.assert_allclose(
            dorfman_twisted(d_x, d_y, zero).at(point),
            dorfman(d_x, d_y).at(point),
        )

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(0, 2**31))
    def test_leibniz(self, seed: int) -> None:
        """[a, [b, c]] = [[a, b], c] + [b, [a, c]]."""
        rng = np.random.default_rng(seed)
        a, b, c = (random_section(rng, 3) for _ in range(3))
        point = rng.uniform(-1, 1, size=3).tolist()
        lhs = dorfman(a, dorfman(b, c)).at(point)
        rhs = dorfman(dorfman(a, b), c).at(point) + dorfman(
            b, dorfman(a, c)
        ).at(point)
        scale = max(1.0, float(np.abs(lhs).max()))
        np.testing.assert_allclose(lhs, rhs, atol=1e-6 * scale)

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(0, 2**31))
    def test_twisted_leibniz(self, seed: int) -> None:
        """Leibniz for a closed twist; every three-form on R^3 is closed."""
        rng = np.random.default_rng(seed)
        a, b, c = (random_section(rng, 3) for _ in range(3))
        phi = ThreeFormField.from_texts(3, {"1,2,3": random_poly(rng, 3)})
        point = rng.uniform(-1, 1, size=3).tolist()

        def bracket(x: Section, y: Section) -> FunctionSection:
            return dorfman_twisted(x, y, phi)

        lhs = bracket(a, bracket(b, c)).at(point)
        rhs = bracket(bracket(a, b), c).at(point) + bracket(
            b, bracket(a, c)
        ).at(point)
        scale = max(1.0, float(np.abs(lhs).max()))
        np.testing.assert_allclose(lhs, rhs, atol=1e-6 * scale)


class TestMaps(unittest.TestCase):
    """Test pullbacks and relatedness."""

    def test_pullback_form(self) -> None:
        """(x + c1, y + c2)^* dx^dy = (dx + dc1)^(dy + dc2)."""
        omega = TwoFormField.from_texts(2, {"1,2": "1"})
        flow = MapField.parse(4, ["x1 + x3", "x2 + x4"])
        pulled = pullback_form(flow, omega).at([0.1, 0.2, 0.3, 0.4])
        expected = np.zeros((4, 4))
        for i, j in [(0, 1), (0, 3), (2, 1), (2, 3)]:
            expected[i, j] += 1.0
            expected[j, i] -= 1.0
        np.testing.assert_allclose(pulled, expected)
        ident = pullback_form(MapField.identity(2), omega)
        np.testing.assert_allclose(
            ident.at([0.5, 0.5]), omega.at([0.5, 0.5])
        )

    def test_pullback_matches_congruence(self) -> None:
        """Pullback of a two-form is DF^T T DF."""
        omega = TwoFormField.from_texts(
            3, {"1,2": "x3", "2,3": "x1 * x2", "1,3": "sin(x2)"}
        )
        fmap = MapField.parse(2, ["x1 * x2", "x1 + x2^2", "exp(x1)"])
        point = [0.3, -0.7]
        jac = fmap.jacobian(point)
        tensor = omega.at(fmap.value(point).tolist())
        np.testing.assert_allclose(
            pullback_form(fmap, omega).at(point),
            jac.T @ tensor @ jac,
            atol=1e-12,
        )

    def test_phi_related(self) -> None:
        """Identity and vertical cases."""
        a = section(["x2", "1"], ["x1", "0"])
        related, residual = phi_related(MapField.identity(2), a, a, [1, 2])
        self.assertTrue(related)
        self.assertEqual(residual, 0.0)
        proj = MapField.parse(2, ["x1"])
        vertical = section(["0", "1"], ["1", "0"])
        self.assertTrue(
            phi_related(proj, vertical, section(["0"], ["1"]), [0.5, 0.5])[0]
        )
        self.assertFalse(
            phi_related(proj, vertical, section(["1"], ["1"]), [0.5, 0.5])[0]
        )

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(0, 2**31))
    def test_brackets_stay_related(self, seed: int) -> None:
        """Brackets of lifts along (x, y, z) -> (x, y) are related."""
        rng = np.random.default_rng(seed)
        proj = MapField.parse(3, ["x1", "x2"])
        lifted = []
        bases = []
        for _ in range(2):
            vector = [random_poly(rng, 2) for _ in range(2)]
            form = [random_poly(rng, 2) for _ in range(2)]
            bases.append(section(vector, form))
            vertical = random_poly(rng, 3)
            lifted.append(section(vector + [vertical], form + ["0"]))
        point = rng.uniform(-1, 1, size=3).tolist()
        related, residual = phi_related(
            proj,
            dorfman(lifted[0], lifted[1]),
            dorfman(bases[0], bases[1]),
            point,
            tol=1e-6,
        )
        self.assertTrue(related, residual)


class TestSchouten(unittest.TestCase):
    """Test the Jacobiator of bivectors."""

    def test_poisson(self) -> None:
        """z d_x^d_y is Poisson."""
        pi = BivectorField.from_texts(3, {"1,2": "x3"})
        np.testing.assert_allclose(
            schouten_jacobiator(pi, [0.4, -1.0, 2.0]), 0.0
        )

    def test_not_poisson(self) -> None:
        """d_x^d_y - x d_x^d_z - y d_y^d_z fails the Jacobi identity."""
        pi = BivectorField.from_texts(
            3, {"1,2": "1", "1,3": "-x1", "2,3": "-x2"}
        )
        jacobiator = schouten_jacobiator(pi, [0.4, -1.0, 2.0])
        self.assertAlmostEqual(jacobiator[0, 1, 2], -2.0)
        np.testing.assert_allclose(jacobiator, -jacobiator.transpose(1, 0, 2))


if __name__ == "__main__":
    unittest.main()
