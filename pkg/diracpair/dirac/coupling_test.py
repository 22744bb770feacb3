"""Test coupling triples and their involutivity conditions."""
import unittest

import numpy as np

from ..calculus.fields import (
    BivectorField,
    MapField,
    TwoFormField,
    VectorField,
)
from ..common.errors import DimensionError
from ..common.sampling import grid_points, sample_box
from ..linalg.lindirac import LagrangianSubspace
from .coupling import CouplingTriple, condition_residuals, coupling_verify
from .frame import foliation_dirac
from .pushforward import pushforward_family

BOX3 = [(-1.0, 1.0)] * 3
BOX4 = [(-1.0, 1.0)] * 4


def coordinate_triple(
    dim: int, base: int, omega: TwoFormField, pi: BivectorField
) -> CouplingTriple:
    """Triple over the projection onto the first base coordinates."""
    fmap = MapField.parse(dim, [f"x{i + 1}" for i in range(base)])
    horizontal = [
        VectorField.parse(["1" if j == i else "0" for j in range(dim)])
        for i in range(base)
    ]
    return CouplingTriple(fmap, horizontal, omega, pi, [(-1.0, 1.0)] * dim)


class TestCoupling(unittest.TestCase):
    """Test conditions (a) to (d) against the assembled frame."""

    def test_trivial(self) -> None:
        """Zero omega and pi give H + ann H, the levels of x3."""
        triple = coordinate_triple(
            3,
            2,
            TwoFormField.from_texts(3, {}),
            BivectorField.from_texts(3, {}),
        )
        report = coupling_verify(triple, grid_points(BOX3, 3))
        self.assertTrue(report.passed, report.table())
        levels = foliation_dirac(MapField.parse(3, ["x3"]), BOX3)
        fibres = foliation_dirac(triple.fmap, BOX3)
        frame = triple.frame()
        for point in sample_box(BOX3, 5):
            space = frame.subspace(point)
            self.assertTrue(space.equals(levels.subspace(point)))
            self.assertEqual(space.intersect(fibres.subspace(point)).dim, 0)

    def test_basic_form(self) -> None:
        """omega = s^* eta with closed eta pushes forward to Gr(eta)."""
        triple = coordinate_triple(
            4,
            2,
            TwoFormField.from_texts(4, {"1,2": "1 + x1^2"}),
            BivectorField.from_texts(4, {"3,4": "1 + x3^2"}),
        )
        report = coupling_verify(triple, grid_points(BOX4, 3))
        self.assertTrue(report.passed, report.table())
        frame = triple.frame()
        for point in sample_box(BOX4, 5):
            x = point[0]
            eta = [[0.0, 1 + x**2], [-(1 + x**2), 0.0]]
            expected = LagrangianSubspace.graph(np.array(eta).T)
            self.assertTrue(
                pushforward_family(frame, triple.fmap, point).equals(expected)
            )

    def test_domega_fails(self) -> None:
        """omega = x1 dx2^dx3 violates (d) and L is not Dirac."""
        triple = coordinate_triple(
            4,
            3,
            TwoFormField.from_texts(4, {"2,3": "x1"}),
            BivectorField.from_texts(4, {}),
        )
        report = coupling_verify(triple, grid_points(BOX4, 2))
        self.assertFalse(report.check("domega").passed)
        self.assertAlmostEqual(report.check("domega").residual, 1.0)
        self.assertTrue(report.check("curvature").passed)
        self.assertFalse(report.check("assembled_dirac").passed)
        self.assertTrue(report.check("agreement").passed)

    def test_lie_pi_fails(self) -> None:
        """A vertical bivector varying along H violates (b) off z = 0."""
        triple = coordinate_triple(
            4,
            2,
            TwoFormField.from_texts(4, {}),
            BivectorField.from_texts(4, {"3,4": "x1 * x3"}),
        )
        report = coupling_verify(triple, grid_points(BOX4, 3))
        self.assertTrue(report.check("jacobi").passed)
        self.assertFalse(report.check("lie_pi").passed)
        self.assertFalse(report.check("assembled_dirac").passed)
        self.assertTrue(report.check("agreement").passed)
        residuals = condition_residuals(triple, [0.5, 0.5, 0.0, 0.5])
        self.assertAlmostEqual(residuals[1], 0.0)

    def test_curvature_fails(self) -> None:
        """A non-involutive horizontal distribution violates (c)."""
        fmap = MapField.parse(3, ["x1", "x2"])
        horizontal = [
            VectorField.parse(["1", "0", "0"]),
            VectorField.parse(["0", "1", "x1"]),
        ]
        triple = CouplingTriple(
            fmap,
            horizontal,
            TwoFormField.from_texts(3, {}),
            BivectorField.from_texts(3, {}),
            BOX3,
        )
        report = coupling_verify(triple, grid_points(BOX3, 3))
        self.assertTrue(report.check("splitting").passed)
        self.assertFalse(report.check("curvature").passed)
        self.assertTrue(report.check("domega").passed)
        self.assertFalse(report.check("assembled_dirac").passed)
        self.assertTrue(report.check("agreement").passed)

    def test_invariants(self) -> None:
        """Violated triple invariants show up as failed checks."""
        triple = coordinate_triple(
            3,
            2,
            TwoFormField.from_texts(3, {"1,3": "1"}),
            BivectorField.from_texts(3, {"1,2": "1"}),
        )
        report = triple.invariants(grid_points(BOX3, 2))
        self.assertTrue(report.check("splitting").passed)
        self.assertFalse(report.check("omega_horizontal").passed)
        self.assertFalse(report.check("pi_vertical").passed)

    def test_shapes(self) -> None:
        """One horizontal field per target coordinate."""
        with self.assertRaises(DimensionError):
            CouplingTriple(
                MapField.parse(3, ["x1", "x2"]),
                [VectorField.parse(["1", "0", "0"])],
                TwoFormField.from_texts(3, {}),
                BivectorField.from_texts(3, {}),
                BOX3,
            )


if __name__ == "__main__":
    unittest.main()
