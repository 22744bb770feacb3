"""Test sprays, flows and the realization of Dirac structures."""
import math
import unittest

import numpy as np

from ..calculus.fields import (
    BivectorField,
    FunctionSection,
    MapField,
    TwoFormField,
)
from ..common.errors import ChartExitError, DualPairError, QuadratureError
from ..common.sampling import sample_box
from ..dirac.frame import (
    DiracFrame,
    foliation_dirac,
    graph_bivector,
    graph_two_form,
)
from .realization import (
    RealizationPair,
    Spray,
    build_realization,
    check_spray,
    default_spray,
    flow,
    lift_checks,
    omega_l,
    realization_lift,
    zero_section_checks,
)
from .twisted import twisted_closedness_check
from .verify import DUAL, verify_dual_pair

SQUARE = [(-1.0, 1.0)] * 2
CUBE = [(-1.0, 1.0)] * 3


def symplectic() -> DiracFrame:
    """Gr(dx^dy)."""
    return graph_two_form(TwoFormField.from_texts(2, {"1,2": "1"}), SQUARE)


def tangent() -> DiracFrame:
    """TM = Gr(0)."""
    return graph_two_form(TwoFormField.from_texts(2, {}), SQUARE)


def cotangent() -> DiracFrame:
    """T*M = Gr of the zero bivector."""
    return graph_bivector(BivectorField.from_texts(2, {}), SQUARE)


def rotating() -> DiracFrame:
    """Gr(z d_x^d_y) on R^3."""
    return graph_bivector(BivectorField.from_texts(3, {"1,2": "x3"}), CUBE)


def scaling() -> DiracFrame:
    """Gr(x d_x^d_y), whose spray has exponential trajectories."""
    return graph_bivector(BivectorField.from_texts(2, {"1,2": "x1"}), SQUARE)


def flat_closed_form() -> np.ndarray:
    """dc2^dx - dc1^dy - dc1^dc2 on (x, y, c1, c2)."""
    tensor = np.zeros((4, 4))
    tensor[0, 3] = -1.0
    tensor[1, 2] = 1.0
    tensor[2, 3] = -1.0
    return tensor - tensor.T


def constant_section(values: list) -> FunctionSection:
    """Section of the generalized tangent bundle of R^2."""
    return FunctionSection(2, lambda p: list(values))


class TestSpray(unittest.TestCase):
    """Test sprays on the frame chart."""

    def test_default_spray(self) -> None:
        """The anchor part of the frame drives x, c stays put."""
        point = [0.1, 0.2, 0.3, -0.4]
        np.testing.assert_allclose(
            default_spray(symplectic()).value(point), [0.3, -0.4, 0.0, 0.0]
        )
        np.testing.assert_allclose(
            default_spray(cotangent()).value(point), np.zeros(4)
        )
        np.testing.assert_allclose(
            default_spray(rotating()).value([0.1, 0.2, 0.5, 1.0, 2.0, 3.0]),
            [-1.0, 0.5, 0.0, 0.0, 0.0, 0.0],
        )

    def test_axioms(self) -> None:
        """Both axioms hold for the trivial connection."""
        for frame in (symplectic(), rotating(), scaling()):
            report = check_spray(default_spray(frame))
            self.assertTrue(report.passed, report.table())

    def test_bad_spray(self) -> None:
        """A field with a constant drift is not a spray."""
        frame = symplectic()
        spray = Spray(frame, lambda p: [p[2] + 1.0, p[3], 0.0, 0.0])
        report = check_spray(spray)
        self.assertFalse(report.check("spray_anchor").passed)
        self.assertFalse(report.check("spray_homogeneous").passed)


class TestFlow(unittest.TestCase):
    """Test the RK4 flow with its Jacobian."""

    def test_zero_spray(self) -> None:
        """T*M has the zero spray."""
        point = [0.1, 0.2, 0.3, -0.4]
        final, jac = flow(default_spray(cotangent()), point)
        np.testing.assert_allclose(final, point)
        np.testing.assert_allclose(jac, np.eye(4))

    def test_straight_lines(self) -> None:
        """phi_1(x, c) = (x + c, c) for TM."""
        final, jac = flow(default_spray(tangent()), [0.1, 0.2, 0.3, -0.4])
        np.testing.assert_allclose(final, [0.4, -0.2, 0.3, -0.4])
        expected = np.eye(4)
        expected[:2, 2:] = np.eye(2)
        np.testing.assert_allclose(jac, expected, atol=1e-12)

    def test_chart_exit(self) -> None:
        """The exit step is reported."""
        with self.assertRaises(ChartExitError) as context:
            flow(default_spray(tangent()), [0.9, 0.0, 0.5, 0.0])
        self.assertEqual(context.exception.step, 13)

    def test_step_halving(self) -> None:
        """64 and 128 steps agree."""
        spray = default_spray(rotating())
        point = [0.0, 0.0, 1.0, 0.3, -0.2, 0.1]
        coarse, coarse_jac = flow(spray, point, steps=64)
        fine, fine_jac = flow(spray, point, steps=128)
        np.testing.assert_allclose(coarse, fine, atol=1e-10)
        np.testing.assert_allclose(coarse_jac, fine_jac, atol=1e-10)


class TestOmegaL(unittest.TestCase):
    """Test the pulled back canonical form."""

    def test_tangent(self) -> None:
        """mu = 0 for TM."""
        np.testing.assert_allclose(
            omega_l(tangent()).at([0.1, 0.2, 0.3, 0.4]), np.zeros((4, 4))
        )

    def test_cotangent(self) -> None:
        """sum dx_j^dc_j for T*M."""
        expected = np.zeros((4, 4))
        expected[:2, 2:] = np.eye(2)
        expected[2:, :2] = -np.eye(2)
        np.testing.assert_allclose(
            omega_l(cotangent()).at([0.1, 0.2, 0.3, 0.4]), expected
        )

    def test_symplectic(self) -> None:
        """dc2^dx - dc1^dy for Gr(dx^dy)."""
        expected = np.zeros((4, 4))
        expected[3, 0] = 1.0
        expected[2, 1] = -1.0
        expected = expected - expected.T
        np.testing.assert_allclose(
            omega_l(symplectic()).at([0.1, 0.2, 0.3, 0.4]), expected
        )


class TestBuild(unittest.TestCase):
    """Test the realization of concrete structures."""

    def test_flat(self) -> None:
        """The closed form is reproduced and the radius halves once."""
        pair = build_realization(symplectic())
        self.assertEqual(pair.radius, 0.5)
        for point in sample_box(pair.box, 100):
            np.testing.assert_allclose(
                pair.omega_at(point), flat_closed_form(), atol=1e-10
            )
            np.testing.assert_allclose(
                pair.t.value(point),
                [point[0] + point[2], point[1] + point[3]],
                atol=1e-12,
            )

    def test_flat_coarse(self) -> None:
        """Two nodes and a single step are exact for the flat case."""
        pair = build_realization(symplectic(), radius=0.5, nodes=2, steps=1)
        point = [0.1, -0.2, 0.3, 0.25]
        np.testing.assert_allclose(
            pair.omega_at(point), flat_closed_form(), atol=1e-10
        )

    def test_tangent(self) -> None:
        """omega = 0 and t = x + c."""
        pair = build_realization(tangent())
        point = [0.1, -0.2, 0.3, 0.25]
        np.testing.assert_allclose(pair.omega_at(point), np.zeros((4, 4)))
        np.testing.assert_allclose(pair.t.value(point), [0.4, 0.05])

    def test_cotangent(self) -> None:
        """The flow is trivial, so t = s and omega = omega_L."""
        frame = cotangent()
        pair = build_realization(frame)
        self.assertEqual(pair.radius, 1.0)
        point = [0.1, -0.2, 0.3, 0.25]
        np.testing.assert_allclose(pair.t.value(point), [0.1, -0.2])
        np.testing.assert_allclose(
            pair.omega_at(point), omega_l(frame).at(point)
        )

    def test_dual_pairs(self) -> None:
        """Every built pair is a dual pair on 100 seeded points."""
        frames = (
            tangent(),
            cotangent(),
            symplectic(),
            graph_two_form(
                TwoFormField.from_texts(2, {"1,2": "x1"}), SQUARE
            ),
            rotating(),
            foliation_dirac(MapField.parse(2, ["x1"]), SQUARE),
        )
        for frame in frames:
            pair = build_realization(frame).pair_data()
            verdict = verify_dual_pair(pair, pair.samples(100))
            self.assertEqual(verdict.classification, DUAL, verdict.table())

    def test_flat_residuals(self) -> None:
        """The flat pair meets every residual check to 1e-9."""
        pair = build_realization(symplectic()).pair_data()
        verdict = verify_dual_pair(pair, pair.samples(100))
        self.assertTrue(verdict.passed, verdict.table())
        for check in verdict.checks:
            if check.residual is not None:
                self.assertLess(check.residual, 1e-9, check.name)

    def test_closed(self) -> None:
        """omega is closed without twists."""
        pair = build_realization(scaling())
        report = twisted_closedness_check(
            pair.s,
            pair.t,
            pair.omega,
            None,
            None,
            sample_box(pair.box, 5),
        )
        self.assertTrue(report.passed, report.table())

    def test_convergence(self) -> None:
        """Refining nodes and steps together shrinks the error at order 4."""
        spray = default_spray(scaling())
        point = [0.3, 0.2, 0.8, -0.9]
        values = [
            RealizationPair(spray, 1.0, nodes, 2 * nodes).omega_at(point)
            for nodes in (8, 16, 32, 64)
        ]
        gaps = [
            float(np.max(np.abs(a - b))) for a, b in zip(values, values[1:])
        ]
        slope = math.log2(gaps[0] / gaps[2]) / 2
        self.assertGreaterEqual(slope, 3.5)

    def test_quadrature_failure(self) -> None:
        """Two nodes cannot resolve a fast rotation of the fibres."""
        frame = symplectic()
        spray = Spray(frame, lambda p: [0.0, 0.0, -4 * p[3], 4 * p[2]])
        with self.assertRaises(QuadratureError):
            build_realization(frame, nodes=2, steps=1, spray=spray)

    def test_persistent_exit(self) -> None:
        """A drift that leaves the box at every radius is fatal."""
        frame = tangent()
        spray = Spray(frame, lambda p: [1.0, 0.0, 0.0, 0.0])
        with self.assertRaises(ChartExitError):
            build_realization(frame, nodes=2, steps=2, spray=spray)

    def test_odd_nodes(self) -> None:
        """Simpson's rule needs an even node count."""
        with self.assertRaises(ValueError):
            RealizationPair(default_spray(tangent()), nodes=3)

    def test_record(self) -> None:
        """The record keeps the parameters and zero section residuals."""
        pair = build_realization(symplectic(), nodes=2, steps=1)
        record = pair.record(
            {"kind": "two_form"}, zero_section_checks(pair, [[0.0, 0.0]])
        )
        content = record.dict(by_alias=True)
        self.assertEqual(content["schema"], 1)
        self.assertEqual(content["radius"], 0.5)
        self.assertEqual(content["structure"], {"kind": "two_form"})
        self.assertIn("zero_section_form", content["zero_section"])


class TestZeroSection(unittest.TestCase):
    """Test the linearization along c = 0."""

    def test_checks(self) -> None:
        """All three checks pass for the sample structures."""
        for frame in (symplectic(), cotangent(), rotating(), scaling()):
            report = zero_section_checks(build_realization(frame))
            self.assertTrue(report.passed, report.table())

    def test_cotangent_value(self) -> None:
        """omega(d_x1, d_c1) = dx1(d_x1) = 1 for T*M."""
        pair = build_realization(cotangent())
        self.assertAlmostEqual(pair.omega_at([0.2, 0.1, 0.0, 0.0])[0, 2], 1.0)


class TestLift(unittest.TestCase):
    """Test realization lifts."""

    def test_tangent(self) -> None:
        """The s-lift of d_x1 is (e1, -e1)."""
        pair = build_realization(tangent())
        lift = realization_lift(
            pair, constant_section([1.0, 0.0, 0.0, 0.0]), [0.1, 0.2, 0.1, 0.0]
        )
        np.testing.assert_allclose(lift, [1.0, 0.0, -1.0, 0.0], atol=1e-12)

    def test_zero(self) -> None:
        """The zero section lifts to zero."""
        pair = build_realization(symplectic())
        lift = realization_lift(
            pair, constant_section([0.0] * 4), [0.1, 0.2, 0.1, 0.0], "t"
        )
        np.testing.assert_allclose(lift, np.zeros(4), atol=1e-12)

    def test_flat_lifts(self) -> None:
        """Lifts of the frame are related, orthogonal and commute."""
        frame = symplectic()
        pair = build_realization(frame)
        report = lift_checks(
            pair,
            frame.sections[0],
            frame.sections[1],
            sample_box(pair.box, 3),
        )
        self.assertTrue(report.passed, report.table())

    def test_curved_lifts(self) -> None:
        """Lifts still commute when omega depends on the point."""
        frame = graph_two_form(
            TwoFormField.from_texts(2, {"1,2": "2 + x1"}), SQUARE
        )
        pair = build_realization(frame)
        report = lift_checks(
            pair,
            frame.sections[0],
            frame.sections[1],
            sample_box(pair.box, 2),
        )
        self.assertTrue(report.passed, report.table())

    def test_outside_structure(self) -> None:
        """d_x is not in Gr(dx^dy), so there is nothing to lift."""
        pair = build_realization(symplectic())
        with self.assertRaises(DualPairError):
            realization_lift(
                pair,
                constant_section([1.0, 0.0, 0.0, 0.0]),
                [0.1, 0.2, 0.1, 0.0],
            )


if __name__ == "__main__":
    unittest.main()
