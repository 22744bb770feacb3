"""Self-dual pairs of a Dirac structure from the flow of a spray.

A point (x, c) of the frame chart R^2n stands for sum c_i e_i(x) in the
total space of L. The pair is M <-s- Sigma -t-> M with s(x, c) = x,
t = s o phi_1 and omega = int_0^1 phi_eps^* omega_L d eps.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, linalg

from ..calculus.fields import (
    Flat,
    FormEvaluator,
    MapField,
    MapLike,
    Section,
    exterior_d,
)
from ..calculus.jet import jacobian, real_part
from ..common.errors import (
    ChartExitError,
    DiracError,
    DualPairError,
    FlowError,
    QuadratureError,
)
from ..common.logger import logger
from ..common.sampling import grid_points, sample_box, shrink_box
from ..common.typing import Box, DictStrAny, NDArrayF64, Point
from ..dirac.frame import DiracFrame
from .result import Check, Report
from .typing import FD_STEP, NumericForm, NumericMap, PairData, is_numeric
from .verify import PAIR_RANK_TOL, VERIFY_TOL, DiagramPoint

RADIUS = 1.0
RADIUS_FLOOR = 2.0**-20
QUAD_NODES = 32
FLOW_STEPS = 64
QUAD_TOL = 1e-6
SPRAY_TOL = 1e-9
LINEARIZATION_TOL = 1e-8
ZERO_SECTION_TOL = 1e-6
LIFT_TOL = 1e-8
BRACKET_TOL = 1e-5
SPRAY_SCALES = (2.0, -1.0, 0.5)
# Sigma sits over this share of the frame box so short flows stay inside
BASE_SHARE = 0.5
CHECK_SAMPLES = 8
CACHE_SIZE = 4096
PAIR_SCHEMA = 1

State = Tuple[NDArrayF64, NDArrayF64]


class Spray(MapLike):
    """Vector field V on the frame chart (x, c) of the total space of L.

    Without a field the trivial connection of the frame is used,
    V(x, c) = (sum c_i pr_T e_i(x), 0).
    """

    def __init__(
        self,
        frame: DiracFrame,
        field: Optional[Callable[[Point], Flat]] = None,
        name: str = "",
    ) -> None:
        """Attach the field to the chart of frame."""
        if is_numeric(frame):
            raise DiracError("a spray needs a frame that evaluates on jets")
        self.frame = frame
        self.source_dim = 2 * frame.dim
        self.target_dim = 2 * frame.dim
        self.field = field
        self.name = name or f"spray of {frame.name}"

    def __repr__(self) -> str:
        """Short description."""
        return f"Spray({self.name})"

    def evaluate(self, point: Point) -> Flat:
        """Components of V at a point of floats or jets."""
        if self.field is not None:
            return list(self.field(point))
        n = self.frame.dim
        rows = self.frame.evaluate(list(point[:n]))
        coeffs = list(point[n:])
        velocity: Flat = [
            sum((coeffs[i] * rows[i][k] for i in range(n)), 0.0)
            for k in range(n)
        ]
        return velocity + [0.0] * n

    def value_and_jacobian(self, point: Sequence[float]) -> State:
        """V and DV at a point of floats."""
        values, rows = jacobian(self.evaluate, list(point))
        return (
            np.array([real_part(v) for v in values], dtype=np.float64),
            np.array(
                [[real_part(d) for d in row] for row in rows],
                dtype=np.float64,
            ).reshape(self.target_dim, self.source_dim),
        )


def default_spray(frame: DiracFrame) -> Spray:
    """Spray of the trivial connection on the frame chart."""
    return Spray(frame)


def _scaled(point: Sequence[float], n: int, scale: float) -> List[float]:
    return list(point[:n]) + [scale * c for c in point[n:]]


def check_spray(
    spray: Spray,
    samples: Optional[Sequence[Sequence[float]]] = None,
    tol: float = SPRAY_TOL,
) -> Report:
    """Check s_* V = pr_T(a) and m_t^* V = t V on samples of the chart."""
    n = spray.frame.dim
    if samples is None:
        samples = sample_box(
            spray.frame.box + [(-RADIUS, RADIUS)] * n, CHECK_SAMPLES
        )
    base, homogeneous = [], []
    for point in samples:
        field = spray.value(point)
        rows = spray.frame.at(point[:n])
        anchor = rows[:, :n].T @ np.asarray(point[n:], dtype=np.float64)
        base.append(float(np.max(np.abs(field[:n] - anchor), initial=0.0)))
        worst = 0.0
        for scale in SPRAY_SCALES:
            moved = spray.value(_scaled(point, n, scale))
            expected = scale * np.concatenate([field[:n], scale * field[n:]])
            worst = max(worst, float(np.max(np.abs(moved - expected))))
        homogeneous.append(worst)
    return Report(
        checks=[
            Check.from_residuals(
                "spray_anchor", base, samples, tol, "s_* V - pr_T(a)"
            ),
            Check.from_residuals(
                "spray_homogeneous",
                homogeneous,
                samples,
                tol,
                "V(x, tc) - t dm_t V(x, c)",
            ),
        ]
    )


def _rk4_step(spray: Spray, state: State, h: float) -> State:
    """One classical step of y' = V(y), D' = DV(y) D."""
    y, jac = state
    k1, a1 = spray.value_and_jacobian(y)
    m1 = a1 @ jac
    k2, a2 = spray.value_and_jacobian(y + h / 2 * k1)
    m2 = a2 @ (jac + h / 2 * m1)
    k3, a3 = spray.value_and_jacobian(y + h / 2 * k2)
    m3 = a3 @ (jac + h / 2 * m2)
    k4, a4 = spray.value_and_jacobian(y + h * k3)
    m4 = a4 @ (jac + h * m3)
    return (
        y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4),
        jac + h / 6 * (m1 + 2 * m2 + 2 * m3 + m4),
    )


def _advance(
    spray: Spray, state: State, h: float, steps: int, offset: int
) -> State:
    """Take steps RK4 steps, checking the chart after each one."""
    n = spray.frame.dim
    for step in range(offset + 1, offset + steps + 1):
        state = _rk4_step(spray, state, h)
        if not (np.isfinite(state[0]).all() and np.isfinite(state[1]).all()):
            raise FlowError(f"non-finite flow values at step {step}")
        if not spray.frame.contains(state[0][:n]):
            raise ChartExitError(step)
    return state


def _start(spray: Spray, point: Sequence[float]) -> State:
    y = np.asarray(point, dtype=np.float64).reshape(spray.source_dim)
    if not spray.frame.contains(y[: spray.frame.dim]):
        raise ChartExitError(0)
    return y, np.eye(spray.source_dim)


def flow(
    spray: Spray,
    point: Sequence[float],
    eps: float = 1.0,
    steps: int = FLOW_STEPS,
) -> State:
    """phi_eps(point) and D phi_eps(point) from steps uniform RK4 steps."""
    if steps < 1:
        raise ValueError("at least one flow step is needed")
    return _advance(spray, _start(spray, point), eps / steps, steps, 0)


def trajectory(
    spray: Spray, point: Sequence[float], nodes: int, steps: int
) -> List[State]:
    """States at eps = k / nodes for k = 0..nodes.

    Every node interval takes ceil(steps / nodes) RK4 steps, so the
    whole trajectory takes at least steps steps.
    """
    per_node = max(1, math.ceil(steps / nodes))
    h = 1.0 / (nodes * per_node)
    states = [_start(spray, point)]
    for k in range(nodes):
        states.append(
            _advance(spray, states[-1], h, per_node, k * per_node)
        )
    return states


def omega_l(frame: DiracFrame) -> FormEvaluator:
    """omega_L = -d lambda_L with lambda_L = sum_j mu_j dx_j.

    mu(x, c) = sum c_i xi_i(x) is the covector part of the chart point.
    """
    n = frame.dim

    def tautological(point: Point) -> Flat:
        rows = frame.evaluate(list(point[:n]))
        coeffs = list(point[n:])
        mu: Flat = [
            sum((coeffs[i] * rows[i][n + j] for i in range(n)), 0.0)
            for j in range(n)
        ]
        return mu + [0.0] * n

    d_lambda = exterior_d(FormEvaluator(2 * n, 1, tautological))
    return FormEvaluator(
        2 * n, 2, lambda p: [-v for v in d_lambda.evaluate(p)]
    )


class RealizationRecord(BaseModel):
    """Content of a pair.json file.

    structure is the manifest entry the frame was built from; it is
    opaque to the library.
    """

    schema_: int = Field(PAIR_SCHEMA, alias="schema")
    kind: str = "realization"
    name: str
    radius: float
    quad_nodes: int
    flow_steps: int
    box: List[Tuple[float, float]]
    structure: DictStrAny = {}
    zero_section: Dict[str, Optional[float]] = {}

    class Config:
        """Accept both the alias and the field name."""

        allow_population_by_field_name = True


class RealizationPair:
    """The pair (Sigma, s, t, omega) built from a spray.

    Evaluators are pure; per-point integrations are cached so that
    omega and t at one point share a single trajectory.
    """

    def __init__(
        self,
        spray: Spray,
        radius: float = RADIUS,
        nodes: int = QUAD_NODES,
        steps: int = FLOW_STEPS,
        name: str = "",
    ) -> None:
        """Set up the chart box of the given radius around M."""
        if nodes < 2 or nodes % 2:
            raise ValueError("Simpson's rule needs an even node count >= 2")
        frame = spray.frame
        n = frame.dim
        self.spray = spray
        self.frame = frame
        self.radius = float(radius)
        self.nodes = nodes
        self.steps = steps
        self.name = name or f"realization of {frame.name}"
        self.box: Box = shrink_box(frame.box, BASE_SHARE) + [
            (-self.radius, self.radius)
        ] * n
        self.omega_base = omega_l(frame)
        self._solve = lru_cache(maxsize=CACHE_SIZE)(self._integrate)
        self.s = MapField.parse(2 * n, [f"x{i + 1}" for i in range(n)])
        self.t = NumericMap(
            2 * n,
            n,
            lambda p: self._solve(tuple(p), nodes)[1][:n],
            lambda p: self._solve(tuple(p), nodes)[2][:n],
        )
        self.omega = NumericForm(2 * n, self.omega_at)

    def __repr__(self) -> str:
        """Short description."""
        return (
            f"RealizationPair({self.name}, R={self.radius:g}, "
            f"N={self.nodes}, K={self.steps})"
        )

    @property
    def dim(self) -> int:
        """dim M."""
        return self.frame.dim

    def _integrate(
        self, point: Tuple[float, ...], nodes: int
    ) -> Tuple[NDArrayF64, NDArrayF64, NDArrayF64]:
        """omega, phi_1 and D phi_1 at point with the given node count."""
        states = trajectory(self.spray, point, nodes, self.steps)
        integrand = np.stack(
            [jac.T @ self.omega_base.at(y) @ jac for y, jac in states]
        )
        tensor = integrate.simpson(integrand, dx=1.0 / nodes, axis=0)
        tensor = (tensor - tensor.T) / 2
        final, final_jac = states[-1]
        return np.asarray(tensor), final, final_jac

    def omega_at(self, point: Sequence[float]) -> NDArrayF64:
        """T[i, j] = omega(d_i, d_j) at a chart point."""
        return self._solve(tuple(float(x) for x in point), self.nodes)[0]

    def omega_refined(self, point: Sequence[float]) -> NDArrayF64:
        """omega from twice as many quadrature nodes."""
        return self._solve(tuple(float(x) for x in point), 2 * self.nodes)[0]

    def pair_data(self) -> PairData:
        """The diagram (M, L) <- (Sigma, Gr omega) -> (M, -L)."""
        return PairData(
            self.s,
            self.t,
            self.omega,
            self.frame,
            self.frame,
            self.box,
            self.name,
        )

    def validate(self, samples: int = CHECK_SAMPLES) -> None:
        """Flow from the corners and samples of Sigma, then compare N and 2N.

        Raises ChartExitError when a trajectory leaves the frame box and
        QuadratureError when the two quadratures disagree.
        """
        points = grid_points(self.box, 2) + sample_box(self.box, samples)
        for point in points:
            self.omega_at(point)
        for point in sample_box(self.box, samples):
            coarse = self.omega_at(point)
            fine = self.omega_refined(point)
            scale = max(1.0, float(np.max(np.abs(fine), initial=0.0)))
            gap = float(np.max(np.abs(coarse - fine), initial=0.0)) / scale
            if gap > QUAD_TOL:
                raise QuadratureError(
                    f"{self.nodes} and {2 * self.nodes} nodes differ by "
                    f"{gap:.3g}"
                )

    def record(
        self,
        structure: Optional[DictStrAny] = None,
        zero_section: Optional[Report] = None,
    ) -> RealizationRecord:
        """Serializable description of the pair."""
        return RealizationRecord(
            name=self.name,
            radius=self.radius,
            quad_nodes=self.nodes,
            flow_steps=self.steps,
            box=self.box,
            structure=structure or {},
            zero_section={}
            if zero_section is None
            else {c.name: c.residual for c in zero_section.checks},
        )


def build_realization(
    frame: DiracFrame,
    radius: float = RADIUS,
    nodes: int = QUAD_NODES,
    steps: int = FLOW_STEPS,
    spray: Optional[Spray] = None,
    name: str = "",
) -> RealizationPair:
    """Build the self-dual pair of L, halving the radius on chart exits."""
    spray = default_spray(frame) if spray is None else spray
    logger.info("building realization of %s", frame)
    while True:
        pair = RealizationPair(spray, radius, nodes, steps, name)
        try:
            pair.validate()
            break
        except ChartExitError as error:
            if radius / 2 < RADIUS_FLOOR:
                logger.error("flow leaves the chart at every radius")
                raise
            radius /= 2
            logger.warning(
                "flow left the chart at step %d, radius now %g",
                error.step,
                radius,
            )
    logger.info("built %s", pair)
    return pair


def _zero_section_form(rows: NDArrayF64, n: int) -> NDArrayF64:
    """omega at c = 0 in the splitting TM + L.

    omega((u, a), (u', a')) = eta'(u + v/2) - eta(u' + v'/2) with
    v + eta = sum a_i e_i.
    """
    anchor, cotangent = rows[:, :n], rows[:, n:]
    expected = np.zeros((2 * n, 2 * n))
    expected[:n, n:] = cotangent.T
    expected[n:, :n] = -cotangent
    expected[n:, n:] = (anchor @ cotangent.T - cotangent @ anchor.T) / 2
    return expected


def zero_section_checks(
    pair: RealizationPair,
    samples: Optional[Sequence[Sequence[float]]] = None,
    rank_tol: float = PAIR_RANK_TOL,
) -> Report:
    """Linearized flow, omega and V cap K cap W along c = 0.

    samples are base points of M.
    """
    n = pair.dim
    if samples is None:
        samples = sample_box(pair.box[:n], CHECK_SAMPLES)
    points = [list(x) + [0.0] * n for x in samples]
    data = pair.pair_data()
    linearized, forms, meets = [], [], []
    for point in points:
        rows = pair.frame.at(point[:n])
        worst = 0.0
        for eps in (0.5, 1.0):
            _, jac = flow(pair.spray, point, eps, pair.steps)
            block = np.eye(2 * n)
            block[:n, n:] = eps * rows[:, :n].T
            worst = max(worst, float(np.max(np.abs(jac - block))))
        linearized.append(worst)
        tensor = pair.omega_at(point)
        expected = _zero_section_form(rows, n)
        scale = max(1.0, float(np.max(np.abs(expected), initial=0.0)))
        forms.append(float(np.max(np.abs(tensor - expected))) / scale)
        meets.append(DiagramPoint.of(data, point, rank_tol).meet().dim == 0)
    return Report(
        checks=[
            Check.from_residuals(
                "flow_linearization",
                linearized,
                points,
                LINEARIZATION_TOL,
                "D phi_eps - (u + eps pr_T a, a)",
            ),
            Check.from_residuals(
                "zero_section_form", forms, points, ZERO_SECTION_TOL
            ),
            Check.from_flags("zero_section_dual", meets, points),
        ]
    )


def _lift_system(
    data: PairData, section: Section, point: Sequence[float], leg: str
) -> Tuple[NDArrayF64, NDArrayF64]:
    """Rows and right-hand side of the lift equations at point."""
    jac_s = data.s.jacobian(point)
    jac_t = data.t.jacobian(point)
    tensor = data.omega_at(point)
    if leg == "s":
        along, across, sign = jac_s, jac_t, 1.0
        element = section.at(data.s.value(point))
    elif leg == "t":
        along, across, sign = jac_t, jac_s, -1.0
        element = section.at(data.t.value(point))
    else:
        raise ValueError(f"unknown leg {leg}")
    m = along.shape[0]
    if element.shape != (2 * m,):
        raise DiracError("section does not live on the target of the leg")
    matrix = np.vstack([across, along, tensor.T])
    rhs = np.concatenate(
        [
            np.zeros(across.shape[0]),
            element[:m],
            sign * (along.T @ element[m:]),
        ]
    )
    return matrix, rhs


def realization_lift(
    pair: RealizationPair,
    section: Section,
    point: Sequence[float],
    leg: str = "s",
    rank_tol: float = PAIR_RANK_TOL,
) -> NDArrayF64:
    """The lift w of a section along one leg.

    For leg "s", w is tangent to the t-fibres and w + iota_w omega is
    s-related to the section of L0; for leg "t" the roles swap and the
    section of L1 is met with the opposite sign.
    """
    data = pair.pair_data()
    if DiagramPoint.of(data, point, rank_tol).meet().dim != 0:
        raise DualPairError("V cap K cap W does not vanish", point)
    matrix, rhs = _lift_system(data, section, point, leg)
    solution, _, rank, _ = linalg.lstsq(matrix, rhs)
    if rank < matrix.shape[1]:
        raise DualPairError("lift system is singular", point)
    gap = float(np.max(np.abs(matrix @ solution - rhs), initial=0.0))
    if gap > VERIFY_TOL * max(1.0, float(np.max(np.abs(rhs), initial=0.0))):
        raise DualPairError(f"lift equations miss by {gap:.3g}", point)
    return np.asarray(solution)


def lift_residual(
    pair: RealizationPair,
    section: Section,
    point: Sequence[float],
    leg: str = "s",
) -> float:
    """How far the lift is from being related to the section."""
    lift = realization_lift(pair, section, point, leg)
    matrix, rhs = _lift_system(pair.pair_data(), section, point, leg)
    return float(np.max(np.abs(matrix @ lift - rhs), initial=0.0))


def lift_orthogonality(
    pair: RealizationPair,
    a0: Section,
    a1: Section,
    point: Sequence[float],
) -> float:
    """|omega(w0, w1)| for the s-lift of a0 and the t-lift of a1."""
    w0 = realization_lift(pair, a0, point, "s")
    w1 = realization_lift(pair, a1, point, "t")
    return abs(float(w0 @ pair.omega_at(point) @ w1))


def lift_bracket(
    pair: RealizationPair,
    a0: Section,
    a1: Section,
    point: Sequence[float],
    step: float = FD_STEP,
) -> NDArrayF64:
    """[w0, w1] at point by central differences of the two lifts."""
    size = 2 * pair.dim
    d0 = np.zeros((size, size))
    d1 = np.zeros((size, size))
    for axis in range(size):
        plus = np.array(point, dtype=np.float64)
        minus = plus.copy()
        plus[axis] += step
        minus[axis] -= step
        d0[:, axis] = (
            realization_lift(pair, a0, plus, "s")
            - realization_lift(pair, a0, minus, "s")
        ) / (2 * step)
        d1[:, axis] = (
            realization_lift(pair, a1, plus, "t")
            - realization_lift(pair, a1, minus, "t")
        ) / (2 * step)
    w0 = realization_lift(pair, a0, point, "s")
    w1 = realization_lift(pair, a1, point, "t")
    return np.asarray(d1 @ w0 - d0 @ w1)


def lift_checks(
    pair: RealizationPair,
    a0: Section,
    a1: Section,
    points: Sequence[Sequence[float]],
) -> Report:
    """Relatedness, orthogonality and commutation of lifts on points."""
    related, orthogonal, brackets = [], [], []
    for point in points:
        related.append(
            max(
                lift_residual(pair, a0, point, "s"),
                lift_residual(pair, a1, point, "t"),
            )
        )
        orthogonal.append(lift_orthogonality(pair, a0, a1, point))
        bracket = lift_bracket(pair, a0, a1, point)
        brackets.append(float(np.linalg.norm(bracket)))
    return Report(
        checks=[
            Check.from_residuals("lifts_related", related, points, LIFT_TOL),
            Check.from_residuals(
                "lifts_orthogonal", orthogonal, points, ZERO_SECTION_TOL
            ),
            Check.from_residuals(
                "lifts_commute", brackets, points, BRACKET_TOL
            ),
        ]
    )

