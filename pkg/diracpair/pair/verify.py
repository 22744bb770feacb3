"""Verdicts for weak dual pairs, dual pairs and pre-dual pairs.

All conditions are pointwise linear algebra at sample points q of Sigma
on the subspaces V = ker ds, W = ker dt and K = ker omega.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..calculus.fields import FormLike, MapLike
from ..common.logger import logger
from ..common.parallel import pmap
from ..common.tqdm import tqdm
from ..common.typing import NDArrayF64
from ..linalg.lindirac import (
    LagrangianSubspace,
    Subspace,
    form_on,
    gauge,
    kernel_of_form,
    kernel_of_map,
    omega_orthogonal,
    pullback_pt,
    pushforward_pt,
    rescale,
    row_basis,
    tangent_part,
)
from ..dirac.frame import DiracFrame
from .result import Check, Report, Verdict
from .typing import PairData, exterior_derivative_at

VERIFY_TOL = 1e-6
PAIR_RANK_TOL = 1e-7

DUAL = "dual pair"
WEAK = "weak dual pair"
PRE_DUAL = "pre-dual pair only"
NONE = "none"
CLASSIFICATIONS = (DUAL, WEAK, PRE_DUAL, NONE)

LEG_CHECKS = ("s_submersion", "t_submersion", "omega_closed")
WEAK_CHECKS = LEG_CHECKS + (
    "s_forward",
    "t_forward",
    "fibres_orthogonal",
    "rank_condition",
    "pre_dual",
)
DUAL_CHECKS = WEAK_CHECKS + (
    "dual_condition",
    "dimension",
    "presymplectic_realization",
    "dual_routes_agree",
)
RESIDUAL_CHECKS = (
    "omega_closed",
    "s_forward",
    "t_forward",
    "fibres_orthogonal",
    "pre_dual",
)
EQUIVALENCE_ITEMS = ("i", "ii", "iii", "iv")


def product_structure(
    first: Subspace, second: Subspace
) -> LagrangianSubspace:
    """first x second inside the generalized tangent space of a product."""
    m0 = first.ambient_dim // 2
    m1 = second.ambient_dim // 2
    rows = []
    for row in first.basis:
        rows.append(
            np.concatenate(
                [row[:m0], np.zeros(m1), row[m0:], np.zeros(m1)]
            )
        )
    for row in second.basis:
        rows.append(
            np.concatenate(
                [np.zeros(m0), row[:m1], np.zeros(m0), row[m1:]]
            )
        )
    size = 2 * (m0 + m1)
    return LagrangianSubspace(
        size, np.array(rows).reshape(len(rows), size), first.tol
    )


def _full_row_rank(jac: NDArrayF64, tol: float) -> bool:
    return bool(row_basis(jac, tol).shape[0] == jac.shape[0])


class DiagramPoint:
    """The linear data of a diagram at one point q of Sigma.

    omega_tensor holds T[i, j] = omega(d_i, d_j); l0 and l1 are the
    target structures at s(q) and t(q).
    """

    def __init__(
        self,
        jac_s: NDArrayF64,
        jac_t: NDArrayF64,
        omega_tensor: NDArrayF64,
        l0: Subspace,
        l1: Subspace,
        rank_tol: float = PAIR_RANK_TOL,
    ) -> None:
        """Build V, W, K and Gr(omega)."""
        self.jac_s = np.atleast_2d(jac_s)
        self.jac_t = np.atleast_2d(jac_t)
        n = omega_tensor.shape[0]
        self.dim = n
        self.m0 = self.jac_s.shape[0]
        self.m1 = self.jac_t.shape[0]
        self.tensor = np.asarray(omega_tensor, dtype=np.float64)
        # lindirac stores iota_u omega = W u, so W = T^T.
        self.matrix = self.tensor.T
        self.scale = max(1.0, float(np.max(np.abs(self.tensor), initial=0)))
        self.rank_tol = rank_tol
        self.l0 = l0
        self.l1 = l1
        self.graph = LagrangianSubspace(
            2 * n, np.hstack([np.eye(n), self.tensor]), rank_tol
        )
        self.v_space = kernel_of_map(self.jac_s, rank_tol)
        self.w_space = kernel_of_map(self.jac_t, rank_tol)
        self.k_space = kernel_of_form(self.matrix, rank_tol)

    @classmethod
    def of(
        cls,
        pair: PairData,
        point: Sequence[float],
        rank_tol: float = PAIR_RANK_TOL,
    ) -> DiagramPoint:
        """Evaluate the diagram of pair at point."""
        return cls(
            pair.s.jacobian(point),
            pair.t.jacobian(point),
            pair.omega_at(point),
            pair.l0.lagrangian(pair.s.value(point)),
            pair.l1.lagrangian(pair.t.value(point)),
            rank_tol,
        )

    @property
    def s_submersion(self) -> bool:
        """ds is onto."""
        return _full_row_rank(self.jac_s, self.rank_tol)

    @property
    def t_submersion(self) -> bool:
        """dt is onto."""
        return _full_row_rank(self.jac_t, self.rank_tol)

    def s_forward(self) -> float:
        """Gap between s_!(Gr(omega)) and L0."""
        return pushforward_pt(self.jac_s, self.graph).gap(self.l0)

    def t_forward(self) -> float:
        """Gap between t_!(Gr(omega)) and -L1."""
        return pushforward_pt(self.jac_t, self.graph).gap(
            rescale(-1.0, self.l1)
        )

    def joint_forward(self) -> float:
        """Gap between (s, t)_!(Gr(omega)) and L0 x -L1."""
        joint = np.vstack([self.jac_s, self.jac_t]).reshape(
            self.m0 + self.m1, self.dim
        )
        return pushforward_pt(joint, self.graph).gap(
            product_structure(self.l0, rescale(-1.0, self.l1))
        )

    def fibres_form(self) -> float:
        """|omega(V, W)| relative to the size of omega."""
        return form_on(self.v_space, self.w_space, self.matrix) / self.scale

    def meet(self) -> Subspace:
        """V cap K cap W."""
        return self.v_space.intersect(self.k_space).intersect(self.w_space)

    def rank_holds(self) -> bool:
        """rank(V cap K cap W) = dim Sigma - dim M0 - dim M1."""
        return self.meet().dim == self.dim - self.m0 - self.m1

    def pre_dual(self) -> float:
        """Gap in V^omega = W + K and W^omega = V + K."""
        return max(
            omega_orthogonal(self.v_space, self.matrix).gap(
                self.w_space + self.k_space
            ),
            omega_orthogonal(self.w_space, self.matrix).gap(
                self.v_space + self.k_space
            ),
        )

    def gauge_equality(self) -> float:
        """Gap between s^!(L0) and R_omega(t^!(L1))."""
        left = pullback_pt(self.jac_s, self.l0)
        right = gauge(self.matrix, pullback_pt(self.jac_t, self.l1))
        return left.gap(right)

    def v_cap_k(self) -> Subspace:
        """V cap K, the kernel of Gr(omega) -> T M0."""
        return self.v_space.intersect(self.k_space)

    def w_cap_k(self) -> Subspace:
        """W cap K."""
        return self.w_space.intersect(self.k_space)


def equivalence_point(
    point: DiagramPoint, tol: float = VERIFY_TOL
) -> Dict[str, bool]:
    """Evaluate the four equivalent descriptions of a weak dual pair.

    i) both legs forward, omega(V, W) = 0 and the rank condition;
    ii) s^!(L0) = R_omega(t^!(L1)) and the rank condition;
    iii) (s, t) forward into L0 x -L1 and either side condition;
    iv) s^!(L0) = R_omega(t^!(L1)) and (s, t) forward.
    Which side condition held in iii) is kept under iii_rank and
    iii_orthogonal.
    """
    rank = point.rank_holds()
    orthogonal = point.fibres_form() <= tol
    gauge_ok = point.gauge_equality() <= tol
    joint = point.joint_forward() <= tol
    legs = point.s_forward() <= tol and point.t_forward() <= tol
    return {
        "i": legs and orthogonal and rank,
        "ii": gauge_ok and rank,
        "iii": joint and (rank or orthogonal),
        "iv": gauge_ok and joint,
        "iii_rank": rank,
        "iii_orthogonal": orthogonal,
        "gauge_equality": gauge_ok,
        "joint_forward": joint,
    }


PointResult = Tuple[Dict[str, float], Dict[str, bool], Dict[str, bool]]


def _evaluate(
    pair: PairData,
    point: Sequence[float],
    tol: float,
    rank_tol: float,
) -> PointResult:
    """Residuals, flags and equivalence items at one point."""
    data = DiagramPoint.of(pair, point, rank_tol)
    dtensor = exterior_derivative_at(pair.omega, point)
    residuals = {
        "omega_closed": float(np.max(np.abs(dtensor), initial=0.0))
        / data.scale,
        "s_forward": data.s_forward(),
        "t_forward": data.t_forward(),
        "fibres_orthogonal": data.fibres_form(),
        "pre_dual": data.pre_dual(),
    }
    meet = data.meet()
    dimension = pair.sigma_dim == pair.m0 + pair.m1
    submersions = data.s_submersion and data.t_submersion
    joint = data.joint_forward() <= tol
    flags = {
        "s_submersion": data.s_submersion,
        "t_submersion": data.t_submersion,
        "rank_condition": meet.dim == data.dim - data.m0 - data.m1,
        "dual_condition": meet.dim == 0,
        "presymplectic_realization": dimension and joint and meet.dim == 0,
    }
    by_definition = (
        submersions
        and residuals["s_forward"] <= tol
        and residuals["t_forward"] <= tol
        and residuals["fibres_orthogonal"] <= tol
        and flags["rank_condition"]
        and flags["dual_condition"]
    )
    by_realization = submersions and flags["presymplectic_realization"]
    flags["dual_routes_agree"] = by_definition == by_realization
    return residuals, flags, equivalence_point(data, tol)


def _run(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]],
    tol: float,
    rank_tol: float,
    nprocs: int,
) -> Tuple[List[List[float]], List[PointResult]]:
    samples = [list(p) for p in (pair.samples() if points is None else points)]
    logger.info("verifying %s on %d points", pair, len(samples))
    results = pmap(
        lambda p: _evaluate(pair, p, tol, rank_tol),
        tqdm(samples) if nprocs <= 1 else samples,
        nprocs,
    )
    return samples, results


def classify(flags: Dict[str, bool]) -> str:
    """Strongest label whose conditions all passed."""
    if not all(flags.get(name, False) for name in LEG_CHECKS):
        return NONE
    if not (flags.get("s_forward") and flags.get("t_forward")):
        return NONE
    weak = flags.get("fibres_orthogonal") and flags.get("rank_condition")
    if weak and flags.get("dual_condition", False):
        return DUAL
    if weak:
        return WEAK
    if flags.get("pre_dual"):
        return PRE_DUAL
    return NONE


def _checks(
    names: Sequence[str],
    pair: PairData,
    samples: List[List[float]],
    results: List[PointResult],
    tol: float,
) -> List[Check]:
    checks = []
    for name in names:
        if name == "dimension":
            checks.append(
                Check(
                    name=name,
                    passed=pair.sigma_dim == pair.m0 + pair.m1,
                    detail=f"{pair.sigma_dim} vs {pair.m0} + {pair.m1}",
                )
            )
        elif name in RESIDUAL_CHECKS:
            checks.append(
                Check.from_residuals(
                    name, [r[0][name] for r in results], samples, tol
                )
            )
        else:
            checks.append(
                Check.from_flags(
                    name, [r[1][name] for r in results], samples
                )
            )
    return checks


def _all_items(items: Sequence[Dict[str, bool]]) -> Dict[str, bool]:
    keys = items[0].keys() if items else EQUIVALENCE_ITEMS
    return {key: all(item[key] for item in items) for key in keys}


def verify_weak_dual_pair(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
    nprocs: int = 1,
) -> Verdict:
    """Check the weak dual pair conditions and, separately, V^omega = W + K.

    Without the dual condition the classification stops at "weak dual
    pair".
    """
    samples, results = _run(pair, points, tol, rank_tol, nprocs)
    checks = _checks(WEAK_CHECKS, pair, samples, results, tol)
    verdict = Verdict(checks=checks)
    verdict.classification = classify(verdict.flags())
    return verdict


def verify_dual_pair(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
    nprocs: int = 1,
) -> Verdict:
    """Weak verdict plus V cap K cap W = 0.

    The presymplectic realization route, dim Sigma = dim M0 + dim M1
    with (s, t) forward and V cap K cap W = 0, is evaluated on its own
    and compared point by point. The equivalence items are attached.
    """
    samples, results = _run(pair, points, tol, rank_tol, nprocs)
    checks = _checks(DUAL_CHECKS, pair, samples, results, tol)
    verdict = Verdict(
        checks=checks, equivalence=_all_items([r[2] for r in results])
    )
    verdict.classification = classify(verdict.flags())
    if not verdict.check("dual_routes_agree").passed:
        logger.warning("dual pair routes disagree on %s", pair)
    return verdict


def equivalence_matrix(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
) -> Dict[str, bool]:
    """Items i) to iv), each required at every point."""
    samples = pair.samples() if points is None else points
    return _all_items(
        [
            equivalence_point(DiagramPoint.of(pair, p, rank_tol), tol)
            for p in samples
        ]
    )


def poisson_leg_check(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
) -> Report:
    """Decide whether each leg is Poisson in two independent ways.

    L1 is Poisson iff L1 cap TM1 = 0, which on a weak dual pair happens
    iff W = V^omega; likewise for L0 with V = W^omega. When L1 is
    Poisson, s is a presymplectic realization (V cap K = 0) iff the pair
    is a dual pair, and symmetrically for L0 and t.
    """
    samples = [list(p) for p in (pair.samples() if points is None else points)]
    flags: Dict[str, List[bool]] = {
        name: []
        for name in (
            "l0_poisson",
            "v_is_w_omega",
            "l0_agreement",
            "l1_poisson",
            "w_is_v_omega",
            "l1_agreement",
            "s_presymplectic",
            "t_presymplectic",
            "reduction_agreement",
        )
    }
    for point in samples:
        data = DiagramPoint.of(pair, point, rank_tol)
        l0_poisson = (
            data.l0.intersect(tangent_part(data.m0, Subspace.full(data.m0)))
        ).dim == 0
        l1_poisson = (
            data.l1.intersect(tangent_part(data.m1, Subspace.full(data.m1)))
        ).dim == 0
        v_is = omega_orthogonal(data.w_space, data.matrix).equals(
            data.v_space, tol
        )
        w_is = omega_orthogonal(data.v_space, data.matrix).equals(
            data.w_space, tol
        )
        s_pre = data.s_forward() <= tol and data.v_cap_k().dim == 0
        t_pre = data.t_forward() <= tol and data.w_cap_k().dim == 0
        dual = data.meet().dim == 0
        agree = (not l1_poisson or s_pre == dual) and (
            not l0_poisson or t_pre == dual
        )
        for name, value in (
            ("l0_poisson", l0_poisson),
            ("v_is_w_omega", v_is),
            ("l0_agreement", l0_poisson == v_is),
            ("l1_poisson", l1_poisson),
            ("w_is_v_omega", w_is),
            ("l1_agreement", l1_poisson == w_is),
            ("s_presymplectic", s_pre),
            ("t_presymplectic", t_pre),
            ("reduction_agreement", agree),
        ):
            flags[name].append(value)
    return Report(
        checks=[
            Check.from_flags(name, values, samples)
            for name, values in flags.items()
        ]
    )


def is_presymplectic_realization(
    s: MapLike,
    omega: FormLike,
    l0: DiracFrame,
    points: Sequence[Sequence[float]],
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
) -> Report:
    """s: (Sigma, Gr(omega)) -> (M0, L0) forward with V cap K = 0."""
    samples = [list(p) for p in points]
    submersion, closed, forward, strong = [], [], [], []
    for point in samples:
        data = DiagramPoint(
            s.jacobian(point),
            np.zeros((0, s.source_dim)),
            omega.at(point),
            l0.lagrangian(s.value(point)),
            LagrangianSubspace(0, np.zeros((0, 0))),
            rank_tol,
        )
        submersion.append(data.s_submersion)
        dtensor = exterior_derivative_at(omega, point)
        closed.append(
            float(np.max(np.abs(dtensor), initial=0.0)) / data.scale
        )
        forward.append(data.s_forward())
        strong.append(data.v_cap_k().dim == 0)
    return Report(
        checks=[
            Check.from_flags("s_submersion", submersion, samples),
            Check.from_residuals("omega_closed", closed, samples, tol),
            Check.from_residuals("s_forward", forward, samples, tol),
            Check.from_flags("strong", strong, samples),
        ]
    )
