"""Composition, reduction, transverse pullback and gauge of pairs.

Fibre products are never solved for: callers pass an explicit chart of
the fibre product, whose consistency is checked on sample points before
anything is built.
"""
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from ..calculus.fields import FormLike, MapLike
from ..common.errors import ChartConsistencyError, DimensionError
from ..common.logger import logger
from ..common.sampling import sample_box
from ..common.typing import Box, NDArrayF64
from ..dirac.frame import gauge_frame, restrict_frame, transversality_check
from ..linalg.lindirac import Subspace, kernel_of_map
from .result import Check, Verdict
from .typing import (
    ComposedMap,
    PairData,
    SliceMap,
    form_sum,
    pull_back,
)
from .verify import (
    NONE,
    PAIR_RANK_TOL,
    VERIFY_TOL,
    DiagramPoint,
    verify_dual_pair,
)

CHART_TOL = 1e-9
CHART_SAMPLES = 20
MAX_DENOMINATOR = 1000
RATIO_TOL = 1e-9


def _chart_samples(
    box: Box, points: Optional[Sequence[Sequence[float]]]
) -> List[List[float]]:
    if points is not None:
        return [list(p) for p in points]
    return sample_box(box, CHART_SAMPLES)


def _agreement(
    left: MapLike,
    right: MapLike,
    points: Sequence[Sequence[float]],
    what: str,
    tol: float,
) -> None:
    """Raise unless left and right agree on points."""
    for point in points:
        gap = float(
            np.max(
                np.abs(left.value(point) - right.value(point)), initial=0.0
            )
        )
        if gap > tol:
            raise ChartConsistencyError(
                f"{what} differ by {gap:.3g} at "
                + ", ".join(f"{x:.6g}" for x in point)
            )


def _image_box(fmap: MapLike, points: Sequence[Sequence[float]]) -> Box:
    images = np.array([fmap.value(p) for p in points]).reshape(
        len(points), fmap.target_dim
    )
    return [
        (float(lo), float(hi))
        for lo, hi in zip(images.min(axis=0), images.max(axis=0))
    ]


def compose_pairs(
    first: PairData,
    second: PairData,
    chart: MapLike,
    box: Box,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = CHART_TOL,
    name: str = "",
) -> PairData:
    """Compose M0 <- Sigma01 -> M1 with M1 <- Sigma12 -> M2.

    chart maps the box into Sigma01 x Sigma12 and must land in the fibre
    product t01 o pr1 = s12 o pr2. The composite carries
    pr1^* omega01 + pr2^* omega12 and the legs s01 o pr1, t12 o pr2.
    """
    if first.m1 != second.m0:
        raise DimensionError("middle manifolds of the pairs differ")
    split = first.sigma_dim
    if chart.target_dim != split + second.sigma_dim:
        raise DimensionError("chart does not map into Sigma01 x Sigma12")
    if chart.source_dim != len(box):
        raise DimensionError("chart does not start on the box")
    pr1 = SliceMap(chart, 0, split)
    pr2 = SliceMap(chart, split, chart.target_dim)
    _agreement(
        ComposedMap(first.t, pr1),
        ComposedMap(second.s, pr2),
        _chart_samples(box, points),
        "t01 o pr1 and s12 o pr2",
        tol,
    )
    omega = form_sum(
        [
            (1.0, pull_back(pr1, first.omega)),
            (1.0, pull_back(pr2, second.omega)),
        ]
    )
    composite = PairData(
        ComposedMap(first.s, pr1),
        ComposedMap(second.t, pr2),
        omega,
        first.l0,
        second.l1,
        box,
        name or f"{first.name} * {second.name}",
    )
    logger.info("composed %s", composite)
    return composite


def transverse_pullback(
    pair: PairData,
    i0: MapLike,
    i1: MapLike,
    chart: MapLike,
    box: Box,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = CHART_TOL,
    name: str = "",
) -> PairData:
    """Pull a pair back to X0 x_M0 Sigma x_M1 X1.

    chart maps the box into X0 x Sigma x X1. The maps i0 and i1 must be
    transverse to L0 and L1; their induced structures live on the
    bounding boxes of the sampled chart images.
    """
    x0, x1 = i0.source_dim, i1.source_dim
    if i0.target_dim != pair.m0 or i1.target_dim != pair.m1:
        raise DimensionError("embeddings do not end on the targets")
    if chart.target_dim != x0 + pair.sigma_dim + x1:
        raise DimensionError("chart does not map into X0 x Sigma x X1")
    pr1 = SliceMap(chart, 0, x0)
    pr2 = SliceMap(chart, x0, x0 + pair.sigma_dim)
    pr3 = SliceMap(chart, x0 + pair.sigma_dim, chart.target_dim)
    samples = _chart_samples(box, points)
    _agreement(
        ComposedMap(i0, pr1),
        ComposedMap(pair.s, pr2),
        samples,
        "i0 o pr1 and s o pr2",
        tol,
    )
    _agreement(
        ComposedMap(pair.t, pr2),
        ComposedMap(i1, pr3),
        samples,
        "t o pr2 and i1 o pr3",
        tol,
    )
    x0_points = [pr1.value(p) for p in samples]
    x1_points = [pr3.value(p) for p in samples]
    transversality_check(i0, pair.l0, x0_points)
    transversality_check(i1, pair.l1, x1_points)
    pulled = PairData(
        pr1,
        pr3,
        pull_back(pr2, pair.omega),
        restrict_frame(i0, pair.l0, _image_box(pr1, samples)),
        restrict_frame(i1, pair.l1, _image_box(pr3, samples)),
        box,
        name or f"{pair.name} restricted",
    )
    logger.info("pulled back to %s", pulled)
    return pulled


def gauge_pair(
    pair: PairData,
    sigma0: FormLike,
    sigma1: FormLike,
    name: str = "",
) -> PairData:
    """(R_sigma0 L0, omega + s^* sigma0 - t^* sigma1, R_sigma1 L1)."""
    if sigma0.dim != pair.m0 or sigma1.dim != pair.m1:
        raise DimensionError("gauge forms do not live on the targets")
    omega = form_sum(
        [
            (1.0, pair.omega),
            (1.0, pull_back(pair.s, sigma0)),
            (-1.0, pull_back(pair.t, sigma1)),
        ]
    )
    return PairData(
        pair.s,
        pair.t,
        omega,
        gauge_frame(pair.l0, sigma0),
        gauge_frame(pair.l1, sigma1),
        pair.box,
        name or f"{pair.name} gauged",
    )


def _map_residual(
    fmap: MapLike, factored: MapLike, point: Sequence[float]
) -> float:
    return float(
        np.max(
            np.abs(fmap.value(point) - factored.value(point)), initial=0.0
        )
    )


def reduction_verify(
    pair: PairData,
    reduction: MapLike,
    omega_bar: FormLike,
    s_bar: MapLike,
    t_bar: MapLike,
    quotient_box: Box,
    points: Optional[Sequence[Sequence[float]]] = None,
    tol: float = VERIFY_TOL,
    rank_tol: float = PAIR_RANK_TOL,
) -> Verdict:
    """Check that r: Sigma -> Sigma_bar reduces pair to a dual pair.

    The fibres of r must be the leaves of V cap K cap W, omega must be
    r^* omega_bar and the legs must factor through r. The quotient is
    then verified on the images of the sample points; its checks carry
    the prefix "quotient_".
    """
    samples = [list(p) for p in (pair.samples() if points is None else points)]
    s_lift = ComposedMap(s_bar, reduction)
    t_lift = ComposedMap(t_bar, reduction)
    kernel, descends, s_res, t_res = [], [], [], []
    for point in samples:
        data = DiagramPoint.of(pair, point, rank_tol)
        jac = reduction.jacobian(point)
        kernel.append(kernel_of_map(jac, rank_tol).gap(data.meet()))
        pulled = jac.T @ omega_bar.at(reduction.value(point)) @ jac
        scale = max(1.0, float(np.max(np.abs(pulled), initial=0.0)))
        descends.append(
            float(np.max(np.abs(pulled - data.tensor), initial=0.0)) / scale
        )
        s_res.append(_map_residual(pair.s, s_lift, point))
        t_res.append(_map_residual(pair.t, t_lift, point))
    checks = [
        Check.from_residuals("kernel_is_meet", kernel, samples, tol),
        Check.from_residuals("omega_descends", descends, samples, tol),
        Check.from_residuals("s_factors", s_res, samples, tol),
        Check.from_residuals("t_factors", t_res, samples, tol),
    ]
    quotient = PairData(
        s_bar,
        t_bar,
        omega_bar,
        pair.l0,
        pair.l1,
        quotient_box,
        f"{pair.name} reduced",
    )
    images = [[float(x) for x in reduction.value(p)] for p in samples]
    reduced = verify_dual_pair(quotient, images, tol, rank_tol)
    for check in reduced.checks:
        checks.append(check.copy(update={"name": f"quotient_{check.name}"}))
    verdict = Verdict(checks=checks, equivalence=reduced.equivalence)
    identities = all(check.passed for check in checks[:4])
    verdict.classification = (
        reduced.classification if identities else NONE
    )
    return verdict


class LeafDiagnostic(BaseModel):
    """Shape of the characteristic distribution V cap K cap W.

    On a torus chart a constant line with an irrational slope ratio
    winds densely, so its leaves are not closed.
    """

    ranks: List[int]
    constant: bool
    direction: Optional[List[float]] = None
    ratios: Optional[List[str]] = None
    rational: Optional[bool] = None


def _normalized(basis: NDArrayF64) -> NDArrayF64:
    """Scale a line so that its last nonzero entry is 1."""
    vector = basis[0]
    index = int(np.flatnonzero(np.abs(vector) > 1e-12)[-1])
    return np.asarray(vector / vector[index])


def leaf_diagnostic(
    pair: PairData,
    points: Optional[Sequence[Sequence[float]]] = None,
    rank_tol: float = PAIR_RANK_TOL,
    tol: float = VERIFY_TOL,
) -> LeafDiagnostic:
    """Rank of V cap K cap W per point and, for a constant line, its slope.

    Slope ratios are approximated by fractions with denominators up to
    MAX_DENOMINATOR; a ratio that no such fraction matches is
    reported as irrational.
    """
    samples = pair.samples() if points is None else points
    meets: List[Subspace] = [
        DiagramPoint.of(pair, p, rank_tol).meet() for p in samples
    ]
    ranks = [meet.dim for meet in meets]
    constant = bool(meets) and all(
        meet.gap(meets[0]) <= tol for meet in meets
    )
    diagnostic = LeafDiagnostic(ranks=ranks, constant=constant)
    if not constant or meets[0].dim != 1:
        return diagnostic
    direction = _normalized(meets[0].basis)
    fractions = [
        Fraction(float(x)).limit_denominator(MAX_DENOMINATOR)
        for x in direction
    ]
    diagnostic.direction = [float(x) for x in direction]
    diagnostic.ratios = [str(f) for f in fractions]
    diagnostic.rational = all(
        abs(float(f) - x) <= RATIO_TOL for f, x in zip(fractions, direction)
    )
    if not diagnostic.rational:
        logger.info("leaf direction %s has an irrational slope", direction)
    return diagnostic
