"""The diracctl commands on parsed manifests and pair files."""
import time
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..common.errors import ChartExitError, FlowError, QuadratureError
from ..common.logger import logger
from ..common.sampling import (
    GRID_SIZE,
    SAMPLE_COUNT,
    SAMPLE_SEED,
    box_center,
    grid_points,
    sample_box,
)
from ..common.typing import DictStrAny
from ..dirac.coupling import coupling_verify
from ..dirac.frame import DIRAC_TOL, is_dirac, is_poisson
from ..dirac.pushforward import (
    FiberSection,
    basic_check,
    family_courant,
    pushforward_family,
    rank_profile,
)
from ..linalg.lindirac import Subspace, tangent_part
from ..pair.realization import (
    FLOW_STEPS,
    QUAD_NODES,
    RADIUS,
    RealizationRecord,
    build_realization,
    zero_section_checks,
)
from ..pair.result import Check, Report
from ..pair.verify import (
    CLASSIFICATIONS,
    DUAL,
    NONE,
    VERIFY_TOL,
    poisson_leg_check,
    verify_dual_pair,
)
from .manifest import (
    Manifest,
    build_bivector,
    build_coupling,
    build_frame,
    build_map,
    build_twist,
    load_pair,
    parse_map,
)

REPORT_SCHEMA = 1
EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

FORWARD = "forward Dirac"
NOT_FORWARD = "not forward"
PUSHFORWARD_VERDICT = ("fibre_invariant", "constant dim s_!L^T")
EXPECT_LABELS = {
    "dual-pair": DUAL,
    "weak": CLASSIFICATIONS[1],
    "pre-dual": CLASSIFICATIONS[2],
    "none": NONE,
}


class Settings(BaseModel):
    """Numeric defaults, overridden by a settings file and then flags.

    A tol of None means the default tolerance of the command.
    """

    grid: int = GRID_SIZE
    tol: Optional[float] = None
    samples: int = SAMPLE_COUNT
    seed: int = SAMPLE_SEED
    radius: float = RADIUS
    quad: int = QUAD_NODES
    steps: int = FLOW_STEPS
    nproc: int = 1

    class Config:
        """Reject unknown settings."""

        extra = "forbid"


class CommandReport(BaseModel):
    """Outcome of one command and the exit code it maps to."""

    schema_: int = Field(REPORT_SCHEMA, alias="schema")
    command: str
    params: DictStrAny = {}
    checks: List[Check] = []
    classification: Optional[str] = None
    tables: Optional[DictStrAny] = None
    elapsed_ms: Optional[int] = None
    exit_code: int = EXIT_OK

    class Config:
        """Accept both the alias and the field name."""

        allow_population_by_field_name = True

    def content(self, deterministic: bool = False) -> DictStrAny:
        """Report JSON with a fixed key order."""
        result: DictStrAny = {
            "schema": self.schema_,
            "command": self.command,
            "params": self.params,
            "checks": [
                {
                    "name": check.name,
                    "passed": check.passed,
                    "max_residual": check.residual,
                    "worst_point": check.point,
                    "detail": check.detail,
                }
                for check in self.checks
            ],
        }
        if self.classification is not None:
            result["classification"] = self.classification
        if self.tables is not None:
            result["tables"] = self.tables
        if not deterministic and self.elapsed_ms is not None:
            result["elapsed_ms"] = self.elapsed_ms
        return result

    def table(self) -> str:
        """The checks as a markdown table."""
        return Report(checks=self.checks).table()


class Timer:
    """Wall clock in milliseconds since creation."""

    def __init__(self) -> None:
        """Start the clock."""
        self.start = time.perf_counter()

    def elapsed(self) -> int:
        """Milliseconds since start."""
        return int(round(1000 * (time.perf_counter() - self.start)))


def check_dirac(manifest: Manifest, settings: Settings) -> CommandReport:
    """Rank, isotropy and Courant residuals of the manifest structure.

    Bivectors also get the Jacobi check and coupling manifests the
    conditions on their triple.
    """
    timer = Timer()
    tol = DIRAC_TOL if settings.tol is None else settings.tol
    frame = build_frame(manifest)
    points = grid_points(manifest.box, settings.grid)
    report = is_dirac(
        frame, points, tol, build_twist(manifest), settings.nproc
    )
    checks = list(report.checks)
    pi = build_bivector(manifest)
    if pi is not None:
        checks += is_poisson(pi, points, tol).checks
    if manifest.structure.kind == "coupling":
        triple = build_coupling(manifest)
        checks += coupling_verify(triple, points, tol).checks
    passed = all(check.passed for check in checks)
    return CommandReport(
        command="check-dirac",
        params={
            "manifest": manifest.name,
            "grid": settings.grid,
            "tol": tol,
            "points": len(points),
        },
        checks=checks,
        elapsed_ms=timer.elapsed(),
        exit_code=EXIT_OK if passed else EXIT_FAIL,
    )


def _fibre_checks(
    manifest: Manifest, map_text: Optional[str], points: List[List[float]]
) -> Tuple[List[Check], Dict[str, List[int]]]:
    frame = build_frame(manifest)
    fmap = (
        build_map(manifest, "s")
        if map_text is None
        else parse_map(manifest.dim, map_text)
    )
    section = FiberSection(fmap, box_center(manifest.box))
    gaps, tangent_dims = [], []
    m = fmap.target_dim
    for point in points:
        image = pushforward_family(frame, fmap, point)
        partner = section.value(fmap.value(point))
        gaps.append(image.gap(pushforward_family(frame, fmap, partner)))
        tangent_dims.append(
            image.intersect(tangent_part(m, Subspace.full(m))).dim
        )
    profile = rank_profile(frame, fmap, points)
    checks = [
        Check.from_residuals(
            "fibre_invariant",
            gaps,
            points,
            VERIFY_TOL,
            "s_!(L) at p vs at the fibre section over s(p)",
        ),
        Check.from_flags(
            "constant dim s_!L^T",
            [dim == tangent_dims[0] for dim in tangent_dims],
            points,
            "grid-level heuristic",
        ),
    ]
    checks += profile.report().checks
    checks += basic_check(frame, fmap, points).report.checks
    if profile.smooth:
        checks.append(
            Check.from_residuals(
                "family_involutive",
                [family_courant(frame, fmap, p) for p in points],
                points,
                VERIFY_TOL,
                "Courant tensor of L^s by differences",
            )
        )
    dims = dict(profile.dims)
    dims["s_!L^T"] = tangent_dims
    return checks, dims


def pushforward(
    manifest: Manifest, map_text: Optional[str], settings: Settings
) -> CommandReport:
    """Smoothness of L^s and whether s_!(L) is a Dirac structure.

    The map comes from map_text ("expr;expr") or the manifest map s.
    s is forward Dirac when s_!(L) is constant along the fibres and its
    tangent part has constant rank; the other checks diagnose L^s.
    """
    timer = Timer()
    points = grid_points(manifest.box, settings.grid)
    checks, dims = _fibre_checks(manifest, map_text, points)
    flags = {check.name: check.passed for check in checks}
    forward = all(flags[name] for name in PUSHFORWARD_VERDICT)
    return CommandReport(
        command="pushforward",
        params={
            "manifest": manifest.name,
            "map": map_text,
            "grid": settings.grid,
        },
        checks=checks,
        classification=FORWARD if forward else NOT_FORWARD,
        tables={"points": points, "dims": dims},
        elapsed_ms=timer.elapsed(),
        exit_code=EXIT_OK if forward else EXIT_FAIL,
    )


def realize(
    manifest: Manifest, settings: Settings
) -> Tuple[CommandReport, Optional[RealizationRecord]]:
    """Build the realization of the manifest structure.

    A chart that collapses below the radius floor or a quadrature that
    never converges is a verdict failure, not an input error.
    """
    timer = Timer()
    frame = build_frame(manifest)
    params: DictStrAny = {
        "manifest": manifest.name,
        "radius": settings.radius,
        "quad": settings.quad,
        "steps": settings.steps,
    }
    try:
        pair = build_realization(
            frame,
            settings.radius,
            settings.quad,
            settings.steps,
            name=manifest.name,
        )
    except (ChartExitError, FlowError, QuadratureError) as err:
        logger.error("realization of %s failed: %s", manifest.name, err)
        return (
            CommandReport(
                command="realize",
                params=params,
                checks=[
                    Check(name="realization", passed=False, detail=str(err))
                ],
                elapsed_ms=timer.elapsed(),
                exit_code=EXIT_FAIL,
            ),
            None,
        )
    zero = zero_section_checks(pair)
    record = pair.record(manifest.dict(by_alias=True), zero)
    center = box_center(pair.box)
    report = CommandReport(
        command="realize",
        params=params,
        checks=zero.checks,
        tables={
            "radius": pair.radius,
            "box": [list(b) for b in pair.box],
            "omega_center": np.round(pair.omega_at(center), 12).tolist(),
            "lift_completeness": "not evaluated",
        },
        elapsed_ms=timer.elapsed(),
        exit_code=EXIT_OK if zero.passed else EXIT_FAIL,
    )
    return report, record


def verify_pair(
    content: DictStrAny,
    settings: Settings,
    expect: Optional[str] = None,
) -> CommandReport:
    """Classify a pair file; expect is one of EXPECT_LABELS.

    Without expect only the classification "none" fails.
    """
    timer = Timer()
    tol = VERIFY_TOL if settings.tol is None else settings.tol
    data, _ = load_pair(content)
    points = sample_box(data.box, settings.samples, settings.seed)
    verdict = verify_dual_pair(data, points, tol, nprocs=settings.nproc)
    legs = poisson_leg_check(data, points, tol)
    if expect is None:
        passed = verdict.classification != NONE
    else:
        passed = verdict.classification == EXPECT_LABELS[expect]
    tables: DictStrAny = {
        "equivalence": verdict.equivalence,
        "poisson_legs": legs.flags(),
    }
    return CommandReport(
        command="verify-pair",
        params={
            "pair": data.name,
            "samples": settings.samples,
            "seed": settings.seed,
            "tol": tol,
            "expect": expect,
        },
        checks=verdict.checks,
        classification=verdict.classification,
        tables=tables,
        elapsed_ms=timer.elapsed(),
        exit_code=EXIT_OK if passed else EXIT_FAIL,
    )
