"""Verdict records shared by every check in the library."""

import math
from typing import AbstractSet, Dict, List, Optional, Sequence

from pandas import DataFrame
from pydantic import BaseModel


class Check(BaseModel):
    """One named pass/fail check with its worst residual and witness."""

    name: str
    passed: bool
    residual: Optional[float] = None
    point: Optional[List[float]] = None
    detail: Optional[str] = None

    @classmethod
    def from_residuals(
        cls,
        name: str,
        residuals: Sequence[float],
        points: Sequence[Sequence[float]],
        tol: float,
        detail: Optional[str] = None,
    ) -> "Check":
        """Pass iff every residual is at most tol; keep the worst point."""
        if not residuals:
            return cls(name=name, passed=True, residual=0.0, detail=detail)
        worst = max(
            range(len(residuals)),
            key=lambda i: math.inf
            if not math.isfinite(residuals[i])
            else residuals[i],
        )
        value = float(residuals[worst])
        return cls(
            name=name,
            passed=math.isfinite(value) and value <= tol,
            residual=value if math.isfinite(value) else None,
            point=[float(x) for x in points[worst]],
            detail=detail,
        )

    @classmethod
    def from_flags(
        cls,
        name: str,
        flags: Sequence[bool],
        points: Sequence[Sequence[float]],
        detail: Optional[str] = None,
    ) -> "Check":
        """Pass iff every flag holds; keep the first failing point."""
        for flag, point in zip(flags, points):
            if not flag:
                return cls(
                    name=name,
                    passed=False,
                    point=[float(x) for x in point],
                    detail=detail,
                )
        return cls(name=name, passed=True, detail=detail)


class Report(BaseModel):
    """An ordered list of checks.

    Functions:
        passed -> bool: all checks passed.
        check(name) -> Check: look up one check.
        pd_frame() -> pandas.DataFrame: one row per check.
        table() -> str: the frame as a markdown table.
    """

    checks: List[Check] = []

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> Check:
        """Return the check called name."""
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def flags(self) -> Dict[str, bool]:
        """Map of check names to outcomes."""
        return {check.name: check.passed for check in self.checks}

    def pd_frame(
        self,
        include: Optional[AbstractSet[str]] = None,
        exclude: Optional[AbstractSet[str]] = None,
    ) -> DataFrame:
        """Convert the checks into a data frame indexed by name."""
        rows = {
            check.name: {
                "passed": check.passed,
                "residual": check.residual,
                "point": None
                if check.point is None
                else ", ".join(f"{x:.4g}" for x in check.point),
            }
            for check in self.checks
            if (include is None or check.name in include)
            and (exclude is None or check.name not in exclude)
        }
        return DataFrame.from_dict(
            rows, orient="index", columns=["passed", "residual", "point"]
        )

    def table(
        self,
        include: Optional[AbstractSet[str]] = None,
        exclude: Optional[AbstractSet[str]] = None,
    ) -> str:
        """Format the checks for printing."""
        data_frame = self.pd_frame(include, exclude)
        summary = data_frame.to_markdown(floatfmt=".3g")
        return "\n" + str(summary).replace("nan", " - ") + "\n"

    def __str__(self) -> str:
        """Same as `table()`."""
        return self.table()


class Verdict(Report):
    """Checks plus an overall classification."""

    classification: str = "none"
    equivalence: Optional[Dict[str, bool]] = None
