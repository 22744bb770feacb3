"""Run the bundled examples and compare them with their expected verdicts.

Every file in the corpus directory holds one entry: a manifest or a pair,
the command to run on it, options for that command and the expected
outcome.
"""
import glob
import os
from typing import Dict, List, Optional

from pandas import DataFrame
from pydantic import BaseModel, Field, validator

from ..common.errors import ManifestError
from ..common.io import load_json
from ..common.logger import logger
from ..common.typing import DictStrAny
from ..pair.result import Check
from .commands import (
    EXIT_FAIL,
    EXIT_OK,
    CommandReport,
    Settings,
    Timer,
    check_dirac,
    pushforward,
    realize,
    verify_pair,
)
from .manifest import parse_manifest

CORPUS_DIR = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "corpus"
)
COMMANDS = ("check-dirac", "pushforward", "realize-verify", "verify-pair")


class Expectation(BaseModel):
    """Expected outcome; unset fields are not compared."""

    passed: Optional[bool] = None
    classification: Optional[str] = None
    checks: Dict[str, bool] = {}


class CorpusEntry(BaseModel):
    """One bundled example."""

    schema_: int = Field(1, alias="schema")
    key: str = Field(..., alias="id")
    description: str = ""
    command: str
    manifest: Optional[DictStrAny] = None
    pair: Optional[DictStrAny] = None
    options: DictStrAny = {}
    expect: Expectation

    class Config:
        """Accept both the alias and the field name."""

        allow_population_by_field_name = True

    @validator("command")
    def check_command(  # pylint: disable=no-self-argument
        cls, value: str
    ) -> str:
        """Only corpus commands are allowed."""
        if value not in COMMANDS:
            raise ValueError(f"unknown command {value}")
        return value


def load_corpus(directory: str = CORPUS_DIR) -> List[CorpusEntry]:
    """Entries sorted by id."""
    entries = [
        CorpusEntry.parse_obj(load_json(path))
        for path in glob.glob(os.path.join(directory, "*.json"))
    ]
    return sorted(entries, key=lambda entry: entry.key)


def run_entry(entry: CorpusEntry, settings: Settings) -> CommandReport:
    """Run the command of one entry with its options on top of settings."""
    options = dict(entry.options)
    map_text = options.pop("map", None)
    expect = options.pop("expect", None)
    settings = Settings.parse_obj({**settings.dict(), **options})
    if entry.command == "verify-pair":
        if entry.pair is None:
            raise ManifestError(f"corpus entry {entry.key} has no pair")
        return verify_pair(entry.pair, settings, expect)
    if entry.manifest is None:
        raise ManifestError(f"corpus entry {entry.key} has no manifest")
    manifest = parse_manifest(entry.manifest)
    if entry.command == "check-dirac":
        return check_dirac(manifest, settings)
    if entry.command == "pushforward":
        return pushforward(manifest, map_text, settings)
    report, record = realize(manifest, settings)
    if record is None:
        return report
    return verify_pair(record.dict(by_alias=True), settings, expect)


def matches(expect: Expectation, report: CommandReport) -> bool:
    """Whether the report agrees with every expected field."""
    passed = report.exit_code == EXIT_OK
    if expect.passed is not None and expect.passed != passed:
        return False
    if (
        expect.classification is not None
        and expect.classification != report.classification
    ):
        return False
    flags = {check.name: check.passed for check in report.checks}
    return all(
        flags.get(name) == value for name, value in expect.checks.items()
    )


def _summary(
    passed: Optional[bool],
    classification: Optional[str],
    checks: Dict[str, bool],
) -> str:
    parts = []
    if passed is not None:
        parts.append("pass" if passed else "fail")
    if classification is not None:
        parts.append(classification)
    parts += [
        f"{name}={'ok' if value else 'fail'}" for name, value in checks.items()
    ]
    return "; ".join(parts)


def run_corpus(
    settings: Settings,
    only: Optional[str] = None,
    directory: str = CORPUS_DIR,
) -> CommandReport:
    """Run the corpus, or the single entry only, and tabulate the result."""
    timer = Timer()
    entries = load_corpus(directory)
    if only is not None:
        entries = [entry for entry in entries if entry.key == only]
        if not entries:
            raise ManifestError(f"no corpus entry {only}")
    rows, checks = [], []
    for entry in entries:
        logger.info("corpus entry %s", entry.key)
        report = run_entry(entry, settings)
        flags = {check.name: check.passed for check in report.checks}
        actual = _summary(
            report.exit_code == EXIT_OK,
            report.classification,
            {name: flags.get(name, False) for name in entry.expect.checks},
        )
        expected = _summary(
            entry.expect.passed,
            entry.expect.classification,
            entry.expect.checks,
        )
        match = matches(entry.expect, report)
        rows.append(
            {
                "id": entry.key,
                "command": entry.command,
                "expected": expected,
                "actual": actual,
                "match": match,
            }
        )
        checks.append(Check(name=entry.key, passed=match, detail=actual))
    data_frame = DataFrame(
        rows, columns=["id", "command", "expected", "actual", "match"]
    )
    logger.info("\n%s", data_frame.to_markdown(index=False))
    passed = all(check.passed for check in checks)
    return CommandReport(
        command="corpus",
        params={"only": only, "entries": len(entries)},
        checks=checks,
        tables={"rows": rows},
        elapsed_ms=timer.elapsed(),
        exit_code=EXIT_OK if passed else EXIT_FAIL,
    )
