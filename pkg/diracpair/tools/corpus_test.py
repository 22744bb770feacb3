"""Test the bundled corpus and its runner."""
import os
import shutil
from pathlib import Path

import pytest

from ..common.errors import ManifestError
from ..common.io import dump_json, load_json
from .commands import CommandReport, Settings
from .corpus import CORPUS_DIR, Expectation, load_corpus, matches, run_corpus
from .manifest import parse_manifest, parse_pair


def test_entries() -> None:
    """Every entry is valid and ids are unique."""
    entries = load_corpus()
    assert len(entries) >= 10
    keys = [entry.key for entry in entries]
    assert len(set(keys)) == len(keys)
    for entry in entries:
        if entry.manifest is not None:
            parse_manifest(entry.manifest)
        if entry.pair is not None:
            parse_pair(entry.pair)


def test_matches() -> None:
    """Unset expectations are not compared."""
    report = CommandReport(
        command="verify-pair", classification="dual pair", exit_code=0
    )
    assert matches(Expectation(), report)
    assert matches(Expectation(passed=True), report)
    assert not matches(Expectation(passed=False), report)
    assert not matches(Expectation(classification="none"), report)
    assert not matches(Expectation(checks={"omega_closed": True}), report)


@pytest.mark.parametrize(
    "key",
    [
        "graph-x-dxdy",
        "ls-frame",
        "untwisted-graph",
        "twisted-graph",
        "graph-x-dxdy-along-x",
        "cubic-form-along-x",
        "foliation-along-x",
        "pre-dual-pair",
        "foliation-pair",
        "tampered-pair",
        "point-target-pair",
        "realize-cotangent",
    ],
)
def test_entry(key: str) -> None:
    """The entry reproduces its expected verdict."""
    report = run_corpus(Settings(), only=key)
    assert report.exit_code == 0, report.table()
    assert [check.name for check in report.checks] == [key]


def test_full_run() -> None:
    """Every bundled example matches."""
    report = run_corpus(Settings())
    assert report.exit_code == 0, report.table()
    assert len(report.tables["rows"]) == len(load_corpus())


def test_mismatch(tmp_path: Path) -> None:
    """A wrong expectation fails the run; unknown ids are errors."""
    content = load_json(os.path.join(CORPUS_DIR, "graph_x_dxdy.json"))
    content["expect"] = {"passed": False}
    dump_json(os.path.join(tmp_path, "wrong.json"), content)
    shutil.copy(os.path.join(CORPUS_DIR, "ls_frame.json"), tmp_path)
    report = run_corpus(Settings(), directory=str(tmp_path))
    assert report.exit_code == 1
    assert [check.passed for check in report.checks] == [False, True]
    with pytest.raises(ManifestError):
        run_corpus(Settings(), only="missing", directory=str(tmp_path))
