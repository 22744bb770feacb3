"""Test the diracctl command line."""
import json
import os
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import pytest

from ..common.io import load_json
from ..common.quiet import mute
from ..common.typing import DictStrAny
from ..unittest.util import get_test_file
from .diracctl import main

Capture = pytest.CaptureFixture[str]


@pytest.fixture(autouse=True)
def unmute() -> Iterator[None]:
    """Leave the logger loud for other tests."""
    yield
    mute(False)


def run(
    argv: List[str], capsys: Capture
) -> Tuple[int, Optional[DictStrAny]]:
    """Exit code and printed report."""
    code = main(["--quiet", "--deterministic"] + argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


def test_check_dirac(capsys: Capture) -> None:
    """Gr(dx^dy) passes with a stable report layout."""
    argv = ["check-dirac", get_test_file("symplectic.json"), "--grid", "3"]
    code, report = run(argv, capsys)
    assert code == 0
    assert list(report) == ["schema", "command", "params", "checks"]
    assert report["command"] == "check-dirac"
    assert report["params"]["points"] == 9
    assert [c["name"] for c in report["checks"]] == [
        "full_rank",
        "lagrangian",
        "involutive",
    ]
    assert set(report["checks"][1]) == {
        "name",
        "passed",
        "max_residual",
        "worst_point",
        "detail",
    }
    main(["--quiet", "--deterministic"] + argv)
    assert json.loads(capsys.readouterr().out) == report


def test_elapsed(capsys: Capture) -> None:
    """The wall clock closes the report unless deterministic."""
    main(["--quiet", "check-dirac", get_test_file("symplectic.json")])
    report = json.loads(capsys.readouterr().out)
    assert list(report)[-1] == "elapsed_ms"


def test_not_involutive(capsys: Capture) -> None:
    """[d_z, z d_x - dy] = d_x pairs to 1 with z d_y + dx."""
    argv = ["check-dirac", get_test_file("ls_frame.json"), "--grid", "3"]
    code, report = run(argv, capsys)
    assert code == 1
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["lagrangian"]["passed"]
    assert not checks["involutive"]["passed"]
    assert checks["involutive"]["max_residual"] == pytest.approx(1.0, 1e-8)


@pytest.mark.parametrize(
    "name", ["malformed.json", "bad_kind.json", "missing.json"]
)
def test_input_errors(
    name: str,
    capsys: Capture,
    caplog: pytest.LogCaptureFixture,
) -> None:
    """Bad manifests exit with 2 and print no report."""
    code = main(["check-dirac", get_test_file(name)])
    assert code == 2
    assert capsys.readouterr().out == ""
    if name == "malformed.json":
        assert "offset" in caplog.text


def test_usage() -> None:
    """argparse exits with 2 on usage errors and 0 on --version."""
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0


def test_config(capsys: Capture) -> None:
    """Settings files override defaults and flags override both."""
    manifest = get_test_file("symplectic.json")
    settings = get_test_file("settings.yaml")
    _, report = run(["--config", settings, "check-dirac", manifest], capsys)
    assert report["params"]["grid"] == 3
    argv = ["--config", settings, "check-dirac", manifest, "--grid", "2"]
    _, report = run(argv, capsys)
    assert report["params"]["points"] == 4


def test_report_file(tmp_path: Path, capsys: Capture) -> None:
    """--report writes the report instead of printing it."""
    path = os.path.join(tmp_path, "report.json")
    argv = ["--report", path, "check-dirac", get_test_file("symplectic.json")]
    assert main(argv) == 0
    assert capsys.readouterr().out == ""
    assert load_json(path)["command"] == "check-dirac"


def test_pushforward(capsys: Capture) -> None:
    """Gr(dx^dy) pushes forward to T*R along x."""
    argv = ["pushforward", get_test_file("symplectic.json"), "--map", "x1"]
    code, report = run(argv + ["--grid", "3"], capsys)
    assert code == 0
    assert report["classification"] == "forward Dirac"
    flags = {c["name"]: c["passed"] for c in report["checks"]}
    assert flags["family_involutive"]
    assert not flags["vertical_in_L"]
    assert report["tables"]["dims"]["L^Vperp"] == [1] * 9


def test_pushforward_map(capsys: Capture) -> None:
    """Without --map the manifest needs a map s."""
    argv = ["pushforward", get_test_file("symplectic.json")]
    code, report = run(argv, capsys)
    assert code == 2
    assert report is None


def test_realize_then_verify(tmp_path: Path, capsys: Capture) -> None:
    """T*M realizes with t = s and verifies as a dual pair."""
    path = os.path.join(tmp_path, "pair.json")
    argv = ["realize", get_test_file("cotangent.json"), "--out", path]
    code, report = run(argv + ["--quad", "4", "--steps", "8"], capsys)
    assert code == 0
    assert report["tables"]["radius"] == 1.0
    assert report["tables"]["lift_completeness"] == "not evaluated"
    assert load_json(path)["kind"] == "realization"
    argv = ["verify-pair", path, "--samples", "10", "--expect", "dual-pair"]
    code, report = run(argv, capsys)
    assert code == 0
    assert report["classification"] == "dual pair"
    assert all(report["tables"]["equivalence"].values())


def test_verify_pre_dual(capsys: Capture) -> None:
    """The pre-dual diagram is reported but fails --expect dual-pair."""
    path = get_test_file("pre_dual_pair.json")
    code, report = run(["verify-pair", path, "--samples", "10"], capsys)
    assert code == 0
    assert report["classification"] == "pre-dual pair only"
    argv = ["verify-pair", path, "--samples", "10", "--expect", "dual-pair"]
    code, _ = run(argv, capsys)
    assert code == 1


def test_corpus_only(capsys: Capture) -> None:
    """One corpus entry by id; unknown ids are input errors."""
    code, report = run(["corpus", "--only", "graph-x-dxdy"], capsys)
    assert code == 0
    assert [c["name"] for c in report["checks"]] == ["graph-x-dxdy"]
    code, _ = run(["corpus", "--only", "no-such-entry"], capsys)
    assert code == 2
