import csv
import io
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from catbound.cli import parse_and_dispatch

CONFIGS = Path(__file__).resolve().parents[1] / "examples" / "configs"


def run(capsys, *argv):
    code = parse_and_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_metric_prints_bare_value(capsys):
    code, out, _ = run(capsys, "metric", "--space", str(CONFIGS / "tree3.json"), "--pair", "000,001")
    assert code == 0
    assert float(out) == pytest.approx(0.4, abs=1e-12)


def test_metric_visual(capsys):
    code, out, _ = run(capsys, "metric", "--space", str(CONFIGS / "tree3.json"), "--kind", "visual",
                       "--pair", "000,100")
    assert code == 0 and float(out) == pytest.approx(1.0)


def test_invalid_epsilon_is_a_usage_error(capsys):
    code, _, err = run(capsys, "metric", "--space", str(CONFIGS / "tree3.json"), "--kind", "visual",
                       "--pair", "000,001", "--set", "epsilon=-1")
    assert code == 2 and "epsilon" in err


def test_missing_space(capsys):
    code, _, err = run(capsys, "metric", "--pair", "000,001")
    assert code == 2 and "space" in err


def test_space_info(capsys):
    code, out, _ = run(capsys, "space-info", "--space", str(CONFIGS / "h2.json"))
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "hyperbolic_plane" and doc["schema_version"] == 1


def test_cover_json(capsys, tmp_path):
    target = tmp_path / "cover.json"
    code, _, _ = run(capsys, "cover", "--space", str(CONFIGS / "plane.json"), "--set", "net=60",
                     "--set", "L=0.3", "--out", str(target))
    doc = json.loads(target.read_text())
    assert code == 0
    assert min(doc["stats"]["min_family_separation"]) >= 0.3 - 1e-12


def test_annulus_csv(capsys):
    code, out, _ = run(capsys, "experiment", "annulus", "--space", str(CONFIGS / "plane.json"), "--D", "10,20")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["D", "mesh", "lebesgue", "M"]
    assert [float(r[0]) for r in rows[1:]] == [10.0, 20.0]
    assert all(float(r[2]) == pytest.approx(1.0, abs=1e-12) for r in rows[1:])


def test_pullback_tree(capsys):
    code, out, _ = run(capsys, "pullback", "--space", str(CONFIGS / "tree3.json"), "--set", "L=[2.0, 1.0]")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and len(doc["reports"]) == 2


def test_pullback_needs_a_building(capsys):
    code, _, _ = run(capsys, "pullback", "--space", str(CONFIGS / "plane.json"))
    assert code == 2


def test_verify_rejects_unknown_keys(capsys):
    code, _, err = run(capsys, "verify", "--set", "nonsense=1")
    assert code == 2 and "nonsense" in err


@pytest.mark.skipif(shutil.which("catbound") is None, reason="console script not installed")
def test_console_script_verify(tmp_path):
    target = tmp_path / "report.json"
    proc = subprocess.run(["catbound", "verify", "--out", str(target)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(target.read_text())["checks"]


def test_verify_refuses_inadmissible_epsilon(capsys):
    code, _, err = run(capsys, "verify", "--set", "epsilon_h2=0.5")
    assert code == 2 and "sqrt(2) - 1" in err
