import json
import shutil
import subprocess
import sys

import pytest

from kmgame.cli import main
from kmgame.config import RunConfig, load_config

SMALL = '{"mu": [1, 1, 3], "sgn": ["+", "-", "+"]}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("kind,k,count", [("skeletons", 5, 42), ("classes", 2, 7), ("maps", 1, 1), ("maps", 4, 24)])
def test_enumerate_counts(capsys, kind, k, count):
    code, out, _ = run(capsys, "enumerate", "--kind", kind, "--k", str(k))
    assert code == 0
    data = json.loads(out)
    assert data["count"] == count == len(data["items"])


def test_output_is_deterministic(capsys):
    first = run(capsys, "classify", "--k", "3")[1]
    second = run(capsys, "classify", "--k", "3")[1]
    assert first == second and first.endswith("\n")


def test_reduce(capsys):
    code, out, _ = run(capsys, "reduce", "--input", '{"mu": [1, 2, 1], "sgn": ["+", "-", "+"]}')
    data = json.loads(out)
    assert code == 0
    assert data["tamed"]["mu"] == [1, 1, 2]
    assert data["sigma"] == [2, 4, 3]


def test_domains_modes(capsys):
    code, out, _ = run(capsys, "domains", "--input", SMALL)
    data = json.loads(out)
    assert code == 0 and data["kind"] == "reference"
    assert [l["lower"] for l in data["limits"]] == [None, None, 4]
    code, out, _ = run(capsys, "domains", "--input", SMALL, "--mode", "enlarged", "--format", "text")
    assert "t3:[0,t1]" in out


def test_dtree_text_and_dot(capsys):
    code, out, _ = run(capsys, "dtree", "--input", SMALL, "--format", "text")
    assert code == 0 and out.startswith("D1: r+ D2, r- D3\n")
    code, out, _ = run(capsys, "dtree", "--input", SMALL, "--format", "dot")
    assert out.startswith("digraph dtree {")


def test_dtree_rejects_non_reference(capsys):
    code, _, err = run(capsys, "dtree", "--input", '{"mu": [1, 1, 2], "sgn": ["-", "+", "+"]}')
    assert code == 2 and "reference" in err


def test_render_dot(capsys):
    code, out, _ = run(capsys, "render", "--input", SMALL, "--format", "dot")
    assert code == 0 and 'n3 [label="3-"];' in out


def test_input_from_file(capsys, tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(SMALL)
    code, out, _ = run(capsys, "render", "--input", str(path))
    assert code == 0 and json.loads(out)["mu"] == [1, 1, 3]


@pytest.mark.parametrize("payload,where", [
    ('{"mu": [1, 1, 3], "sgn": ["+", "x", "+"]}', "$.sgn[1]"),
    ('{"mu": [1, "a"], "sgn": ["+", "+"]}', "$.mu[1]"),
    ('{"sgn": ["+"]}', "$"),
])
def test_schema_errors_report_path(capsys, payload, where):
    code, _, err = run(capsys, "render", "--input", payload)
    assert code == 2
    assert f"schema error at {where}:" in err


def test_inadmissible_pair(capsys):
    code, _, err = run(capsys, "render", "--input", '{"mu": [1, 3], "sgn": ["+", "+"]}')
    assert code == 2 and "invalid pair" in err


def test_resource_cap(capsys):
    code, _, err = run(capsys, "classify", "--k", "9")
    assert code == 2 and "cap" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["enumerate", "--kind", "nonsense"])
    assert exc.value.code == 2


def test_verify_pass_and_fail(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "golden")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "--suite", "partition", "--k", "3", "--format", "text")
    assert code == 0 and "PASS partition/source-count k=3" in out
    # an impossible tolerance makes a numerical check fail
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol": 1e-300, "trials": 2, "k": 3}))
    code, out, _ = run(capsys, "verify", "--suite", "identities", "--config", str(cfg), "--fail-fast")
    report = json.loads(out)
    assert code == 1 and not report["pass"]
    assert not report["checks"][-1]["pass"]


def test_config_errors(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": 0}))
    code, _, err = run(capsys, "verify", "--suite", "golden", "--config", str(cfg))
    assert code == 2 and "$.grid" in err
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, _ = run(capsys, "verify", "--suite", "golden", "--config", str(cfg))
    assert code == 2


def test_config_loading(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 2, "seed": 5}))
    loaded = load_config(str(cfg))
    assert loaded == RunConfig(k=2, seed=5)
    assert loaded.updated(k=None, grid=4).grid == 4


def test_out_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "enumerate", "--k", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["count"] == 2


@pytest.mark.skipif(shutil.which("kmgame") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["kmgame", "enumerate", "--kind", "skeletons", "--k", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 5


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "kmgame.cli", "verify", "--suite", "golden", "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.rstrip().endswith("# all checks passed")


def test_reduce_wild_member_to_reference(capsys):
    code, out, _ = run(capsys, "reduce", "--input", '{"mu": [1, 1, 1, 3, 2, 2], "sgn": ["-", "+", "+", "-", "-", "+"]}')
    data = json.loads(out)
    assert data["sigma_is_identity"]
    assert data["reference"]["mu"] == [1, 1, 1, 2, 4, 4]
    assert data["reference"]["sgn"] == ["+", "+", "-", "-", "+", "-"]
    # rho sends 2, 3, 4, 6, 7 to 3, 4, 2, 7, 6
    assert data["rho"] == [3, 4, 2, 5, 7, 6]


def test_reduce_tamed_input_text(capsys):
    code, out, _ = run(capsys, "reduce", "--format", "text", "--input", SMALL)
    assert code == 0 and "(identity)" in out


def test_jobs_flag(capsys):
    code, _, err = run(capsys, "verify", "--suite", "golden", "--jobs", "0")
    assert code == 2 and "--jobs" in err
