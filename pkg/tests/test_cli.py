import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from genou import __version__
from genou.cli import ConfigError, RunConfig, main, parse_function
from genou.kernel import kernel_values
from genou.semigroup import semigroup_values


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_eval_emu_at_zero_mu(capsys):
    code, out, _ = run(capsys, "eval", "emu", "--mu", "0", "--x", "1")
    assert code == 0
    assert float(table(out)[0]["value"]) == pytest.approx(math.e, rel=1e-15)


def test_eval_hermite_degree_zero(capsys):
    code, out, _ = run(capsys, "eval", "hermite", "--mu", "0.5", "--n", "0", "--x", "3")
    assert code == 0 and float(table(out)[0]["value"]) == 1.0


def test_eval_kernel_matches_library_bitwise(capsys):
    code, out, _ = run(capsys, "eval", "kernel", "--mu", "0.5", "--r", "0.5", "--x", "1,-2.5", "--y", "1")
    assert code == 0
    rows = table(out)
    lib = kernel_values(0.5, 0.5, np.array([1.0, -2.5]), 1.0)
    assert [float(r["value"]) for r in rows] == list(lib)


def test_eval_semigroup_and_maximal(capsys):
    code, out, _ = run(capsys, "eval", "semigroup", "--mu", "0.5", "--t", "1", "--x", "0.5", "--f", "tri:1:0.5")
    assert code == 0
    ref = semigroup_values(0.5, parse_function("tri:1:0.5", 0.5), 0.5, math.exp(-1))
    assert float(table(out)[0]["value"]) == float(ref)
    code, out, _ = run(capsys, "eval", "semigroup", "--mu", "0.5", "--t", "1", "--x", "0.5", "--f", "hermite:2",
                       "--method", "spectral")
    assert code == 0 and table(out)[0]["method"] == "spectral"
    code, out, _ = run(capsys, "eval", "maximal", "--mu", "0.5", "--x", "0,1", "--f", "const", "--n-r", "8")
    assert code == 0
    assert all(abs(float(r["value"]) - 1) < 1e-8 for r in table(out))


def test_invalid_mu_message(capsys):
    code, _, err = run(capsys, "eval", "emu", "--mu", "-0.5", "--x", "1")
    assert code == 2
    assert "mu > -1/2" in err


@pytest.mark.parametrize("argv", [
    ["eval", "kernel", "--mu", "0.5", "--r", "1.5", "--x", "1", "--y", "1"],
    ["eval", "semigroup", "--mu", "0.5", "--t", "1", "--x", "1", "--f", "sine:1e7:2:1"],
    ["eval", "emu", "--mu", "0", "--x", "1", "--method", "spectral"],
    ["eval", "emu", "--x", "1"],
    ["verify", "bogus"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize("argv", [
    ["eval", "emu", "--mu", "0.5", "--x", "800"],
    ["eval", "hermite", "--mu", "0.5", "--n", "400", "--x", "1e5"],
])
def test_numeric_failure_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert "numeric failure" in err and out == ""


def test_json_mirrors_csv(capsys):
    argv = ["eval", "emu", "--mu", "0.5", "--x", "-3,0,2"]
    _, out_csv, _ = run(capsys, *argv)
    _, out_json, _ = run(capsys, *argv, "--format", "json")
    doc = json.loads(out_json)
    assert doc["genou_version"] == __version__
    assert doc["config"]["mu"] == 0.5
    rows = table(out_csv)
    assert list(rows[0]) == doc["columns"]
    for r, j in zip(rows, doc["records"]):
        assert float(r["value"]) == j["value"]


def test_csv_header_embeds_config(capsys):
    _, out, _ = run(capsys, "eval", "emu", "--mu", "0.5", "--x", "1", "--seed", "7")
    lines = out.splitlines()
    assert lines[0] == f"# genou {__version__}"
    assert json.loads(lines[1][len("# config: "):])["seed"] == 7


def test_out_file(tmp_path, capsys):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "eval", "emu", "--mu", "0.5", "--x", "1", "--out", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("# genou")


def test_verify_specfun(capsys):
    code, out, _ = run(capsys, "verify", "specfun")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("checks passed")
    assert "FAIL" not in out


def test_experiment_quick_linf(capsys):
    code, out, err = run(capsys, "experiment", "linf", "--mu", "0.5", "--quick", "--n-r", "16")
    assert code == 0
    summary = json.loads([ln for ln in out.splitlines() if ln.startswith("# summary: ")][0][11:])
    assert abs(summary["sup_ratio"] - 1) <= 1e-6
    assert "sup ||T*f||_inf/||f||_inf" in err


def test_parse_function():
    assert parse_function("const:2", 0.5)(np.array([5.0]))[0] == 2.0
    assert parse_function("indicator:0:1", 0.5)(np.array([0.5, 2.0])).tolist() == [1.0, 0.0]
    for bad in ("nope", "bump:1", "tri:a:b", "indicator:1"):
        with pytest.raises(ConfigError):
            parse_function(bad, 0.5)


def test_runconfig_validation():
    with pytest.raises(ConfigError, match=r"mu > -1/2"):
        RunConfig(command="eval", kind="emu", mu=-1.0).validate()


def test_byte_identical_reruns(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"m{k}.csv"
        subprocess.run([sys.executable, "-m", "genou", "experiment", "majorant", "--mu", "0.5", "--quick",
                        "--n-r", "8", "--out", str(path)], check=True, capture_output=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
