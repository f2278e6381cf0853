import json
import shutil
import subprocess

import pytest

from transduct import _backend
from transduct.cli import EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, main


@pytest.fixture(autouse=True)
def _restore_backend():
    yield
    _backend.set_backend(None)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cotter_defaults_markdown(capsys):
    code, out, _ = run(capsys, "cotter")
    assert code == EXIT_OK
    assert "| 100000 | 6.000 | 2.376 | 3.768 | 0.2064 |" in out


def test_cotter_csv(capsys):
    code, out, _ = run(capsys, "cotter", "--n0", "100,1000", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == [
        "prior_sample_size,mean_pct,sd_pct,rejected_pct,additional_rejected_pct",
        "100,6.000,3.342,9.922,163.8",
        "1000,6.000,2.490,4.525,20.32",
        "inf,6.000,2.375,3.761,0",
    ]


def test_cotter_empty_n0(capsys):
    code, out, _ = run(capsys, "cotter", "--n0", "", "--format", "json")
    assert code == EXIT_OK
    assert [r["prior_sample_size"] for r in json.loads(out)] == ["inf"]


def test_cotter_non_integral_prior(capsys):
    code, _, err = run(capsys, "cotter", "--n0", "50", "--ratio", "0.05")
    assert code == EXIT_VALIDATION
    assert "n0=50" in err


@pytest.mark.parametrize("argv", [
    ("cotter", "--ratio", "1.5"),
    ("cotter", "--threshold", "100"),
    ("cotter", "--precision", "0"),
])
def test_cotter_validation(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_VALIDATION


def test_argparse_errors_use_validation_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cotter", "--n0", "1e3"])
    assert exc.value.code == EXIT_VALIDATION


def test_numeric_error_exit_code(capsys, tmp_path):
    path = tmp_path / "impossible.json"
    path.write_text(json.dumps({
        "name": "x", "kind": "discrete-models",
        "parameters": {"outcomes": ["a", "b"], "observed": ["b"],
                       "models": [{"id": "m", "prior": 1, "likelihood": [1, 0]}]},
    }))
    code, _, err = run(capsys, "run", str(path))
    assert code == EXIT_NUMERIC
    assert "zero probability" in err


def test_run_writes_output_file(capsys, tmp_path):
    src = tmp_path / "s.json"
    src.write_text(json.dumps({"name": "c", "kind": "cotter-pin", "output": {"format": "csv"},
                               "parameters": {"n0": [100], "ratio": 0.06, "n": 100, "threshold": 10}}))
    dest = tmp_path / "out.csv"
    code, out, _ = run(capsys, "run", str(src), "-o", str(dest))
    assert code == EXIT_OK and out == ""
    assert dest.read_text().splitlines()[1] == "100,6.000,3.342,9.922,163.8"


def test_run_bad_scenario(capsys, tmp_path):
    src = tmp_path / "s.json"
    src.write_text('{"name": "c", "kind": "frequentist", "parameters": {}}')
    code, _, err = run(capsys, "run", str(src))
    assert code == EXIT_VALIDATION
    assert "kind" in err


def test_run_missing_file(capsys, tmp_path):
    assert run(capsys, "run", str(tmp_path / "nope.json"))[0] == EXIT_VALIDATION


def test_pseudo_count_is_announced(capsys):
    code, _, err = run(capsys, "cotter", "--n0", "100", "--pseudo-count", "0.5")
    assert code == EXIT_OK
    assert "pseudo-count" in err


@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_backend_flag_gives_same_table(capsys, backend):
    code, out, _ = run(capsys, "--backend", backend, "cotter", "--format", "csv")
    assert code == EXIT_OK
    assert "100,6.000,3.342,9.922,163.8" in out


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == EXIT_OK
    assert out.splitlines()[-1].endswith("checks passed")
    assert "FAIL" not in out


@pytest.mark.skipif(shutil.which("transduct") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["transduct", "cotter", "--n0", "", "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1] == "inf,6.000,2.375,3.761,0"
