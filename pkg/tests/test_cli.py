import io
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from radlevy.cli import RunConfig, main, write_svg
from radlevy.numerics import ConfigurationError


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def csv_rows(text):
    lines = [ln for ln in text.strip().splitlines() if not ln.startswith("#")]
    return lines[0].split(","), np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


def reports(text):
    return [json.loads(ln) for ln in text.strip().splitlines()]


def test_eval_f():
    code, out, _ = run("eval", "--model", "drift", "--what", "f", "--u", "4")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["u", "f"]
    assert rows[0, 1] == 4.0


def test_eval_density_cauchy_k3():
    code, out, _ = run("eval", "--model", "stable12", "--k", "3", "--t", "1", "--what", "density",
                       "--r-max", "5", "--grid-n", "11")
    assert code == 0
    meta = json.loads(out.splitlines()[0][2:])
    assert meta["k"] == 3 and meta["atom_weight"] == 0.0
    header, rows = csv_rows(out)
    assert header == ["r", "value"]
    r = rows[:, 0]
    assert np.allclose(rows[:, 1], 1 / (math.pi ** 2 * (1 + r ** 2) ** 2), rtol=1e-9)


def test_eval_density_fourier_route():
    code, out, _ = run("eval", "--model", "drift", "--k", "1", "--what", "density", "--route", "fourier",
                       "--r-max", "3", "--grid-n", "4")
    assert code == 0
    _, rows = csv_rows(out)
    assert np.allclose(rows[:, 1], np.exp(-rows[:, 0] ** 2 / 4) / math.sqrt(4 * math.pi), rtol=1e-9)


def test_eval_fourier_precondition_names_hw():
    code, out, err = run("eval", "--model", "gamma", "--k", "1", "--t", "0.3", "--what", "density",
                         "--route", "fourier")
    assert code != 0
    assert "Hartman-Wintner" in err
    assert out == ""


def test_eval_levy_and_subordinator():
    code, out, _ = run("eval", "--model", "stable12", "--what", "levy", "--r-max", "2", "--grid-n", "4")
    assert code == 0
    _, rows = csv_rows(out)
    assert np.allclose(rows[:, 1], 1 / (math.pi * rows[:, 0] ** 2), rtol=1e-9)
    code, out, _ = run("eval", "--model", "gamma", "--what", "subordinator", "--t", "2", "--grid-n", "3")
    header, rows = csv_rows(out)
    assert code == 0 and header == ["s", "value"]
    assert np.allclose(rows[:, 1], rows[:, 0] * np.exp(-rows[:, 0]), rtol=1e-12)


def test_eval_subordinator_unsupported():
    code, _, err = run("eval", "--model", "drift", "--what", "subordinator")
    assert code == 2 and "UnsupportedDensity" in err


def test_verify_dimwalk_stable():
    code, out, _ = run("verify", "--suite", "dimwalk", "--model", "stable12")
    assert code == 0
    assert all(r["passed"] for r in reports(out))


def test_verify_nonbernstein_fails_last():
    code, out, err = run("verify", "--suite", "cm", "--model", "synthetic-nonbernstein")
    assert code == 1
    reps = reports(out)
    assert not reps[-1]["passed"]
    assert "0/1" in err


def test_verify_cm_catalog_passes():
    code, out, _ = run("verify", "--suite", "cm")
    assert code == 0
    # five models, each with the sign check and three CM checks
    assert len(reports(out)) == 20


def test_emit_puts_failures_last(tmp_path):
    from radlevy.cli import Output, _emit
    from radlevy.reports import VerificationReport
    reps = [VerificationReport("a", False, 1.0, 0.0), VerificationReport("b", True, 0.0, 0.0)]
    out, err = io.StringIO(), io.StringIO()
    code = _emit(reps, Output(RunConfig(out=str(tmp_path)), []), out, err)
    assert code == 1
    assert [r["identity"] for r in reports(out.getvalue())] == ["b", "a"]
    assert (tmp_path / "reports.jsonl").read_text() == out.getvalue()


def test_verify_hw_catalog():
    code, out, _ = run("verify", "--suite", "hw")
    assert code == 0
    verdicts = {r["details"]["model"]: r["details"]["verdict"] for r in reports(out)}
    assert verdicts == {"drift": "holds", "stable12": "holds", "ig": "holds", "gamma": "fails", "cp": "fails"}


@pytest.mark.slow
def test_verify_all_drift():
    code, out, _ = run("verify", "--suite", "all", "--model", "drift")
    assert code == 0
    assert all(r["passed"] for r in reports(out))


def test_simulate_cp():
    code, out, _ = run("simulate", "--model", "cp", "--lambda", "2", "--t", "1", "--n", "100000", "--seed", "7")
    assert code == 0
    zero = [r for r in reports(out) if r["statistic"] == "zero-fraction"][0]
    assert abs(zero["observed"] - math.exp(-2)) <= zero["tolerance"]


def test_simulate_stable_density():
    code, out, _ = run("simulate", "--model", "stable12", "--k", "1", "--t", "1", "--n", "100000")
    assert code == 0
    hist = [r for r in reports(out) if r["statistic"] == "radial-histogram-tv"]
    assert hist and hist[0]["passed"]


@pytest.mark.parametrize("argv, field", [
    (["simulate", "--n", "0"], "'n'"),
    (["eval", "--k", "0"], "'k'"),
    (["eval", "--t", "-1"], "'t'"),
    (["eval", "--model", "nope"], "'model'"),
    (["simulate", "--threads", "0"], "'threads'"),
    (["eval", "--grid-n", "1"], "'grid_n'"),
])
def test_config_rejections(argv, field):
    code, _, err = run(*argv)
    assert code == 2
    assert field in err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"model": "drift", "what": "f", "u": [2.0, 3.0]}))
    code, out, _ = run("eval", "--config", str(cfg))
    assert code == 0
    _, rows = csv_rows(out)
    assert rows[:, 1].tolist() == [2.0, 3.0]
    # flags override the file
    code, out, _ = run("eval", "--config", str(cfg), "--u", "5")
    assert csv_rows(out)[1][:, 1].tolist() == [5.0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    code, _, err = run("eval", "--config", str(bad))
    assert code == 2 and "colour" in err


def test_model_json_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"drift": 2.0, "levy_measure": {"family": "null"}, "name": "twice"}))
    code, out, _ = run("eval", "--model", str(path), "--what", "f", "--u", "3")
    assert code == 0 and csv_rows(out)[1][0, 1] == 6.0


def test_runconfig_validate():
    with pytest.raises(ConfigurationError, match="'convention'"):
        RunConfig(convention="other").validate()
    assert RunConfig().validate().quad.rel_tol == 1e-10


def test_output_dir_byte_stable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, _, _ = run("simulate", "--model", "gamma", "--n", "20000", "--seed", "3", "--out", str(d), "--samples")
        assert code == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["metadata.json", "reports.jsonl", "samples.csv"]
    for name in ("reports.jsonl", "samples.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    meta = json.loads((a / "metadata.json").read_text())
    assert meta["exit_status"] == 0 and "created" in meta


def test_eval_output_files_and_svg(tmp_path):
    code, out, _ = run("eval", "--model", "ig", "--what", "density", "--grid-n", "9", "--out", str(tmp_path), "--svg")
    assert code == 0
    assert (tmp_path / "density.csv").read_text() == out
    svg = (tmp_path / "density.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_write_svg(tmp_path):
    path = write_svg(tmp_path / "x.svg", [0, 1, 2], [1.0, float("nan"), 0.5], "demo")
    assert "demo" in open(path).read()


def test_threads_do_not_change_output():
    _, one, _ = run("simulate", "--model", "ig", "--n", "40000", "--seed", "1")
    _, four, _ = run("simulate", "--model", "ig", "--n", "40000", "--seed", "1", "--threads", "4")
    assert one == four


@pytest.mark.skipif(shutil.which("radlevy") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["radlevy", "eval", "--model", "drift", "--what", "f", "--u", "4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "4.0" in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "radlevy.cli", "simulate", "--n", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
