import csv
import io
import json
import re
import subprocess
import sys

import pytest

from sncp import cli
from sncp.errors import UnstableEstimateError
from sncp.pairs import named_pair


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_moments_examples(capsys):
    code, out, _ = run(["moments", "--p", "1", "--alpha", "2", "--no-timestamp"], capsys)
    assert code == 0 and json.loads(out)["value"] == 2.0
    _, out, _ = run(["moments", "--p", "2", "--m", "3", "--alpha", "0", "--no-timestamp"], capsys)
    assert json.loads(out)["value"] == 1.0
    _, out, _ = run(["moments", "--p", "2", "--alpha", "2", "--no-timestamp"], capsys)
    assert json.loads(out)["value"] == pytest.approx(0.5, rel=1e-15)


def test_f_exact_constant_at_p2(capsys):
    _, out, _ = run(["f", "--p", "2", "--n", "6", "--t", "0.3", "--no-timestamp"], capsys)
    rec = json.loads(out)
    _, out0, _ = run(["f", "--p", "2", "--n", "6", "--pair", "e", "--no-timestamp"], capsys)
    assert rec["value"] == pytest.approx(json.loads(out0)["value"], rel=1e-14)
    assert rec["sign"] == "negative"
    assert set(rec) >= {"command", "params", "value", "std_error", "sign", "samples", "seed"}


def test_f_counterexample_positive(capsys):
    _, out, _ = run(["f", "--p", "1", "--n", "3", "--pair", "xi", "--no-timestamp"], capsys)
    assert json.loads(out)["sign"] == "positive"


def test_f_diagonal_mc(capsys):
    code, out, _ = run(["f", "--p", "3", "--n", "50", "--mode", "diagonal", "--pair", "xi_bar",
                        "--samples", "200000", "--seed", "1", "--threads", "1", "--no-timestamp"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["sign"] == "negative" and rec["samples"] == 200000


def test_f_mc_uniform_sphere(capsys):
    code, out, _ = run(["f", "--p", "1.5", "--n", "4", "--pair", "e", "--method", "mc-uniform",
                        "--samples", "100000", "--no-timestamp"], capsys)
    rec = json.loads(out)
    assert abs(rec["value"] - rec["f_exact"]) < 4.5 * rec["std_error"]


def test_pair_file(tmp_path, capsys):
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(named_pair("xi", 5).to_dict()))
    code, out, _ = run(["f", "--p", "1", "--pair-file", str(path), "--no-timestamp"], capsys)
    assert code == 0 and json.loads(out)["params"]["n"] == 5
    path.write_text(json.dumps({"n": 2, "eta1": [1, 1], "eta2": [0, 1], "mode": "sphere"}))
    code, _, err = run(["f", "--p", "1", "--pair-file", str(path)], capsys)
    assert code == 2 and "eta1" in err


def test_exit_codes(capsys, monkeypatch):
    assert run(["f", "--p", "1"], capsys)[0] == 1
    assert run(["nonsense"], capsys)[0] == 1
    assert run(["f", "--p", "1", "--n", "4", "--t", "0.1", "--pair", "e"], capsys)[0] == 1
    assert run(["f", "--p", "0.5", "--n", "4", "--pair", "e"], capsys)[0] == 2
    assert run(["f", "--p", "1", "--n", "4", "--t", "0.9"], capsys)[0] == 2

    def boom(*a, **k):
        raise UnstableEstimateError("weights not resolved")

    monkeypatch.setattr(cli, "f_ball_mc", boom)
    assert run(["f", "--p", "1", "--n", "4", "--pair", "e", "--method", "mc-weighted"], capsys)[0] == 4


def test_usage_exit_is_one():
    res = subprocess.run([sys.executable, "-m", "sncp.cli", "f", "--bogus"], capture_output=True)
    assert res.returncode == 1


def test_seventeen_digits(capsys):
    _, out, _ = run(["f", "--p", "3", "--n", "7", "--t", "0.2", "--no-timestamp"], capsys)
    text = re.search(r'"value": (\S+?),?\n', out).group(1)
    assert float(text) == json.loads(out)["value"]
    digits = re.sub(r"[-.]|e.*$", "", text).lstrip("0")
    assert len(digits) == 17 or len(digits) < 17 and float(text) == float(f"{float(text):.{len(digits)}g}")


def test_timestamp_flag(capsys):
    _, out, _ = run(["moments", "--p", "1", "--alpha", "2"], capsys)
    assert "timestamp" in json.loads(out)
    _, out, _ = run(["moments", "--p", "1", "--alpha", "2", "--no-timestamp"], capsys)
    assert "timestamp" not in json.loads(out) and "runtime_ms" not in json.loads(out)


def test_identical_invocations_identical_bytes(capsys):
    args = ["f", "--p", "1.5", "--n", "6", "--pair", "xi", "--method", "mc-weighted",
            "--samples", "50000", "--seed", "9", "--no-timestamp"]
    a = run(args + ["--threads", "1"], capsys)[1]
    b = run(args + ["--threads", "4"], capsys)[1]
    assert a == b


def test_sweep_n(capsys):
    code, out, _ = run(["sweep", "--variable", "n", "--p", "1", "--grid", "2:8:1"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert list(rows[0])[:6] == ["p", "n", "t", "f_exact", "f_mc", "stderr"]
    positive = [int(r["n"]) for r in rows if float(r["f_exact"]) > 1e-15]
    assert positive[0] == 3
    assert out.endswith("\r\n")


def test_sweep_t_is_affine(capsys):
    _, out, _ = run(["sweep", "--variable", "t", "--p", "3", "--n", "5", "--grid", "0,0.125,0.25,0.5"], capsys)
    f = [float(r["f_exact"]) for r in csv.DictReader(io.StringIO(out))]
    assert f[1] - f[0] == pytest.approx(f[2] - f[1], rel=1e-12)
    assert f[3] - f[2] == pytest.approx(2 * (f[2] - f[1]), rel=1e-12)


def test_sweep_p_gurland_root(capsys):
    _, out, _ = run(["sweep", "--variable", "p", "--n", "10", "--grid", "1.5,2,2.5", "--samples", "20000"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    ex = [float(r["gurland_excess"]) for r in rows]
    assert ex[0] > 0 and abs(ex[1]) < 1e-15 and ex[2] < 0
    assert all(r["f_mc"] and r["stderr"] for r in rows)


def test_extremal_command(capsys, tmp_path):
    out_path = tmp_path / "ext.json"
    code, _, _ = run(["extremal", "--n", "5", "--mode", "sphere", "--brute", "--restarts", "8",
                      "--out", str(out_path), "--no-timestamp"], capsys)
    rec = json.loads(out_path.read_text())
    assert code == 0 and rec["best_value"] == pytest.approx(0.5, abs=1e-9)
    assert rec["brute_force"] == pytest.approx(0.5, abs=1e-4)


def test_verify_gamma_suite(capsys):
    code, out, err = run(["verify", "--suite", "gamma", "--no-timestamp"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["passed"]
    assert [c["id"] for c in rec["checks"]] == [1, 2]
    assert "criterion  1 [PASS]" in err


def test_verify_ball_quick_with_grids(capsys):
    code, out, _ = run(["verify", "--suite", "ball", "--quick", "--p-grid", "1,3", "--n-grid", "3",
                        "--no-timestamp", "--threads", "2"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["params"]["p_grid"] == [1.0, 3.0]


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("SNC_THREADS", "2")
    code, _, _ = run(["f", "--p", "2", "--n", "4", "--pair", "e", "--method", "mc-weighted",
                      "--samples", "20000"], capsys)
    assert code == 0
