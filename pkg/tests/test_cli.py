import csv
import io
import json
import math

import numpy as np
import pytest

from avcap import __version__
from avcap.channel_model import (
    Constraints, FadingSpec, ParallelGaussianSpec, SpectralSpec, dump_spec, load_spec, spec_digest,
)
from avcap.cli import run
from avcap.errors import SolverDidNotConverge
from fixtures import example1

FIG1 = [5, 8, 3, 1.5, 2.5, 1.8, 3.2, 9, 4.5, 5.5]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def ok_json(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


def ok_csv(*argv):
    code, out, err = call(*argv, "--out", "csv")
    assert code == 0, err
    rows = list(csv.reader(io.StringIO(out)))
    header, body = rows[0], rows[1:]
    assert body and all(len(r) == len(header) for r in body)
    # every cell is numeric
    return header, np.array([[float(v) for v in r] for r in body])


@pytest.fixture
def files(tmp_path):
    paths = {
        "product": ParallelGaussianSpec(np.array(FIG1), Constraints(13, 8)),
        "spectral": SpectralSpec(Constraints(2, 0.5), autocorr=0.5 ** np.arange(40)),
        "discrete": example1(),
        "fading": FadingSpec(np.array([0.5, 1.0]), np.array([0.5, 0.5]), 1.0, Constraints(2, 1)),
    }
    out = {}
    for kind, spec in paths.items():
        p = tmp_path / f"{kind}.json"
        dump_spec(spec, p)
        out[kind] = p
    return out


def test_waterfill_product_fig1(files):
    env = ok_json("waterfill", "product", "--spec", files["product"])
    assert env["command"] == "waterfill product" and env["version"] == __version__
    r = env["results"]
    assert r["beta"] == pytest.approx(4) and r["alpha"] == pytest.approx(6)
    assert r["N_star"] == pytest.approx([0, 0, 1, 2.5, 1.5, 2.2, 0.8, 0, 0, 0], abs=1e-9)
    assert r["kkt_passed"] is True and r["unit"] == "bits"
    assert env["spec_digest"] == spec_digest(files["product"].read_bytes())
    header, tab = ok_csv("waterfill", "product", "--spec", files["product"])
    assert header[:4] == ["j", "sigma2", "N_star", "P_star"]
    assert tab.shape == (10, 7) and tab[:, 3].sum() == pytest.approx(13)


def test_capacity_discrete_example1(files):
    r = ok_json("capacity", "discrete", "--spec", files["discrete"], "--det")["results"]
    assert r["threshold"] == pytest.approx(5 / 16, abs=1e-6)
    assert r["deterministic"] == pytest.approx(r["random"], abs=1e-9)
    assert r["gap"] <= 1e-5
    header, tab = ok_csv("capacity", "discrete", "--spec", files["discrete"], "--det")
    assert "threshold" in header and tab.shape[0] == 1


def test_capacity_fading_and_scalar(files):
    r = ok_json("capacity", "fading", "--spec", files["fading"], "--det")["results"]
    assert r["random"] == pytest.approx(0.3304820237, abs=1e-9)
    assert r["threshold"] == pytest.approx(2.0)
    ok_csv("capacity", "fading", "--spec", files["fading"])
    r = ok_json("capacity", "scalar", "--gamma", 2, "--lambda", 1, "--sigma2", 1)["results"]
    assert r["random"] == pytest.approx(0.5) and r["deterministic"] == pytest.approx(0.5)
    r = ok_json("capacity", "scalar", "--gamma", 1, "--lambda", 2, "--sigma2", 1, "--log-base", "e")["results"]
    assert r["random"] == pytest.approx(0.5 * math.log(1 + 1 / 3)) and r["deterministic"] == 0
    assert r["unit"] == "nats"
    ok_csv("capacity", "scalar", "--gamma", 1, "--lambda", 2, "--sigma2", 1)


def test_spectral_commands(files):
    r = ok_json("capacity", "colored", "--spec", files["spectral"], "--grid", 1024)["results"]
    assert r["grid"] == 1024 and r["deterministic"] == r["random"] > 0
    header, tab = ok_csv("waterfill", "spectral", "--spec", files["spectral"], "--grid", 256)
    assert tab.shape == (256, 6)
    r = ok_json("szego", "--spec", files["spectral"], "--n", "4,16")["results"]
    assert r["n"] == [4, 16] and r["gap"][1] < r["gap"][0]
    header, tab = ok_csv("szego", "--spec", files["spectral"], "--n", "4,16")
    assert header == ["n", "C_n", "gap", "limit"]


def test_symmetrize(files, tmp_path):
    r = ok_json("symmetrize", "--spec", files["discrete"], "--t", 0, "--p", "0.7,0.3")["results"]
    assert r["symmetrizable"] and r["cost"] == pytest.approx(0.3, abs=1e-9)
    assert r["residual"] <= 1e-8
    ok_csv("symmetrize", "--spec", files["discrete"], "--t", 1)
    # noiseless identity channel
    W = np.zeros((1, 2, 2, 2))
    W[0, 0, :, 0] = W[0, 1, :, 1] = 1
    ident = tmp_path / "ident.json"
    ident.write_text(json.dumps({"X": 2, "S": 2, "T": 1, "Y": 2, "W": W.tolist(), "P_T": [1],
                                 "phi": [0, 1], "l": [0, 1], "gamma": 1, "lambda": 1}))
    r = ok_json("symmetrize", "--spec", ident, "--t", 0)["results"]
    assert r["symmetrizable"] is False and r["cost"] == "inf"
    r = ok_json("capacity", "discrete", "--spec", ident, "--det")["results"]
    assert r["threshold"] == "inf" and r["nonsymmetrizable"] == [0]


def test_simulate():
    argv = ["simulate", "--n", 64, "--M", 16, "--gamma", 1, "--lambda", 1, "--sigma2", 0.1,
            "--strategy", "mimic", "--trials", 300, "--seed", 7]
    a, b = ok_json(*argv), ok_json(*argv)
    assert a == b
    r = a["results"]
    assert r["mode"] == "explicit" and r["trials"] == 300 and r["log2_M"] == pytest.approx(4)
    assert a["parameters"]["lambda"] == 1
    header, tab = ok_csv(*argv)
    assert "error_rate" in header and "mode" not in header


def test_json_round_trip(files):
    env = ok_json("capacity", "fading", "--spec", files["fading"])
    again = json.loads(json.dumps(env))
    assert again == env
    assert set(env) == {"command", "spec_digest", "parameters", "results", "version"}
    # twelve significant digits
    assert len(repr(env["results"]["random"]).replace(".", "").lstrip("0")) <= 12


def test_spec_files_round_trip(files):
    for kind, p in files.items():
        spec = load_spec(p, kind)
        q = p.with_suffix(".again.json")
        dump_spec(spec, q)
        assert load_spec(q, kind) == spec


def test_digest_depends_on_bytes(files, tmp_path):
    a = ok_json("waterfill", "product", "--spec", files["product"])["spec_digest"]
    assert a == ok_json("waterfill", "product", "--spec", files["product"])["spec_digest"]
    q = tmp_path / "spaced.json"
    q.write_text(files["product"].read_text() + "\n")
    assert ok_json("waterfill", "product", "--spec", q)["spec_digest"] != a


def test_usage_errors(files, tmp_path):
    code, out, err = call("waterfill", "product", "--spec", files["product"], "--bogus")
    assert code == 2 and "usage" in err.lower() and out == ""
    assert call("capacity")[0] == 2
    code, out, _ = call("--version")
    assert code == 0 and out.strip() == __version__
    assert call("waterfill", "product", "--spec", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "sigma2": [1, -1], "gamma": 1, "lambda": 1}')
    code, _, err = call("waterfill", "product", "--spec", bad)
    assert code == 2 and "sigma2" in err
    bad.write_text("{not json")
    assert call("waterfill", "product", "--spec", bad)[0] == 2
    assert call("symmetrize", "--spec", files["discrete"], "--t", 5)[0] == 2
    assert call("symmetrize", "--spec", files["discrete"], "--t", 0, "--p", "0.5,0.6")[0] == 2
    assert call("simulate", "--n", 4, "--rate", 0.1, "--gamma", 1, "--lambda", 1, "--sigma2", 1,
                "--strategy", "iid", "--trials", 5)[0] == 2


def test_nonconvergence_exit_code(files, monkeypatch):
    def boom(*a, **k):
        raise SolverDidNotConverge("stalled")

    monkeypatch.setattr("avcap.fading.fading_random_capacity", boom)
    code, out, err = call("capacity", "fading", "--spec", files["fading"])
    assert code == 3 and "did not converge" in err and out == ""


def test_module_entry_point(files):
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "avcap", "capacity", "scalar", "--gamma", "2",
                          "--lambda", "1", "--sigma2", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["results"]["random"] == pytest.approx(0.5)
