import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from isodrast import HamiltonianFn, TangentVector, Weighting
from isodrast import cli, io
from isodrast.loops import TWO_PI


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def example_loop(tmp_path, circle, Xq, Xp):
    doc = io.loop_to_dict(circle, Weighting.uniform(circle.N), [TangentVector.of_field(Xq), TangentVector.of_field(Xp)])
    return _write(tmp_path / "loop.json", doc)


# -- pair --------------------------------------------------------------------


def test_pair_weighted_example(capsys, example_loop):
    code, out, _ = _run(capsys, "pair", example_loop)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("pairing", ["weighted", "donaldson", "reduced"])
def test_pair_empty_tangents(capsys, tmp_path, circle, pairing):
    path = _write(tmp_path / "empty.json", {"half_dim": 1, "samples": circle.samples.tolist(), "tangents": []})
    code, out, _ = _run(capsys, "pair", path, "--pairing", pairing)
    assert code == 0 and json.loads(out)["value"] == 0


def test_pair_non_exact(capsys, tmp_path, circle):
    doc = io.loop_to_dict(circle, None, [TangentVector.of_field(-circle.samples)])
    code, out, _ = _run(capsys, "pair", _write(tmp_path / "bad.json", doc))
    assert code == 1
    assert json.loads(out)["residual"] == pytest.approx(TWO_PI, abs=1e-6)


def test_pair_momentum(capsys, tmp_path, circle, Xq):
    chi = Weighting(np.cos(circle.t) / TWO_PI, "zero_mass")
    doc = io.loop_to_dict(circle, chi, [TangentVector.of_field(Xq)])
    code, out, _ = _run(capsys, "pair", _write(tmp_path / "m.json", doc), "--pairing", "theta_momentum")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.5, abs=1e-12)


def test_pair_schema_error(capsys, tmp_path):
    path = _write(tmp_path / "s.json", {"half_dim": "one", "samples": []})
    code, _, err = _run(capsys, "pair", path)
    assert code == 2
    assert json.loads(err)["error"] == "schema"


def test_pair_missing_file(capsys, tmp_path):
    code, _, _ = _run(capsys, "pair", str(tmp_path / "nope.json"))
    assert code == 2


# -- flow --------------------------------------------------------------------


def test_flow_harmonic_oscillator(capsys, tmp_path, example_loop, circle):
    prefix = tmp_path / "osc"
    code, out, _ = _run(capsys, "flow", example_loop, "--T", str(TWO_PI), "--steps", "2000", "--out", str(prefix))
    report = json.loads(out)
    assert code == 0 and report["drift"] < 1e-8 and report["frames"] == 2001
    rows = list(csv.reader(open(f"{prefix}_trajectory.csv")))
    last = np.array([[float(v) for v in r[3:]] for r in rows[1:] if r[0] == "2000"])
    assert np.max(np.abs(last - circle.samples)) < 1e-8
    actions = list(csv.reader(open(f"{prefix}_action.csv")))
    assert len(actions) == 2002


def test_flow_zero_time(capsys, example_loop):
    code, out, _ = _run(capsys, "flow", example_loop, "--T", "0")
    report = json.loads(out)
    assert code == 0 and report["frames"] == 1 and report["drift"] == 0.0


def test_flow_radial_fails_gate(capsys, example_loop):
    code, out, _ = _run(capsys, "flow", example_loop, "--hamiltonian", "radial", "--T", "0.5")
    assert code == 1 and json.loads(out)["drift"] > 0.1


def test_flow_bad_expression(capsys, example_loop):
    code, _, err = _run(capsys, "flow", example_loop, "--hamiltonian", "q +* p")
    assert code == 2 and "error" in err


# -- verify ------------------------------------------------------------------


def test_verify_rejects_small_grids(capsys):
    code, _, _ = _run(capsys, "verify", "pairings", "--samples", "8")
    assert code == 2


def test_verify_unknown_suite(capsys):
    code, _, err = _run(capsys, "verify", "nonsense")
    assert code == 2 and "unknown suite" in err


def test_verify_bad_tolerance(capsys):
    assert _run(capsys, "verify", "metrics", "--tolerance", "nope=1")[0] == 2
    assert _run(capsys, "verify", "metrics", "--tolerance", "jacobi")[0] == 2


def test_verify_tolerance_override_can_fail(capsys):
    code, out, _ = _run(capsys, "verify", "metrics", "--cases", "2", "--tolerance", "closedness=1e-30")
    report = json.loads(out)
    assert code == 1
    failed = [p["name"] for p in report["properties"] if not p["pass"]]
    assert failed == ["metrics.closedness"]


def test_verify_metrics_seed_7(capsys):
    code, out, _ = _run(capsys, "verify", "metrics", "--seed", "7")
    assert code == 0 and json.loads(out)["pass"]


def test_verify_report_shape(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    code, out, _ = _run(capsys, "verify", "flows", "--cases", "2", "--out", str(out_file))
    report = json.loads(out)
    assert code == 0
    assert set(report) == {"suite", "seed", "samples", "properties", "pass", "tolerances", "fd_step", "metadata"}
    assert json.loads(out_file.read_text())["properties"] == report["properties"]
    for p in report["properties"]:
        assert {"name", "residual", "gate", "pass"} <= set(p)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "isodrast", "verify", "pairings", "--samples", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_flow_default_hamiltonian_is_oscillator():
    args = cli.build_parser().parse_args(["flow", "x.json"])
    assert HamiltonianFn.from_expr(args.hamiltonian)(np.array([1.0, 1.0])) == 1.0
