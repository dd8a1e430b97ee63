import json
import math
import subprocess
import sys

import numpy as np
import pytest

from phasegeom import cli
from phasegeom import convbody as cb
from phasegeom import gaussian as ga
from phasegeom import serialize as ser
from phasegeom import symplin as sl
from phasegeom import verify as vf
from phasegeom.errors import InvalidInputError


@pytest.fixture(autouse=True)
def _fixed_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


# --- serialize ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "body",
    [cb.Ball(1.5, 3), cb.Ellipsoid(np.diag([1.0, 2.0])), cb.Box(np.array([1.0, 0.5])),
     cb.PolytopeV.symmetric(np.array([[1.0, 0.0], [0.3, 1.0]])), cb.PolytopeH.symmetric(np.array([[1.0, 0.2], [0.0, 1.0]]))],
)
def test_body_round_trip(body):
    back = ser.body_from_dict(json.loads(ser.dumps(ser.body_to_dict(body))))
    u = np.random.default_rng(0).standard_normal((20, body.dim))
    assert type(back) is type(body)
    assert np.array_equal(back.support(u), body.support(u))


def test_floats_round_trip_exactly():
    g = ga.random_gaussian_state(2, 3)
    back = ser.gaussian_from_dict(ser.loads(ser.dumps(ser.gaussian_to_dict(g))))
    assert np.array_equal(back.X, g.X) and np.array_equal(back.Y, g.Y) and np.array_equal(back.center, g.center)


def test_loads_unwraps_envelope():
    env = {"tool_version": "0", "config": {}, "timestamp": "", "command": "blob", "result": {"Sigma": [[1.0]]}}
    assert ser.loads(json.dumps(env)) == {"Sigma": [[1.0]]}


def test_parse_matrix_text_forms():
    expect = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ser.parse_matrix_text("[[1, 2], [3, 4]]"), expect)
    assert np.array_equal(ser.parse_matrix_text('{"S": [[1, 2], [3, 4]]}'), expect)
    assert np.array_equal(ser.parse_matrix_text("1 2\n3 4\n"), expect)
    with pytest.raises(InvalidInputError):
        ser.parse_matrix_text("1 2\n3\n")


def test_detect_kind():
    assert ser.detect_kind({"Sigma": []}) == "covariance"
    assert ser.detect_kind({"variant": "ball"}) == "body"
    assert ser.detect_kind({"S": [], "body": {}}) == "quasi_state"
    assert ser.detect_kind({"S": []}) == "blob"
    assert ser.detect_kind({"X": []}) == "gaussian"
    with pytest.raises(InvalidInputError):
        ser.detect_kind({"nothing": 1})


def test_body_dim_mismatch():
    with pytest.raises(InvalidInputError):
        ser.body_from_dict({"variant": "box", "dim": 3, "params": {"half_widths": [1, 1]}})


# --- CLI commands ---------------------------------------------------------------------


def test_decompose_J(tmp_path, capsys):
    p = write(tmp_path, "J.json", [[0, 1], [-1, 0]])
    code, out, _ = run(capsys, "decompose", p)
    assert code == 0
    env = json.loads(out)
    assert set(env) == {"tool_version", "config", "timestamp", "command", "result"}
    assert env["command"] == "decompose"
    assert env["timestamp"].startswith("2023-11-14")
    assert np.allclose(env["result"]["R"], [[0, 1], [-1, 0]])
    assert env["result"]["reconstruction_error"] <= 1e-12


def test_decompose_stdin():
    S = sl.random_symplectic(2, 1)
    out = subprocess.run(
        [sys.executable, "-m", "phasegeom", "decompose", "-"],
        input=json.dumps(S.tolist()), capture_output=True, text=True,
        env={"SOURCE_DATE_EPOCH": "0", "PATH": ""},
    )
    assert out.returncode == 0, out.stderr
    assert json.loads(out.stdout)["result"]["reconstruction_error"] <= 1e-9


def test_mahler_box_exact(tmp_path, capsys):
    p = write(tmp_path, "box.json", ser.body_to_dict(cb.Box(np.array([1.0, 3.0]))))
    code, out, _ = run(capsys, "mahler", p, "--hbar", 0.5)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["mahler"] == pytest.approx(8 * 0.25, rel=1e-12)
    assert res["method"] == "exact" and res["violations"] == []


def test_mahler_polytope_monte_carlo(tmp_path, capsys):
    P = cb.PolytopeV.symmetric(np.random.default_rng(2).standard_normal((5, 2)))
    p = write(tmp_path, "poly.json", ser.body_to_dict(P))
    code, out, _ = run(capsys, "mahler", p, "--samples", 100000)
    res = json.loads(out)["result"]
    assert code == 0 and res["method"] == "monte_carlo" and res["std_error"] > 0
    assert res["violations"] == []


def test_capacity_quasi_state_general(tmp_path, capsys):
    X = cb.Ellipsoid(np.diag([2.0, 0.5]))
    q = {"S": np.eye(4).tolist(), "body": ser.body_to_dict(X), "hbar": 1.0,
         "P": ser.body_to_dict(cb.scale(cb.polar_dual(X, 1.0), 2.0))}
    code, out, _ = run(capsys, "capacity", write(tmp_path, "q.json", q))
    res = json.loads(out)["result"]
    assert code == 0
    assert res["c_max_quasi"] == 4.0
    assert res["c_max_general"] == pytest.approx(8.0)
    assert res["certificate_gap"] <= 1e-4


def test_capacity_covariance(tmp_path, capsys):
    cov = ga.covariance_from_blob(ga.random_blob(2, 4))
    code, out, _ = run(capsys, "capacity", write(tmp_path, "c.json", ser.covariance_to_dict(cov)))
    res = json.loads(out)["result"]
    assert code == 0
    assert res["c_ellipsoid"] == pytest.approx(math.pi, rel=1e-9)
    assert res["quantum_floor_satisfied"]


def test_capacity_csv_orbit(tmp_path, capsys):
    cov = ga.CovarianceMatrix(np.eye(2))
    code, out, _ = run(capsys, "capacity", write(tmp_path, "c.json", ser.covariance_to_dict(cov)), "--format", "csv")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# tool_version")
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "x1,p1" and len(body) == 10002


def test_quantum_check(tmp_path, capsys):
    code, out, _ = run(capsys, "quantum-check", write(tmp_path, "c.json", {"Sigma": [[0.25, 0], [0, 0.25]]}))
    res = json.loads(out)["result"]
    assert code == 0
    assert not res["quantum"] and res["purity_warning"] and not res["contains_quantum_blob"]


def test_blob_round_trip_cli(tmp_path, capsys):
    g = ga.random_gaussian_state(2, 11)
    p1 = write(tmp_path, "g.json", ser.gaussian_to_dict(g))
    code, out1, _ = run(capsys, "blob", p1)
    assert code == 0
    p2 = write(tmp_path, "b.json", out1)
    code, out2, _ = run(capsys, "blob", p2)
    g2 = ser.gaussian_from_dict(json.loads(out2)["result"])
    assert np.allclose(g2.X, g.X, atol=1e-9) and np.allclose(g2.Y, g.Y, atol=1e-9)
    assert np.array_equal(g2.center, g.center)


def test_flow_csv(tmp_path, capsys):
    p = write(tmp_path, "f.json", {"X": [[1.0, 0.2], [0.2, 1.5]], "Y": [[0.1, 0.0], [0.0, -0.3]]})
    code, out, _ = run(capsys, "flow", p, "--format", "csv", "--t-count", 11)
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert code == 0 and body[0] == "t,defect,energy_drift,phase_error" and len(body) == 12
    vals = np.array([[float(v) for v in row.split(",")] for row in body[1:]])
    assert np.max(vals[:, 1:]) <= 1e-8


def test_wigner_grid_binary(tmp_path, capsys):
    p = write(tmp_path, "g.json", {"X": [[1.2]], "Y": [[0.3]], "z0": [0.1, 0.2]})
    dump = tmp_path / "w.bin"
    code, out, _ = run(capsys, "wigner-grid", p, "--points", 128, "--binary", dump)
    res = json.loads(out)["result"]
    assert code == 0 and res["max_error_vs_analytic"] <= 1e-6
    assert dump.read_bytes()[:8] == b"WIGGRID1"


def test_output_file(tmp_path, capsys):
    p = write(tmp_path, "J.json", [[0, 1], [-1, 0]])
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "decompose", p, "-o", dest)
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["command"] == "decompose"


def test_determinism(tmp_path, capsys):
    P = cb.PolytopeV.symmetric(np.random.default_rng(5).standard_normal((4, 3)))
    p = write(tmp_path, "poly.json", ser.body_to_dict(P))
    _, a, _ = run(capsys, "mahler", p, "--samples", 20000, "--seed", 9)
    _, b, _ = run(capsys, "mahler", p, "--samples", 20000, "--seed", 9)
    _, c, _ = run(capsys, "mahler", p, "--samples", 20000, "--seed", 10)
    assert a == b and a != c


# --- exit codes -----------------------------------------------------------------------


def test_exit_1_bad_json(tmp_path, capsys):
    code, _, err = run(capsys, "mahler", write(tmp_path, "bad.json", "{not json"))
    assert code == 1 and "error" in err


def test_exit_1_missing_file(tmp_path, capsys):
    assert run(capsys, "mahler", tmp_path / "missing.json")[0] == 1


def test_exit_2_not_symplectic(tmp_path, capsys):
    code, _, err = run(capsys, "decompose", write(tmp_path, "m.json", [[1.0, 0.1], [0.0, 1.01]]))
    assert code == 2 and "symplectic" in err


def test_exit_3_unsupported_dual(tmp_path, capsys):
    normals = np.random.default_rng(0).standard_normal((6, 4))
    body = ser.body_to_dict(cb.PolytopeH.symmetric(normals))
    code, _, err = run(capsys, "mahler", write(tmp_path, "h.json", body), "--samples", 1000)
    assert code == 3, err


def test_exit_4_aliasing(tmp_path, capsys):
    p = write(tmp_path, "g.json", {"X": [[1.0]], "z0": [1000.0, 0.0]})
    assert run(capsys, "wigner-grid", p, "--points", 64)[0] == 4


def test_exit_5_invariant_failure(capsys, monkeypatch):
    monkeypatch.setitem(vf.SUITES, "symplin", lambda seed, hbar: [vf.Check("symplin", "forced", False, 1.0, 0.0)])
    code, out, err = run(capsys, "verify", "symplin")
    assert code == 5 and "symplin.forced" in err
    assert json.loads(out)["result"]["failed"] == 1


def test_verify_all_exit_0(capsys):
    code, out, _ = run(capsys, "verify", "all")
    res = json.loads(out)["result"]
    assert code == 0 and res["passed"] and res["failed"] == 0


def test_verify_unknown_suite(capsys):
    assert run(capsys, "verify", "nope")[0] == 1
