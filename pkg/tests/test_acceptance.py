"""Acceptance criteria 1-9.

Each test prints one ``criterion N PASS|FAIL`` line with the measured values
next to their thresholds (run with ``-s`` to see them), then asserts.
Run directly with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from phasegeom import cli
from phasegeom import convbody as cb
from phasegeom import fermi as fm
from phasegeom import gaussian as ga
from phasegeom import phasegrid as pg
from phasegeom import quasistate as qs
from phasegeom import serialize as ser
from phasegeom import symplin as sl
from phasegeom import verify as vf

from helpers import moderate_pair

HBARS = (1.0, 0.37)


def report(num, title, items):
    """``items``: (label, value, threshold, ok). Prints one line and asserts."""
    ok = all(i[3] for i in items)
    parts = "; ".join(f"{label}={value:.3g} (tol {thr:.1g})" for label, value, thr, _ in items)
    print(f"\ncriterion {num} {'PASS' if ok else 'FAIL'}: {title} | {parts}")
    assert ok, [i for i in items if not i[3]]


def upper(label, value, thr):
    return (label, float(value), float(thr), bool(value <= thr))


def _rel(a, b):
    return abs(a - b) / abs(b)


# --- 1 ----------------------------------------------------------------------------------


def test_criterion_1_pre_iwasawa():
    recon = sym = orth = sympl = 0.0
    min_eig = math.inf
    for n in (1, 2, 3, 5):
        I = np.eye(2 * n)
        for k in range(1000):
            S = sl.random_symplectic(n, 10_000 * n + k)
            f = sl.pre_iwasawa(S)
            recon = max(recon, float(np.max(np.abs(f.reconstruct() - S))))
            sym = max(sym, float(np.max(np.abs(f.P - f.P.T))), float(np.max(np.abs(f.L - f.L.T))))
            min_eig = min(min_eig, float(np.linalg.eigvalsh(f.L)[0]))
            orth = max(orth, float(np.max(np.abs(f.R @ f.R.T - I))))
            sympl = max(sympl, sl.symplecticity_defect(f.R))
    report(1, "pre-Iwasawa on 4000 matrices", [
        upper("reconstruction", recon, 1e-9),
        upper("asymmetry(P,L)", sym, 1e-12),
        ("min eig L", min_eig, 0.0, min_eig > 0),
        upper("R orthogonality", orth, 1e-9),
        upper("R symplecticity", sympl, 1e-9),
    ])


# --- 2 ----------------------------------------------------------------------------------


def test_criterion_2_polar_duality():
    rng = np.random.default_rng(2)
    refl = 0.0
    for hbar in HBARS:
        for n in (1, 2, 3):
            B = rng.standard_normal((n, n))
            for X in (cb.Ball(rng.uniform(0.3, 3), n), cb.Ellipsoid(B @ B.T + 0.3 * np.eye(n)), cb.Box(rng.uniform(0.3, 3, n))):
                XX = cb.polar_dual(cb.polar_dual(X, hbar), hbar)
                assert type(XX) is type(X)
                attr = {cb.Ball: "radius", cb.Ellipsoid: "A", cb.Box: "half_widths"}[type(X)]
                a, b = np.asarray(getattr(XX, attr)), np.asarray(getattr(X, attr))
                refl = max(refl, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    scaling = 0.0
    for k in range(200):
        n = 1 + k % 3
        hbar = HBARS[k % 2]
        B = rng.standard_normal((n, n))
        X = cb.Ellipsoid(B @ B.T + 0.3 * np.eye(n))
        L = rng.standard_normal((n, n)) + 1.5 * np.eye(n)
        lhs = cb.polar_dual(cb.linear_image(X, L), hbar)
        rhs = cb.linear_image(cb.polar_dual(X, hbar), np.linalg.inv(L.T))
        scaling = max(scaling, float(np.max(np.abs(lhs.A - rhs.A)) / np.max(np.abs(rhs.A))))
    self_dual = 0.0
    for hbar in (1.0, 0.37, 6.0):
        for n in (1, 2, 5):
            D = cb.polar_dual(cb.Ball(math.sqrt(hbar), n), hbar)
            self_dual = max(self_dual, _rel(D.radius, math.sqrt(hbar)))
    report(2, "polar duality", [
        upper("reflexivity", refl, 1e-12),
        upper("scaling law (200 pairs)", scaling, 1e-9),
        upper("ball self-duality", self_dual, 1e-15),
    ])


# --- 3 ----------------------------------------------------------------------------------


def test_criterion_3_mahler():
    rng = np.random.default_rng(3)
    ell = box = 0.0
    for hbar in HBARS:
        for n in (1, 2, 3):
            B = rng.standard_normal((n, n))
            v = cb.mahler_volume(cb.Ellipsoid(B @ B.T + 0.3 * np.eye(n)), hbar).value
            ell = max(ell, _rel(v, math.pi**n * hbar**n / math.gamma(n / 2 + 1) ** 2))
            v = cb.mahler_volume(cb.Box(rng.uniform(0.2, 5, n)), hbar).value
            box = max(box, _rel(v, (4 * hbar) ** n / math.factorial(n)))
    # sandwich, measured in units of sigma (negative = inside the bounds)
    worst_sigma = -math.inf
    count = 0
    for n in (2, 3):
        b = cb.mahler_bounds(n, 1.0)
        for k in range(4):
            pts = rng.standard_normal((n + 2 + k, n))
            P = cb.PolytopeV.symmetric(pts) if k % 2 == 0 else cb.polar_dual(cb.PolytopeV.symmetric(pts), 1.0)
            m = cb.mahler_volume(P, 1.0, mc_samples=10**6, seed=100 * n + k)
            sig = max(m.std_error, 1e-300)
            worst_sigma = max(worst_sigma, (b["kuper"] - m.value) / sig, (m.value - b["santalo"]) / sig)
            count += 1
    report(3, "Mahler volume", [
        upper("ellipsoid vs Santalo (rel)", ell, 1e-9),
        upper("box vs (4hbar)^n/n! (rel)", box, 1e-12),
        upper(f"polytopes ({count}) outside bounds [sigma]", worst_sigma, 3.0),
    ])


# --- 4 ----------------------------------------------------------------------------------


def test_criterion_4_capacity():
    rng = np.random.default_rng(4)
    ball = 0.0
    for hbar in HBARS:
        for n in (1, 2, 3):
            ball = max(ball, _rel(qs.capacity_ellipsoid(np.eye(2 * n), hbar), math.pi * hbar))
    closed = 0.0
    for k in range(100):
        a, b = np.exp(rng.uniform(-2, 2, 2))
        hbar = HBARS[k % 2]
        closed = max(closed, _rel(qs.capacity_ellipsoid(np.diag([a, b]), hbar), math.pi * hbar / math.sqrt(a * b)))
    # pure quasi states: the dual pair gives lambda_max = 1, hence 4 hbar
    pure = 0.0
    for hbar in HBARS:
        for n in (1, 2, 3):
            B = rng.standard_normal((n, n))
            bodies = [cb.Ball(1.3, n), cb.Ellipsoid(B @ B.T + 0.3 * np.eye(n)), cb.Box(rng.uniform(0.5, 2, n))]
            if n == 2:
                bodies.append(cb.PolytopeV.symmetric(rng.standard_normal((4, 2))))
            for X in bodies:
                q = qs.make_quasi_state(sl.random_symplectic(n, int(rng.integers(2**31))), X, hbar)
                pure = max(pure, abs(qs.cmax_general(X, q.dual, hbar) - 4 * hbar) / hbar, abs(qs.cmax_quasi_state(q) - 4 * hbar) / hbar)
    general = 0.0
    for k in range(40):
        n = 2 + k % 2
        hbar = HBARS[k % 2]
        A = rng.standard_normal((n, n))
        X = cb.Ellipsoid(A @ A.T + 0.5 * np.eye(n))
        B = rng.standard_normal((n, n))
        D = cb.polar_dual(X, hbar)
        P0 = cb.Ellipsoid(B @ B.T + 0.5 * np.eye(n))
        P = cb.scale(P0, 1.05 / cb.inclusion_scale(D, P0))  # P strictly contains D
        c = qs.cmax_general(X, P, hbar)
        oracle = cb.inclusion_scale_sampled(D, P, 4096, seed=k)
        general = max(general, _rel(c / (4 * hbar), oracle))
    inv = 0.0
    for k in range(200):
        n = 1 + k % 3
        S = sl.random_symplectic(n, 50_000 + k)
        M = S.T @ np.diag(np.tile(np.exp(rng.uniform(-1, 1, n)), 2)) @ S
        T = sl.random_symplectic(n, 60_000 + k)
        inv = max(inv, _rel(qs.capacity_ellipsoid(T.T @ M @ T), qs.capacity_ellipsoid(M)))
    report(4, "symplectic capacities", [
        upper("c(ball) vs pi hbar", ball, 1e-12),
        upper("n=1 closed form", closed, 1e-10),
        upper("c_max pure - 4hbar", pure, 1e-9),
        upper("general pair vs oracle", general, 1e-6),
        upper("invariance (200 conj.)", inv, 1e-8),
    ])


# --- 5 ----------------------------------------------------------------------------------


def _constructed_covariances(hbar):
    out = []
    for k in range(1400):
        out.append(ga.random_covariance(1 + k % 3, 70_000 + k, hbar))
    for k in range(200):
        out.append(ga.covariance_from_blob(ga.random_blob(1 + k % 3, 80_000 + k, hbar)))
    for k in range(400):
        cov = ga.covariance_from_blob(ga.random_blob(1 + k % 3, 90_000 + k, hbar))
        f = 0.98 if k % 2 else 1.02
        out.append(ga.CovarianceMatrix(f * cov.Sigma, hbar))
    return out


def test_criterion_5_quantum_condition():
    disagree = rs_fail = floor_disagree = 0
    n_quantum = 0
    purity_err = 0.0
    min_action = math.inf
    for hbar in HBARS:
        covs = _constructed_covariances(hbar)
        assert len(covs) == 2000
        for k, cov in enumerate(covs):
            q = ga.quantum_condition(cov)
            wil = bool(sl.symplectic_eigenvalues(cov.Sigma)[-1] >= 0.5 * hbar * (1 - 1e-10))
            disagree += q != wil
            floor = qs.capacity_ellipsoid(cov.ellipsoid_matrix(), hbar) >= math.pi * hbar * (1 - 1e-10)
            floor_disagree += floor != q
            if q:
                n_quantum += 1
                rs_fail += not bool(np.all(ga.rs_inequalities(cov)[0]))
                if k % 10 == 0:
                    min_action = min(min_action, qs.hz_orbit_action(cov.ellipsoid_matrix(), hbar).action / (math.pi * hbar))
        for k in range(200):
            purity_err = max(purity_err, abs(ga.purity(ga.covariance_from_blob(ga.random_blob(1 + k % 3, k, hbar))) - 1))
    report(5, f"quantum condition on 2x2000 covariances ({n_quantum} quantum)", [
        upper("disagreements vs Williamson", disagree, 0),
        upper("RS failures", rs_fail, 0),
        upper("blob purity - 1", purity_err, 1e-9),
        upper("floor <-> quantum disagreements", floor_disagree, 0),
        ("min orbit action / (pi hbar)", min_action, 1.0, min_action >= 1 - 1e-10),
    ])


# --- 6 ----------------------------------------------------------------------------------


def test_criterion_6_blob_gaussian():
    rt = gram = 0.0
    for k in range(200):
        n = 1 + k % 3
        g = ga.random_gaussian_state(n, 100_000 + k, HBARS[k % 2])
        b = ga.gaussian_to_blob(g)
        g2 = ga.blob_to_gaussian(b)
        rt = max(rt, float(np.max(np.abs(g2.X - g.X))), float(np.max(np.abs(g2.Y - g.Y))), float(np.max(np.abs(g2.center - g.center))))
        gram = max(gram, float(np.max(np.abs(ga.gaussian_to_blob(g2).shape_gram() - b.shape_gram()))))
    mismatch = 0
    for k in range(200):
        n = 1 + k % 3
        S = sl.random_orthosymplectic(n, k) if k % 2 == 0 else sl.random_symplectic(n, k)
        f = sl.pre_iwasawa(S)
        trivial = np.max(np.abs(f.P)) <= 1e-9 and np.max(np.abs(f.L - np.eye(n))) <= 1e-9
        ball = np.max(np.abs(S @ S.T - np.eye(2 * n))) <= 1e-9
        mismatch += trivial != ball
    report(6, "blob/Gaussian bijection", [
        upper("round trip (X, Y, z0)", rt, 1e-9),
        upper("round trip S S^T", gram, 1e-9),
        upper("stabilizer mismatches (200)", mismatch, 0),
    ])


# --- 7 ----------------------------------------------------------------------------------


def _wigner_state(k, hbar=1.0):
    X, Y = moderate_pair(1, 110_000 + k)
    z0 = np.random.default_rng(k).uniform(-1, 1, 2)
    return ga.GaussianState(X, Y, z0, hbar)


def test_criterion_7_wigner():
    x = pg.balanced_grid(512)
    err = norm = marg = 0.0
    for k in range(20):
        g = _wigner_state(k)
        w = pg.grid_from_state(g, x)
        W = pg.wigner_grid(w)
        Z = np.stack(np.meshgrid(W.x, W.p, indexing="ij"), axis=-1)
        err = max(err, float(np.max(np.abs(W.W - ga.wigner_gaussian_value(g, Z)))))
        norm = max(norm, abs(W.normalization() - 1))
        marg = max(marg, float(np.max(np.abs(W.x_marginal() - np.abs(w.psi) ** 2))))
    cov = 0.0
    for k in range(5):
        g = _wigner_state(k)
        w = pg.grid_from_state(g, x)
        W0 = pg.wigner_grid(w)
        for which, par in (("J", None), ("VP", 0.6 - 0.3 * k), ("ML", 0.8 + 0.1 * k)):
            W1 = pg.wigner_grid(pg.grid_metaplectic(w, which, par))
            Z = np.stack(np.meshgrid(W1.x, W1.p, indexing="ij"), axis=-1) @ np.linalg.inv(pg.generator_matrix(which, par)).T
            cov = max(cov, float(np.max(np.abs(W1.W - W0.interpolate(Z[..., 0], Z[..., 1])))))
    report(7, "Wigner numerics (n = 1)", [
        upper("grid vs analytic (20 states)", err, 1e-6),
        upper("covariance J/VP/ML", cov, 1e-5),
        upper("normalization", norm, 1e-6),
        upper("x marginal", marg, 1e-6),
    ])


# --- 8 ----------------------------------------------------------------------------------


def test_criterion_8_fermi():
    spec = fd4 = 0.0
    cases = [(1, k) for k in range(20)] + [(2, k) for k in range(5)]
    for n, k in cases:
        X, Y = moderate_pair(n, 120_000 + 100 * n + k)
        hbar = HBARS[k % 2]
        spec = max(spec, fm.eigen_residual_grid(X, Y, hbar=hbar, method="spectral"))
        fd4 = max(fd4, fm.eigen_residual_grid(X, Y, hbar=hbar, method="fd4"))
    defect = group = energy = 0.0
    ts = np.linspace(0.0, 20.0, 100)
    rng = np.random.default_rng(8)
    for k in range(50):
        n = 1 + k % 3
        X, Y = moderate_pair(n, 130_000 + k)
        fh = fm.fermi_matrix(X, Y, HBARS[k % 2])
        for t in ts:
            defect = max(defect, fm.blob_invariance(fh, t)[1])
        s, t = rng.uniform(-5, 5, 2)
        lhs = fm.canonical_flow(fh, s).S_t @ fm.canonical_flow(fh, t).S_t
        group = max(group, float(np.max(np.abs(lhs - fm.canonical_flow(fh, s + t).S_t))))
        z = rng.standard_normal((32, 2 * n))
        energy = max(energy, float(np.max(fm.energy_drift(fh, rng.uniform(0, 10), z) / (1 + fm.hamiltonian_value(fh, z)))))
    phase = 0.0
    for X, T in ((1.0, math.pi), (2.5, 3.0), (0.6, 2 * math.pi)):
        p, _ = fm.phase_evolution_grid(X, N=1024, T=T)
        phase = max(phase, p)
    report(8, "Fermi Hamiltonian and canonical flow", [
        upper("eigen-residual spectral (25 cases)", spec, 1e-6),
        upper("eigen-residual fd4 (25 cases)", fd4, 1e-4),
        upper("blob invariance (100 t x 50)", defect, 1e-8),
        upper("group law", group, 1e-8),
        upper("energy drift (rel)", energy, 1e-9),
        upper("split-step phase", phase, 1e-5),
    ])


# --- 9 ----------------------------------------------------------------------------------


def _cli(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out


def test_criterion_9_cli(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    proc = subprocess.run([sys.executable, "-m", "phasegeom", "verify", "all"], capture_output=True, text=True)
    verify_ok = proc.returncode == 0 and json.loads(proc.stdout)["result"]["passed"]

    poly = tmp_path / "poly.json"
    poly.write_text(json.dumps(ser.body_to_dict(cb.PolytopeV.symmetric(np.random.default_rng(0).standard_normal((4, 3))))))
    cov = tmp_path / "cov.json"
    cov.write_text(json.dumps(ser.covariance_to_dict(ga.random_covariance(2, 1))))
    runs = [
        ["mahler", poly, "--samples", 50_000, "--seed", 3],
        ["capacity", cov, "--format", "csv"],
        ["verify", "gaussian", "--seed", 5],
    ]
    deterministic = all(_cli(r, capsys) == _cli(r, capsys) for r in runs)

    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    nonsymp = tmp_path / "m.json"
    nonsymp.write_text("[[1.0, 0.1], [0.0, 1.01]]")
    hpoly = tmp_path / "h.json"
    hpoly.write_text(json.dumps(ser.body_to_dict(cb.PolytopeH.symmetric(np.random.default_rng(0).standard_normal((6, 4))))))
    far = tmp_path / "far.json"
    far.write_text(json.dumps({"X": [[1.0]], "z0": [1000.0, 0.0]}))
    expected = {
        1: ["mahler", bad],
        2: ["decompose", nonsymp],
        3: ["mahler", hpoly, "--samples", 1000],
        4: ["wigner-grid", far, "--points", 64],
    }
    got = {code: _cli(argv, capsys)[0] for code, argv in expected.items()}
    monkeypatch.setitem(vf.SUITES, "symplin", lambda seed, hbar: [vf.Check("symplin", "forced", False, 1.0, 0.0)])
    got[5] = _cli(["verify", "symplin"], capsys)[0]
    exit_ok = all(got[c] == c for c in got)
    report(9, "CLI", [
        ("verify all exit 0", float(proc.returncode), 0.0, bool(verify_ok)),
        ("deterministic outputs", float(deterministic), 1.0, deterministic),
        ("exit codes 1-5 " + str(got), float(exit_ok), 1.0, exit_ok),
    ])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
