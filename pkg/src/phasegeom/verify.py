"""Invariant suites run by ``phasegeom verify``.

Each suite is a function of a seed returning a list of :class:`Check`.
Seeds are derived per suite from the run seed and the suite name, so suites
are independent of one another and of the order they run in.
"""

import math
import zlib
from typing import NamedTuple

import numpy as np

from . import convbody as cb
from . import fermi as fm
from . import gaussian as ga
from . import phasegrid as pg
from . import quasistate as qs
from . import symplin as sl


class Check(NamedTuple):
    suite: str
    name: str
    passed: bool
    value: float
    threshold: float


def _check(suite, name, value, threshold, larger_is_bad=True):
    value = float(value)
    ok = value <= threshold if larger_is_bad else value >= threshold
    return Check(suite, name, bool(ok), value, float(threshold))


def _flag(suite, name, ok):
    return Check(suite, name, bool(ok), float(bool(ok)), 1.0)


def suite_seed(seed: int, name: str) -> int:
    return (int(seed) * 1_000_003 + zlib.crc32(name.encode())) % 2**32


def _symplin(seed, hbar):
    out = []
    worst = 0.0
    for n in (1, 2, 3, 5):
        for k in range(100):
            S = sl.random_symplectic(n, seed + 7919 * n + k)
            f = sl.pre_iwasawa(S)
            worst = max(worst, float(np.max(np.abs(f.reconstruct() - S))))
    out.append(_check("symplin", "pre_iwasawa_reconstruction", worst, 1e-9))
    worst = 0.0
    for k in range(50):
        S = sl.random_symplectic(2, seed + k)
        M = S.T @ S + np.eye(4)
        T = sl.random_symplectic(2, seed + 500 + k)
        worst = max(worst, float(np.max(np.abs(sl.symplectic_eigenvalues(T.T @ M @ T) - sl.symplectic_eigenvalues(M)))))
        d, W = sl.williamson(M)
        worst = max(worst, float(np.max(np.abs(d - sl.symplectic_eigenvalues(M)))))
    out.append(_check("symplin", "spectrum_invariance_and_williamson", worst, 1e-8))
    A = np.random.default_rng(seed).standard_normal((4, 4)) * 0.3
    series = np.eye(4)
    term = np.eye(4)
    for j in range(1, 60):
        term = term @ A / j
        series = series + term
    out.append(_check("symplin", "expm_vs_taylor", np.max(np.abs(sl.matrix_exponential(A) - series)), 1e-10))
    return out


def _convbody(seed, hbar):
    out = []
    rng = np.random.default_rng(seed)
    bodies = [cb.Ball(math.sqrt(hbar), 3), cb.Ellipsoid(np.diag([2.0, 0.5])), cb.Box(np.array([1.0, 2.0, 0.5]))]
    ok = True
    for X in bodies:
        XX = cb.polar_dual(cb.polar_dual(X, hbar), hbar)
        U = rng.standard_normal((64, X.dim))
        ok &= type(XX) is type(X) and np.allclose(XX.support(U), X.support(U), rtol=1e-12, atol=0)
    out.append(_flag("convbody", "reflexivity", ok))
    worst = 0.0
    for k in range(50):
        n = 1 + k % 3
        B = rng.standard_normal((n, n))
        X = cb.Ellipsoid(B @ B.T + n * np.eye(n))
        L = rng.standard_normal((n, n)) + 2 * np.eye(n)
        lhs = cb.polar_dual(cb.linear_image(X, L), hbar)
        rhs = cb.linear_image(cb.polar_dual(X, hbar), np.linalg.inv(L.T))
        worst = max(worst, float(np.max(np.abs(lhs.A - rhs.A)) / max(1.0, float(np.max(np.abs(rhs.A))))))
    out.append(_check("convbody", "scaling_law", worst, 1e-9))
    worst = 0.0
    for n in (1, 2, 3):
        B = rng.standard_normal((n, n))
        v = cb.mahler_volume(cb.Ellipsoid(B @ B.T + np.eye(n)), hbar).value
        worst = max(worst, abs(v / cb.mahler_bounds(n, hbar)["santalo"] - 1))
    out.append(_check("convbody", "ellipsoid_mahler_santalo", worst, 1e-9))
    worst = 0.0
    for n in (1, 2, 3, 4):
        v = cb.mahler_volume(cb.Box(rng.uniform(0.5, 2.0, n)), hbar).value
        worst = max(worst, abs(v / cb.mahler_bounds(n, hbar)["conjecture"] - 1))
    out.append(_check("convbody", "box_mahler_conjecture", worst, 1e-12))
    ok = True
    for k in range(3):
        P = cb.PolytopeV.symmetric(rng.standard_normal((6, 2)))
        m = cb.mahler_volume(P, hbar, mc_samples=200_000, seed=seed + k)
        b = cb.mahler_bounds(2, hbar)
        ok &= b["kuper"] - 3 * m.std_error <= m.value <= b["santalo"] + 3 * m.std_error
    out.append(_flag("convbody", "polytope_mahler_sandwich", ok))
    return out


def _quasistate(seed, hbar):
    out = []
    ok = True
    for k in range(20):
        S0 = sl.random_symplectic(2, seed + k)
        f = qs.frame_from_planes(qs.LagrangianPlane(S0[:, :2]), qs.LagrangianPlane(S0[:, 2:]))
        ok &= f.same_planes(qs.LagrangianFrame(S0))
    out.append(_flag("quasistate", "frame_from_planes", ok))
    S0 = sl.random_symplectic(2, seed)
    X = cb.Ellipsoid(np.array([[2.0, 0.3], [0.3, 0.7]]))
    q = qs.make_quasi_state(S0, X, hbar)
    pts = qs.john_blob(q).boundary_points(2000, seed)
    out.append(_flag("quasistate", "john_blob_inside", np.all(q.contains(pts, 1e-8))))
    worst = 0.0
    for k in range(50):
        S = sl.random_symplectic(2, seed + 100 + k)
        M = S.T @ S
        T = sl.random_symplectic(2, seed + 200 + k)
        worst = max(worst, abs(qs.capacity_ellipsoid(T.T @ M @ T, hbar) - qs.capacity_ellipsoid(M, hbar)))
    out.append(_check("quasistate", "capacity_invariance", worst, 1e-8))
    Pbody = cb.scale(cb.polar_dual(X, hbar), 2.0)
    out.append(_check("quasistate", "cmax_general_scaled_dual", abs(qs.cmax_general(X, Pbody, hbar) - 8 * hbar), 1e-9))
    orbit = qs.hz_orbit_action(sl.random_symplectic(2, seed).T @ np.diag([1.0, 2.0, 1.0, 2.0]) @ sl.random_symplectic(2, seed), hbar)
    out.append(_check("quasistate", "orbit_discrete_action", abs(orbit.discrete_action / orbit.action - 1), 1e-6))
    return out


def _gaussian(seed, hbar):
    out = []
    disagree = 0
    rs_fail = 0
    for k in range(500):
        cov = ga.random_covariance(2, seed + k, hbar)
        qc = ga.quantum_condition(cov)
        wil = bool(sl.symplectic_eigenvalues(cov.Sigma)[-1] >= hbar / 2 - 1e-10)
        disagree += qc != wil
        if qc:
            rs_fail += not np.all(ga.rs_inequalities(cov)[0])
    out.append(_check("gaussian", "quantum_iff_williamson", disagree, 0))
    out.append(_check("gaussian", "quantum_implies_rs", rs_fail, 0))
    worst_rt = 0.0
    worst_pur = 0.0
    for k in range(100):
        g = ga.random_gaussian_state(1 + k % 3, seed + k, hbar)
        g2 = ga.blob_to_gaussian(ga.gaussian_to_blob(g))
        worst_rt = max(worst_rt, float(max(np.max(np.abs(g.X - g2.X)), np.max(np.abs(g.Y - g2.Y)), np.max(np.abs(g.center - g2.center)))))
        worst_pur = max(worst_pur, abs(ga.purity(ga.covariance_from_blob(ga.gaussian_to_blob(g))) - 1))
    out.append(_check("gaussian", "blob_gaussian_round_trip", worst_rt, 1e-9))
    out.append(_check("gaussian", "blob_purity", worst_pur, 1e-9))
    return out


def _fermi(seed, hbar):
    out = []
    worst_def = worst_group = worst_energy = 0.0
    rng = np.random.default_rng(seed)
    for k in range(10):
        g = ga.random_gaussian_state(2, seed + k, hbar)
        fh = fm.fermi_matrix(g.X, g.Y, hbar)
        for t in np.linspace(0.1, 10.0, 20):
            worst_def = max(worst_def, fm.blob_invariance(fh, t)[1])
        St = fm.canonical_flow(fh, 0.7).S_t
        Ss = fm.canonical_flow(fh, 1.9).S_t
        worst_group = max(worst_group, float(np.max(np.abs(St @ Ss - fm.canonical_flow(fh, 2.6).S_t))))
        z = rng.standard_normal((16, 4))
        drift = fm.energy_drift(fh, 2.3, z) / (1 + fm.hamiltonian_value(fh, z))
        worst_energy = max(worst_energy, float(np.max(drift)))
    out.append(_check("fermi", "blob_invariance_sweep", worst_def, 1e-8))
    out.append(_check("fermi", "group_law", worst_group, 1e-8))
    out.append(_check("fermi", "energy_conservation", worst_energy, 1e-9))
    out.append(_check("fermi", "eigen_residual_n1", fm.eigen_residual_grid(3.0, 1.5, hbar=hbar), 1e-6))
    out.append(_check("fermi", "eigen_residual_n2", fm.eigen_residual_grid(np.diag([1.0, 2.0]), None, hbar=hbar), 1e-6))
    return out


def _grid(seed, hbar):
    out = []
    x = pg.balanced_grid(256, hbar)
    worst = 0.0
    worst_norm = 0.0
    for k in range(3):
        g = ga.random_gaussian_state(1, seed + k, hbar)
        W = pg.wigner_grid(pg.grid_from_state(g, x))
        Z = np.stack(np.meshgrid(W.x, W.p, indexing="ij"), axis=-1)
        worst = max(worst, float(np.max(np.abs(W.W - ga.wigner_gaussian_value(g, Z)))))
        worst_norm = max(worst_norm, abs(W.normalization() - 1))
    out.append(_check("grid", "wigner_vs_analytic", worst, 1e-6))
    out.append(_check("grid", "wigner_normalization", worst_norm, 1e-6))
    g = ga.GaussianState(np.array([[1.3]]), np.array([[0.4]]), np.array([0.3, -0.2]), hbar)
    w = pg.grid_from_state(g, x)
    W0 = pg.wigner_grid(w)
    worst = 0.0
    for which, par in (("J", None), ("VP", 0.7), ("ML", 1.2)):
        W1 = pg.wigner_grid(pg.grid_metaplectic(w, which, par))
        Z = np.stack(np.meshgrid(W1.x, W1.p, indexing="ij"), axis=-1) @ np.linalg.inv(pg.generator_matrix(which, par)).T
        worst = max(worst, float(np.max(np.abs(W1.W - W0.interpolate(Z[..., 0], Z[..., 1])))))
    out.append(_check("grid", "wigner_covariance", worst, 1e-5))
    phase, shape = fm.phase_evolution_grid(1.0, N=1024, T=math.pi, hbar=hbar)
    out.append(_check("grid", "split_step_phase", phase, 1e-5))
    out.append(_check("grid", "split_step_shape", shape, 1e-6))
    return out


SUITES = {
    "convbody": _convbody,
    "fermi": _fermi,
    "gaussian": _gaussian,
    "grid": _grid,
    "quasistate": _quasistate,
    "symplin": _symplin,
}


def run_suites(names=("all",), seed: int = 42, hbar: float = 1.0):
    """Run the named suites (sorted by name) and return all checks."""
    names = sorted(SUITES) if "all" in names else sorted(set(names))
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    checks = []
    for name in names:
        checks.extend(SUITES[name](suite_seed(seed, name), hbar))
    return checks
