"""Command-line interface: ``phasegeom <command> INPUT [options]``.

Every command reads JSON (``-`` for stdin) and writes a JSON envelope
``{"tool_version", "config", "timestamp", "command", "result"}`` or, with
``--format csv``, CSV preceded by ``#`` header lines carrying the same
metadata.  Exit codes: 0 success, 1 parse/input error, 2 non-symplectic
input, 3 unsupported polar dual, 4 grid aliasing, 5 invariant failure.
Set ``SOURCE_DATE_EPOCH`` to pin the timestamp.
"""

import argparse
import csv
import datetime
import io
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from . import convbody as cb
from . import fermi as fm
from . import gaussian as ga
from . import phasegrid as pg
from . import quasistate as qs
from . import serialize as ser
from . import symplin as sl
from . import verify as vf
from .errors import InvalidInputError, InvariantError, PhaseGeomError

EXIT_OK = 0
EXIT_PARSE = 1


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (
        datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
        if epoch
        else datetime.datetime.now(datetime.timezone.utc)
    )
    return when.isoformat(timespec="seconds")


def _config(args):
    return {
        "hbar": args.hbar,
        "seed": args.seed,
        "tol": args.tol,
        "samples": args.samples,
        "format": args.format,
        "output": args.output,
        "paper_time_scale": args.paper_time_scale,
    }


def _header(args):
    return {"tool_version": __version__, "config": _config(args), "timestamp": _timestamp(), "command": args.command}


def _write(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def emit_json(args, result):
    _write(args, ser.dumps({**_header(args), "result": result}))


def emit_csv(args, columns, rows):
    buf = io.StringIO()
    for key, value in _header(args).items():
        buf.write(f"# {key}: {json.dumps(ser.to_jsonable(value))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    _write(args, buf.getvalue())


def _load(args):
    return ser.loads(ser.read_text(args.input))


def _hbar_for(obj, args):
    """The hbar in the file wins; otherwise the --hbar flag."""
    if isinstance(obj, dict) and "hbar" not in obj:
        obj = {**obj, "hbar": args.hbar}
    return obj


# --- commands ---------------------------------------------------------------------


def cmd_decompose(args):
    S = ser.parse_matrix_text(ser.read_text(args.input))
    f = sl.pre_iwasawa(S, args.tol)
    err = float(np.max(np.abs(f.reconstruct() - S)))
    emit_json(args, {"P": f.P, "L": f.L, "R": f.R, "reconstruction_error": err})


def cmd_mahler(args):
    obj = _load(args)
    kind = ser.detect_kind(obj)
    if kind == "quasi_state":
        hbar = float(obj.get("hbar", args.hbar))
        obj = obj["body"]
    elif kind == "body":
        hbar = args.hbar
    else:
        raise InvalidInputError(f"mahler expects a body or quasi-state JSON, got {kind}")
    X = ser.body_from_dict(obj)
    s1, s2 = (int(s) for s in np.random.SeedSequence(args.seed).generate_state(2))
    v = cb.volume(X, args.samples, s1)
    vd = cb.volume(cb.polar_dual(X, hbar), args.samples, s2)
    mahler = v.value * vd.value
    err = math.hypot(v.value * vd.std_error, vd.value * v.std_error)
    bounds = cb.mahler_bounds(X.dim, hbar)
    violations = []
    if mahler > bounds["santalo"] + 3 * err + 1e-12 * bounds["santalo"]:
        violations.append("santalo")
    if mahler < bounds["kuper"] - 3 * err - 1e-12 * bounds["kuper"]:
        violations.append("kuper")
    emit_json(
        args,
        {
            "dim": X.dim,
            "hbar": hbar,
            "volume": v.value,
            "volume_std_error": v.std_error,
            "dual_volume": vd.value,
            "dual_volume_std_error": vd.std_error,
            "mahler": mahler,
            "std_error": err,
            "method": "exact" if v.exact and vd.exact else "monte_carlo",
            "santalo_bound": bounds["santalo"],
            "kuper_bound": bounds["kuper"],
            "conjecture_bound": bounds["conjecture"],
            "conjecture_with_pi_bound": bounds["conjecture_with_pi"],
            "violations": violations,
        },
    )


def cmd_capacity(args):
    obj = _hbar_for(_load(args), args)
    kind = ser.detect_kind(obj)
    if kind == "quasi_state":
        q, P = ser.quasi_state_from_dict(obj)
        result = {"kind": "quasi_state", "hbar": q.hbar, "c_max_quasi": qs.cmax_quasi_state(q)}
        if P is not None:
            cert = qs.certify_inclusion_scale(cb.polar_dual(q.base, q.hbar), P, seed=args.seed)
            result.update(
                c_max_general=qs.cmax_general(q.base, P, q.hbar),
                lambda_max=cert.value,
                lambda_max_sampled=cert.sampled,
                certificate_gap=cert.gap,
            )
            value = result["c_max_general"]
        else:
            value = result["c_max_quasi"]
        result["quantum_floor_satisfied"] = bool(value >= math.pi * q.hbar * (1 - 1e-10))
        emit_json(args, result)
        return
    if kind != "covariance":
        raise InvalidInputError(f"capacity expects a quasi-state or covariance JSON, got {kind}")
    cov = ser.covariance_from_dict(obj)
    M = cov.ellipsoid_matrix()
    orbit = qs.hz_orbit_action(M, cov.hbar)
    if args.format == "csv":
        n = cov.n
        cols = [f"x{j + 1}" for j in range(n)] + [f"p{j + 1}" for j in range(n)]
        emit_csv(args, cols, orbit.curve.tolist())
        return
    c = qs.capacity_ellipsoid(M, cov.hbar)
    emit_json(
        args,
        {
            "kind": "covariance",
            "hbar": cov.hbar,
            "c_ellipsoid": c,
            "orbit_action": orbit.action,
            "orbit_discrete_action": orbit.discrete_action,
            "orbit_period": orbit.period,
            "half_planck": math.pi * cov.hbar,
            "quantum_floor_satisfied": bool(ga.quantum_condition(cov)),
        },
    )


def cmd_quantum_check(args):
    cov = ser.covariance_from_dict(_hbar_for(_load(args), args))
    passed, margins = ga.rs_inequalities(cov)
    spectrum = sl.symplectic_eigenvalues(cov.Sigma)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mu = ga.purity(cov)
    witness_ok, _ = ga.contains_quantum_blob(cov, seed=args.seed)
    emit_json(
        args,
        {
            "quantum": bool(ga.quantum_condition(cov)),
            "contains_quantum_blob": bool(witness_ok),
            "symplectic_eigenvalues": spectrum,
            "rs_pass": passed,
            "rs_margins": margins,
            "purity": mu,
            "purity_warning": bool(caught),
            "capacity": 2 * math.pi * float(spectrum[-1]),
        },
    )


def cmd_blob(args):
    obj = _hbar_for(_load(args), args)
    kind = ser.detect_kind(obj)
    if kind == "gaussian":
        b = ga.gaussian_to_blob(ser.gaussian_from_dict(obj))
        emit_json(args, ser.blob_to_dict(b))
    elif kind == "blob":
        g = ga.blob_to_gaussian(ser.blob_from_dict(obj))
        emit_json(args, ser.gaussian_to_dict(g))
    else:
        raise InvalidInputError(f"blob expects a gaussian or blob JSON, got {kind}")


def cmd_flow(args):
    fh = ser.fermi_from_dict(_hbar_for(_load(args), args))
    ts = np.linspace(args.t_start, args.t_stop, args.t_count)
    z = np.random.default_rng(args.seed).standard_normal((64, 2 * fh.n))
    H0 = fm.hamiltonian_value(fh, z)
    S_inv = sl.symplectic_inverse(fh.S)
    rows = []
    for t in ts:
        flow = fm.canonical_flow(fh, t, args.paper_time_scale)
        _, defect = fm.blob_invariance(fh, t, paper_time_scale=args.paper_time_scale)
        drift = float(np.max(fm.energy_drift(fh, t, z, args.paper_time_scale) / (1 + H0)))
        # deviation of the conjugated flow from the rotation by t X
        s = 2 * t if args.paper_time_scale else t
        phase_err = float(np.max(np.abs(S_inv @ flow.S_t @ fh.S - fm.rotation_flow(fh.X, s))))
        rows.append((float(t), defect, drift, phase_err))
    cols = ["t", "defect", "energy_drift", "phase_error"]
    if args.format == "csv":
        emit_csv(args, cols, rows)
    else:
        emit_json(args, {"columns": cols, "rows": rows, "max_defect": max(r[1] for r in rows)})


def cmd_wigner_grid(args):
    g = ser.gaussian_from_dict(_hbar_for(_load(args), args))
    w = pg.grid_from_state(g, pg.balanced_grid(args.points, g.hbar))
    W = pg.wigner_grid(w, x_stride=args.stride)
    if args.binary:
        with open(args.binary, "wb") as fh:
            fh.write(W.to_bytes())
    if args.format == "csv":
        X, P = np.meshgrid(W.x, W.p, indexing="ij")
        emit_csv(args, ["x", "p", "W"], zip(X.ravel(), P.ravel(), W.W.ravel()))
        return
    Z = np.stack(np.meshgrid(W.x, W.p, indexing="ij"), axis=-1)
    err = float(np.max(np.abs(W.W - ga.wigner_gaussian_value(g, Z))))
    emit_json(
        args,
        {
            "nx": len(W.x),
            "np": len(W.p),
            "dx": W.dx * args.stride,
            "dp": W.dp,
            "normalization": W.normalization(),
            "max_imag": W.max_imag,
            "max_error_vs_analytic": err,
            "binary": args.binary,
        },
    )


def cmd_verify(args):
    checks = vf.run_suites(args.suites or ["all"], seed=args.seed, hbar=args.hbar)
    failed = [c for c in checks if not c.passed]
    if args.format == "csv":
        emit_csv(args, ["suite", "name", "passed", "value", "threshold"], [tuple(c) for c in checks])
    else:
        emit_json(args, {"passed": not failed, "checks": [c._asdict() for c in checks], "failed": len(failed)})
    if failed:
        names = ", ".join(f"{c.suite}.{c.name}" for c in failed)
        raise InvariantError(f"{len(failed)} invariant check(s) failed: {names}")


# --- parser -------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--hbar", type=float, default=1.0, help="reduced Planck constant (default 1.0)")
    p.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    p.add_argument("--tol", type=float, default=1e-9, help="symplecticity tolerance (default 1e-9)")
    p.add_argument("--samples", type=int, default=10**6, help="Monte Carlo samples (default 1e6)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    p.add_argument("--paper-time-scale", action="store_true", help="double flow times (dz/dt = 2JMz convention)")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="phasegeom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"phasegeom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, input_help):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("input", help=input_help)
        p.set_defaults(func=func)
        return p

    add("decompose", cmd_decompose, "pre-Iwasawa factors S = V_P M_L R", "matrix file (JSON or whitespace rows)")
    add("mahler", cmd_mahler, "volumes, Mahler volume and reference bounds", "body or quasi-state JSON")
    add("capacity", cmd_capacity, "capacities of quasi states and covariance ellipsoids", "quasi-state or covariance JSON")
    add("quantum-check", cmd_quantum_check, "quantum condition, RS inequalities, purity", "covariance JSON")
    add("blob", cmd_blob, "convert between gaussian and blob JSON", "gaussian or blob JSON")
    p = add("flow", cmd_flow, "canonical flow sweep of a Fermi Hamiltonian", "fermi JSON")
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-stop", type=float, default=10.0)
    p.add_argument("--t-count", type=int, default=101)
    p = add("wigner-grid", cmd_wigner_grid, "grid Wigner function of a 1-D Gaussian", "gaussian JSON (n = 1)")
    p.add_argument("--points", type=int, default=512, help="grid points per axis (default 512)")
    p.add_argument("--stride", type=int, default=1, help="keep every stride-th x row")
    p.add_argument("--binary", default=None, help="also write a WIGGRID1 dump to this path")
    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("suites", nargs="*", help=f"suite names or 'all' ({', '.join(sorted(vf.SUITES))})")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not args.hbar > 0:
            raise InvalidInputError("--hbar must be positive")
        args.func(args)
    except PhaseGeomError as exc:
        print(f"phasegeom: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"phasegeom: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
