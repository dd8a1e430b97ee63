"""JSON schemas for bodies, states, blobs and matrices.

Schemas (all matrices are lists of rows, vectors are flat lists):

* body:        {"variant": "ball" | "ellipsoid" | "box" | "polytope_v" | "polytope_h",
                "dim": n, "params": {...}}
  params:      ball {"radius": r}; ellipsoid {"A": [[...]]}; box {"half_widths": [...]};
               polytope_v {"vertices": [[...]]}; polytope_h {"normals": [[...]]}
* quasi state: {"S": [[...]], "body": <body>, "hbar": h, "P": <body, optional>}
* covariance:  {"Sigma": [[...]], "hbar": h}
* gaussian:    {"X": [[...]], "Y": [[...]], "z0": [...], "hbar": h}
* blob:        {"S": [[...]], "center": [...], "hbar": h}
* fermi:       {"X": [[...]], "Y": [[...]], "hbar": h}

CLI output wraps a result as {"tool_version", "config", "timestamp", "command",
"result"}; every reader also accepts such an envelope and unwraps it.
"""

import io
import json
import sys

import numpy as np

from .convbody import Ball, Box, ConvexBody, Ellipsoid, PolytopeH, PolytopeV
from .errors import InvalidInputError
from .fermi import FermiHamiltonian, fermi_matrix
from .gaussian import CovarianceMatrix, GaussianState, QuantumBlob
from .quasistate import QuasiState, make_quasi_state


def to_jsonable(obj):
    """Recursively convert numpy containers and scalars to plain Python."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    # Python's float repr is the shortest string that round-trips exactly
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=True) + "\n"


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"invalid JSON: {exc}") from None
    if isinstance(obj, dict) and "result" in obj and "tool_version" in obj:
        obj = obj["result"]
    return obj


def _get(obj, key, kind):
    if not isinstance(obj, dict) or key not in obj:
        raise InvalidInputError(f"{kind} JSON is missing field {key!r}")
    return obj[key]


def _matrix(value, name):
    try:
        A = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} is not a numeric matrix") from None
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be a matrix (list of rows)")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return A


def _vector(value, name):
    try:
        v = np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} is not a numeric vector") from None
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return v


def _hbar(obj, default=1.0):
    h = float(obj.get("hbar", default)) if isinstance(obj, dict) else default
    if not h > 0:
        raise InvalidInputError("hbar must be positive")
    return h


def parse_matrix_text(text: str) -> np.ndarray:
    """A matrix given as JSON (bare list or {"S"|"matrix": ...}) or as whitespace-separated rows."""
    stripped = text.strip()
    if stripped.startswith(("[", "{")):
        obj = loads(stripped)
        if isinstance(obj, dict):
            obj = obj.get("S", obj.get("matrix"))
            if obj is None:
                raise InvalidInputError("JSON object needs an 'S' or 'matrix' field")
        return _matrix(obj, "matrix")
    try:
        return _matrix(np.loadtxt(io.StringIO(stripped), ndmin=2), "matrix")
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse matrix: {exc}") from None


# --- bodies -----------------------------------------------------------------------


def body_to_dict(X: ConvexBody) -> dict:
    if isinstance(X, Ball):
        variant, params = "ball", {"radius": X.radius}
    elif isinstance(X, Ellipsoid):
        variant, params = "ellipsoid", {"A": X.A}
    elif isinstance(X, Box):
        variant, params = "box", {"half_widths": X.half_widths}
    elif isinstance(X, PolytopeV):
        variant, params = "polytope_v", {"vertices": X.vertices}
    elif isinstance(X, PolytopeH):
        variant, params = "polytope_h", {"normals": X.normals}
    else:
        raise TypeError(f"cannot serialize {type(X).__name__}")
    return to_jsonable({"variant": variant, "dim": X.dim, "params": params})


def body_from_dict(obj) -> ConvexBody:
    variant = _get(obj, "variant", "body")
    params = _get(obj, "params", "body")
    dim = obj.get("dim")
    if variant == "ball":
        if dim is None:
            raise InvalidInputError("ball needs 'dim'")
        X = Ball(float(_get(params, "radius", "ball")), int(dim))
    elif variant == "ellipsoid":
        X = Ellipsoid(_matrix(_get(params, "A", "ellipsoid"), "A"))
    elif variant == "box":
        X = Box(_vector(_get(params, "half_widths", "box"), "half_widths"))
    elif variant == "polytope_v":
        X = PolytopeV(_matrix(_get(params, "vertices", "polytope_v"), "vertices"))
    elif variant == "polytope_h":
        X = PolytopeH(_matrix(_get(params, "normals", "polytope_h"), "normals"))
    else:
        raise InvalidInputError(f"unknown body variant {variant!r}")
    if dim is not None and int(dim) != X.dim:
        raise InvalidInputError(f"declared dim {dim} does not match parameters (dim {X.dim})")
    return X


# --- states -----------------------------------------------------------------------


def quasi_state_to_dict(qs: QuasiState, P: ConvexBody = None) -> dict:
    out = {"S": qs.S, "body": body_to_dict(qs.base), "hbar": qs.hbar}
    if P is not None:
        out["P"] = body_to_dict(P)
    return to_jsonable(out)


def quasi_state_from_dict(obj):
    """Returns ``(quasi_state, P)`` with P None when absent."""
    qs = make_quasi_state(_matrix(_get(obj, "S", "quasi state"), "S"), body_from_dict(_get(obj, "body", "quasi state")), _hbar(obj))
    P = body_from_dict(obj["P"]) if obj.get("P") is not None else None
    return qs, P


def covariance_to_dict(cov: CovarianceMatrix) -> dict:
    return to_jsonable({"Sigma": cov.Sigma, "hbar": cov.hbar})


def covariance_from_dict(obj) -> CovarianceMatrix:
    return CovarianceMatrix(_matrix(_get(obj, "Sigma", "covariance"), "Sigma"), _hbar(obj))


def gaussian_to_dict(g: GaussianState) -> dict:
    return to_jsonable({"X": g.X, "Y": g.Y, "z0": g.center, "hbar": g.hbar})


def gaussian_from_dict(obj) -> GaussianState:
    X = _matrix(_get(obj, "X", "gaussian"), "X")
    Y = _matrix(obj["Y"], "Y") if obj.get("Y") is not None else None
    z0 = _vector(obj["z0"], "z0") if obj.get("z0") is not None else None
    return GaussianState(X, Y, z0, _hbar(obj))


def blob_to_dict(b: QuantumBlob) -> dict:
    return to_jsonable({"S": b.S, "center": b.center, "hbar": b.hbar})


def blob_from_dict(obj) -> QuantumBlob:
    S = _matrix(_get(obj, "S", "blob"), "S")
    center = _vector(obj["center"], "center") if obj.get("center") is not None else None
    return QuantumBlob(S, center, _hbar(obj))


def fermi_to_dict(fh: FermiHamiltonian) -> dict:
    return to_jsonable({"X": fh.X, "Y": fh.Y, "hbar": fh.hbar})


def fermi_from_dict(obj) -> FermiHamiltonian:
    X = _matrix(_get(obj, "X", "fermi"), "X")
    Y = _matrix(obj["Y"], "Y") if obj.get("Y") is not None else None
    return fermi_matrix(X, Y, _hbar(obj))


def detect_kind(obj) -> str:
    """Guess the schema of a parsed JSON object."""
    if not isinstance(obj, dict):
        raise InvalidInputError("expected a JSON object")
    if "Sigma" in obj:
        return "covariance"
    if "variant" in obj:
        return "body"
    if "S" in obj:
        return "quasi_state" if "body" in obj else "blob"
    if "X" in obj:
        return "gaussian"
    raise InvalidInputError("unrecognised JSON object")
