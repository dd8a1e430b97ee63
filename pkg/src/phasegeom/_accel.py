"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical semantics.  The numba path is
used unless numba is missing or ``PHASEGEOM_DISABLE_NUMBA`` is set to a truthy
value before import.  Both variants stay importable (``*_numba`` / ``*_numpy``)
so tests and benchmarks can compare them directly.
"""

import os

import numpy as np

_FLAG = os.environ.get("PHASEGEOM_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def _njit(*args, **kwargs):
    def decorator(func):
        if HAVE_NUMBA:
            return numba.njit(*args, **kwargs)(func)
        return func

    return decorator


# ---------------------------------------------------------------------------
# Monte Carlo membership: points inside {x : normals @ x <= offsets + tol}
# ---------------------------------------------------------------------------


@_njit(cache=True, nogil=True)
def count_inside_numba(points, normals, offsets, tol):
    m, n = points.shape
    k = normals.shape[0]
    hits = 0
    for i in range(m):
        inside = True
        for j in range(k):
            s = 0.0
            for d in range(n):
                s += normals[j, d] * points[i, d]
            if s > offsets[j] + tol:
                inside = False
                break
        if inside:
            hits += 1
    return hits


def count_inside_numpy(points, normals, offsets, tol):
    vals = points @ normals.T
    return int(np.count_nonzero(np.all(vals <= offsets + tol, axis=1)))


# ---------------------------------------------------------------------------
# Wigner autocorrelation: C[r, j] = psi[i + k] * conj(psi[i - k]),
# i = rows[r], k = j - N//2
# ---------------------------------------------------------------------------


@_njit(cache=True, nogil=True)
def autocorrelation_numba(psi, rows):
    N = psi.shape[0]
    half = N // 2
    out = np.zeros((rows.shape[0], N), dtype=np.complex128)
    for r in range(rows.shape[0]):
        i = rows[r]
        for j in range(N):
            k = j - half
            a = i + k
            b = i - k
            if 0 <= a < N and 0 <= b < N:
                out[r, j] = psi[a] * np.conj(psi[b])
    return out


def autocorrelation_numpy(psi, rows):
    N = psi.shape[0]
    i = np.asarray(rows)[:, None]
    k = np.arange(N)[None, :] - N // 2
    a = i + k
    b = i - k
    valid = (a >= 0) & (a < N) & (b >= 0) & (b < N)
    out = np.zeros((len(rows), N), dtype=np.complex128)
    out[valid] = psi[a[valid]] * np.conj(psi[b[valid]])
    return out


# ---------------------------------------------------------------------------
# Scaled DFT: out[m] = sum_k exp(-i x_out[m] x_in[k] / hbar) psi[k]
# ---------------------------------------------------------------------------


@_njit(cache=True, nogil=True)
def scaled_dft_numba(psi, x_out, x_in, hbar):
    M = x_out.shape[0]
    K = x_in.shape[0]
    out = np.zeros(M, dtype=np.complex128)
    for m in range(M):
        acc = 0.0 + 0.0j
        for k in range(K):
            ph = -x_out[m] * x_in[k] / hbar
            acc += (np.cos(ph) + 1j * np.sin(ph)) * psi[k]
        out[m] = acc
    return out


def scaled_dft_numpy(psi, x_out, x_in, hbar, block=512):
    out = np.empty(x_out.shape[0], dtype=np.complex128)
    for start in range(0, x_out.shape[0], block):
        xs = x_out[start:start + block]
        out[start:start + block] = np.exp(-1j * np.outer(xs, x_in) / hbar) @ psi
    return out


if USE_NUMBA:
    count_inside = count_inside_numba
    autocorrelation = autocorrelation_numba
    scaled_dft = scaled_dft_numba
else:
    count_inside = count_inside_numpy
    autocorrelation = autocorrelation_numpy
    scaled_dft = scaled_dft_numpy


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
