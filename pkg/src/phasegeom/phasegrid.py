"""One-dimensional grid numerics: sampled wavefunctions, metaplectic
generators acting on them, and the Wigner transform by FFT.

Grids are uniform and centred, ``x_k = (k - N/2) dx``.  Two spacings are
special: ``N dx^2 = 2 pi hbar`` lets the Fourier generator run as a plain FFT,
and ``N dx^2 = pi hbar`` gives a Wigner grid with equal x and p ranges.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.interpolate

from . import _accel
from .errors import AliasingError, DimensionError, InvalidInputError
from .gaussian import GaussianState, evaluate_state

DEFAULT_POINTS = 4096
STATE_TAIL_TOL = 1e-10
OUTPUT_TAIL_TOL = 1e-8
NORM_TOL = 1e-6
WIGNER_EDGE_TOL = 1e-6
WIGGRID_MAGIC = b"WIGGRID1"


def centered_grid(N: int, dx: float) -> np.ndarray:
    return (np.arange(N) - N // 2) * dx


def fft_grid(N: int = DEFAULT_POINTS, hbar: float = 1.0) -> np.ndarray:
    """Grid on which the Fourier generator is an exact DFT."""
    return centered_grid(N, math.sqrt(2 * math.pi * hbar / N))


def balanced_grid(N: int, hbar: float = 1.0) -> np.ndarray:
    """Grid whose Wigner momentum range equals its position range."""
    return centered_grid(N, math.sqrt(math.pi * hbar / N))


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    x: np.ndarray
    psi: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        psi = np.asarray(self.psi, dtype=np.complex128)
        if x.ndim != 1 or psi.shape != x.shape:
            raise DimensionError("x and psi must be 1-D arrays of equal length")
        steps = np.diff(x)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise InvalidInputError("grid must be uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "psi", psi)
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise InvalidInputError(f"wavefunction is not normalised (norm {self.norm():.9f})")

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def N(self):
        return self.x.shape[0]

    def norm(self):
        return math.sqrt(float(np.sum(np.abs(self.psi) ** 2)) * (self.x[1] - self.x[0]))

    def tail_mass(self, fraction=0.1):
        """Probability mass on the outer ``fraction`` of the grid (both ends)."""
        edge = int(math.ceil(fraction * self.N / 2))
        dens = np.abs(self.psi) ** 2 * self.dx
        return float(np.sum(dens[:edge]) + np.sum(dens[-edge:]))

    def inner(self, other: "GridWavefunction") -> complex:
        """``<self | other>`` by the rectangle rule."""
        return complex(np.sum(np.conj(self.psi) * other.psi) * self.dx)


def _guard(w: GridWavefunction, tol=OUTPUT_TAIL_TOL) -> GridWavefunction:
    tail = w.tail_mass()
    if tail > tol:
        raise AliasingError(f"grid does not resolve the state: tail mass {tail:.3e} > {tol:.1e}")
    return w


def default_grid(g: GaussianState, N: int = DEFAULT_POINTS) -> np.ndarray:
    """Centred grid of half-width ``12 sqrt(hbar / min eig X)`` plus the offset |x0|."""
    if g.n != 1:
        raise DimensionError("grid numerics are one-dimensional")
    half_width = 12.0 * math.sqrt(g.hbar / float(np.min(np.linalg.eigvalsh(g.X)))) + abs(g.center[0])
    return centered_grid(N, 2.0 * half_width / N)


def grid_from_state(g: GaussianState, x=None, N: int = DEFAULT_POINTS) -> GridWavefunction:
    if g.n != 1:
        raise DimensionError("grid numerics are one-dimensional")
    x = default_grid(g, N) if x is None else np.asarray(x, dtype=float)
    psi = evaluate_state(g, x)
    mass = float(np.sum(np.abs(psi) ** 2) * (x[1] - x[0]))
    if abs(mass - 1.0) > STATE_TAIL_TOL:
        raise AliasingError(f"grid holds probability mass {mass:.12f} of the state; widen or shift it")
    return _guard(GridWavefunction(x, psi, g.hbar), STATE_TAIL_TOL)


# ---------------------------------------------------------------------------
# metaplectic generators
# ---------------------------------------------------------------------------


def _resample(w: GridWavefunction, points, method="fourier") -> np.ndarray:
    """Values of the grid function at arbitrary points; zero outside the grid.

    "fourier" evaluates the trigonometric interpolant (exact for band-limited
    data); "cubic" uses splines on real and imaginary parts.
    """
    points = np.asarray(points, dtype=float)
    inside = (points >= w.x[0]) & (points <= w.x[-1])
    if method == "cubic":
        re = scipy.interpolate.CubicSpline(w.x, w.psi.real)(points)
        im = scipy.interpolate.CubicSpline(w.x, w.psi.imag)(points)
        vals = re + 1j * im
    elif method == "fourier":
        q = 2 * math.pi * np.fft.fftfreq(w.N, w.dx)
        coef = np.fft.fft(w.psi) / w.N
        # scaled_dft computes sum_k exp(-i a_m b_k / h) c_k; h = -1 flips the sign
        vals = _accel.scaled_dft(coef, np.ascontiguousarray(points - w.x[0]), q, -1.0)
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    return np.where(inside, vals, 0.0)


def apply_J(w: GridWavefunction) -> GridWavefunction:
    """``(2 pi i hbar)^{-1/2} int exp(-i x.x'/hbar) psi(x') dx'`` on the same grid."""
    x, dx, N, hbar = w.x, w.dx, w.N, w.hbar
    pref = (2 * math.pi * hbar) ** -0.5 * np.exp(-0.25j * math.pi) * dx
    on_fft_grid = abs(N * dx * dx - 2 * math.pi * hbar) <= 1e-12 * 2 * math.pi * hbar
    if on_fft_grid and np.isclose(x[N // 2], 0.0, atol=1e-14 * dx):
        h = N // 2
        sign = np.where(np.arange(N) % 2, -1.0, 1.0) if h % 2 == 0 else None
        # exp(-2 pi i (m-h)(k-h)/N) = exp(-2 pi i mk/N) exp(2 pi i h(m+k)/N) exp(-2 pi i h^2/N)
        shift = np.exp(2j * math.pi * h * np.arange(N) / N) if sign is None else sign
        out = shift * np.fft.fft(shift * w.psi) * np.exp(-2j * math.pi * h * h / N)
    else:
        out = _accel.scaled_dft(np.ascontiguousarray(w.psi), x, x, hbar)
    return _guard(GridWavefunction(x, pref * out, hbar))


def apply_ML(w: GridWavefunction, L: float, m: int = None, method: str = "fourier") -> GridWavefunction:
    """``i^m sqrt|L| psi(L x)``; m defaults to 0 for L > 0 and 1 for L < 0."""
    L = float(L)
    if L == 0:
        raise InvalidInputError("L must be non-zero")
    if m is None:
        m = 0 if L > 0 else 1
    out = (1j**m) * math.sqrt(abs(L)) * _resample(w, L * w.x, method)
    return _guard(GridWavefunction(w.x, out, w.hbar))


def apply_VP(w: GridWavefunction, P: float) -> GridWavefunction:
    """``exp(-i P x^2 / 2 hbar) psi``."""
    return GridWavefunction(w.x, np.exp(-0.5j * float(P) * w.x**2 / w.hbar) * w.psi, w.hbar)


def apply_displacement(w: GridWavefunction, z0, method: str = "fourier") -> GridWavefunction:
    """``exp((i/hbar)(p0 x - p0 x0 / 2)) psi(x - x0)``."""
    x0, p0 = (float(v) for v in np.asarray(z0, dtype=float).reshape(2))
    phase = np.exp(1j * (p0 * w.x - 0.5 * p0 * x0) / w.hbar)
    return _guard(GridWavefunction(w.x, phase * _resample(w, w.x - x0, method), w.hbar))


def grid_metaplectic(w: GridWavefunction, which: str, param=None) -> GridWavefunction:
    """Dispatch on ``which`` in {"J", "ML", "VP", "displace"}.

    ``param`` is L (or a pair (L, m)) for "ML", P for "VP" and z0 for "displace".
    """
    if which == "J":
        return apply_J(w)
    if which == "ML":
        if isinstance(param, tuple):
            return apply_ML(w, *param)
        return apply_ML(w, param)
    if which == "VP":
        return apply_VP(w, param)
    if which == "displace":
        return apply_displacement(w, param)
    raise ValueError(f"unknown generator {which!r}")


def generator_matrix(which: str, param=None) -> np.ndarray:
    """The 2 x 2 symplectic matrix covered by :func:`grid_metaplectic`."""
    if which == "J":
        return np.array([[0.0, 1.0], [-1.0, 0.0]])
    if which == "ML":
        L = float(param[0] if isinstance(param, tuple) else param)
        return np.array([[1.0 / L, 0.0], [0.0, L]])
    if which == "VP":
        return np.array([[1.0, 0.0], [-float(param), 1.0]])
    raise ValueError(f"no linear symplectic matrix for {which!r}")


# ---------------------------------------------------------------------------
# Wigner transform
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Samples ``W[i, m] = W(x[i], p[m])``."""

    x: np.ndarray
    p: np.ndarray
    W: np.ndarray
    hbar: float = 1.0
    max_imag: float = 0.0

    @property
    def dx(self):
        return float(self.x[1] - self.x[0])

    @property
    def dp(self):
        return float(self.p[1] - self.p[0])

    def normalization(self):
        return float(np.sum(self.W) * self.dx * self.dp)

    def x_marginal(self):
        return np.sum(self.W, axis=1) * self.dp

    def interpolate(self, x, p, degree: int = 5):
        """Spline interpolation (degree 5 by default); zero outside the sampled rectangle."""
        spline = scipy.interpolate.RectBivariateSpline(self.x, self.p, self.W, kx=degree, ky=degree, s=0)
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        vals = spline.ev(x, p)
        outside = (x < self.x[0]) | (x > self.x[-1]) | (p < self.p[0]) | (p > self.p[-1])
        return np.where(outside, 0.0, vals)

    def to_csv(self, fh):
        """Rows ``x,p,W`` with a header line."""
        fh.write("x,p,W\n")
        X, P = np.meshgrid(self.x, self.p, indexing="ij")
        for a, b, c in zip(X.ravel(), P.ravel(), self.W.ravel()):
            fh.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")

    def to_bytes(self) -> bytes:
        """Binary dump; layout documented in :func:`read_wigner_binary`."""
        head = WIGGRID_MAGIC + struct.pack("<QQd", len(self.x), len(self.p), self.hbar)
        body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in (self.x, self.p, self.W))
        return head + body


def read_wigner_binary(data: bytes) -> WignerGrid:
    """Parse a WIGGRID1 dump.

    Layout (little endian): 8-byte magic ``WIGGRID1``; uint64 Nx; uint64 Np;
    float64 hbar; Nx float64 x values; Np float64 p values; Nx*Np float64
    W values, row-major with x varying slowest.
    """
    if data[:8] != WIGGRID_MAGIC:
        raise InvalidInputError("not a WIGGRID1 file")
    nx, npts, hbar = struct.unpack_from("<QQd", data, 8)
    arr = np.frombuffer(data, dtype="<f8", offset=32)
    if arr.size != nx + npts + nx * npts:
        raise InvalidInputError("truncated WIGGRID1 file")
    x, p, W = arr[:nx], arr[nx : nx + npts], arr[nx + npts :].reshape(nx, npts)
    return WignerGrid(x.copy(), p.copy(), W.copy(), hbar)


def wigner_grid(w: GridWavefunction, x_stride: int = 1, check: bool = True) -> WignerGrid:
    """Wigner transform on the grid, by FFT over the lag variable.

    With ``y = 2 k dx`` the samples ``psi(x_i + y/2)`` and ``psi(x_i - y/2)`` sit
    on the grid, and the momentum grid is ``p_m = (m - N/2) pi hbar / (N dx)``.
    ``x_stride`` keeps every stride-th position row (the N x N array grows fast).
    """
    _guard(w, OUTPUT_TAIL_TOL)
    N, dx, hbar = w.N, w.dx, w.hbar
    rows = np.arange(0, N, x_stride)
    C = _accel.autocorrelation(np.ascontiguousarray(w.psi), rows)
    F = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(C, axes=1), axis=1), axes=1)
    F *= dx / (math.pi * hbar)
    p = centered_grid(N, math.pi * hbar / (N * dx))
    W = F.real
    max_imag = float(np.max(np.abs(F.imag)))
    if check:
        edge = max(1, N // 64)
        edge_max = float(max(np.max(np.abs(W[:, :edge])), np.max(np.abs(W[:, -edge:]))))
        if edge_max > WIGNER_EDGE_TOL * float(np.max(np.abs(W))):
            raise AliasingError(f"Wigner function does not decay at the momentum edge ({edge_max:.3e})")
    return WignerGrid(w.x[rows], p, W, hbar, max_imag)
