"""Fermi Hamiltonians of squeezed states and their canonical flows.

``H(x, p) = ((p + Y x)^2 + X^2 x . x) / 2 = M z . z / 2`` with
``M = [[X^2 + Y^2, Y], [Y, I]]``.  Flows follow ``dz/dt = J grad H = J M z``,
so ``S_t = exp(t J M)``; the flag ``paper_time_scale`` doubles t for
callers who use the convention ``dz/dt = 2 J M z``.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AliasingError, DimensionError, InvalidInputError
from .gaussian import GaussianState, evaluate_state, squeezing_matrix
from .symplin import (
    matrix_exponential,
    require_positive_definite,
    require_symmetric,
    standard_J,
    sym_function,
    symplectic_inverse,
)

MAX_TIME = 1e3
INVARIANCE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FermiHamiltonian:
    X: np.ndarray
    Y: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        X = require_positive_definite(self.X, "X")
        Y = require_symmetric(self.Y, "Y")
        if Y.shape != X.shape:
            raise DimensionError("X and Y must have the same shape")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    @cached_property
    def M(self) -> np.ndarray:
        X, Y = self.X, self.Y
        return np.block([[X @ X + Y @ Y, Y], [Y, np.eye(self.n)]])

    @cached_property
    def S(self) -> np.ndarray:
        """The squeezing matrix S_{X,Y} of the state this Hamiltonian fixes."""
        return squeezing_matrix(self.X, self.Y)

    @property
    def D(self) -> np.ndarray:
        z = np.zeros_like(self.X)
        return np.block([[self.X, z], [z, self.X]])

    @property
    def ground_energy(self) -> float:
        return 0.5 * self.hbar * float(np.trace(self.X))

    def state(self) -> GaussianState:
        return GaussianState(self.X, self.Y, None, self.hbar)


def fermi_matrix(X, Y=None, hbar: float = 1.0) -> FermiHamiltonian:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.zeros_like(X) if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    return FermiHamiltonian(X, Y, hbar)


def hamiltonian_value(fh: FermiHamiltonian, z) -> np.ndarray:
    """``M z . z / 2`` for points of shape (..., 2n)."""
    z = np.asarray(z, dtype=float)
    return 0.5 * np.einsum("...i,ij,...j->...", z, fh.M, z)


def hamiltonian_direct(fh: FermiHamiltonian, z) -> np.ndarray:
    """``((p + Y x)^2 + X^2 x . x) / 2`` evaluated term by term."""
    z = np.asarray(z, dtype=float)
    n = fh.n
    x, p = z[..., :n], z[..., n:]
    kin = p + x @ fh.Y.T
    pot = x @ fh.X.T
    return 0.5 * (np.sum(kin**2, axis=-1) + np.sum(pot**2, axis=-1))


def factorization_residual(fh: FermiHamiltonian) -> float:
    """``max|M - S^{-T} D_X S^{-1}|``."""
    S_inv = symplectic_inverse(fh.S)
    return float(np.max(np.abs(fh.M - S_inv.T @ fh.D @ S_inv)))


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CanonicalFlow:
    source: FermiHamiltonian
    t: float
    S_t: np.ndarray


def _flow_time(t, paper_time_scale):
    t = float(t)
    if abs(t) > MAX_TIME:
        raise InvalidInputError(f"|t| must be at most {MAX_TIME:g}")
    return 2.0 * t if paper_time_scale else t


def canonical_flow(fh: FermiHamiltonian, t: float, paper_time_scale: bool = False) -> CanonicalFlow:
    """``S_t = exp(t J M)``."""
    s = _flow_time(t, paper_time_scale)
    return CanonicalFlow(fh, float(t), matrix_exponential(s * standard_J(fh.n) @ fh.M))


def rotation_flow(X, t: float) -> np.ndarray:
    """``[[cos tX, sin tX], [-sin tX, cos tX]]``, equal to ``exp(t J D_X)``."""
    X = require_positive_definite(np.atleast_2d(np.asarray(X, dtype=float)), "X")
    C = sym_function(X, lambda w: np.cos(t * w))
    Sn = sym_function(X, lambda w: np.sin(t * w))
    return np.block([[C, Sn], [-Sn, C]])


def flow_by_conjugation(fh: FermiHamiltonian, t: float, paper_time_scale: bool = False) -> np.ndarray:
    """``S_{X,Y} R_t S_{X,Y}^{-1}``: the flow computed without a matrix exponential."""
    s = _flow_time(t, paper_time_scale)
    return fh.S @ rotation_flow(fh.X, s) @ symplectic_inverse(fh.S)


def blob_invariance(fh: FermiHamiltonian, t: float, tol: float = INVARIANCE_TOL, paper_time_scale: bool = False):
    """Whether S_t maps the blob S_{X,Y} B(sqrt(hbar)) onto itself.

    Returns ``(invariant, defect)`` with ``defect = max|O O^T - I|`` for the
    conjugated flow ``O = S_{X,Y}^{-1} S_t S_{X,Y}``.
    """
    S_t = canonical_flow(fh, t, paper_time_scale).S_t
    O = symplectic_inverse(fh.S) @ S_t @ fh.S
    defect = float(np.max(np.abs(O @ O.T - np.eye(2 * fh.n))))
    return defect <= tol, defect


def energy_drift(fh: FermiHamiltonian, t: float, z, paper_time_scale: bool = False) -> np.ndarray:
    """``|H(S_t z) - H(z)|`` for points of shape (..., 2n)."""
    z = np.asarray(z, dtype=float)
    zt = z @ canonical_flow(fh, t, paper_time_scale).S_t.T
    return np.abs(hamiltonian_value(fh, zt) - hamiltonian_value(fh, z))


# ---------------------------------------------------------------------------
# grid checks
# ---------------------------------------------------------------------------


def _axis_grids(X, hbar, N, width=7.5):
    """Per-axis grids; the state is below 1e-12 of its peak on every face."""
    spread = np.sqrt(hbar * np.diag(np.linalg.inv(X)))
    return [(np.arange(N) - N // 2) * (2.0 * width * s / N) for s in spread]


def _spectral_derivative(f, dx, axis):
    k = 2 * math.pi * np.fft.fftfreq(f.shape[axis], dx)
    shape = [1] * f.ndim
    shape[axis] = -1
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)


def _fd4_derivative(f, dx, axis):
    # fourth-order central differences; the state vanishes at the grid edges
    g = np.moveaxis(f, axis, 0)
    pad = np.zeros((2,) + g.shape[1:], dtype=g.dtype)
    h = np.concatenate([pad, g, pad])
    d = (h[:-4] - 8 * h[1:-3] + 8 * h[3:-1] - h[4:]) / (12 * dx)
    return np.moveaxis(d, 0, axis)


def eigen_residual_grid(X, Y=None, N: int = None, hbar: float = 1.0, method: str = "spectral") -> float:
    """``||H psi - (hbar Tr X / 2) psi|| / ||psi||`` for the squeezed state psi_{X,Y} on a grid.

    The operator is applied as ``sum_j D_j D_j psi / 2 + X^2 x . x psi / 2``
    with ``D_j = -i hbar d/dx_j + (Y x)_j``.  n = 1 uses N = 4096 points by
    default; n = 2 uses 256 x 256 for the spectral route and 512 x 512 for
    finite differences.
    """
    fh = fermi_matrix(X, Y, hbar)
    n = fh.n
    if n not in (1, 2):
        raise DimensionError("grid eigen-residual supports n = 1 or 2")
    if N is None:
        N = 4096 if n == 1 else (256 if method == "spectral" else 512)
    deriv = {"spectral": _spectral_derivative, "fd4": _fd4_derivative}.get(method)
    if deriv is None:
        raise ValueError(f"unknown method {method!r}")

    axes = _axis_grids(fh.X, hbar, N)
    steps = [float(a[1] - a[0]) for a in axes]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    psi = evaluate_state(fh.state(), mesh)
    edge = np.concatenate([np.moveaxis(psi, a, 0)[[0, -1]].ravel() for a in range(n)])
    if float(np.max(np.abs(edge))) > 1e-10 * float(np.max(np.abs(psi))):
        raise AliasingError("grid does not resolve the state")

    Yx = mesh @ fh.Y.T
    X2x = mesh @ (fh.X @ fh.X).T

    def D(f, j):
        return -1j * hbar * deriv(f, steps[j], j) + Yx[..., j] * f

    Hpsi = 0.5 * sum(D(D(psi, j), j) for j in range(n)) + 0.5 * np.sum(X2x * mesh, axis=-1) * psi
    resid = Hpsi - fh.ground_energy * psi
    return float(np.linalg.norm(resid) / np.linalg.norm(psi))


def _wrap(angle):
    return (angle + math.pi) % (2 * math.pi) - math.pi


def phase_evolution_grid(X: float, N: int = 4096, steps: int = None, T: float = 2 * math.pi, hbar: float = 1.0):
    """Strang split-step propagation of psi_{X,0} under the Fermi Hamiltonian up to time T.

    Returns ``(phase_error, shape_error)``: the distance of
    ``arg <psi(0), psi(T)>`` from ``-T X / 2`` modulo 2 pi, and the L2 distance
    between ``|psi(T)|`` and ``|psi(0)|``.  The default step count keeps
    ``dt <= 1e-3``.
    """
    X = float(np.asarray(X, dtype=float).reshape(()))
    if not X > 0:
        raise InvalidInputError("X must be positive")
    if steps is None:
        steps = max(1, math.ceil(abs(T) / 1e-3))
    dt = T / steps
    if abs(dt) * X > 0.1:
        raise InvalidInputError(f"time step {dt:.3g} too large for X = {X:g}; raise steps")
    x = _axis_grids(np.array([[X]]), hbar, N)[0]
    dx = float(x[1] - x[0])
    psi0 = evaluate_state(GaussianState(np.array([[X]]), hbar=hbar), x)
    k = 2 * math.pi * np.fft.fftfreq(N, dx)
    half_pot = np.exp(-0.5j * dt * 0.5 * X**2 * x**2 / hbar)
    kin = np.exp(-0.5j * dt * hbar * k**2)
    psi = psi0.copy()
    for _ in range(steps):
        psi = half_pot * np.fft.ifft(kin * np.fft.fft(half_pot * psi))
    overlap = np.sum(np.conj(psi0) * psi) * dx
    phase_error = abs(_wrap(np.angle(overlap) + T * X / 2))
    shape_error = float(math.sqrt(np.sum((np.abs(psi) - np.abs(psi0)) ** 2) * dx))
    return float(phase_error), shape_error
