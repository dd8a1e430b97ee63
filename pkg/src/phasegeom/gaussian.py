"""Quantum blobs, squeezed coherent states and Gaussian covariance matrices.

A squeezed coherent state is parametrised by (X, Y, z0):

    psi(x) = (det X / (pi hbar)^n)^{1/4} exp((i/hbar)(p0.x - p0.x0/2))
             * exp(-(X + iY)(x - x0).(x - x0) / 2 hbar)

and corresponds to the quantum blob ``z0 + S_{X,Y} B^{2n}(sqrt(hbar))`` with
``S_{X,Y} = V_Y M_{X^{1/2}} = [[X^{-1/2}, 0], [-Y X^{-1/2}, X^{1/2}]]``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidInputError, InvariantError
from .symplin import (
    generator_ML,
    generator_VP,
    half_dim,
    pre_iwasawa,
    random_symplectic,
    require_positive_definite,
    require_symmetric,
    require_symplectic,
    standard_J,
    sym_function,
    sym_sqrt,
    symplectic_eigenvalues,
    symplectic_inverse,
    williamson,
)

PURITY_TOL = 1e-9


class UnphysicalCovarianceWarning(UserWarning):
    pass


def _center(center, n):
    if center is None:
        return np.zeros(2 * n)
    c = np.asarray(center, dtype=float).reshape(-1)
    if c.shape != (2 * n,):
        raise DimensionError(f"center must have length {2 * n}, got {c.shape[0]}")
    return c


@dataclass(frozen=True, eq=False)
class QuantumBlob:
    """The ellipsoid ``center + S(B^{2n}(sqrt(hbar)))``."""

    S: np.ndarray
    center: np.ndarray = None
    hbar: float = 1.0

    def __post_init__(self):
        S = require_symplectic(self.S)
        if not self.hbar > 0:
            raise InvalidInputError("hbar must be positive")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "center", _center(self.center, half_dim(S)))

    @property
    def n(self):
        return self.S.shape[0] // 2

    def contains(self, z, tol=0.0):
        w = (np.asarray(z, dtype=float) - self.center) @ symplectic_inverse(self.S).T
        return np.sum(w * w, axis=-1) <= self.hbar * (1.0 + tol)

    def boundary_points(self, count, seed=0):
        rng = np.random.default_rng(seed)
        u = rng.standard_normal((count, 2 * self.n))
        u *= math.sqrt(self.hbar) / np.linalg.norm(u, axis=1, keepdims=True)
        return u @ self.S.T + self.center

    def shape_gram(self):
        """``S S^T``, which determines the blob as a set."""
        return self.S @ self.S.T


@dataclass(frozen=True, eq=False)
class GaussianState:
    X: np.ndarray
    Y: np.ndarray = None
    center: np.ndarray = None
    hbar: float = 1.0

    def __post_init__(self):
        X = require_positive_definite(np.atleast_2d(np.asarray(self.X, dtype=float)), "X")
        n = X.shape[0]
        Y = np.zeros((n, n)) if self.Y is None else require_symmetric(np.atleast_2d(np.asarray(self.Y, dtype=float)), "Y")
        if Y.shape != X.shape:
            raise DimensionError("X and Y must have the same shape")
        if not self.hbar > 0:
            raise InvalidInputError("hbar must be positive")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "center", _center(self.center, n))

    @property
    def n(self):
        return self.X.shape[0]

    @classmethod
    def standard(cls, n=1, hbar=1.0):
        """The standard coherent state (X = I, Y = 0)."""
        return cls(np.eye(n), np.zeros((n, n)), None, hbar)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    Sigma: np.ndarray
    hbar: float = 1.0
    n: int = field(init=False)

    def __post_init__(self):
        n = half_dim(np.atleast_2d(self.Sigma))
        Sigma = require_positive_definite(self.Sigma, "Sigma")
        if not self.hbar > 0:
            raise InvalidInputError("hbar must be positive")
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "n", n)

    @property
    def xx(self):
        return self.Sigma[: self.n, : self.n]

    @property
    def xp(self):
        return self.Sigma[: self.n, self.n :]

    @property
    def pp(self):
        return self.Sigma[self.n :, self.n :]

    def ellipsoid_matrix(self):
        """M with ``Omega_Sigma = {z : M z.z <= hbar}``, i.e. ``(hbar/2) Sigma^-1``."""
        return 0.5 * self.hbar * np.linalg.inv(self.Sigma)


# ---------------------------------------------------------------------------
# blob <-> state
# ---------------------------------------------------------------------------


def squeezing_matrix(X, Y=None) -> np.ndarray:
    """``S_{X,Y} = V_Y M_{X^{1/2}}``."""
    X = require_positive_definite(np.atleast_2d(np.asarray(X, dtype=float)), "X")
    Y = np.zeros_like(X) if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    return generator_VP(Y) @ generator_ML(sym_sqrt(X))


def gaussian_to_blob(g: GaussianState) -> QuantumBlob:
    return QuantumBlob(squeezing_matrix(g.X, g.Y), g.center, g.hbar)


def blob_to_gaussian(b: QuantumBlob) -> GaussianState:
    """Inverse of :func:`gaussian_to_blob`, via the pre-Iwasawa factors of ``b.S``.

    ``S = V_P M_L R`` and ``R`` fixes the ball, so the blob equals
    ``V_P M_L B`` and matching with ``V_Y M_{X^{1/2}}`` gives X = L^2, Y = P.
    """
    f = pre_iwasawa(b.S)
    X = f.L @ f.L
    return GaussianState(0.5 * (X + X.T), f.P, b.center, b.hbar)


def same_blob(b1: QuantumBlob, b2: QuantumBlob, tol: float = 1e-9) -> bool:
    """Blobs coincide as sets iff centers and ``S S^T`` agree."""
    return (
        np.max(np.abs(b1.center - b2.center)) <= tol
        and np.max(np.abs(b1.shape_gram() - b2.shape_gram())) <= tol * max(1.0, np.max(np.abs(b1.shape_gram())))
    )


# ---------------------------------------------------------------------------
# Wigner function of a pure Gaussian
# ---------------------------------------------------------------------------


def wigner_matrix(X, Y=None) -> np.ndarray:
    """``G_{X,Y}`` from its block formula ``[[X + Y X^-1 Y, Y X^-1], [X^-1 Y, X^-1]]``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.zeros_like(X) if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    Xi = np.linalg.inv(X)
    G = np.block([[X + Y @ Xi @ Y, Y @ Xi], [Xi @ Y, Xi]])
    return 0.5 * (G + G.T)


def wigner_gaussian(g: GaussianState):
    """Return ``(G, norm)`` with ``W(z) = norm * exp(-G (z - z0).(z - z0) / hbar)``."""
    return wigner_matrix(g.X, g.Y), (math.pi * g.hbar) ** (-g.n)


def wigner_gaussian_value(g: GaussianState, z) -> np.ndarray:
    G, norm = wigner_gaussian(g)
    w = np.asarray(z, dtype=float) - g.center
    return norm * np.exp(-np.einsum("...i,ij,...j->...", w, G, w) / g.hbar)


# ---------------------------------------------------------------------------
# covariance matrices
# ---------------------------------------------------------------------------


def covariance_from_blob(b: QuantumBlob) -> CovarianceMatrix:
    return CovarianceMatrix(0.5 * b.hbar * b.shape_gram(), b.hbar)


def blob_from_covariance(cov: CovarianceMatrix, center=None, tol: float = 1e-8) -> QuantumBlob:
    """The blob whose covariance is ``cov``; requires all symplectic eigenvalues = hbar/2.

    Returns the representative with symmetric positive-definite S.
    """
    half = 0.5 * cov.hbar
    lam = symplectic_eigenvalues(cov.Sigma)
    if np.max(np.abs(lam - half)) > tol * half:
        raise InvalidInputError(
            f"covariance is not saturated: symplectic eigenvalues {lam} differ from hbar/2 = {half}"
        )
    return QuantumBlob(sym_sqrt(cov.Sigma / half), center, cov.hbar)


def quantum_condition(cov: CovarianceMatrix, tol: float = 1e-10) -> bool:
    """Positive semi-definiteness of the Hermitian matrix ``Sigma + (i hbar/2) J``."""
    H = cov.Sigma + 0.5j * cov.hbar * standard_J(cov.n)
    return bool(np.linalg.eigvalsh(H)[0] >= -tol)


def contains_quantum_blob(cov: CovarianceMatrix, tol: float = 1e-10, check_samples: int = 1000, seed: int = 0):
    """Whether ``Omega_Sigma`` contains a quantum blob, with a witness.

    Decided by ``min symplectic eigenvalue >= hbar/2``.  When true, the witness
    is ``S^T B^{2n}(sqrt(hbar))`` from the Williamson form ``Sigma = S^T D S``,
    and its containment is checked on sampled boundary points.
    Returns ``(contains, witness_or_None)``.
    """
    lam_min = symplectic_eigenvalues(cov.Sigma)[-1]
    if lam_min < 0.5 * cov.hbar - tol * max(1.0, cov.hbar):
        return False, None
    _, S = williamson(cov.Sigma)
    witness = QuantumBlob(S.T, None, cov.hbar)
    pts = witness.boundary_points(check_samples, seed)
    Sinv = np.linalg.inv(cov.Sigma)
    worst = float(np.max(0.5 * np.einsum("ki,ij,kj->k", pts, Sinv, pts)))
    if worst > 1.0 + 1e-8:
        raise InvariantError(f"witness blob leaks out of the covariance ellipsoid (max {worst:.3e})")
    return True, witness


def rs_inequalities(cov: CovarianceMatrix, tol: float = 1e-10):
    """Robertson-Schrödinger margins ``dx_j^2 dp_j^2 - cov(x_j,p_j)^2 - hbar^2/4``.

    Returns ``(passed, margins)``, both arrays of length n.
    """
    margins = np.diag(cov.xx) * np.diag(cov.pp) - np.diag(cov.xp) ** 2 - 0.25 * cov.hbar**2
    return margins >= -tol * max(1.0, cov.hbar**2), margins


def purity(cov: CovarianceMatrix) -> float:
    """``Tr(rho^2) = (hbar/2)^n / sqrt(det Sigma)``; warns when the value exceeds 1."""
    sign, logdet = np.linalg.slogdet(cov.Sigma)
    value = math.exp(cov.n * math.log(0.5 * cov.hbar) - 0.5 * logdet)
    if value > 1.0 + PURITY_TOL:
        warnings.warn(f"purity {value:.6g} > 1: Sigma is not a quantum covariance", UnphysicalCovarianceWarning, stacklevel=2)
    return value


def random_covariance(n: int, seed: int, hbar: float = 1.0, low: float = 0.25, high: float = 4.0) -> CovarianceMatrix:
    """``(hbar/2) Q^T D Q`` with D log-uniform in [low, high] and Q a random symplectic
    matrix, multiplied by a Haar orthogonal matrix for odd seeds."""
    rng = np.random.default_rng(seed)
    D = np.exp(rng.uniform(math.log(low), math.log(high), size=2 * n))
    Q = random_symplectic(n, int(rng.integers(2**31)))
    if seed % 2:
        Z, R = np.linalg.qr(rng.standard_normal((2 * n, 2 * n)))
        Q = Q @ (Z * np.sign(np.diag(R)))
    Sigma = 0.5 * hbar * (Q.T * D) @ Q
    return CovarianceMatrix(0.5 * (Sigma + Sigma.T), hbar)


def random_gaussian_state(n: int, seed: int, hbar: float = 1.0, with_center: bool = True) -> GaussianState:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    X = sym_function(0.5 * (A + A.T) * 0.5, np.exp)
    B = rng.standard_normal((n, n))
    Y = 0.5 * (B + B.T)
    center = rng.standard_normal(2 * n) if with_center else None
    return GaussianState(X, Y, center, hbar)


def random_blob(n: int, seed: int, hbar: float = 1.0) -> QuantumBlob:
    rng = np.random.default_rng(seed)
    S = random_symplectic(n, int(rng.integers(2**31)), scale=1.0 / math.sqrt(n))
    return QuantumBlob(S, rng.standard_normal(2 * n), hbar)


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------


def evaluate_state(g: GaussianState, x) -> np.ndarray:
    """Values of the displaced squeezed state at points ``x`` of shape (..., n).

    For n = 1 a plain 1-D array of positions is also accepted.
    """
    x = np.asarray(x, dtype=float)
    if g.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != g.n:
        raise DimensionError(f"expected points of dimension {g.n}")
    x0, p0 = g.center[: g.n], g.center[g.n :]
    d = x - x0
    quad = np.einsum("...i,ij,...j->...", d, g.X + 1j * g.Y, d)
    prefactor = (np.linalg.det(g.X) / (math.pi * g.hbar) ** g.n) ** 0.25
    phase = (x @ p0 - 0.5 * p0 @ x0) / g.hbar
    return prefactor * np.exp(1j * phase - quad / (2.0 * g.hbar))

