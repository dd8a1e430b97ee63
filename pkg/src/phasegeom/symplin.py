"""Symplectic linear algebra on R^{2n} with coordinates z = (x, p).

Conventions used throughout the package:

* ``J = [[0, I], [-I, 0]]`` and ``sigma(z, z') = J z . z'``;
* ``M_L = [[L^-1, 0], [0, L^T]]`` maps (x, p) to (L^-1 x, L^T p);
* ``V_P = [[I, 0], [-P, I]]`` maps (x, p) to (x, p - P x), so that ``V_{-P}``
  adds ``P x`` to the momentum.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionError, InvalidInputError, NotSymplecticError

DEFAULT_TOL = 1e-9


def standard_J(n: int) -> np.ndarray:
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def half_dim(M) -> int:
    """Return n for a 2n x 2n matrix; raise DimensionError otherwise."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise DimensionError(f"expected even order, got {M.shape[0]}")
    return M.shape[0] // 2


def blocks(S):
    """Split a 2n x 2n matrix into its n x n blocks (A, B, C, D)."""
    n = half_dim(S)
    return S[:n, :n], S[:n, n:], S[n:, :n], S[n:, n:]


def symplecticity_defect(M) -> float:
    M = np.asarray(M, dtype=float)
    J = standard_J(half_dim(M))
    return float(np.max(np.abs(M.T @ J @ M - J)))


def is_symplectic(M, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``max|M^T J M - J| <= tol``."""
    return symplecticity_defect(M) <= tol


def require_symplectic(S, tol: float = DEFAULT_TOL) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    defect = symplecticity_defect(S)
    if defect > tol:
        raise NotSymplecticError(f"matrix is not symplectic: max|S^T J S - J| = {defect:.3e} > {tol:.1e}")
    return S


def symplectic_inverse(S) -> np.ndarray:
    """Inverse of a symplectic matrix, ``-J S^T J``."""
    J = standard_J(half_dim(S))
    return -J @ np.asarray(S).T @ J


# --- symmetric matrix helpers ------------------------------------------------


def require_symmetric(A, name="matrix", rtol=1e-10) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > rtol * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def require_positive_definite(A, name="matrix") -> np.ndarray:
    A = require_symmetric(A, name)
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise InvalidInputError(f"{name} is not positive definite") from None
    return A


def sym_function(A, func, floor=None) -> np.ndarray:
    """Apply ``func`` to the eigenvalues of the symmetric matrix A."""
    w, V = np.linalg.eigh(A)
    if floor is not None and np.min(w) < floor:
        raise InvalidInputError(f"eigenvalue {np.min(w):.3e} below {floor:.1e}; matrix is (near-)singular")
    return (V * func(w)) @ V.T


def sym_sqrt(A) -> np.ndarray:
    return sym_function(A, np.sqrt, floor=1e-300)


def sym_inv_sqrt(A) -> np.ndarray:
    return sym_function(A, lambda w: 1.0 / np.sqrt(w), floor=1e-300)


# --- generators ---------------------------------------------------------------


def generator_ML(L) -> np.ndarray:
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape[0] != L.shape[1]:
        raise DimensionError(f"L must be square, got shape {L.shape}")
    try:
        Linv = np.linalg.inv(L)
    except np.linalg.LinAlgError:
        raise InvalidInputError("L is singular") from None
    if not np.all(np.isfinite(Linv)) or np.linalg.cond(L) > 1e14:
        raise InvalidInputError("L is singular")
    zero = np.zeros_like(L)
    return np.block([[Linv, zero], [zero, L.T]])


def generator_VP(P) -> np.ndarray:
    P = require_symmetric(P, "P")
    n = P.shape[0]
    eye = np.eye(n)
    return np.block([[eye, np.zeros((n, n))], [-P, eye]])


def random_symplectic(n: int, seed: int, scale: float = None) -> np.ndarray:
    """``exp(J A)`` for a seeded random symmetric A.

    Entries of A are standard normal, symmetrised and multiplied by ``scale``
    (default ``1/sqrt(2n)``, which keeps condition numbers moderate).
    """
    if n < 1:
        raise DimensionError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2 * n, 2 * n))
    if scale is None:
        scale = 1.0 / np.sqrt(2 * n)
    A = 0.5 * (G + G.T) * scale
    return matrix_exponential(standard_J(n) @ A)


def random_orthosymplectic(n: int, seed: int) -> np.ndarray:
    """Haar-random element of Sp(n) ∩ O(2n): ``[[E, F], [-F, E]]`` with E + iF unitary."""
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    E, F = Q.real, Q.imag
    return np.block([[E, F], [-F, E]])


# --- pre-Iwasawa --------------------------------------------------------------


class PreIwasawaFactors(NamedTuple):
    """``S = V_P @ M_L @ R`` with P symmetric, L > 0 symmetric, R in Sp(n) ∩ O(2n)."""

    P: np.ndarray
    L: np.ndarray
    R: np.ndarray

    @property
    def E(self):
        n = self.P.shape[0]
        return self.R[:n, :n]

    @property
    def F(self):
        n = self.P.shape[0]
        return self.R[:n, n:]

    def reconstruct(self) -> np.ndarray:
        return generator_VP(self.P) @ generator_ML(self.L) @ self.R


def pre_iwasawa(S, tol: float = DEFAULT_TOL) -> PreIwasawaFactors:
    S = require_symplectic(S, tol)
    A, B, C, D = blocks(S)
    W = A @ A.T + B @ B.T
    W = 0.5 * (W + W.T)
    w, V = np.linalg.eigh(W)
    if np.min(w) < 1e-300:
        raise InvalidInputError("AA^T + BB^T is singular")
    W_inv_sqrt = (V / np.sqrt(w)) @ V.T
    W_inv = (V / w) @ V.T
    L = 0.5 * (W_inv_sqrt + W_inv_sqrt.T)
    P = -(C @ A.T + D @ B.T) @ W_inv
    P = 0.5 * (P + P.T)
    E = L @ A
    F = L @ B
    R = np.block([[E, F], [-F, E]])
    return PreIwasawaFactors(P, L, R)


# --- symplectic spectrum --------------------------------------------------------


def symplectic_eigenvalues(M, pair_tol: float = 1e-8) -> np.ndarray:
    """Symplectic eigenvalues of a symmetric positive-definite 2n x 2n matrix.

    Returns the n positive numbers lambda_j with ``eig(J M) = {±i lambda_j}``,
    sorted in descending order.
    """
    n = half_dim(M)
    M = require_positive_definite(M, "M")
    ev = np.linalg.eigvals(standard_J(n) @ M)
    scale = float(np.max(np.abs(ev)))
    if np.max(np.abs(ev.real)) > pair_tol * scale:
        raise InvalidInputError("J M has eigenvalues off the imaginary axis")
    im = np.sort(ev.imag)
    neg, pos = im[:n], im[n:]
    if np.min(pos) <= 0 or np.max(np.abs(pos[::-1] + neg)) > pair_tol * scale:
        raise InvalidInputError("eigenvalues of J M do not pair as ±i lambda")
    return pos[::-1].copy()


def williamson(M):
    """Williamson normal form ``M = S^T diag(d, d) S`` with S symplectic.

    ``d`` is returned in descending order.  S is built from the eigenvectors of
    the Hermitian matrix ``i M^{1/2} J M^{1/2}``, an independent route from the
    ``eig(J M)`` computation in :func:`symplectic_eigenvalues`.
    """
    n = half_dim(M)
    M = require_positive_definite(M, "M")
    Mh = sym_sqrt(M)
    K = Mh @ standard_J(n) @ Mh
    w, U = np.linalg.eigh(1j * K)
    order = np.argsort(w)[::-1][:n]
    d = w[order]
    V = U[:, order]
    # with K a = d b and K b = -d a, the columns (b, a) * sqrt(2) bring K to [[0, D], [-D, 0]]
    O = np.sqrt(2.0) * np.hstack([V.imag, V.real])
    Dm12 = np.concatenate([d, d]) ** -0.5
    S = Dm12[:, None] * (O.T @ Mh)
    return d, S


# --- exponential ------------------------------------------------------------------


def matrix_exponential(A) -> np.ndarray:
    """Matrix exponential by Padé scaling-and-squaring (scipy)."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return scipy.linalg.expm(A)
