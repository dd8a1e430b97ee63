"""Lagrangian frames, quasi states S(X x X^hbar), and symplectic capacities.

A quasi state is stored as a symplectic matrix S together with a base body X;
the phase-space set ``S(X x X^hbar)`` is never built.  Every query maps the
point back with ``S^{-1}`` and tests the two factors separately.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .convbody import (
    Ball,
    ConvexBody,
    Ellipsoid,
    VolumeEstimate,
    inclusion_scale,
    inclusion_scale_sampled,
    polar_dual,
)
from .errors import DimensionError, InvalidInputError, UnsupportedDualError
from .gaussian import QuantumBlob
from .symplin import (
    DEFAULT_TOL,
    generator_ML,
    half_dim,
    require_positive_definite,
    require_symplectic,
    standard_J,
    sym_sqrt,
    symplectic_eigenvalues,
    symplectic_inverse,
    williamson,
)

PLANE_TOL = 1e-9
ON_PLANE_TOL = 1e-8
CERTIFICATE_GAP = 1e-4


# ---------------------------------------------------------------------------
# Lagrangian planes and frames
# ---------------------------------------------------------------------------


def _column_normalized(basis):
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] != 2 * basis.shape[1]:
        raise DimensionError(f"a plane basis must be 2n x n, got shape {basis.shape}")
    norms = np.linalg.norm(basis, axis=0)
    if np.any(norms == 0):
        raise InvalidInputError("plane basis has a zero column")
    return basis / norms


def _require_full_rank(basis):
    B = _column_normalized(basis)
    smin = np.linalg.svd(B, compute_uv=False)[-1]
    if smin <= PLANE_TOL:
        raise InvalidInputError(f"plane basis is rank deficient (smallest singular value {smin:.2e})")
    return B


def plane_is_lagrangian(basis, tol: float = PLANE_TOL) -> bool:
    """True iff the symplectic form vanishes on the column span of ``basis``."""
    B = _require_full_rank(basis)
    n = B.shape[1]
    return float(np.max(np.abs(B.T @ standard_J(n) @ B))) <= tol


@dataclass(frozen=True, eq=False)
class LagrangianPlane:
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if not plane_is_lagrangian(basis):
            raise InvalidInputError("basis does not span a Lagrangian plane")
        object.__setattr__(self, "basis", basis)

    @property
    def n(self):
        return self.basis.shape[1]

    @cached_property
    def projector(self):
        """Orthogonal projector onto the plane."""
        Q = scipy.linalg.orth(self.basis)
        return Q @ Q.T

    def same_as(self, other: "LagrangianPlane", tol: float = 1e-8) -> bool:
        return self.n == other.n and float(np.max(np.abs(self.projector - other.projector))) <= tol

    def contains(self, z, tol: float = ON_PLANE_TOL) -> bool:
        z = np.asarray(z, dtype=float)
        return float(np.linalg.norm(z - self.projector @ z)) <= tol * max(1.0, float(np.linalg.norm(z)))

    @classmethod
    def position(cls, n: int):
        return cls(np.vstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def momentum(cls, n: int):
        return cls(np.vstack([np.zeros((n, n)), np.eye(n)]))

    @classmethod
    def graph(cls, P):
        """The plane ``{(x, P x)}`` for symmetric P."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        return cls(np.vstack([np.eye(P.shape[0]), P]))


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    """Pair of transversal Lagrangian planes, stored as S with S(l_X, l_P) = (l, l')."""

    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", require_symplectic(self.S))

    @property
    def n(self):
        return half_dim(self.S)

    @property
    def first(self) -> LagrangianPlane:
        return LagrangianPlane(self.S[:, : self.n])

    @property
    def second(self) -> LagrangianPlane:
        return LagrangianPlane(self.S[:, self.n :])

    def same_planes(self, other: "LagrangianFrame", tol: float = 1e-8) -> bool:
        return self.first.same_as(other.first, tol) and self.second.same_as(other.second, tol)


def frame_from_planes(l1: LagrangianPlane, l2: LagrangianPlane) -> LagrangianFrame:
    """Symplectic S with S(l_X) = l1 and S(l_P) = l2.

    The basis of l1 is fixed canonically as the projection of the position
    axes onto l1 (momentum axes if that projection is degenerate, an
    orthonormal basis as a last resort); the basis of l2 is then the unique one
    with cross pairing ``U1^T J U2 = I``.  The canonical pair gives S = I.
    """
    if l1.n != l2.n:
        raise DimensionError("planes have different dimensions")
    n = l1.n
    if np.linalg.svd(np.hstack([_column_normalized(l1.basis), _column_normalized(l2.basis)]), compute_uv=False)[-1] <= PLANE_TOL:
        raise InvalidInputError("planes are not transversal")
    P1 = l1.projector
    U1 = None
    for cand in (P1[:, :n], P1[:, n:]):
        if np.linalg.svd(cand, compute_uv=False)[-1] > 1e-6:
            U1 = cand
            break
    if U1 is None:
        U1 = scipy.linalg.orth(l1.basis)
    K = U1.T @ standard_J(n) @ l2.basis
    U2 = np.linalg.solve(K.T, l2.basis.T).T
    return LagrangianFrame(np.hstack([U1, U2]))


def frame_transport(f1: LagrangianFrame, f2: LagrangianFrame) -> np.ndarray:
    """Symplectic matrix carrying the planes of ``f1`` onto those of ``f2``."""
    return f2.S @ symplectic_inverse(f1.S)


# ---------------------------------------------------------------------------
# quasi states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuasiState:
    frame: LagrangianFrame
    base: ConvexBody
    hbar: float = 1.0

    def __post_init__(self):
        if self.base.dim != self.frame.n:
            raise DimensionError(f"body has dimension {self.base.dim}, frame has n = {self.frame.n}")
        if not self.hbar > 0:
            raise InvalidInputError("hbar must be positive")

    @property
    def n(self):
        return self.frame.n

    @property
    def S(self):
        return self.frame.S

    @cached_property
    def S_inv(self):
        return symplectic_inverse(self.S)

    @cached_property
    def dual(self):
        """``X^hbar`` when an explicit form exists, else None."""
        try:
            return polar_dual(self.base, self.hbar)
        except UnsupportedDualError:
            return None

    def dual_contains(self, p, tol: float = 0.0):
        if self.dual is not None:
            return self.dual.contains(p, tol)
        return self.base.support(p) <= self.hbar * (1.0 + tol)

    def to_frame_coordinates(self, z):
        return np.asarray(z, dtype=float) @ self.S_inv.T

    def contains(self, z, tol: float = 0.0):
        """Membership of phase-space points (shape (..., 2n)) in S(X x X^hbar)."""
        w = self.to_frame_coordinates(z)
        n = self.n
        return self.base.contains(w[..., :n], tol) & self.dual_contains(w[..., n:], tol)

    def bounding_half_widths(self):
        """Axis-aligned bounding box of S(X x X^hbar) in phase space."""
        n = self.n
        Sx, Sp = self.S[:, :n], self.S[:, n:]
        # the support function of X^hbar is hbar times the gauge of X
        return self.base.support(Sx) + self.hbar * self.base.gauge(Sp)


def make_quasi_state(frame, X: ConvexBody, hbar: float = 1.0) -> QuasiState:
    if not isinstance(frame, LagrangianFrame):
        frame = LagrangianFrame(np.asarray(frame, dtype=float))
    return QuasiState(frame, X, hbar)


def _on_second_plane(qs: QuasiState, z_prime):
    w = qs.to_frame_coordinates(z_prime)
    n = qs.n
    scale = max(1.0, float(np.linalg.norm(z_prime)))
    if float(np.linalg.norm(w[:n])) > ON_PLANE_TOL * scale:
        raise InvalidInputError("z' does not lie on the second plane of the frame")
    return w[n:]


def symplectic_polar_value(qs: QuasiState, z_prime) -> float:
    """``sup_{z in X_l} sigma(z', z)``, computed as ``h_X(S_x^T J z')``."""
    z_prime = np.asarray(z_prime, dtype=float)
    _on_second_plane(qs, z_prime)
    n = qs.n
    u = qs.S[:, :n].T @ standard_J(n) @ z_prime
    return float(qs.base.support(u))


def symplectic_polar_dual_check(qs: QuasiState, z_prime, tol: float = DEFAULT_TOL) -> bool:
    """Whether z' on the second plane satisfies ``sigma(z', z) <= hbar`` for all z in X_l."""
    return symplectic_polar_value(qs, z_prime) <= qs.hbar * (1.0 + tol)


def project_onto_frame(qs: QuasiState, which: str, z):
    """``S Pi S^{-1} z`` with Pi the coordinate projection onto l_X ("first") or l_P ("second")."""
    n = qs.n
    if which == "first":
        keep = slice(0, n)
    elif which == "second":
        keep = slice(n, 2 * n)
    else:
        raise ValueError("which must be 'first' or 'second'")
    w = qs.to_frame_coordinates(z)
    out = np.zeros_like(w)
    out[..., keep] = w[..., keep]
    return out @ qs.S.T


def john_blob(qs: QuasiState) -> QuantumBlob:
    """The quantum blob ``S M_L B^{2n}(sqrt(hbar))`` for an ellipsoidal base.

    With shape matrix A of X, ``L = (hbar A)^{1/2}`` so that ``X = L^{-1} B(sqrt(hbar))``.
    """
    if not isinstance(qs.base, (Ball, Ellipsoid)):
        raise InvalidInputError("john_blob needs a Ball or Ellipsoid base")
    L = sym_sqrt(qs.hbar * qs.base.shape_matrix)
    return QuantumBlob(qs.S @ generator_ML(L), np.zeros(2 * qs.n), qs.hbar)


def quasi_state_volume(qs: QuasiState, mc_samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    """Monte Carlo volume of S(X x X^hbar) by rejection in its phase-space bounding box."""
    if mc_samples < 1000:
        raise InvalidInputError("Monte Carlo volume needs at least 1000 samples")
    hw = qs.bounding_half_widths()
    box_vol = float(np.prod(2.0 * hw))
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 1 << 15
    for start in range(0, mc_samples, chunk):
        m = min(chunk, mc_samples - start)
        pts = rng.uniform(-1.0, 1.0, size=(m, 2 * qs.n)) * hw
        hits += int(np.count_nonzero(qs.contains(pts)))
    adj = (hits + 1) / (mc_samples + 2)
    return VolumeEstimate(box_vol * hits / mc_samples, box_vol * math.sqrt(adj * (1 - adj) / mc_samples), "monte_carlo", mc_samples)


# ---------------------------------------------------------------------------
# capacities
# ---------------------------------------------------------------------------


def capacity_ellipsoid(M, hbar: float = 1.0) -> float:
    """Capacity ``pi hbar / lambda_max`` of the ellipsoid ``{z : M z . z <= hbar}``."""
    return math.pi * hbar / float(symplectic_eigenvalues(M)[0])


def cmax_quasi_state(qs: QuasiState) -> float:
    """c_max of a dual pair S(X x X^hbar); always 4 hbar."""
    return 4.0 * qs.hbar


class InclusionCertificate(NamedTuple):
    value: float  # exact computation
    sampled: float  # direction-sampling estimate (an upper bound)
    gap: float

    @property
    def certified(self):
        return self.gap <= CERTIFICATE_GAP


def certify_inclusion_scale(inner: ConvexBody, outer: ConvexBody, n_directions: int = 4096, seed: int = 0) -> InclusionCertificate:
    exact = inclusion_scale(inner, outer)
    sampled = inclusion_scale_sampled(inner, outer, n_directions, seed)
    return InclusionCertificate(exact, sampled, abs(sampled - exact) / max(1.0, abs(exact)))


def cmax_general(X: ConvexBody, P: ConvexBody, hbar: float = 1.0) -> float:
    """``4 lambda_max hbar`` with lambda_max the largest lambda such that lambda X^hbar ⊆ P."""
    lam = inclusion_scale(polar_dual(X, hbar), P)
    if lam < 1.0 - 1e-9:
        raise InvalidInputError(f"P does not contain the polar dual of X (lambda_max = {lam:.6g})")
    return 4.0 * lam * hbar


class Orbit(NamedTuple):
    action: float
    curve: np.ndarray  # (samples + 1, 2n), closed: first row repeated at the end
    discrete_action: float
    period: float


def _sign_normalized(v, tol=1e-12):
    nz = np.flatnonzero(np.abs(v) > tol * max(1.0, float(np.max(np.abs(v)))))
    return -v if nz.size and v[nz[0]] < 0 else v


def hz_orbit_action(M, hbar: float = 1.0, samples: int = 10_000) -> Orbit:
    """Shortest closed characteristic on ``{z : M z . z = hbar}`` and its action.

    In Williamson coordinates w = S z the Hamiltonian ``M z . z / 2`` becomes
    a sum of planar oscillators; the orbit is a circle in the plane of the
    fastest mode.  Among degenerate modes the lexicographically smallest
    starting point (after making its first nonzero entry positive) is chosen.
    """
    M = require_positive_definite(M, "M")
    n = half_dim(M)
    d, S = williamson(M)
    S_inv = symplectic_inverse(S)
    lam = float(d[0])
    modes = [j for j in range(n) if abs(d[j] - lam) <= 1e-9 * lam]
    starts = [_sign_normalized(S_inv[:, j].copy()) for j in modes]
    keys = [tuple(np.round(s, 9)) for s in starts]
    j = modes[min(range(len(modes)), key=lambda k: keys[k])]
    flip = 1.0 if np.allclose(starts[modes.index(j)], S_inv[:, j]) else -1.0

    r = math.sqrt(hbar / lam)
    t = np.linspace(0.0, 2 * math.pi / lam, samples + 1)
    w = np.zeros((t.size, 2 * n))
    w[:, j] = flip * r * np.cos(lam * t)
    w[:, n + j] = -flip * r * np.sin(lam * t)
    curve = w @ S_inv.T
    curve[-1] = curve[0]
    x, p = curve[:, :n], curve[:, n:]
    discrete = float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(x, axis=0)))
    return Orbit(math.pi * hbar / lam, curve, discrete, 2 * math.pi / lam)
