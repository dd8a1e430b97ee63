"""Centrally symmetric convex bodies and hbar-polar duality.

Bodies carry absolute size; hbar only enters through :func:`polar_dual` and
the measures built on it.  All bodies contain the origin in their interior.

Vectorised methods (``support``, ``gauge``, ``contains``) accept an array of
shape ``(..., n)`` and return shape ``(...)``.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.spatial

from . import _accel
from .errors import DimensionError, InvalidInputError, UnsupportedDualError
from .symplin import require_positive_definite

MAX_CONDITION = 1e12
MIN_SIZE = 1e-12
DEFAULT_MC_SAMPLES = 10**6
_MC_CHUNK = 1 << 16


def _sign_patterns(n):
    return np.array(list(itertools.product((1.0, -1.0), repeat=n)))


def _check_symmetric_set(points, what):
    scale = max(1.0, float(np.max(np.abs(points))))
    d = np.abs(points[:, None, :] + points[None, :, :]).max(axis=2)
    if np.any(d.min(axis=1) > 1e-9 * scale):
        raise InvalidInputError(f"{what} are not closed under negation")


def _symmetrize(points):
    pts = np.vstack([points, -points])
    return np.unique(np.round(pts, 15), axis=0)


class ConvexBody:
    """Base class; see the concrete variants below."""

    dim: int

    def support(self, u):
        raise NotImplementedError

    def gauge(self, x):
        raise NotImplementedError

    def contains(self, x, tol=0.0):
        raise NotImplementedError

    def bounding_half_widths(self):
        """Half-widths of the smallest axis-aligned box containing the body."""
        return np.asarray(self.support(np.eye(self.dim)), dtype=float)

    def _check_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"expected vectors of length {self.dim}, got shape {x.shape}")
        return x


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    radius: float
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError("dim must be >= 1")
        if not self.radius > MIN_SIZE:
            raise InvalidInputError(f"ball radius must be > {MIN_SIZE}")
        object.__setattr__(self, "radius", float(self.radius))

    def support(self, u):
        return self.radius * np.linalg.norm(self._check_dim(u), axis=-1)

    def gauge(self, x):
        return np.linalg.norm(self._check_dim(x), axis=-1) / self.radius

    def contains(self, x, tol=0.0):
        return np.linalg.norm(self._check_dim(x), axis=-1) <= self.radius + tol

    @property
    def shape_matrix(self):
        return np.eye(self.dim) / self.radius**2


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    """``{x : A x . x <= 1}`` with A symmetric positive definite."""

    A: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        A = require_positive_definite(np.atleast_2d(self.A), "ellipsoid shape matrix")
        if np.linalg.cond(A) > MAX_CONDITION:
            raise InvalidInputError("ellipsoid shape matrix is too ill-conditioned")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "dim", A.shape[0])

    @cached_property
    def A_inv(self):
        Ai = np.linalg.inv(self.A)
        return 0.5 * (Ai + Ai.T)

    @property
    def shape_matrix(self):
        return self.A

    def support(self, u):
        u = self._check_dim(u)
        return np.sqrt(np.einsum("...i,ij,...j->...", u, self.A_inv, u))

    def gauge(self, x):
        x = self._check_dim(x)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self.A, x))

    def contains(self, x, tol=0.0):
        x = self._check_dim(x)
        return np.einsum("...i,ij,...j->...", x, self.A, x) <= 1.0 + tol


@dataclass(frozen=True, eq=False)
class Box(ConvexBody):
    """``prod_j [-a_j, a_j]``."""

    half_widths: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.half_widths, dtype=float)).copy()
        if a.ndim != 1:
            raise DimensionError("half_widths must be a vector")
        if np.any(a < MIN_SIZE):
            raise InvalidInputError(f"box half-widths must be >= {MIN_SIZE}")
        a.setflags(write=False)
        object.__setattr__(self, "half_widths", a)
        object.__setattr__(self, "dim", a.shape[0])

    def support(self, u):
        return np.abs(self._check_dim(u)) @ self.half_widths

    def gauge(self, x):
        return np.max(np.abs(self._check_dim(x)) / self.half_widths, axis=-1)

    def contains(self, x, tol=0.0):
        return np.all(np.abs(self._check_dim(x)) <= self.half_widths + tol, axis=-1)

    def corners(self):
        return _sign_patterns(self.dim) * self.half_widths

    def facet_normals(self):
        eye = np.eye(self.dim) / self.half_widths[:, None]
        return np.vstack([eye, -eye])


@dataclass(frozen=True, eq=False)
class PolytopeV(ConvexBody):
    """Convex hull of a vertex list closed under negation."""

    vertices: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vertices, dtype=float)).copy()
        if V.ndim != 2:
            raise DimensionError("vertices must be a 2-D array")
        _check_symmetric_set(V, "vertices")
        if np.linalg.matrix_rank(V) < V.shape[1]:
            raise InvalidInputError("vertices do not span R^n; origin is not interior")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "dim", V.shape[1])

    @classmethod
    def symmetric(cls, points):
        """Build from arbitrary points by adding their negatives."""
        return cls(_symmetrize(np.atleast_2d(np.asarray(points, dtype=float))))

    @cached_property
    def _facets(self):
        V = self.vertices
        if self.dim == 1:
            a = float(np.max(np.abs(V)))
            return np.array([[1.0 / a], [-1.0 / a]])
        eq = scipy.spatial.ConvexHull(V).equations
        offsets = -eq[:, -1]
        if np.any(offsets <= 1e-12 * np.max(np.abs(V))):
            raise InvalidInputError("origin is not interior to the polytope")
        return np.unique(np.round(eq[:, :-1] / offsets[:, None], 13), axis=0)

    def facet_normals(self):
        """Rows u_i with the polytope equal to ``{x : u_i . x <= 1}``."""
        return self._facets

    def support(self, u):
        u = self._check_dim(u)
        return np.max(u @ self.vertices.T, axis=-1)

    def gauge(self, x):
        x = self._check_dim(x)
        return np.maximum(np.max(x @ self._facets.T, axis=-1), 0.0)

    def contains(self, x, tol=0.0):
        x = self._check_dim(x)
        return np.all(x @ self._facets.T <= 1.0 + tol, axis=-1)


@dataclass(frozen=True, eq=False)
class PolytopeH(ConvexBody):
    """``{x : u_i . x <= 1 for all i}`` with normals closed under negation."""

    normals: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        N = np.atleast_2d(np.asarray(self.normals, dtype=float)).copy()
        if N.ndim != 2:
            raise DimensionError("normals must be a 2-D array")
        _check_symmetric_set(N, "normals")
        if np.linalg.matrix_rank(N) < N.shape[1]:
            raise InvalidInputError("normals do not span R^n; the feasible set is unbounded")
        N.setflags(write=False)
        object.__setattr__(self, "normals", N)
        object.__setattr__(self, "dim", N.shape[1])

    @classmethod
    def symmetric(cls, normals):
        return cls(_symmetrize(np.atleast_2d(np.asarray(normals, dtype=float))))

    def facet_normals(self):
        return self.normals

    @cached_property
    def cross_weights(self):
        """c if the body is ``{x : sum_j c_j |x_j| <= 1}``, else None."""
        N = self.normals
        n = self.dim
        if N.shape[0] != 2**n:
            return None
        c = np.abs(N[0])
        if np.any(c <= 0) or np.max(np.abs(np.abs(N) - c)) > 1e-12 * np.max(c):
            return None
        if len({tuple(row) for row in np.sign(N)}) != 2**n:
            return None
        return c

    def _support_one(self, u):
        res = scipy.optimize.linprog(
            -u, A_ub=self.normals, b_ub=np.ones(len(self.normals)), bounds=[(None, None)] * self.dim, method="highs"
        )
        if res.status == 3:
            raise InvalidInputError("feasible set is unbounded")
        if res.status != 0:
            raise InvalidInputError(f"support LP failed: {res.message}")
        return -res.fun

    def support(self, u):
        """Closed form for cross-polytopes, vertex maximum for n <= 3, one LP per direction otherwise."""
        u = self._check_dim(u)
        if self.cross_weights is not None:
            return np.max(np.abs(u) / self.cross_weights, axis=-1)
        if self.dim <= 3:
            return np.max(u @ self._raw_vertices.T, axis=-1)
        flat = u.reshape(-1, self.dim)
        out = np.array([self._support_one(v) for v in flat])
        return out.reshape(u.shape[:-1])

    def gauge(self, x):
        x = self._check_dim(x)
        return np.maximum(np.max(x @ self.normals.T, axis=-1), 0.0)

    def contains(self, x, tol=0.0):
        x = self._check_dim(x)
        return np.all(x @ self.normals.T <= 1.0 + tol, axis=-1)

    @cached_property
    def _raw_vertices(self):
        N = self.normals
        if self.dim == 1:
            a = 1.0 / float(np.max(np.abs(N)))
            return np.array([[a], [-a]])
        halfspaces = np.hstack([N, -np.ones((len(N), 1))])
        return scipy.spatial.HalfspaceIntersection(halfspaces, np.zeros(self.dim)).intersections

    @cached_property
    def _vertices(self):
        return np.unique(np.round(self._raw_vertices, 12), axis=0)

    def enumerate_vertices(self):
        return self._vertices


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def support_function(X: ConvexBody, u):
    """``h_X(u) = sup_{x in X} u . x``."""
    return X.support(u)


def contains(X: ConvexBody, x, tol: float = 0.0):
    return X.contains(x, tol)


def polar_dual(X: ConvexBody, hbar: float = 1.0) -> ConvexBody:
    """``X^hbar = {p : sup_{x in X} p . x <= hbar}``."""
    if not hbar > 0:
        raise InvalidInputError("hbar must be positive")
    if isinstance(X, Ball):
        return Ball(hbar / X.radius, X.dim)
    if isinstance(X, Ellipsoid):
        return Ellipsoid(X.A_inv / hbar**2)
    if isinstance(X, Box):
        return PolytopeH(_sign_patterns(X.dim) * X.half_widths / hbar)
    if isinstance(X, PolytopeV):
        return PolytopeH(X.vertices / hbar)
    if isinstance(X, PolytopeH):
        c = X.cross_weights
        if c is not None:
            return Box(hbar * c)
        if X.dim > 3:
            raise UnsupportedDualError("vertex enumeration for H-polytope duals is limited to n <= 3")
        N = X.normals
        if X.dim > 1:
            N = N[scipy.spatial.ConvexHull(N).vertices]
        else:
            a = float(np.max(np.abs(N)))
            N = np.array([[a], [-a]])
        return PolytopeV(hbar * N)
    raise TypeError(f"unsupported body {type(X).__name__}")


def linear_image(X: ConvexBody, L) -> ConvexBody:
    """The body ``L X``."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape != (X.dim, X.dim):
        raise DimensionError(f"L must be {X.dim}x{X.dim}")
    if abs(np.linalg.det(L)) < 1e-300 or np.linalg.cond(L) > 1e14:
        raise InvalidInputError("L is singular")
    Linv = np.linalg.inv(L)
    if isinstance(X, Ball):
        LLt = L @ L.T
        c2 = np.trace(LLt) / X.dim
        if np.allclose(LLt, c2 * np.eye(X.dim), rtol=0, atol=1e-13 * c2):
            return Ball(np.sqrt(c2) * X.radius, X.dim)
        return Ellipsoid(Linv.T @ Linv / X.radius**2)
    if isinstance(X, Ellipsoid):
        return Ellipsoid(Linv.T @ X.A @ Linv)
    if isinstance(X, Box):
        if np.count_nonzero(L - np.diag(np.diag(L))) == 0:
            return Box(np.abs(np.diag(L)) * X.half_widths)
        return PolytopeV(X.corners() @ L.T)
    if isinstance(X, PolytopeV):
        return PolytopeV(X.vertices @ L.T)
    if isinstance(X, PolytopeH):
        return PolytopeH(X.normals @ Linv)
    raise TypeError(f"unsupported body {type(X).__name__}")


def scale(X: ConvexBody, t: float) -> ConvexBody:
    return linear_image(X, t * np.eye(X.dim))


# ---------------------------------------------------------------------------
# volumes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    method: str  # "exact" | "monte_carlo"
    samples: int = 0

    @property
    def exact(self):
        return self.method == "exact"


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _exact_volume(X):
    n = X.dim
    if isinstance(X, Ball):
        return unit_ball_volume(n) * X.radius**n
    if isinstance(X, Ellipsoid):
        return unit_ball_volume(n) / math.sqrt(np.linalg.det(X.A))
    if isinstance(X, Box):
        return 2.0**n * float(np.prod(X.half_widths))
    if isinstance(X, PolytopeH) and X.cross_weights is not None:
        return 2.0**n / math.factorial(n) / float(np.prod(X.cross_weights))
    if n == 1:
        return 2.0 * float(X.support(np.ones(1)))
    return None


def _mc_count(normals, half_widths, samples, seed_seq):
    rng = np.random.default_rng(seed_seq)
    n = len(half_widths)
    ones = np.ones(len(normals))
    hits = 0
    remaining = samples
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        pts = rng.uniform(-1.0, 1.0, size=(m, n)) * half_widths
        hits += _accel.count_inside(pts, normals, ones, 0.0)
        remaining -= m
    return hits


def volume(X: ConvexBody, mc_samples: int = DEFAULT_MC_SAMPLES, seed: int = 0, workers: int = 1) -> VolumeEstimate:
    """Euclidean volume; closed form when available, otherwise Monte Carlo.

    The Monte Carlo estimate rejection-samples the axis-aligned bounding box
    given by the support function.  With ``workers > 1`` the budget is split
    over independently seeded substreams; the result depends only on
    ``(seed, workers)``.
    """
    exact = _exact_volume(X)
    if exact is not None:
        return VolumeEstimate(float(exact), 0.0, "exact", 0)
    if mc_samples < 1000:
        raise InvalidInputError("Monte Carlo volume needs at least 1000 samples")
    normals = np.ascontiguousarray(X.facet_normals(), dtype=float)
    hw = X.bounding_half_widths()
    box_vol = 2.0**X.dim * float(np.prod(hw))
    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [mc_samples // workers + (i < mc_samples % workers) for i in range(workers)]
    if workers == 1:
        hits = _mc_count(normals, hw, shares[0], children[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda a: _mc_count(normals, hw, *a), zip(shares, children)))
    frac = hits / mc_samples
    # plus-two adjusted proportion keeps the error bar positive when frac hits 0 or 1
    adj = (hits + 1) / (mc_samples + 2)
    return VolumeEstimate(box_vol * frac, box_vol * math.sqrt(adj * (1 - adj) / mc_samples), "monte_carlo", mc_samples)


def mahler_volume(X: ConvexBody, hbar: float = 1.0, mc_samples: int = DEFAULT_MC_SAMPLES, seed: int = 0) -> VolumeEstimate:
    """``Vol(X) * Vol(X^hbar)``; Monte Carlo errors combined in quadrature."""
    s1, s2 = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    v1 = volume(X, mc_samples, s1)
    v2 = volume(polar_dual(X, hbar), mc_samples, s2)
    err = math.hypot(v1.value * v2.std_error, v2.value * v1.std_error)
    exact = v1.exact and v2.exact
    return VolumeEstimate(
        v1.value * v2.value, err, "exact" if exact else "monte_carlo", v1.samples + v2.samples
    )


def mahler_bounds(n: int, hbar: float = 1.0) -> dict:
    """Reference values for the Mahler volume in dimension n.

    ``santalo``: upper bound, attained by ellipsoids.  ``kuper``: proven lower
    bound.  ``conjecture``: Mahler's conjectured lower bound, attained by boxes.
    ``conjecture_with_pi``: the same bound with an extra factor pi^n, reported
    only for comparison.
    """
    return {
        "santalo": (math.pi * hbar) ** n / math.gamma(n / 2 + 1) ** 2,
        "kuper": (math.pi * hbar) ** n / (4**n * math.factorial(n)),
        "conjecture": (4 * hbar) ** n / math.factorial(n),
        "conjecture_with_pi": (4 * math.pi * hbar) ** n / math.factorial(n),
    }


def saturating_box(position_variances, hbar: float = 1.0) -> Box:
    """Box ``prod [-sqrt(2 dx_j^2), sqrt(2 dx_j^2)]`` whose Mahler volume is (4 hbar)^n / n!."""
    v = np.atleast_1d(np.asarray(position_variances, dtype=float))
    return Box(np.sqrt(2.0 * v))


# ---------------------------------------------------------------------------
# inclusion
# ---------------------------------------------------------------------------


def vertex_array(X: ConvexBody) -> np.ndarray:
    """Vertices of a polyhedral body (Box, PolytopeV or PolytopeH)."""
    if isinstance(X, Box):
        return X.corners()
    if isinstance(X, PolytopeV):
        return X.vertices
    if isinstance(X, PolytopeH):
        return X.enumerate_vertices()
    raise TypeError(f"{type(X).__name__} has no vertices")


def _ellipsoidal(X):
    return isinstance(X, (Ball, Ellipsoid))


def inclusion_scale(inner: ConvexBody, outer: ConvexBody) -> float:
    """Largest lambda with ``lambda * inner ⊆ outer``.

    Computed exactly: by the generalized eigenvalue of the shape-matrix pencil
    for two ellipsoids, by support values at the facet normals when ``outer``
    is a polytope or box, and by gauge values at the vertices otherwise.
    """
    if inner.dim != outer.dim:
        raise DimensionError("bodies must have the same dimension")
    if _ellipsoidal(inner) and _ellipsoidal(outer):
        top = scipy.linalg.eigh(outer.shape_matrix, inner.shape_matrix, eigvals_only=True)[-1]
        return float(1.0 / math.sqrt(top))
    if not _ellipsoidal(outer):
        worst = float(np.max(inner.support(outer.facet_normals())))
    else:
        worst = float(np.max(outer.gauge(vertex_array(inner))))
    return 1.0 / worst


def inclusion_scale_sampled(inner: ConvexBody, outer: ConvexBody, n_directions: int = 4096, seed: int = 0) -> float:
    """Direction-sampling estimate of :func:`inclusion_scale`.

    Minimises ``h_outer(u) / h_inner(u)`` over sampled unit directions and then
    polishes the best sample with a local search.  Independent of the exact
    routes used by :func:`inclusion_scale`.
    """
    n = inner.dim

    if n == 1:
        return float(outer.support(np.ones(1)) / inner.support(np.ones(1)))

    def ratio(U):
        return outer.support(U) / inner.support(U)

    if n == 2:
        theta = np.linspace(0.0, np.pi, n_directions, endpoint=False)
        U = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        r = ratio(U)
        i = int(np.argmin(r))
        step = np.pi / n_directions
        res = scipy.optimize.minimize_scalar(
            lambda t: float(ratio(np.array([np.cos(t), np.sin(t)]))),
            bounds=(theta[i] - step, theta[i] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return float(min(res.fun, r[i]))

    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n_directions, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    r = ratio(U)
    i = int(np.argmin(r))

    def f(v):
        return float(ratio(v / np.linalg.norm(v)))

    res = scipy.optimize.minimize(f, U[i], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return float(min(res.fun, r[i]))


def sample_boundary(X: ConvexBody, count: int, seed: int = 0) -> np.ndarray:
    """Radial projections of random directions onto the boundary of X."""
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((count, X.dim))
    return U / X.gauge(U)[:, None]
