"""Shared generators for the test modules."""

import numpy as np
from scipy.stats import ortho_group


def moderate_pair(n: int, seed: int):
    """(X, Y) with eigenvalues of X log-uniform in [0.5, 2] and Y entries uniform in [-1, 1], symmetrized."""
    rng = np.random.default_rng(seed)
    w = np.exp(rng.uniform(np.log(0.5), np.log(2.0), n))
    Q = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(1)
    X = (Q * w) @ Q.T
    B = rng.uniform(-1.0, 1.0, (n, n))
    return 0.5 * (X + X.T), 0.5 * (B + B.T)
