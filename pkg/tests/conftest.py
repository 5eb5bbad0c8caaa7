"""Shared fixtures and independent oracles used across the test suite.

The oracles here are deliberately naive (dense enumeration, direct solves,
Monte Carlo) so they stay independent of the library code paths they check.
"""

from itertools import combinations

import numpy as np
import pytest

from riskmono import Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_dataset(rng, n, p, sigma=1.0, beta0=None):
    X = rng.standard_normal((n, p))
    if beta0 is None:
        beta0 = rng.standard_normal(p)
    y = X @ beta0 + sigma * rng.standard_normal(n)
    return Dataset(X, y), beta0


def ols_oracle(X, y):
    """Normal-equations solve; valid for full column rank."""
    return np.linalg.solve(X.T @ X, X.T @ y)


def min_norm_interpolant_oracle(X, y):
    """Projected least squares X'(XX')^{-1} y; valid for full row rank."""
    return X.T @ np.linalg.solve(X @ X.T, y)


def l1_vertex_oracle(X, y, feas_tol=1e-9):
    """Exhaustive enumeration of basic feasible solutions of the LP

        min 1'(b+ + b-)  s.t.  [X, -X] [b+; b-] = y,  b+, b- >= 0,

    returning the minimum l1 norm.  Assumes X has full row rank (the optimum
    of a feasible bounded LP is attained at a basic feasible solution)."""
    n, p = X.shape
    A = np.hstack([X, -X])
    best = np.inf
    for cols in combinations(range(2 * p), n):
        sub = A[:, cols]
        try:
            sol = np.linalg.solve(sub, y)
        except np.linalg.LinAlgError:
            continue
        if np.min(sol) < -feas_tol:
            continue
        best = min(best, float(np.sum(np.maximum(sol, 0.0))))
    return best
