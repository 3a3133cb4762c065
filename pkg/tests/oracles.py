"""Brute-force reference solvers used to check the simplex engine.

Nothing here imports the tableau code; they only share the problem container.
"""

import itertools
import math

import numpy as np


def _halfspaces(rows, rhs, n):
    """Stack A x <= b with -x <= 0."""
    G = np.vstack([np.asarray(rows, dtype=float).reshape(-1, n), -np.eye(n)])
    h = np.concatenate([np.asarray(rhs, dtype=float), np.zeros(n)])
    return G, h


def _vertices(G, h, n, tol=1e-9):
    for idx in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, h[list(idx)])
        if np.all(G @ x <= h + tol * np.maximum(1.0, np.abs(h))):
            yield x


def recession_gain(objective, rows, n):
    """max p.d over {d >= 0, A d <= 0, sum d = 1}; positive means unbounded when feasible."""
    G, _ = _halfspaces(rows, np.zeros(len(rows)), n)
    # enumerate vertices of the normalised recession cone by adding sum(d) = 1 as
    # an equality, i.e. choose n - 1 active inequalities plus the normaliser
    best = -math.inf
    p = np.asarray(objective, dtype=float)
    ones = np.ones((1, n))
    for idx in itertools.combinations(range(G.shape[0]), n - 1):
        sub = np.vstack([G[list(idx)], ones])
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        d = np.linalg.solve(sub, rhs)
        if np.all(G @ d <= 1e-9):
            best = max(best, float(p @ d))
    return best


def vertex_oracle(objective, rows, rhs, constant=0.0):
    """Return ("OPTIMAL", value, point) / ("UNBOUNDED", None, None) / ("INFEASIBLE", None, None)."""
    n = len(objective)
    G, h = _halfspaces(rows, rhs, n)
    p = np.asarray(objective, dtype=float)
    best, best_x = -math.inf, None
    for x in _vertices(G, h, n):
        val = float(p @ x)
        if val > best:
            best, best_x = val, x
    if best_x is None:
        return "INFEASIBLE", None, None
    if recession_gain(objective, rows, n) > 1e-9:
        return "UNBOUNDED", None, None
    return "OPTIMAL", best + constant, best_x


def integer_oracle(objective, rows, rhs, upper, constant=0.0):
    """Exhaustive search over the integer box 0 <= x <= upper."""
    p = np.asarray(objective, dtype=float)
    A = np.asarray(rows, dtype=float).reshape(-1, len(objective))
    b = np.asarray(rhs, dtype=float)
    best, best_x = None, None
    for x in itertools.product(*(range(int(u) + 1) for u in upper)):
        xv = np.array(x, dtype=float)
        if A.size and np.any(A @ xv > b + 1e-9):
            continue
        val = float(p @ xv) + constant
        if best is None or val > best:
            best, best_x = val, x
    return best, best_x
