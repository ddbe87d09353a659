"""Maximization of the overlap t(eta1, eta2) = sum_i eta1(i)^2 eta2(i)^2.

Feasible pairs are orthonormal (``sphere``) or orthonormal and mean-zero
(``diagonal``).  The search is gradient ascent on that manifold with a
Gram-Schmidt retraction; the first-order conditions are checked by
recovering Lagrange multipliers by least squares.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .pairs import MODES, OrthoPair, overlap_t, random_pair

__all__ = [
    "BOUNDS",
    "ExtremalResult",
    "brute_force_overlap_max",
    "maximize_overlap",
    "stationarity_residual",
]

BOUNDS = {"sphere": 0.5, "diagonal": 0.25}

MAX_ITER = 5_000
TOL_GRAD = 1e-11
STALL_ITERS = 25


@dataclass
class ExtremalResult:
    best_value: float
    best_pair: OrthoPair
    restarts: int
    stationarity_residual: float
    iterations: int = 0

    @property
    def mode(self) -> str:
        return self.best_pair.mode

    @property
    def gap(self) -> float:
        """Analytic bound minus the best value found."""
        return BOUNDS[self.mode] - self.best_value

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "bound": BOUNDS[self.mode],
            "restarts": self.restarts,
            "stationarity_residual": self.stationarity_residual,
            "iterations": self.iterations,
            "best_pair": self.best_pair.to_dict(),
        }


def _check(n: int, mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}")
    if n < (4 if mode == "diagonal" else 2):
        raise DomainError(f"n = {n} too small for {mode} mode")


def _retract(x: np.ndarray, mode: str) -> np.ndarray:
    a, b = x[:, 0], x[:, 1]
    if mode == "diagonal":
        a, b = a - a.mean(), b - b.mean()
    # two-vector Gram-Schmidt, applied twice for stability
    for _ in range(2):
        a = a / math.sqrt(a @ a)
        b = b - (a @ b) * a
        b = b / math.sqrt(b @ b)
    return np.column_stack([a, b])


def _value(x: np.ndarray) -> float:
    return float(np.sum(x[:, 0] ** 2 * x[:, 1] ** 2))


def _riemannian_grad(x: np.ndarray, mode: str) -> np.ndarray:
    a, b = x[:, 0], x[:, 1]
    g = 2.0 * np.column_stack([a * b * b, b * a * a])
    if mode == "diagonal":
        g = g - g.mean(axis=0)
    # tangent projection for the Stiefel manifold: G - X sym(X^T G)
    s = x.T @ g
    return g - x @ (0.5 * (s + s.T))


def _ascend(x: np.ndarray, mode: str, max_iter: int) -> tuple[np.ndarray, int]:
    n = x.shape[0]
    step = 0.1 * n  # rescaled each iteration by the backtracking below
    val = _value(x)
    stall = 0
    for it in range(1, max_iter + 1):
        g = _riemannian_grad(x, mode)
        gn = float(np.max(np.abs(g)))
        if gn < TOL_GRAD:
            return x, it
        while True:
            y = _retract(x + step * g, mode)
            new = _value(y)
            if new >= val or step < 1e-12:
                break
            step *= 0.5
        # the value saturates in floating point well before the gradient
        # vanishes; stop once it has stopped moving
        stall = stall + 1 if new <= val else 0
        x, val = y, new
        if stall >= STALL_ITERS:
            return x, it
        step *= 1.5
    return x, max_iter


def maximize_overlap(
    n: int,
    mode: str = "sphere",
    restarts: int = 32,
    seed: int = 0,
    max_iter: int = MAX_ITER,
) -> ExtremalResult:
    """Best overlap over ``restarts`` random feasible starts.

    Restart r uses its own generator (seed, r); ties keep the lowest
    restart index.
    """
    _check(n, mode)
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    best = None
    total_iter = 0
    for r in range(restarts):
        start = random_pair(n, mode, np.random.default_rng([seed, r]))
        x, it = _ascend(start.matrix(), mode, max_iter)
        total_iter += it
        v = _value(x)
        if best is None or v > best[0]:
            best = (v, x)
    pair = OrthoPair(best[1][:, 0], best[1][:, 1], mode)
    return ExtremalResult(overlap_t(pair), pair, restarts, stationarity_residual(pair, mode), total_iter)


def stationarity_residual(pair: OrthoPair, mode: str | None = None) -> float:
    """Max-norm residual of the Lagrange system at ``pair``.

        eta1 eta2^2 = A1 eta1 + B eta2 + C1
        eta2 eta1^2 = A2 eta2 + B eta1 + C2

    (constants C only in diagonal mode), with the multipliers fitted by
    least squares.  The system is symmetric under swapping and negating
    the vectors, so those images give the same residual.
    """
    mode = mode or pair.mode
    a, b = pair.eta1, pair.eta2
    n = a.shape[0]
    zero, one = np.zeros(n), np.ones(n)
    # unknowns: A1, A2, B, C1, C2
    top = np.column_stack([a, zero, b, one, zero])
    bot = np.column_stack([zero, b, a, zero, one])
    M = np.vstack([top, bot])
    if mode != "diagonal":
        M = M[:, :3]
    rhs = np.concatenate([a * b * b, b * a * a])
    coef, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return float(np.max(np.abs(M @ coef - rhs)))


def _ternary_vectors(n: int, mode: str) -> np.ndarray:
    pts = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n)))
    pts = pts[np.any(pts != 0, axis=1)]
    # one representative per +- pair
    first = pts[np.arange(len(pts)), np.argmax(pts != 0, axis=1)]
    pts = pts[first > 0]
    if mode == "diagonal":
        # project every pattern onto the hyperplane, not just mean-zero ones
        pts = pts - pts.mean(axis=1, keepdims=True)
        pts = pts[np.linalg.norm(pts, axis=1) > 1e-9]
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def brute_force_overlap_max(n: int, mode: str = "sphere", grid_density: int = 20_000, seed: int = 0) -> float:
    """Exhaustive search over structured and random feasible pairs (n <= 6).

    Structured candidates are all orthogonal pairs of normalized sign
    patterns in {-1, 0, 1}^n (mean-removed first in diagonal mode);
    ``grid_density`` random feasible pairs are
    added on top.
    """
    _check(n, mode)
    if n > 6:
        raise DomainError("brute force is limited to n <= 6")
    v = _ternary_vectors(n, mode)
    gram = v @ v.T
    sq = v * v
    tv = sq @ sq.T
    ok = np.abs(gram) < 1e-12
    best = float(tv[ok].max()) if ok.any() else 0.0
    rng = np.random.default_rng([seed, 7])
    for _ in range(grid_density):
        best = max(best, overlap_t(random_pair(n, mode, rng)))
    return best
