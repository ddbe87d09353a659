"""Closed-form moments and SNC values on B_p^n.

Notation: ``g`` is the generalized Gaussian with density
exp(-|t|^p) / (2 Gamma(1 + 1/p)), and ``S`` the l_p norm of ``m``
independent copies of ``g``.  The unit ball B_p^n is treated as the
projection of B_p^{n+1} along e_{n+1}, so ball formulas use ``m = n + 1``
while the diagonal-projection coefficient uses ``m = n``; every helper
takes ``m`` explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantViolation, RangeError
from .gamma_core import log_gamma, log_gurland_F

__all__ = [
    "FBallDecomposition",
    "LpSpace",
    "ball_decomposition",
    "excess_kurtosis_term",
    "f_ball",
    "f_canonical",
    "f_canonical_raw",
    "f_rotated",
    "f_rotated_raw",
    "f_rotated_sign_changes",
    "log_moment_S",
    "log_moment_abs_g",
    "mean_square_marginal_ball",
    "moment_S",
    "moment_abs_g",
    "n0_threshold",
    "ratio_coefficient_diag",
    "s_moment_ratio",
]

FORMS_RTOL = 1e-10
OVERLAP_SLACK = 1e-12
SIGN_TIE_RTOL = 1e-12


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise DomainError(f"p must be a finite real >= 1, got {p}")
    return p


@dataclass(frozen=True)
class LpSpace:
    """The exponent ``p`` together with the ambient dimension ``n``."""

    p: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", _check_p(self.p))
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def require_diagonal(self) -> None:
        if self.n < 4:
            raise DomainError("diagonal-projection quantities need n >= 4")


def log_moment_abs_g(p: float, alpha: float) -> float:
    p = _check_p(p)
    if not math.isfinite(alpha) or alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return (
        -math.log1p(alpha)
        + log_gamma(1 + (alpha + 1) / p)
        - log_gamma(1 + 1 / p)
    )


def moment_abs_g(p: float, alpha: float) -> float:
    """E|g|^alpha = Gamma(1 + (alpha+1)/p) / ((alpha+1) Gamma(1 + 1/p))."""
    return math.exp(log_moment_abs_g(p, alpha))


def log_moment_S(p: float, m: int, alpha: float) -> float:
    p = _check_p(p)
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    if not math.isfinite(alpha) or alpha < 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")
    return (
        math.log(m) - math.log(m + alpha)
        + log_gamma(1 + (m + alpha) / p)
        - log_gamma(1 + m / p)
    )


def moment_S(p: float, m: int, alpha: float) -> float:
    """E S^alpha for S the l_p norm of m i.i.d. copies of g."""
    if alpha == 0:
        log_moment_S(p, m, alpha)  # validation only
        return 1.0
    return math.exp(log_moment_S(p, m, alpha))


def s_moment_ratio(p: float, m: int, top: float, bottom: float) -> float:
    """E S^top / E S^bottom."""
    return math.exp(log_moment_S(p, m, top) - log_moment_S(p, m, bottom))


def _as_space(space, n=None) -> LpSpace:
    if isinstance(space, LpSpace):
        return space
    return LpSpace(space, n)


def _log_lead(sp: LpSpace) -> float:
    # ln[ Gamma(3/p)^2 Gamma(1+n/p) / (Gamma(1/p)^2 Gamma(1+(n+4)/p)) ]
    p, n = sp.p, sp.n
    return (
        2 * log_gamma(3 / p) - 2 * log_gamma(1 / p)
        + log_gamma(1 + n / p) - log_gamma(1 + (n + 4) / p)
    )


def _log_convexity_ratio(p: float, lo: float, mid: float, hi: float) -> float:
    return (
        log_gamma(1 + lo / p) + log_gamma(1 + hi / p)
        - 2 * log_gamma(1 + mid / p)
    )


def mean_square_marginal_ball(space, n=None) -> float:
    """E<X, eta>^2 for X uniform on B_p^n; the same for every unit eta."""
    sp = _as_space(space, n)
    p, n = sp.p, sp.n
    return math.exp(
        log_gamma(3 / p) + log_gamma(1 + n / p)
        - log_gamma(1 / p) - log_gamma(1 + (n + 2) / p)
    )


def f_canonical(space, n=None) -> float:
    """f(e1, e2) on B_p^n."""
    sp = _as_space(space, n)
    log_r = _log_convexity_ratio(sp.p, sp.n, sp.n + 2, sp.n + 4)
    return -math.exp(_log_lead(sp)) * math.expm1(log_r)


def _gurland_excess(p: float) -> float:
    """F(1/p) - 3 without cancellation near p = 2."""
    return 3.0 * math.expm1(float(log_gurland_F(1 / p)) - math.log(3.0))


def f_rotated(space, n=None) -> float:
    """f(xi1, xi2) on B_p^n with xi = (e1 +- e2)/sqrt(2)."""
    sp = _as_space(space, n)
    log_r = _log_convexity_ratio(sp.p, sp.n, sp.n + 2, sp.n + 4)
    # F - 1 - 2R = (F - 3) - 2 (R - 1)
    bracket = _gurland_excess(sp.p) - 2.0 * math.expm1(log_r)
    return 0.5 * math.exp(_log_lead(sp)) * bracket


def f_canonical_raw(space, n=None) -> float:
    """f(e1, e2) assembled from E|g|^a and E S^b (m = n + 1) directly."""
    sp = _as_space(space, n)
    p, m = sp.p, sp.n + 1
    eg2 = moment_abs_g(p, 2)
    a = moment_S(p, m, p - 1)
    return a / moment_S(p, m, p + 3) * eg2**2 - (a * eg2 / moment_S(p, m, p + 1)) ** 2


def f_rotated_raw(space, n=None) -> float:
    sp = _as_space(space, n)
    p, m = sp.p, sp.n + 1
    eg2 = moment_abs_g(p, 2)
    eg4 = moment_abs_g(p, 4)
    a = moment_S(p, m, p - 1)
    return (
        a / (2 * moment_S(p, m, p + 3)) * (eg4 - eg2**2)
        - (a * eg2 / moment_S(p, m, p + 1)) ** 2
    )


@dataclass(frozen=True)
class FBallDecomposition:
    f_canonical: float
    f_rotated: float
    slope: float

    def at(self, overlap_t: float) -> float:
        return self.f_canonical + self.slope * overlap_t


def ball_decomposition(space, n=None) -> FBallDecomposition:
    sp = _as_space(space, n)
    fc = f_canonical(sp)
    fr = f_rotated(sp)
    return FBallDecomposition(fc, fr, 2.0 * (fr - fc))


def f_ball(space, overlap_t: float) -> float:
    """f(eta1, eta2) on B_p^n for any orthonormal pair with the given overlap.

    ``overlap_t`` is sum_i eta1(i)^2 eta2(i)^2, which lies in [0, 1/2] for
    every orthonormal pair.
    """
    sp = _as_space(space)
    t = float(overlap_t)
    if not (-OVERLAP_SLACK <= t <= 0.5 + OVERLAP_SLACK):
        raise RangeError(f"overlap {t} outside [0, 1/2]; no orthonormal pair attains it")
    t = min(max(t, 0.0), 0.5)
    dec = ball_decomposition(sp)
    return dec.at(t)


def excess_kurtosis_term(p: float) -> float:
    """E g^4 - 3 (E g^2)^2 = (Gamma(3/p)/Gamma(1/p))^2 (F(1/p) - 3)."""
    p = _check_p(p)
    scale = math.exp(2 * (log_gamma(3 / p) - log_gamma(1 / p)))
    return scale * _gurland_excess(p)


def ratio_coefficient_diag(space, n=None) -> float:
    """E S^{p-1} E S^{p+3} / (E S^{p+1})^2 with S over m = n copies.

    Evaluated both from the raw moments and from the reduced Gamma form;
    raises :class:`InvariantViolation` if they disagree.
    """
    sp = _as_space(space, n)
    p, n = sp.p, sp.n
    raw = math.exp(
        log_moment_S(p, n, p - 1) + log_moment_S(p, n, p + 3)
        - 2 * log_moment_S(p, n, p + 1)
    )
    reduced = math.exp(_log_convexity_ratio(p, n - 1, n + 1, n + 3))
    if abs(raw - reduced) > FORMS_RTOL * abs(reduced):
        raise InvariantViolation(
            f"ratio coefficient forms disagree: raw={raw!r} reduced={reduced!r}"
        )
    return reduced


def _f_rotated_sign_terms(p: float, n: np.ndarray) -> np.ndarray:
    # sign(f_rotated) = sign((F - 3) - 2 (R - 1)) with R the convexity ratio
    log_r = (
        log_gamma(1 + n / p) + log_gamma(1 + (n + 4) / p)
        - 2 * log_gamma(1 + (n + 2) / p)
    )
    excess = _gurland_excess(p)
    shift = 2.0 * np.expm1(log_r)
    bracket = excess - shift
    # exact ties (e.g. p = 1, n = 2 where R = 5/2) must not read as positive
    tol = SIGN_TIE_RTOL * (abs(excess) + np.abs(shift))
    return np.where(np.abs(bracket) <= tol, 0.0, bracket)


def f_rotated_sign_changes(p: float, n_max: int, n_min: int = 2) -> list[int]:
    """Dimensions n where sign(f_rotated(p, n)) differs from n - 1."""
    p = _check_p(p)
    ns = np.arange(n_min, n_max + 1, dtype=float)
    signs = np.sign(_f_rotated_sign_terms(p, ns))
    idx = np.nonzero(signs[1:] != signs[:-1])[0] + 1
    return [int(ns[i]) for i in idx]


def n0_threshold(p: float, n_max: int, n_min: int = 2) -> int | None:
    """Smallest n in [n_min, n_max] with f_rotated(p, n) > 0, or None.

    A plain scan; monotonicity in n is not assumed (see
    :func:`f_rotated_sign_changes`).
    """
    p = _check_p(p)
    if p >= 2:
        raise DomainError("n0 threshold is only defined for 1 <= p < 2")
    ns = np.arange(n_min, n_max + 1, dtype=float)
    positive = np.nonzero(_f_rotated_sign_terms(p, ns) > 0)[0]
    if positive.size == 0:
        return None
    return int(ns[positive[0]])
