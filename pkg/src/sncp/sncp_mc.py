"""Monte Carlo estimation of the SNC functional

    f(eta1, eta2) = E<X,eta1>^2 <X,eta2>^2 - E<X,eta1>^2 E<X,eta2>^2

for X uniform on B_p^n and on the projection of B_p^n onto the hyperplane
orthogonal to the diagonal theta0 = (1, ..., 1)/sqrt(n), together with
numerical checks of the identities used to analyse it.

All estimators take ``(samples, seed)`` and are bit-reproducible.  Each
reports a batch-means standard error over 32 batches.  Sign verdicts
require the estimate to be at least four standard errors away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .moments import (
    excess_kurtosis_term,
    log_moment_S,
    moment_abs_g,
    ratio_coefficient_diag,
    s_moment_ratio,
)
from .pairs import OrthoPair, named_pair, overlap_t
from .sampler import (
    McEstimate,
    SeededStream,
    _draw_rows,
    _uniform_ball_rows,
    accumulate,
    draw_g,
    sign_power,
    sign_power_sum,
)

__all__ = [
    "AffineFitReport",
    "IdentityReport",
    "MarginalDiagReport",
    "McEstimate",
    "PsiSurvey",
    "SncpReport",
    "SplittingReport",
    "algebraic_identities_check",
    "diag_affine_decomposition_check",
    "expected_h_monomials",
    "f_ball_mc",
    "f_ball_mc_many",
    "f_diag_extremal_values",
    "f_diag_mc",
    "f_diag_mc_many",
    "mean_square_marginal_diag",
    "overlap_t",
    "psi_p1_exact",
    "psi_scaling_survey",
    "sign_verdict",
    "splitting_identity_check",
]

MIN_SAMPLES = 10_000
VERDICT_Z = 4.0
BACKENDS = ("weighted", "uniform")


def sign_verdict(mean: float, std_error: float = 0.0, z: float = VERDICT_Z) -> str:
    """'negative' / 'positive', or 'indeterminate' when |mean| < z * SE."""
    if abs(mean) < z * std_error or mean == 0:
        return "indeterminate"
    return "negative" if mean < 0 else "positive"


@dataclass
class SncpReport:
    pair: OrthoPair | None
    f_value: float | McEstimate
    sign_verdict: str
    method: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_estimate(cls, pair, est: McEstimate, method: str, **params) -> "SncpReport":
        return cls(pair, est, sign_verdict(est.mean, est.std_error), method, params)

    @classmethod
    def exact(cls, pair, value: float, **params) -> "SncpReport":
        return cls(pair, value, sign_verdict(value), "exact-decomposition", params)

    @property
    def value(self) -> float:
        return self.f_value.mean if isinstance(self.f_value, McEstimate) else float(self.f_value)

    @property
    def std_error(self) -> float:
        return self.f_value.std_error if isinstance(self.f_value, McEstimate) else 0.0


def _check_p(p: float) -> float:
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise DomainError(f"p must be a finite real >= 1, got {p}")
    return p


def _check_psi_p(p: float, n: int) -> float:
    p = _check_p(p)
    if p > n:
        raise DomainError(f"psi-based estimates are restricted to 1 <= p <= n (p={p}, n={n})")
    return p


def _check_samples(samples: int) -> int:
    if samples < MIN_SAMPLES:
        raise PreconditionError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    return int(samples)


# ------------------------------------------------------------ identities


@dataclass
class IdentityReport:
    overlap: float
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


_MASKS: dict[tuple[int, int], np.ndarray] = {}


def _distinct_mask(n: int, order: int) -> np.ndarray:
    key = (n, order)
    if key not in _MASKS:
        idx = np.indices((n,) * order)
        mask = np.ones((n,) * order, dtype=bool)
        for a in range(order):
            for b in range(a + 1, order):
                mask &= idx[a] != idx[b]
        _MASKS[key] = mask.astype(float)
    return _MASKS[key]


def algebraic_identities_check(pair: OrthoPair) -> IdentityReport:
    """Both sides of the six index-sum identities for a diagonal pair.

    Sums over pairwise-distinct indices are evaluated directly against the
    distinctness mask; right-hand sides are the stated functions of the
    overlap t.
    """
    if pair.mode != "diagonal":
        raise PreconditionError("identities hold for pairs in the diagonal hyperplane")
    a, b = pair.eta1, pair.eta2
    n = pair.n
    t = overlap_t(pair)
    m2, m3, m4 = (_distinct_mask(n, k) for k in (2, 3, 4))
    bb = np.outer(b, b).ravel()
    # masks flattened so each sum is a matrix-vector product
    m3f = m3.reshape(n, n * n)
    m4f = m4.reshape(n * n, n * n)
    lhs = np.array([
        a @ m2 @ (a * b * b),
        (a * a) @ m2 @ (b * b),
        (a * b) @ m2 @ (a * b),
        (a * a) @ (m3f @ bb),
        (a * b) @ (m3f @ np.outer(a, b).ravel()),
        np.outer(a, a).ravel() @ (m4f @ bb),
    ])
    rhs = np.array([-t, 1 - t, -t, -1 + 2 * t, 2 * t, 1 - 6 * t])
    return IdentityReport(t, lhs, rhs)


# ------------------------------------------------------------ f estimators


def _pair_matrix(pairs: Sequence[OrthoPair], n: int, mode: str | None) -> np.ndarray:
    for pr in pairs:
        if pr.n != n:
            raise PreconditionError(f"pair dimension {pr.n} != n = {n}")
        if mode is not None and pr.mode != mode:
            raise PreconditionError(f"expected {mode} pairs, got {pr.mode}")
    return np.column_stack([pr.matrix() for pr in pairs])


def _pair_columns(x: np.ndarray, w: np.ndarray, E: np.ndarray) -> np.ndarray:
    proj = np.einsum("ij,jk->ik", x, E) ** 2
    a, b = proj[:, 0::2], proj[:, 1::2]
    cols = np.empty((x.shape[0], 1 + 3 * a.shape[1]))
    cols[:, 0] = w
    cols[:, 1::3] = a * w[:, None]
    cols[:, 2::3] = b * w[:, None]
    cols[:, 3::3] = a * b * w[:, None]
    return cols


def _pair_stat(m: np.ndarray) -> np.ndarray:
    w = m[..., :1]
    a, b, ab = m[..., 1::3] / w, m[..., 2::3] / w, m[..., 3::3] / w
    return ab - a * b


def _estimates(bs, seed: int, method: str, pairs) -> list[McEstimate]:
    value, se = bs.estimate(_pair_stat)
    return [
        McEstimate(float(value[k]), float(se[k]), bs.samples, seed, method,
                   {"overlap": overlap_t(pairs[k])})
        for k in range(len(pairs))
    ]


def f_ball_mc_many(
    p: float,
    n: int,
    pairs: Sequence[OrthoPair],
    samples: int,
    seed: int,
    backend: str = "weighted",
    threads: int | None = None,
    stream_index: int = 0,
) -> list[McEstimate]:
    """f on B_p^n for several sphere pairs from one common sample set.

    ``weighted``: cone-measure points of B_p^{n+1}, first n coordinates,
    weighted by |y_{n+1}|^(p-1).  ``uniform``: exact uniform points of
    B_p^n.
    """
    p = _check_p(p)
    samples = _check_samples(samples)
    if backend not in BACKENDS:
        raise DomainError(f"backend must be one of {BACKENDS}")
    E = _pair_matrix(pairs, n, "sphere")

    if backend == "weighted":
        def kernel(rng, count):
            g, s = _draw_rows(p, n + 1, rng, count)
            y = g / s[:, None]
            w = np.abs(y[:, n]) ** (p - 1) if p != 1 else np.ones(count)
            return _pair_columns(y[:, :n], w, E)
    else:
        def kernel(rng, count):
            x = _uniform_ball_rows(p, n, rng, count)
            return _pair_columns(x, np.ones(count), E)

    bs = accumulate(kernel, samples, SeededStream(seed, stream_index), threads=threads)
    return _estimates(bs, seed, f"mc-{backend}", pairs)


def f_ball_mc(p, n, pair, samples, seed, backend="weighted", threads=None, stream_index=0) -> McEstimate:
    return f_ball_mc_many(p, n, [pair], samples, seed, backend, threads, stream_index)[0]


def f_diag_mc_many(
    p: float,
    n: int,
    pairs: Sequence[OrthoPair],
    samples: int,
    seed: int,
    threads: int | None = None,
    stream_index: int = 0,
) -> list[McEstimate]:
    """f on the diagonal projection of B_p^n for several diagonal pairs.

    Cone-measure points y = G/S are weighted by |sum_i sign(y_i)|y_i|^(p-1)|;
    for directions orthogonal to theta0 projecting y first changes nothing.
    """
    p = _check_p(p)
    samples = _check_samples(samples)
    if n < 4:
        raise DomainError("diagonal estimates need n >= 4")
    E = _pair_matrix(pairs, n, "diagonal")

    def kernel(rng, count):
        g, s = _draw_rows(p, n, rng, count)
        y = g / s[:, None]
        w = np.abs(sign_power(y, p).sum(axis=1))
        return _pair_columns(y, w, E)

    bs = accumulate(kernel, samples, SeededStream(seed, stream_index), threads=threads)
    return _estimates(bs, seed, "mc-weighted", pairs)


def f_diag_mc(p, n, pair, samples, seed, threads=None, stream_index=0) -> McEstimate:
    return f_diag_mc_many(p, n, [pair], samples, seed, threads, stream_index)[0]


# ------------------------------------------------------ extremal pair values


def _h_xi_bar(x: np.ndarray, coef: float) -> np.ndarray:
    x1, x2, x3, x4, x5, x6 = x.T
    main = 0.25 * (x1 - x2) ** 2 * (x3 - x4) ** 2
    return main - coef * (x1**2 * x5**2 - 2 * x1 * x2 * x5**2 + x1 * x2 * x5 * x6)


def _h_xi(x: np.ndarray, coef: float) -> np.ndarray:
    x1, x2, x3, x4, x5, x6 = x.T
    main = (x1 - x2 + x3 - x4) ** 2 * (x1 - x2 - x3 + x4) ** 2 / 16
    return main - coef * (x1**2 * x5**2 - 2 * x1 * x2 * x5**2 + x1 * x2 * x5 * x6)


H_FUNCTIONS = {"xi_bar": _h_xi_bar, "xi": _h_xi}


def expected_h_monomials(p: float, n: int, which: str) -> float:
    """E h(g1..g4, gbar1, gbar2) for i.i.d. g, expanded monomial by monomial.

    xi_bar: (E g^2)^2 (1 - K);  xi: (E g^2)^2 (F(1/p) + 1 - 4K) / 4,
    with K the diagonal ratio coefficient.
    """
    eg2 = moment_abs_g(p, 2)
    eg4 = moment_abs_g(p, 4)
    k = ratio_coefficient_diag(p, n)
    if which == "xi_bar":
        return eg2**2 * (1 - k)
    if which == "xi":
        return (eg4 + eg2**2) / 4 - k * eg2**2
    raise DomainError(f"which must be 'xi_bar' or 'xi', got {which!r}")


def f_diag_extremal_values(
    p: float,
    n: int,
    which: str,
    samples: int,
    seed: int,
    threads: int | None = None,
    stream_index: int = 0,
) -> McEstimate:
    """f(xi_bar1, xi_bar2) or f(xi1, xi2) on the diagonal projection via

        E S^{p-1} E[h psi psibar] / (E S^{p+3} E[psi psibar])

    with two independent g-vectors (g, gbar).  Only g1..g4 and gbar1,
    gbar2 enter h; the remaining coordinates enter psi through their sum.
    ``extras`` carries the plain mean of h with its SE and the exact value
    of E h for comparison.
    """
    p = _check_p(p)
    if n < 4:
        raise DomainError("diagonal estimates need n >= 4")
    p = _check_psi_p(p, n)
    samples = _check_samples(samples)
    if which not in H_FUNCTIONS:
        raise DomainError(f"which must be one of {sorted(H_FUNCTIONS)}")
    hfun = H_FUNCTIONS[which]
    coef = ratio_coefficient_diag(p, n)
    root_n = math.sqrt(n)

    def kernel(rng, count):
        g = draw_g(p, rng, (count, 4))
        gb = draw_g(p, rng, (count, 2))
        z = sign_power_sum(p, n - 4, rng, count)
        zb = sign_power_sum(p, n - 2, rng, count)
        psi = np.abs(sign_power(g, p).sum(axis=1) + z) / root_n
        psib = np.abs(sign_power(gb, p).sum(axis=1) + zb) / root_n
        h = hfun(np.column_stack([g, gb]), coef)
        pp = psi * psib
        return np.column_stack([h * pp, pp, h])

    bs = accumulate(kernel, samples, SeededStream(seed, stream_index), threads=threads)
    scale = s_moment_ratio(p, n, p - 1, p + 3)
    value, se = bs.estimate(lambda m: scale * m[..., 0] / m[..., 1])
    h_mean, h_se = bs.estimate(lambda m: m[..., 2])
    return McEstimate(
        float(value), float(se), bs.samples, seed, f"h-representation:{which}",
        {
            "h_mean": float(h_mean),
            "h_mean_se": float(h_se),
            "h_mean_expected": expected_h_monomials(p, n, which),
        },
    )


# --------------------------------------------------- affine decomposition


@dataclass
class AffineFitReport:
    overlaps: np.ndarray
    estimates: list[McEstimate]
    intercept: float
    intercept_se: float
    slope: float
    slope_se: float
    chi2_per_dof: float
    value_at_quarter: float
    value_at_quarter_se: float
    xi_bar: McEstimate
    xi: McEstimate

    @property
    def intercept_z(self) -> float:
        return abs(self.intercept - self.xi_bar.mean) / math.hypot(self.intercept_se, self.xi_bar.std_error)

    @property
    def quarter_z(self) -> float:
        return abs(self.value_at_quarter - self.xi.mean) / math.hypot(self.value_at_quarter_se, self.xi.std_error)

    def passed(self, chi2_max: float = 2.0, z_max: float = 4.0) -> bool:
        return self.chi2_per_dof <= chi2_max and self.intercept_z <= z_max and self.quarter_z <= z_max


def diag_affine_decomposition_check(
    p: float,
    n: int,
    pairs: Sequence[OrthoPair],
    samples: int,
    seed: int,
    threads: int | None = None,
    extremal_samples: int | None = None,
) -> AffineFitReport:
    """Weighted least-squares fit of f(pair) = a + b t over diagonal pairs.

    Every pair gets its own independent sample stream so the chi-square is
    meaningful; the intercept and a + b/4 are compared with the dedicated
    xi_bar / xi estimators (also independent streams).
    """
    ts = np.array([overlap_t(pr) for pr in pairs])
    if len(np.unique(np.round(ts, 12))) < 3:
        raise PreconditionError("need pairs spanning at least 3 distinct overlaps")
    if ts.min() < -1e-12 or ts.max() > 0.25 + 1e-12:
        raise PreconditionError("diagonal overlaps must lie in [0, 1/4]")
    ests = [
        f_diag_mc(p, n, pr, samples, seed, threads, stream_index=100 + k)
        for k, pr in enumerate(pairs)
    ]
    y = np.array([e.mean for e in ests])
    se = np.array([e.std_error for e in ests])
    X = np.column_stack([np.ones_like(ts), ts])
    W = 1.0 / se**2
    cov = np.linalg.inv(X.T @ (W[:, None] * X))
    beta = cov @ (X.T @ (W * y))
    resid = y - X @ beta
    chi2 = float(np.sum(W * resid**2)) / (len(ts) - 2)
    q = np.array([1.0, 0.25])
    m_ex = extremal_samples or samples
    xb = f_diag_extremal_values(p, n, "xi_bar", m_ex, seed, threads, stream_index=1)
    xi = f_diag_extremal_values(p, n, "xi", m_ex, seed, threads, stream_index=2)
    return AffineFitReport(
        ts, ests, float(beta[0]), math.sqrt(cov[0, 0]), float(beta[1]), math.sqrt(cov[1, 1]),
        chi2, float(q @ beta), math.sqrt(q @ cov @ q), xb, xi,
    )


# ------------------------------------------------------ marginal second moment


@dataclass
class MarginalDiagReport:
    formula: McEstimate
    direct: McEstimate

    @property
    def z(self) -> float:
        return abs(self.formula.mean - self.direct.mean) / math.hypot(
            self.formula.std_error, self.direct.std_error)


def mean_square_marginal_diag(
    p: float,
    n: int,
    samples: int,
    seed: int,
    eta: np.ndarray | None = None,
    threads: int | None = None,
) -> MarginalDiagReport:
    """E<X, eta>^2 on the diagonal projection, by two routes.

    ``formula``: E S^{p-1} E[g1 (g1 - g2) psi] / (E S^{p+1} E psi) with the
    S-moments exact.  ``direct``: weighted projection estimate for a unit
    eta orthogonal to theta0 (a random one unless given).
    """
    p = _check_psi_p(p, n)
    if n < 2:
        raise DomainError("n must be >= 2")
    samples = _check_samples(samples)
    root_n = math.sqrt(n)

    def kernel(rng, count):
        g = draw_g(p, rng, (count, 2))
        z = sign_power_sum(p, n - 2, rng, count)
        psi = np.abs(sign_power(g, p).sum(axis=1) + z) / root_n
        return np.column_stack([g[:, 0] * (g[:, 0] - g[:, 1]) * psi, psi])

    bs = accumulate(kernel, samples, SeededStream(seed, 11), threads=threads)
    scale = s_moment_ratio(p, n, p - 1, p + 1)
    v, se = bs.estimate(lambda m: scale * m[..., 0] / m[..., 1])
    formula = McEstimate(float(v), float(se), bs.samples, seed, "psi-formula")

    if eta is None:
        z0 = np.random.default_rng([seed, 12]).standard_normal(n)
        z0 -= z0.mean()
        eta = z0 / np.linalg.norm(z0)
    eta = np.asarray(eta, dtype=float)
    if abs(eta.sum()) > 1e-10 or abs(eta @ eta - 1) > 1e-10:
        raise PreconditionError("eta must be a unit vector orthogonal to the diagonal")

    def kernel2(rng, count):
        g, s = _draw_rows(p, n, rng, count)
        y = g / s[:, None]
        w = np.abs(sign_power(y, p).sum(axis=1))
        a = np.einsum("ij,j->i", y, eta) ** 2
        return np.column_stack([a * w, w])

    bs2 = accumulate(kernel2, samples, SeededStream(seed, 13), threads=threads)
    v2, se2 = bs2.estimate(lambda m: m[..., 0] / m[..., 1])
    direct = McEstimate(float(v2), float(se2), bs2.samples, seed, "mc-weighted")
    return MarginalDiagReport(formula, direct)


# ------------------------------------------------------ splitting identity


def _h_one(x):
    return np.ones(x.shape[0])


def _h_marginal(x):
    return x[:, 0] * (x[:, 0] - x[:, 1])


def _h_quartic(x):
    g1, g2, g3, g4 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    return (g1**4 - 4 * g1**3 * g2 - 3 * g1**2 * g2**2
            + 12 * g1**2 * g2 * g3 - 6 * g1 * g2 * g3 * g4)


SPLIT_INTEGRANDS = {"one": (_h_one, 1), "marginal": (_h_marginal, 2), "quartic": (_h_quartic, 4)}


@dataclass
class SplittingReport:
    k: int
    p: float
    nested: bool
    lhs: float
    rhs: float
    diff: float
    diff_se: float
    remainder: float = float("nan")
    remainder_se: float = float("nan")
    bound: float = float("nan")
    terms: dict = field(default_factory=dict)

    @property
    def z(self) -> float:
        return abs(self.diff) / self.diff_se if self.diff_se > 0 else (0.0 if self.diff == 0 else math.inf)

    def passed(self, z_max: float = 4.0) -> bool:
        ok = self.z <= z_max
        if not self.nested:
            ok = ok and abs(self.remainder) <= self.bound + z_max * self.remainder_se
        return ok


def splitting_identity_check(
    k: int,
    p: float,
    samples: int,
    seed: int,
    h: str | Callable[[np.ndarray], np.ndarray] = "one",
    n: int = 50,
    nested: bool = False,
    threads: int | None = None,
) -> SplittingReport:
    """Check E h |Y_k + Z| = E h E|Z| + E h (|Y_k| - |Z|) 1{|Y_k| >= |Z|}.

    Y_k = sum_{i<=k} sign(g_i)|g_i|^(p-1) and Z is the same sum over the
    remaining n - k coordinates.  Both sides come from common draws; the
    reported SE is that of their difference.  The remainder term is also
    compared with the bound (E h^2)^(1/2) (E Y_k^2)^(1/2).

    ``nested=True`` runs the two-level version with the 6-variable h of the
    xi_bar pair (or ``h="xi"``): Y_4, Z from g and Ybar_2, Zbar from an
    independent gbar, giving the four-term expansion of
    E h |Y_4 + Z| |Ybar_2 + Zbar|.
    """
    p = _check_psi_p(p, n)
    samples = _check_samples(samples)
    if nested:
        return _nested_splitting(p, samples, seed, h if isinstance(h, str) and h in H_FUNCTIONS else "xi_bar", n, threads)
    if k < 1 or k >= n:
        raise DomainError("need 1 <= k < n")
    if isinstance(h, str):
        hfun, arity = SPLIT_INTEGRANDS[h]
        if arity > k:
            raise DomainError(f"integrand {h!r} needs k >= {arity}")
    else:
        hfun = h

    def kernel(rng, count):
        g = draw_g(p, rng, (count, k))
        y = sign_power(g, p).sum(axis=1)
        z = sign_power_sum(p, n - k, rng, count)
        hv = np.asarray(hfun(g), dtype=float)
        ay, az = np.abs(y), np.abs(z)
        rem = hv * np.maximum(ay - az, 0.0)
        return np.column_stack([hv * np.abs(y + z), hv, az, rem, hv * hv, y * y])

    bs = accumulate(kernel, samples, SeededStream(seed, 21 + k), threads=threads)
    m = bs.means
    diff, dse = bs.estimate(lambda m: m[..., 0] - m[..., 1] * m[..., 2] - m[..., 3])
    _, rse = bs.estimate(lambda m: m[..., 3])
    rhs = m[1] * m[2] + m[3]
    return SplittingReport(
        k, p, False, float(m[0]), float(rhs), float(diff), float(dse),
        float(m[3]), float(rse), float(math.sqrt(m[4] * m[5])),
        {"E_h": float(m[1]), "E_absZ": float(m[2])},
    )


def _nested_splitting(p, samples, seed, which, n, threads) -> SplittingReport:
    hfun = H_FUNCTIONS[which]
    coef = ratio_coefficient_diag(p, n)

    def kernel(rng, count):
        g = draw_g(p, rng, (count, 4))
        gb = draw_g(p, rng, (count, 2))
        y = sign_power(g, p).sum(axis=1)
        yb = sign_power(gb, p).sum(axis=1)
        z = sign_power_sum(p, n - 4, rng, count)
        zb = sign_power_sum(p, n - 2, rng, count)
        hv = hfun(np.column_stack([g, gb]), coef)
        r = np.maximum(np.abs(y) - np.abs(z), 0.0)
        rb = np.maximum(np.abs(yb) - np.abs(zb), 0.0)
        return np.column_stack([
            hv * np.abs(y + z) * np.abs(yb + zb),
            hv, np.abs(z), np.abs(zb), hv * r, hv * rb, hv * r * rb,
        ])

    def rhs_of(m):
        return (m[..., 1] * m[..., 2] * m[..., 3] + m[..., 3] * m[..., 4]
                + m[..., 2] * m[..., 5] + m[..., 6])

    bs = accumulate(kernel, samples, SeededStream(seed, 31), threads=threads)
    m = bs.means
    diff, dse = bs.estimate(lambda m: m[..., 0] - rhs_of(m))
    names = ("E_h_E|Z|E|Zbar|", "E|Zbar|_E_h_r", "E|Z|_E_h_rbar", "E_h_r_rbar")
    vals = (m[1] * m[2] * m[3], m[3] * m[4], m[2] * m[5], m[6])
    return SplittingReport(
        4, p, True, float(m[0]), float(rhs_of(m)), float(diff), float(dse),
        terms={k: float(v) for k, v in zip(names, vals)},
    )


# ----------------------------------------------------------------- psi scale


def psi_p1_exact(n: int) -> float:
    """E psi at p = 1: E|sum of n random signs| / sqrt(n), by enumeration."""
    total = math.fsum(math.comb(n, j) * abs(2 * j - n) for j in range(n + 1))
    return total / 2**n / math.sqrt(n)


@dataclass
class PsiSurvey:
    n: int
    rows: list[tuple[float, float, float]]  # (p, E psi sqrt(p), se)

    @property
    def ratio(self) -> float:
        vals = [r[1] for r in self.rows]
        return max(vals) / min(vals)


def psi_scaling_survey(
    n: int,
    p_grid: Sequence[float],
    samples: int,
    seed: int,
    threads: int | None = None,
) -> PsiSurvey:
    """E psi_theta0 * sqrt(p) over a grid of p (explicit draws of all n g_i)."""
    samples = _check_samples(samples)
    rows = []
    root_n = math.sqrt(n)
    for j, p in enumerate(p_grid):
        p = _check_psi_p(p, n)

        def kernel(rng, count, p=p):
            total = np.zeros(count)
            block = max(1, 2**20 // n)
            for a in range(0, count, block):
                b = min(count, a + block)
                total[a:b] = sign_power(draw_g(p, rng, (b - a, n)), p).sum(axis=1)
            return np.abs(total) / root_n

        bs = accumulate(kernel, samples, SeededStream(seed, 41 + j), threads=threads)
        v, se = bs.estimate(lambda m: m[..., 0])
        rows.append((p, float(v) * math.sqrt(p), float(se) * math.sqrt(p)))
    return PsiSurvey(n, rows)
