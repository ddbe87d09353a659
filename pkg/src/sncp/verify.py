"""Verification suite: each check returns pass/fail plus measured margins.

Checks are grouped into suites (gamma, ball, diagonal, extremal).  Every
Monte Carlo check derives its streams from one master seed, so a suite
run is reproducible bit for bit at any thread count.  ``Scale.quick()``
shrinks sample counts for smoke runs; verdicts at that scale are not
meaningful, only reproducibility is.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .extremal import BOUNDS, brute_force_overlap_max, maximize_overlap
from .gamma_core import gurland_F, log_gurland_F
from .moments import (
    f_canonical,
    f_rotated,
    LpSpace,
    f_ball,
    f_rotated_sign_changes,
    moment_S,
    moment_abs_g,
    n0_threshold,
)
from .pairs import diagonal_pair_with_overlap, named_pair, random_pair
from .sncp_mc import (
    algebraic_identities_check,
    diag_affine_decomposition_check,
    f_ball_mc,
    f_ball_mc_many,
    f_diag_extremal_values,
    psi_p1_exact,
    psi_scaling_survey,
    splitting_identity_check,
)

__all__ = ["CHECKS", "SUITES", "CheckResult", "Scale", "run_check", "run_suite", "with_grids"]

MOMENT_GRID_P = (1.0, 1.5, 2.0, 3.0, 5.0)
BALL_P = (1.0, 1.5, 2.0, 3.0, 4.0)
BALL_N = (3, 10, 50)


@dataclass(frozen=True)
class Scale:
    name: str = "full"
    ball_samples: int = 1_000_000
    counterexample_samples: int = 10_000_000
    affine_samples: int = 1_000_000
    sign_samples: int = 10_000_000
    split_samples: int = 1_000_000
    psi_samples: int = 1_000_000
    extremal_restarts: int = 32
    brute_density: int = 20_000
    p_grid: tuple = BALL_P
    n_grid: tuple = BALL_N

    @classmethod
    def quick(cls) -> "Scale":
        return cls(
            "quick", 20_000, 200_000, 20_000, 50_000, 20_000, 20_000, 8, 2_000,
            (1.0, 2.0, 3.0), (3, 10),
        )


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.id:2d} [{status}] {self.name}"

    def to_dict(self, timing: bool = True) -> dict:
        out = {"id": self.id, "name": self.name, "passed": self.passed, "metrics": self.metrics}
        if timing:
            out["runtime_s"] = self.runtime_s
        return out


# ------------------------------------------------------------------ gamma


def check_gurland(scale: Scale, seed: int, threads) -> CheckResult:
    at_half = abs(gurland_F(0.5) - 3.0)
    xs = np.arange(1, 10_001) / 10_000
    lf = log_gurland_F(xs)
    min_step = float(np.diff(lf).min())
    signs = np.sign(lf - math.log(3.0))
    signs = signs[signs != 0]
    changes = int(np.count_nonzero(np.diff(signs) != 0))
    root = optimize.brentq(lambda x: float(log_gurland_F(x)) - math.log(3.0), 0.3, 0.7, xtol=1e-15)
    passed = at_half <= 1e-12 and min_step > 0 and changes == 1 and abs(root - 0.5) <= 1e-10
    return CheckResult(1, "Gurland fixed point and monotonicity", passed, {
        "abs_F_half_minus_3": at_half,
        "min_log_increment": min_step,
        "sign_changes": changes,
        "root": root,
    })


def _quad_moment(p: float, alpha: float) -> float:
    norm = 2.0 * math.gamma(1.0 + 1.0 / p)
    val, _ = integrate.quad(lambda t: t**alpha * math.exp(-(t**p)), 0, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return 2.0 * val / norm


def check_moments(scale: Scale, seed: int, threads) -> CheckResult:
    worst = 0.0
    for p in MOMENT_GRID_P:
        for alpha in sorted({0.5, 1.0, 2.0, 3.0, 4.0, 2 * p - 2}):
            q = _quad_moment(p, alpha)
            worst = max(worst, abs(moment_abs_g(p, alpha) - q) / q)
    zero_ok = all(
        moment_S(p, m, 0) == 1.0 for p in (1.0, 1.5, 2.0, 3.7, 8.0) for m in (1, 2, 5, 101)
    )
    return CheckResult(2, "moment closed forms vs quadrature", worst <= 1e-9 and zero_ok, {
        "max_rel_err": worst,
        "moment_S_zero_exact": zero_ok,
    })


# ------------------------------------------------------------------- ball


def check_ball_samplers(scale: Scale, seed: int, threads) -> CheckResult:
    worst = 0.0
    rows = []
    for i, p in enumerate(scale.p_grid):
        for j, n in enumerate(scale.n_grid):
            rng = np.random.default_rng([seed, 3, i, j])
            pairs = [random_pair(n, "sphere", rng) for _ in range(3)]
            exact = [f_ball(LpSpace(p, n), pr.overlap) for pr in pairs]
            for b, backend in enumerate(("weighted", "uniform")):
                ests = f_ball_mc_many(p, n, pairs, scale.ball_samples, seed, backend, threads,
                                      stream_index=1000 + 100 * i + 10 * j + b)
                for e, ex in zip(ests, exact):
                    z = abs(e.mean - ex) / e.std_error
                    worst = max(worst, z)
                    rows.append([p, n, backend, e.extras["overlap"], ex, e.mean, e.std_error, z])
    return CheckResult(3, "ball closed form vs weighted and uniform samplers", worst <= 4.0, {
        "max_z": worst,
        "samples": scale.ball_samples,
        "comparisons": len(rows),
        "rows": rows,
    })


def check_rotation_ordering(scale: Scale, seed: int, threads) -> CheckResult:
    ok = True
    worst_gap_p2 = 0.0
    for p in (2.0, 3.0, 4.0, 8.0):
        for n in (3, 10, 50, 200):
            fc, fr = f_canonical(p, n), f_rotated(p, n)
            if p == 2.0:
                worst_gap_p2 = max(worst_gap_p2, abs(fr - fc) / abs(fc))
                ok &= fc < 0
            else:
                ok &= fr <= fc < 0
    for p in (1.0, 1.2, 1.5, 1.9):
        for n in (3, 10, 50, 200):
            ok &= f_canonical(p, n) <= f_rotated(p, n)
    ok &= worst_gap_p2 < 1e-12
    return CheckResult(4, "ordering of f_canonical and f_rotated", bool(ok), {"p2_rel_gap": worst_gap_p2})


def check_counterexample(scale: Scale, seed: int, threads) -> CheckResult:
    n0 = n0_threshold(1.0, 1000)
    changes = f_rotated_sign_changes(1.0, 1000)
    n = n0 + 5
    est = f_ball_mc(1.0, n, named_pair("xi", n), scale.counterexample_samples, seed, "weighted", threads,
                    stream_index=5000)
    z = est.mean / est.std_error
    return CheckResult(5, "positive f(xi1, xi2) on the l1 ball", z >= 4.0, {
        "n0": n0,
        "sign_changes": changes,
        "n": n,
        "f_exact": f_rotated(1.0, n),
        "f_mc": est.mean,
        "std_error": est.std_error,
        "z": z,
        "samples": est.samples,
    })


# --------------------------------------------------------------- diagonal


def check_identities(scale: Scale, seed: int, threads) -> CheckResult:
    worst = 0.0
    for j, n in enumerate((4, 5, 10, 50)):
        rng = np.random.default_rng([seed, 6, j])
        for _ in range(100):
            worst = max(worst, algebraic_identities_check(random_pair(n, "diagonal", rng)).max_residual)
    return CheckResult(6, "index-sum identities on diagonal pairs", worst < 1e-10, {"max_residual": worst})


def check_extremal(scale: Scale, seed: int, threads) -> CheckResult:
    rows = []
    ok = True
    for mode in ("sphere", "diagonal"):
        bound = BOUNDS[mode]
        for n in (4, 5, 10, 50, 200):
            r = maximize_overlap(n, mode, scale.extremal_restarts, seed)
            good = (abs(r.best_value - bound) <= 1e-6 and r.best_value <= bound + 1e-9
                    and r.stationarity_residual < 1e-8)
            ok &= good
            rows.append([mode, n, r.best_value, bound, r.stationarity_residual, good])
        for n in (4, 5, 6):
            bf = brute_force_overlap_max(n, mode, scale.brute_density, seed)
            good = abs(bf - bound) <= 1e-4
            ok &= good
            rows.append([mode + "-brute", n, bf, bound, None, good])
    return CheckResult(7, "overlap maximum over feasible pairs", bool(ok), {"rows": rows})


AFFINE_OVERLAPS = (0.0, 1 / 16, 1 / 8, 3 / 16, 0.22, 1 / 4)


def check_affine(scale: Scale, seed: int, threads) -> CheckResult:
    rows = []
    ok = True
    for j, (p, n) in enumerate(((1.0, 50), (3.0, 50))):
        pairs = [diagonal_pair_with_overlap(n, t) for t in AFFINE_OVERLAPS]
        rep = diag_affine_decomposition_check(p, n, pairs, scale.affine_samples, seed + j, threads)
        ok &= rep.passed()
        rows.append({
            "p": p, "n": n,
            "chi2_per_dof": rep.chi2_per_dof,
            "intercept": rep.intercept, "intercept_se": rep.intercept_se,
            "xi_bar": rep.xi_bar.mean, "xi_bar_se": rep.xi_bar.std_error, "intercept_z": rep.intercept_z,
            "at_quarter": rep.value_at_quarter, "at_quarter_se": rep.value_at_quarter_se,
            "xi": rep.xi.mean, "xi_se": rep.xi.std_error, "quarter_z": rep.quarter_z,
        })
    return CheckResult(8, "affine dependence of f on the overlap (diagonal)", bool(ok), {"rows": rows})


SIGN_GRID = (("xi_bar", 1.0), ("xi_bar", 1.5), ("xi_bar", 3.0), ("xi_bar", 8.0),
             ("xi", 1.0), ("xi", 1.5), ("xi", 2.0))


def check_sign_claims(scale: Scale, seed: int, threads) -> CheckResult:
    rows = []
    ok = True
    n = 100
    for k, (which, p) in enumerate(SIGN_GRID):
        e = f_diag_extremal_values(p, n, which, scale.sign_samples, seed, threads, stream_index=9000 + k)
        z = e.mean / e.std_error
        good = z <= -3.0
        ok &= good
        rows.append([which, p, n, e.mean, e.std_error, z, e.extras["h_mean"], e.extras["h_mean_expected"], good])
    return CheckResult(9, "negative f at the extremal diagonal pairs", bool(ok), {"rows": rows})


def check_splitting(scale: Scale, seed: int, threads) -> CheckResult:
    rows = []
    ok = True
    for p in (1.0, 2.0, 3.0):
        for k, h in ((2, "marginal"), (4, "quartic")):
            r = splitting_identity_check(k, p, scale.split_samples, seed, h, n=50, threads=threads)
            ok &= r.passed()
            rows.append([k, p, h, r.lhs, r.rhs, r.diff_se, r.z, abs(r.remainder), r.bound, r.passed()])
        for which in ("xi_bar", "xi"):
            r = splitting_identity_check(4, p, scale.split_samples, seed, which, n=50, nested=True, threads=threads)
            ok &= r.passed()
            rows.append(["nested", p, which, r.lhs, r.rhs, r.diff_se, r.z, None, None, r.passed()])
    return CheckResult(10, "splitting identity", bool(ok), {"rows": rows})


def check_psi_scaling(scale: Scale, seed: int, threads) -> CheckResult:
    survey = psi_scaling_survey(64, (1, 2, 4, 8, 16, 32), scale.psi_samples, seed, threads)
    exact = psi_p1_exact(64)
    p1, v1, se1 = survey.rows[0]
    z = abs(v1 - exact) / se1
    ok = survey.ratio <= 4.0 and z <= 4.0
    return CheckResult(11, "psi scaling in p", ok, {
        "ratio": survey.ratio,
        "rows": [list(r) for r in survey.rows],
        "p1_exact": exact,
        "p1_z": z,
    })


CHECKS: dict[int, Callable] = {
    1: check_gurland,
    2: check_moments,
    3: check_ball_samplers,
    4: check_rotation_ordering,
    5: check_counterexample,
    6: check_identities,
    7: check_extremal,
    8: check_affine,
    9: check_sign_claims,
    10: check_splitting,
    11: check_psi_scaling,
}

SUITES = {
    "gamma": (1, 2),
    "ball": (3, 4, 5),
    "diagonal": (6, 8, 9, 10, 11),
    "extremal": (7,),
}
SUITES["all"] = tuple(sorted(i for ids in SUITES.values() for i in ids))


def run_check(cid: int, scale: Scale, seed: int, threads=None) -> CheckResult:
    t0 = time.perf_counter()
    res = CHECKS[cid](scale, seed, threads)
    res.runtime_s = time.perf_counter() - t0
    return res


def run_suite(suite: str, seed: int, threads=None, scale: Scale | None = None,
              on_result: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    scale = scale or Scale()
    out = []
    for cid in SUITES[suite]:
        res = run_check(cid, scale, seed, threads)
        if on_result:
            on_result(res)
        out.append(res)
    return out


def with_grids(scale: Scale, p_grid=None, n_grid=None) -> Scale:
    kw = {}
    if p_grid:
        kw["p_grid"] = tuple(p_grid)
    if n_grid:
        kw["n_grid"] = tuple(n_grid)
    return replace(scale, **kw)
