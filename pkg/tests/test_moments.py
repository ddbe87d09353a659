import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from sncp.errors import DomainError, RangeError
from sncp.moments import (
    LpSpace,
    ball_decomposition,
    excess_kurtosis_term,
    f_ball,
    f_canonical,
    f_canonical_raw,
    f_rotated,
    f_rotated_raw,
    f_rotated_sign_changes,
    mean_square_marginal_ball,
    moment_S,
    moment_abs_g,
    n0_threshold,
    ratio_coefficient_diag,
    s_moment_ratio,
)

P_GRID = (1.0, 1.5, 2.0, 3.0, 5.0)


def quad_abs_moment(p, alpha):
    val, _ = integrate.quad(lambda t: t**alpha * math.exp(-(t**p)), 0, math.inf, epsrel=1e-13, limit=200)
    return val / math.gamma(1 + 1 / p)


def quad_S_moment(p, m, alpha):
    # S^p is Gamma(m/p)-distributed
    k = m / p
    val, _ = integrate.quad(
        lambda w: w ** (alpha / p) * w ** (k - 1) * math.exp(-w), 0, math.inf, epsrel=1e-13, limit=200
    )
    return val / math.gamma(k)


@pytest.mark.parametrize("p", P_GRID)
@pytest.mark.parametrize("alpha_key", ["0.5", "1", "2", "3", "4", "2p-2"])
def test_moment_abs_g_quadrature(p, alpha_key):
    alpha = 2 * p - 2 if alpha_key == "2p-2" else float(alpha_key)
    q = quad_abs_moment(p, alpha)
    assert abs(moment_abs_g(p, alpha) - q) <= 1e-9 * q


@pytest.mark.parametrize("p,alpha,expected", [(1, 2, 2.0), (2, 2, 0.5), (3.3, 0, 1.0)])
def test_moment_abs_g_examples(p, alpha, expected):
    assert moment_abs_g(p, alpha) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("p", (1.0, 1.7, 2.0, 4.0))
@pytest.mark.parametrize("m", (1, 3, 11))
@pytest.mark.parametrize("alpha", (0.3, 1.0, 2.0, 5.0))
def test_moment_S_quadrature(p, m, alpha):
    q = quad_S_moment(p, m, alpha)
    assert abs(moment_S(p, m, alpha) - q) <= 1e-9 * q


def test_moment_S_examples():
    assert moment_S(1, 1, 2) == pytest.approx(2.0, rel=1e-14)
    assert moment_S(2, 3, 2) == pytest.approx(1.5, rel=1e-14)


@given(st.floats(1, 50), st.integers(1, 500))
def test_moment_S_zero_is_one(p, m):
    assert moment_S(p, m, 0) == 1.0


def test_moment_S_ratio():
    assert s_moment_ratio(2, 3, 2, 0) == pytest.approx(1.5, rel=1e-14)


@pytest.mark.parametrize("bad", [(0.5, 2), (1, -1), (math.inf, 1)])
def test_moment_domain(bad):
    with pytest.raises(DomainError):
        moment_abs_g(*bad)


def test_lpspace_validation():
    with pytest.raises(DomainError):
        LpSpace(0.9, 3)
    with pytest.raises(DomainError):
        LpSpace(2, 1)
    with pytest.raises(DomainError):
        LpSpace(2, 3).require_diagonal()


# ------------------------------------------------ two-dimensional oracles


def _ball2_expect(p, fn):
    """E fn(x, y) for (x, y) uniform on B_p^2, by nested quadrature."""
    top = lambda x: (1 - abs(x) ** p) ** (1 / p)
    num, _ = integrate.dblquad(lambda y, x: fn(x, y), -1, 1, lambda x: -top(x), top, epsabs=1e-13, epsrel=1e-11)
    den, _ = integrate.dblquad(lambda y, x: 1.0, -1, 1, lambda x: -top(x), top, epsabs=1e-13, epsrel=1e-11)
    return num / den


@pytest.mark.parametrize("p", (1.0, 1.5, 3.0))
def test_two_dim_quadrature(p):
    ex2 = _ball2_expect(p, lambda x, y: x * x)
    assert mean_square_marginal_ball(p, 2) == pytest.approx(ex2, rel=1e-8)
    fc = _ball2_expect(p, lambda x, y: x * x * y * y) - ex2**2
    assert f_canonical(p, 2) == pytest.approx(fc, rel=1e-7, abs=1e-12)
    r = math.sqrt(0.5)
    u = lambda x, y: (r * (x + y)) ** 2
    v = lambda x, y: (r * (x - y)) ** 2
    fr = _ball2_expect(p, lambda x, y: u(x, y) * v(x, y)) - _ball2_expect(p, u) * _ball2_expect(p, v)
    assert f_rotated(p, 2) == pytest.approx(fr, abs=1e-9)


def test_cross_polytope_marginal():
    assert mean_square_marginal_ball(1, 2) == pytest.approx(1 / 6, rel=1e-14)


@pytest.mark.parametrize("n,expected", [(2, 0.25), (3, 0.2), (10, 1 / 12)])
def test_euclidean_marginal(n, expected):
    assert mean_square_marginal_ball(2, n) == pytest.approx(expected, rel=1e-14)


# --------------------------------------------------------- closed forms


@given(st.floats(1, 12), st.integers(2, 400))
def test_raw_and_reduced_routes_agree(p, n):
    fc, fr = f_canonical(p, n), f_rotated(p, n)
    scale = abs(fc) + abs(fr)
    assert abs(fc - f_canonical_raw(p, n)) <= 1e-9 * scale
    assert abs(fr - f_rotated_raw(p, n)) <= 1e-9 * scale


@given(st.floats(1, 20), st.integers(2, 1000))
def test_canonical_negative(p, n):
    assert f_canonical(p, n) < 0


@pytest.mark.parametrize("n", (2, 3, 4, 10, 50))
def test_p2_equality(n):
    fc, fr = f_canonical(2, n), f_rotated(2, n)
    assert abs(fc - fr) <= 1e-12 * abs(fc)


@given(st.floats(1, 1.99), st.integers(2, 300))
def test_ordering_below_two(p, n):
    assert f_canonical(p, n) <= f_rotated(p, n)


@given(st.floats(2.01, 20), st.integers(2, 300))
def test_ordering_above_two(p, n):
    assert f_rotated(p, n) <= f_canonical(p, n)


def test_l1_closed_form_rational():
    # at p = 1 everything is rational: check against exact fractions
    for n in range(2, 30):
        fact = math.factorial
        lead = Fraction(4 * fact(n), fact(n + 4))
        r = Fraction((n + 4) * (n + 3), (n + 2) * (n + 1))
        fc = lead * (1 - r)
        fr = lead * (6 - 1 - 2 * r) / 2
        assert f_canonical(1, n) == pytest.approx(float(fc), rel=1e-13)
        assert f_rotated(1, n) == pytest.approx(float(fr), rel=1e-12, abs=1e-14 * float(lead))


@given(st.floats(1, 10), st.integers(2, 200), st.floats(0, 0.5))
def test_f_ball_affine(p, n, t):
    sp = LpSpace(p, n)
    lhs = f_ball(sp, t)
    rhs = (1 - 2 * t) * f_ball(sp, 0.0) + 2 * t * f_ball(sp, 0.5)
    assert abs(lhs - rhs) <= 1e-14 * (abs(f_ball(sp, 0.0)) + abs(f_ball(sp, 0.5)))


def test_f_ball_endpoints_and_range():
    sp = LpSpace(3, 7)
    dec = ball_decomposition(sp)
    assert f_ball(sp, 0.0) == dec.f_canonical
    assert f_ball(sp, 0.5) == pytest.approx(dec.f_rotated, rel=1e-14)
    assert dec.slope == 2 * (dec.f_rotated - dec.f_canonical)
    with pytest.raises(RangeError):
        f_ball(sp, 0.51)
    with pytest.raises(RangeError):
        f_ball(sp, -0.01)


@pytest.mark.parametrize("n", (2, 5, 40))
def test_f_ball_constant_at_p2(n):
    sp = LpSpace(2, n)
    vals = [f_ball(sp, t) for t in (0, 0.1, 0.3, 0.5)]
    assert max(vals) - min(vals) <= 1e-15 * abs(vals[0])


@given(st.floats(1, 30))
def test_decomposition_sign_tracks_gurland(p):
    from sncp.gamma_core import gurland_F

    dec = ball_decomposition(LpSpace(p, 40))
    excess = gurland_F(1 / p) - 3
    if abs(excess) > 1e-9:
        assert np.sign(dec.f_rotated - dec.f_canonical) == np.sign(excess)


def test_excess_kurtosis_examples():
    assert excess_kurtosis_term(1) == pytest.approx(12.0, rel=1e-14)
    assert abs(excess_kurtosis_term(2)) < 1e-15
    assert excess_kurtosis_term(4) < 0


@pytest.mark.parametrize("p", (1.0, 1.5, 3.0))
def test_excess_kurtosis_moment_oracle(p):
    direct = quad_abs_moment(p, 4) - 3 * quad_abs_moment(p, 2) ** 2
    assert excess_kurtosis_term(p) == pytest.approx(direct, rel=1e-9, abs=1e-13)


def test_ratio_coefficient_examples():
    assert ratio_coefficient_diag(1, 4) == pytest.approx(2.1, rel=1e-14)
    assert ratio_coefficient_diag(2.5, 10**6) == pytest.approx(1.0, abs=1e-5)


@given(st.floats(1, 10), st.integers(4, 2000))
def test_ratio_coefficient_above_one(p, n):
    assert ratio_coefficient_diag(p, n) > 1


# -------------------------------------------------------------- n0 scan


def _mp_n0(p, n_max):
    mpmath.mp.dps = 50
    p = mpmath.mpf(p)
    F = mpmath.gamma(5 / p) * mpmath.gamma(1 / p) / mpmath.gamma(3 / p) ** 2
    for n in range(2, n_max + 1):
        R = mpmath.gamma(1 + n / p) * mpmath.gamma(1 + (n + 4) / p) / mpmath.gamma(1 + (n + 2) / p) ** 2
        if F - 1 - 2 * R > mpmath.mpf(10) ** -30:
            return n
    return None


@pytest.mark.parametrize("p,golden", [(1.0, 3), (1.5, 6), (1.9, 38)])
def test_n0_golden(p, golden):
    assert n0_threshold(p, 10_000) == golden
    assert _mp_n0(p, 60) == golden


def test_n0_large_dimension():
    assert n0_threshold(1.99, 100_000) == 398


def test_n0_l1_tie_is_not_positive():
    # p = 1, n = 2: R = 5/2 exactly, so f_rotated vanishes
    assert abs(f_rotated(1, 2)) < 1e-17
    assert f_rotated_sign_changes(1, 50) == [3]


def test_n0_absent_and_domain():
    assert n0_threshold(1.99, 50) is None
    with pytest.raises(DomainError):
        n0_threshold(2.0, 100)
