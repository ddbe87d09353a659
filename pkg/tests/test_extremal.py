import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sncp.errors import DomainError
from sncp.extremal import (
    BOUNDS,
    _ascend,
    _retract,
    brute_force_overlap_max,
    maximize_overlap,
    stationarity_residual,
)
from sncp.pairs import OrthoPair, named_pair, random_pair


def diagonal_witness(n):
    """eta1 = (e1 - e2)/sqrt(2), eta2 = mean-removed (e1 + e2), normalized.

    Its overlap is (n - 2) / (2n)."""
    a = np.zeros(n)
    a[:2] = (1, -1)
    b = np.full(n, -2.0)
    b[:2] = n - 2
    return OrthoPair(a / np.linalg.norm(a), b / np.linalg.norm(b), "diagonal")


@pytest.mark.parametrize("n", (2, 4, 5, 10, 50, 200))
def test_sphere_maximum(n):
    r = maximize_overlap(n, "sphere", 32, 0)
    assert abs(r.best_value - 0.5) <= 1e-6
    assert r.best_value <= 0.5 + 1e-9
    assert r.stationarity_residual < 1e-8
    assert not r.best_pair.violations()


def test_sphere_optimum_shape():
    r = maximize_overlap(5, "sphere", 32, 0)
    mags = np.sort(np.abs(np.concatenate([r.best_pair.eta1, r.best_pair.eta2])))
    # supported on two coordinates with magnitude 1/sqrt(2)
    np.testing.assert_allclose(mags[-4:], 1 / math.sqrt(2), atol=1e-5)
    np.testing.assert_allclose(mags[:-4], 0, atol=1e-5)


def test_diagonal_n4_maximum():
    r = maximize_overlap(4, "diagonal", 32, 0)
    assert abs(r.best_value - 0.25) <= 1e-6
    assert r.best_value <= 0.25 + 1e-9
    xi = named_pair("xi", 4, "diagonal")
    assert xi.overlap == pytest.approx(0.25, abs=1e-15)


def test_diagonal_n4_maximizers_form_a_family():
    # in the 3-dimensional hyperplane the value 1/4 is attained along a
    # curve, not only at pairs with four equal magnitudes
    c = math.cos(0.3)
    s = math.sin(0.3)
    xi = named_pair("xi", 4, "diagonal")
    u = np.array([1, 1, -1, -1]) / 2.0
    pr = OrthoPair(c * xi.eta1 + s * u, xi.eta2, "diagonal")
    assert pr.overlap == pytest.approx(0.25, abs=1e-15)
    assert len(np.unique(np.round(np.abs(pr.eta1), 8))) > 1


@pytest.mark.parametrize("n", (5, 6, 10, 50, 200))
def test_diagonal_maximum_is_witness_value(n):
    # for n >= 5 the maximum over mean-zero orthonormal pairs exceeds 1/4
    w = diagonal_witness(n)
    assert w.overlap == pytest.approx((n - 2) / (2 * n), rel=1e-14)
    assert stationarity_residual(w) < 1e-12
    r = maximize_overlap(n, "diagonal", 32, 0)
    assert r.best_value == pytest.approx((n - 2) / (2 * n), abs=1e-9)
    assert r.stationarity_residual < 1e-8


@pytest.mark.parametrize("n,mode,expected", [
    (4, "sphere", 0.5), (5, "sphere", 0.5), (6, "sphere", 0.5),
    (4, "diagonal", 0.25), (5, "diagonal", 0.3), (6, "diagonal", 1 / 3),
])
def test_brute_force(n, mode, expected):
    assert brute_force_overlap_max(n, mode, 2_000) == pytest.approx(expected, abs=1e-4)


def test_brute_force_limits():
    with pytest.raises(DomainError):
        brute_force_overlap_max(7, "sphere")
    with pytest.raises(DomainError):
        maximize_overlap(3, "diagonal", 1, 0)
    with pytest.raises(DomainError):
        maximize_overlap(5, "sphere", 0, 0)


def test_stationarity_examples():
    assert stationarity_residual(named_pair("xi", 4, "diagonal")) < 1e-10
    assert stationarity_residual(named_pair("xi", 7)) < 1e-10
    assert stationarity_residual(named_pair("xi_bar", 6)) < 1e-10
    rnd = random_pair(10, "diagonal", np.random.default_rng(1))
    assert stationarity_residual(rnd) > 1e-6


def test_stationarity_symmetric_images():
    pr = diagonal_witness(7)
    base = stationarity_residual(pr)
    for a, b in ((pr.eta2, pr.eta1), (-pr.eta1, pr.eta2), (pr.eta1, -pr.eta2)):
        assert stationarity_residual(OrthoPair(a, b, "diagonal")) == pytest.approx(base, abs=1e-15)


@given(st.integers(4, 40), st.sampled_from(["sphere", "diagonal"]), st.integers(0, 2**32 - 1))
def test_retraction_is_feasible(n, mode, seed):
    rng = np.random.default_rng(seed)
    x = _retract(rng.standard_normal((n, 2)), mode)
    assert not OrthoPair(x[:, 0], x[:, 1], mode).violations()


@given(st.integers(4, 30), st.sampled_from(["sphere", "diagonal"]), st.integers(0, 2**32 - 1))
def test_ascent_stays_feasible_and_below_sphere_bound(n, mode, seed):
    start = random_pair(n, mode, np.random.default_rng(seed)).matrix()
    x, _ = _ascend(start, mode, 200)
    pr = OrthoPair(x[:, 0], x[:, 1], mode)
    assert not pr.violations()
    assert pr.overlap <= BOUNDS["sphere"] + 1e-9


def test_deterministic_selection():
    a = maximize_overlap(10, "diagonal", 8, 3)
    b = maximize_overlap(10, "diagonal", 8, 3)
    np.testing.assert_array_equal(a.best_pair.eta1, b.best_pair.eta1)
    assert a.to_dict()["bound"] == 0.25
