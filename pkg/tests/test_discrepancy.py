import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from imputeval.discrepancy import (KL_EPS, feature_stats, kl_divergence, ks_statistic,
                                   sample_stats, wasserstein2_1d, wasserstein2_columns)

from oracles import ks_enumerate, w2_assignment

small = st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=8)


# ---------------------------------------------------------------- W2

def test_w2_examples():
    assert wasserstein2_1d([0, 1], [0, 1]) == 0.0
    assert wasserstein2_1d([0, 0], [1, 1]) == pytest.approx(1.0, abs=1e-15)
    assert wasserstein2_1d([0, 2], [1]) == pytest.approx(1.0, abs=1e-15)


def test_w2_examples_match_oracle():
    for a, b in [([0, 0], [1, 1]), ([0, 2], [1]), ([0, 1, 5], [2, 2]), ([3], [1, 4, 9, 9])]:
        assert wasserstein2_1d(a, b) == pytest.approx(w2_assignment(a, b), abs=1e-12)


def test_w2_empty_and_nonfinite():
    with pytest.raises(ValueError):
        wasserstein2_1d([], [1.0])
    with pytest.raises(ValueError):
        wasserstein2_1d([np.inf], [1.0])


@settings(max_examples=300, deadline=None)
@given(small, small)
def test_w2_matches_assignment_oracle(a, b):
    assert wasserstein2_1d(a, b) == pytest.approx(w2_assignment(a, b), abs=1e-9, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(small, small)
def test_w2_symmetric(a, b):
    assert wasserstein2_1d(a, b) == pytest.approx(wasserstein2_1d(b, a), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(small, small, small)
def test_w2_triangle(a, b, c):
    assert wasserstein2_1d(a, c) <= wasserstein2_1d(a, b) + wasserstein2_1d(b, c) + 1e-9


@settings(max_examples=200, deadline=None)
@given(small, small, st.floats(-10, 10), st.floats(-50, 50))
def test_w2_scale_and_shift(a, b, c, shift):
    a, b = np.array(a), np.array(b)
    base = wasserstein2_1d(a, b)
    assert wasserstein2_1d(c * a, c * b) == pytest.approx(abs(c) * base, abs=1e-9, rel=1e-9)
    assert wasserstein2_1d(a + shift, b + shift) == pytest.approx(base, abs=1e-9, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(small)
def test_w2_identity(a):
    assert wasserstein2_1d(a, list(reversed(a))) == 0.0


def test_w2_columns_matches_scalar(rng):
    a = rng.normal(size=(13, 4))
    b = rng.normal(size=(9, 4))
    cols = wasserstein2_columns(a, b)
    for k in range(4):
        assert cols[k] == pytest.approx(wasserstein2_1d(a[:, k], b[:, k]), abs=1e-15)


# ---------------------------------------------------------------- KS

def test_ks_examples():
    assert ks_statistic([1, 2, 3], [3, 1, 2]) == 0.0
    assert ks_statistic([0, 1], [2, 3]) == 1.0
    assert ks_statistic([1, 2, 3], [1, 2, 4]) == pytest.approx(1 / 3)
    assert ks_enumerate([1, 2, 3], [1, 2, 4]) == pytest.approx(1 / 3)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=15),
       st.lists(st.integers(-5, 5), min_size=1, max_size=15))
def test_ks_matches_enumeration_and_scipy(a, b):
    ours = ks_statistic(a, b)
    assert ours == pytest.approx(ks_enumerate(a, b), abs=1e-12)
    with np.errstate(divide="ignore"):  # scipy's p-value, not the statistic
        ref = ks_2samp(a, b, method="asymp").statistic
    assert ours == pytest.approx(ref, abs=1e-12)
    assert 0.0 <= ours <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=12),
       st.lists(st.integers(-50, 50), min_size=1, max_size=12))
def test_ks_monotone_transform_invariant(a, b):
    f = lambda x: np.asarray(x, float) ** 3 + 2.0 ** np.asarray(x, float)  # strictly increasing, exact
    assert ks_statistic(f(a), f(b)) == pytest.approx(ks_statistic(a, b), abs=1e-12)


# ---------------------------------------------------------------- KL

def test_kl_identical_is_zero(rng):
    x = rng.normal(size=100)
    assert kl_divergence(x, x.copy()) == 0.0


def test_kl_disjoint_two_bins():
    n = 40
    got = kl_divergence(np.zeros(n), np.ones(n), bins=2)
    eps = KL_EPS
    # p = (1+e, e)/(1+2e), q = (e, 1+e)/(1+2e)
    expected = math.log((1 + eps) / eps) / (1 + 2 * eps)
    assert got == pytest.approx(expected, rel=1e-9)
    assert got > 10


def test_kl_asymmetric():
    a = np.array([0.0] * 9 + [1.0])
    b = np.array([0.0] * 5 + [1.0] * 5)
    forward, backward = kl_divergence(a, b, bins=2), kl_divergence(b, a, bins=2)
    # direct evaluation: 0.9 log(0.9/0.5) + 0.1 log(0.1/0.5) vs 0.5 log(0.5/0.9) + 0.5 log(0.5/0.1)
    assert forward == pytest.approx(0.9 * math.log(1.8) + 0.1 * math.log(0.2), rel=1e-6)
    assert backward == pytest.approx(0.5 * math.log(5 / 9) + 0.5 * math.log(5), rel=1e-6)
    assert forward != pytest.approx(backward)


def test_kl_degenerate_range_and_errors():
    assert kl_divergence([2.0, 2.0], [2.0]) == 0.0
    with pytest.raises(ValueError):
        kl_divergence([], [1.0])
    with pytest.raises(ValueError):
        kl_divergence([1.0], [2.0], bins=1)


@settings(max_examples=200, deadline=None)
@given(small, small, st.integers(2, 30))
def test_kl_nonnegative(a, b, bins):
    assert kl_divergence(a, b, bins) >= 0.0


# ---------------------------------------------------------------- class A

def test_sample_stats_identity():
    t = np.array([[1.0, 2.0], [3.0, 5.0]])
    s = sample_stats(t, t, np.ones_like(t, bool))
    assert (s.rmse, s.mae, s.r2) == (0.0, 0.0, 1.0)


def test_sample_stats_hand_values():
    truth = np.array([[1.0], [3.0]])
    mask = np.ones((2, 1), bool)
    s = sample_stats(truth, np.array([[2.0], [2.0]]), mask)
    assert s.rmse == pytest.approx(1.0) and s.mae == pytest.approx(1.0) and s.r2 == pytest.approx(0.0)
    s = sample_stats(truth, np.array([[3.0], [1.0]]), mask)
    assert s.r2 == pytest.approx(-3.0)


def test_sample_stats_only_masked_cells():
    truth = np.array([[1.0, 10.0], [3.0, 20.0]])
    imp = np.array([[2.0, 99.0], [2.0, -99.0]])
    mask = np.array([[True, False], [True, False]])
    assert sample_stats(truth, imp, mask).rmse == pytest.approx(1.0)


def test_sample_stats_errors_and_sentinel():
    t = np.ones((2, 2))
    with pytest.raises(ValueError):
        sample_stats(t, t, np.zeros((2, 2), bool))
    with pytest.raises(ValueError):
        sample_stats(t, np.ones((2, 3)), np.ones((2, 2), bool))
    assert sample_stats(t, t + 1, np.ones((2, 2), bool)).r2 is None


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=20))
def test_rmse_at_least_mae(pairs):
    arr = np.array(pairs)
    s = sample_stats(arr[:, :1], arr[:, 1:], np.ones((len(arr), 1), bool))
    assert s.rmse >= s.mae - 1e-12


# ---------------------------------------------------------------- class B

def test_feature_stats_identity(rng):
    t = rng.normal(size=(30, 4))
    mask = rng.random((30, 4)) < 0.3
    fs = feature_stats(t, t, mask)
    for m in ("kl", "ks", "w2"):
        assert fs.summary[m] == {"min": 0.0, "median": 0.0, "max": 0.0}


def test_feature_stats_mean_imputation_detected(rng):
    t = rng.normal(size=(40, 2))
    mask = np.zeros((40, 2), bool)
    mask[:10, 0] = True
    imp = t.copy()
    imp[mask] = t[~mask[:, 0], 0].mean()
    fs = feature_stats(t, imp, mask)
    assert list(fs.per_feature) == [0]  # column 1 has no masked cells
    assert fs.per_feature[0]["ks"] > 0 and fs.per_feature[0]["w2"] > 0
    s = fs.summary["w2"]
    assert s["min"] == s["median"] == s["max"]


def test_feature_stats_lower_median():
    t = np.zeros((3, 4))
    imp = np.zeros((3, 4))
    imp[:, 0], imp[:, 1], imp[:, 2], imp[:, 3] = 1.0, 2.0, 3.0, 4.0
    fs = feature_stats(t, imp, np.ones((3, 4), bool))
    assert fs.summary["w2"] == {"min": 1.0, "median": 2.0, "max": 4.0}


def test_feature_stats_requires_masked_cells():
    with pytest.raises(ValueError):
        feature_stats(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2), bool))
