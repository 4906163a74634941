import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdchange.datagen import standard_means
from hdchange.mean_estimation import (
    LambdaGrid,
    MeanPair,
    bic_path,
    bic_score,
    default_lambda_grid,
    piecewise_means,
    refit_means,
    soft_threshold,
    theoretical_lambda,
    thresholded_means,
    tune_lambda,
)
from hdchange.model import squared_loss
from oracles import bic_direct, noiseless_series, penalised_grid_min, segment_means_loop


def _noiseless(T=40, p=20, tau0=15):
    t1, t2 = standard_means(p)
    return noiseless_series(T, tau0, t1, t2), t1, t2, tau0


# grid


def test_default_grid_excludes_endpoints():
    g = default_lambda_grid()
    assert g.count == 25
    assert g.values[0] == pytest.approx(0.5 / 26)
    assert g.values[-1] == pytest.approx(0.5 * 25 / 26)
    assert 0 < g.values.min() and g.values.max() < 0.5


@pytest.mark.parametrize("vals", [[], [0.0, 0.1], [0.2, 0.1], [0.1, 0.1]])
def test_grid_validation(vals):
    with pytest.raises(ValueError):
        LambdaGrid(vals)


# piecewise_means


def test_piecewise_means_small():
    m1, m2 = piecewise_means([[2], [4], [10]], 2)
    assert m1.tolist() == [3.0] and m2.tolist() == [10.0]


def test_piecewise_means_constant():
    m1, m2 = piecewise_means(np.full((7, 3), -1.5), 4)
    assert np.all(m1 == -1.5) and np.all(m2 == -1.5)


def test_piecewise_means_random_oracle():
    x = np.random.default_rng(94).normal(size=(9, 4))
    for got, want in zip(piecewise_means(x, 5), segment_means_loop(x, 5)):
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


@pytest.mark.parametrize("tau", [0, 3])
def test_piecewise_means_needs_interior_split(tau):
    with pytest.raises(ValueError):
        piecewise_means(np.zeros((3, 1)), tau)


# soft_threshold


def test_soft_threshold_closed_form():
    np.testing.assert_allclose(soft_threshold([1.2, -0.3, 0.5], 0.5), [0.7, 0.0, 0.0], atol=1e-15)


def test_soft_threshold_identity_at_zero():
    v = np.array([0.3, -2.0, 0.0, 1e-9])
    np.testing.assert_array_equal(soft_threshold(v, 0.0), v)


def test_soft_threshold_scalar_example_against_grid():
    assert soft_threshold([0.9], 0.4)[0] == pytest.approx(0.5, abs=1e-12)
    assert penalised_grid_min(0.9, 0.4) == pytest.approx(0.5, abs=1e-4)


def test_soft_threshold_no_negative_zero():
    out = soft_threshold([-0.1, 0.1], 0.5)
    assert not np.any(np.signbit(out))


def test_soft_threshold_rejects_negative():
    with pytest.raises(ValueError):
        soft_threshold([1.0], -0.1)


@settings(max_examples=200, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(0.001, 0.999))
def test_soft_threshold_minimises_penalised_objective(v, lam):
    assert abs(soft_threshold([v], lam)[0] - penalised_grid_min(v, lam)) <= 1e-4 + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=20), st.floats(0, 3))
def test_soft_threshold_shrinkage(v, lam):
    v = np.array(v)
    out = soft_threshold(v, lam)
    assert np.max(np.abs(out)) <= max(0.0, np.max(np.abs(v)) - lam) + 1e-12
    assert set(np.flatnonzero(out)) <= set(np.flatnonzero(v))


# thresholded_means


def test_thresholded_zero_lambda_is_raw():
    x = np.random.default_rng(1).normal(size=(10, 4))
    pair = thresholded_means(x, 4, 0.0, 0.0)
    m1, m2 = piecewise_means(x, 4)
    np.testing.assert_array_equal(pair.theta1, m1)
    np.testing.assert_array_equal(pair.theta2, m2)
    assert pair.support1.size == 4 and pair.support2.size == 4


def test_thresholded_large_lambda_is_empty():
    x = np.random.default_rng(2).normal(size=(10, 4))
    pair = thresholded_means(x, 4, 100.0, 100.0)
    assert pair.support1.size == 0 and pair.support2.size == 0
    assert np.all(pair.theta1 == 0) and np.all(pair.theta2 == 0)


def test_thresholded_noiseless_recovers_supports():
    x, t1, t2, tau0 = _noiseless()
    pair = thresholded_means(x, tau0, 0.1, 0.1)
    assert pair.support1.tolist() == list(range(5))
    assert pair.support2.tolist() == list(range(5, 10))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_support_monotone_in_lambda(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 8)) * 0.3
    sizes = [thresholded_means(x, 7, lam, lam).support_union.size for lam in np.linspace(0, 1, 21)]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


# bic


def test_bic_zero_pair():
    x = np.random.default_rng(3).normal(size=(12, 3))
    rec = bic_score(x, 5, MeanPair(np.zeros(3), np.zeros(3)))
    assert rec.score == pytest.approx(float(np.sum(x ** 2)), rel=1e-12)
    assert rec.support_size == 0


def test_bic_exact_fit_penalty_only():
    x, t1, t2, tau0 = _noiseless(T=50, p=12, tau0=20)
    rec = bic_score(x, tau0, MeanPair(t1, t2))
    assert rec.score == pytest.approx(2 * 5 * math.log(50), rel=1e-12)


def test_bic_random_oracle():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(11, 5))
    pair = thresholded_means(x, 6, 0.2, 0.2)
    assert bic_score(x, 6, pair).score == pytest.approx(bic_direct(x, 6, pair.theta1, pair.theta2), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bic_unpenalised_decomposition(seed):
    rng = np.random.default_rng(seed)
    T, p = int(rng.integers(3, 40)), int(rng.integers(1, 10))
    x = rng.normal(size=(T, p))
    tau = int(rng.integers(1, T))
    m1, m2 = piecewise_means(x, tau)
    rec = bic_score(x, tau, MeanPair(m1, m2))
    assert rec.score == pytest.approx(T * squared_loss(x, tau, m1, m2) + p * math.log(T), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bic_path_matches_direct(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(30, 6)) * 0.4 + rng.normal(size=6) * 0.5
    for rec in bic_path(x, 11):
        pair = thresholded_means(x, 11, rec.lam, rec.lam)
        direct = bic_score(x, 11, pair)
        assert rec.score == pytest.approx(direct.score, rel=1e-10, abs=1e-9)
        assert rec.support_size == direct.support_size


# tune_lambda


def test_tune_single_grid():
    x = np.random.default_rng(5).normal(size=(10, 3))
    lam, pair = tune_lambda(x, 5, LambdaGrid([0.123]))
    assert lam == 0.123 and pair.lambda1 == 0.123 == pair.lambda2


def test_tune_noiseless_default_grid_recovers_supports():
    x, t1, t2, tau0 = _noiseless(T=80, p=30, tau0=30)
    lam, pair = tune_lambda(x, tau0, default_lambda_grid())
    assert pair.support1.tolist() == list(range(5))
    assert pair.support2.tolist() == list(range(5, 10))


def test_tune_all_zero_ties_to_largest():
    grid = default_lambda_grid()
    lam, pair = tune_lambda(np.zeros((10, 4)), 5, grid)
    assert lam == grid.values[-1]
    assert pair.support_union.size == 0


# refit_means


def test_refit_full_and_empty():
    x = np.random.default_rng(6).normal(size=(10, 4))
    m1, m2 = piecewise_means(x, 3)
    full = refit_means(x, 3, range(4), range(4))
    np.testing.assert_array_equal(full.theta1, m1)
    np.testing.assert_array_equal(full.theta2, m2)
    empty = refit_means(x, 3, [], [])
    assert np.all(empty.theta1 == 0) and np.all(empty.theta2 == 0)


def test_refit_noiseless_true_supports():
    x, t1, t2, tau0 = _noiseless()
    pair = refit_means(x, tau0, np.flatnonzero(t1), np.flatnonzero(t2))
    np.testing.assert_allclose(pair.theta1, t1, atol=1e-15)
    np.testing.assert_allclose(pair.theta2, t2, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_refit_on_support_equals_raw_mean(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(15, 7))
    s1 = np.flatnonzero(rng.random(7) < 0.5)
    s2 = np.flatnonzero(rng.random(7) < 0.5)
    pair = refit_means(x, 6, s1, s2)
    m1, m2 = piecewise_means(x, 6)
    np.testing.assert_array_equal(pair.theta1[s1], m1[s1])
    np.testing.assert_array_equal(pair.theta2[s2], m2[s2])


def test_refit_rejects_bad_index():
    with pytest.raises(ValueError):
        refit_means(np.zeros((4, 2)), 2, [2], [])


# diagnostic threshold


def test_theoretical_lambda_branches():
    noise = 8 * 1.0 * math.sqrt(2 * 1 * math.log(500) / (1 * 100 * 1))
    assert theoretical_lambda(1.0, 100, 500, 1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(noise)
    assert theoretical_lambda(1e-6, 100, 500, 1.0, 2.0, 1.5, 1.0, 1.0) == pytest.approx(8 * 3.0)
    with pytest.raises(ValueError):
        theoretical_lambda(0.0, 100, 500, 1.0, 0.0, 1.0, 1.0, 1.0)
