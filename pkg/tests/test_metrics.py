import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skillirt.metrics import auc, calibration, log_loss
from skillirt.rng import SplitMix64


def brute_auc(labels, scores):
    pos = [s for y, s in zip(labels, scores) if y == 1]
    neg = [s for y, s in zip(labels, scores) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return wins / (len(pos) * len(neg))


def test_auc_perfect():
    assert auc([1, 0], [0.9, 0.1]) == 1.0


def test_auc_worked_example():
    assert brute_auc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2]) == 0.75
    assert auc([1, 1, 0, 0], [0.9, 0.4, 0.6, 0.2]) == 0.75


def test_auc_all_ties():
    assert auc([1, 0, 1, 0, 0], [0.3] * 5) == 0.5


def test_auc_single_class():
    with pytest.raises(ValueError, match="undefined"):
        auc([1, 1], [0.2, 0.3])


def test_auc_length_mismatch():
    with pytest.raises(ValueError):
        auc([1, 0], [0.1])


@pytest.mark.parametrize("seed", range(25))
def test_auc_equals_pairwise_definition(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 201))
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    scores = rng.integers(0, 8, n) / 8.0  # coarse grid forces ties
    assert auc(labels, scores) == brute_auc(labels, scores)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(-20, 20)), min_size=2, max_size=60))
def test_auc_increasing_transform_invariance(pairs):
    labels = [y for y, _ in pairs]
    if len(set(labels)) < 2:
        return
    scores = np.array([s for _, s in pairs], dtype=float)
    assert auc(labels, scores) == auc(labels, np.exp(scores) * 3 + 1)
    assert auc(labels, scores) == auc(labels, 1 / (1 + np.exp(-scores / 4)))


def test_auc_flip_symmetry(rng):
    labels = rng.integers(0, 2, 100)
    scores = rng.permutation(100).astype(float)
    assert auc(labels, scores) + auc(1 - labels, scores) == pytest.approx(1.0, abs=1e-15)


def test_log_loss_constant_half(rng):
    labels = rng.integers(0, 2, 37)
    assert abs(log_loss(labels, np.full(37, 0.5)) - math.log(2)) <= 1e-12


def test_log_loss_clamped():
    value = log_loss([1], [1.0])
    assert 0 < value <= 2.8e-11
    assert math.isfinite(log_loss([0], [1.0]))


def test_log_loss_arithmetic():
    # (-ln 0.8 - ln 0.6) / 2 = (0.22314355 + 0.51082562) / 2
    assert log_loss([1, 0], [0.8, 0.4]) == pytest.approx((-math.log(0.8) - math.log(0.6)) / 2, rel=1e-15)
    assert log_loss([1, 0], [0.8, 0.4]) == pytest.approx(0.366985, abs=1e-6)


def test_log_loss_errors():
    with pytest.raises(ValueError):
        log_loss([1, 0], [0.5])
    with pytest.raises(ValueError):
        log_loss([1], [1.5])


def test_log_loss_minimised_at_empirical_mean(rng):
    labels = rng.integers(0, 2, 300)
    grid = np.linspace(0.001, 0.999, 999)
    losses = [log_loss(labels, np.full(300, p)) for p in grid]
    assert grid[int(np.argmin(losses))] == pytest.approx(labels.mean(), abs=1e-3)


def test_calibration_constant_predictions():
    labels = np.array([1, 0, 0, 1, 1, 0, 1, 0, 0, 1])
    table = calibration(labels, np.full(10, 0.5))
    assert np.all(table.mean_predicted == 0.5)
    assert np.sum(table.observed_fraction * table.count) / 10 == 0.5


def test_calibration_sharp_predictor(rng):
    labels = rng.integers(0, 2, 100)
    table = calibration(labels, labels.astype(float))
    n_neg = int((labels == 0).sum())
    full_neg_bins = n_neg // 10
    assert np.all(table.observed_fraction[:full_neg_bins] == 0)
    assert table.observed_fraction[-1] == 1


def test_calibration_partition(rng):
    probs = rng.random(1003)
    labels = rng.integers(0, 2, 1003)
    table = calibration(labels, probs)
    assert table.count.sum() == 1003
    assert table.count.max() - table.count.min() <= 1
    assert np.all(np.diff(table.mean_predicted) >= 0)


def test_calibration_ties_keep_input_order():
    probs = np.array([0.5, 0.5, 0.5, 0.5])
    table = calibration([1, 1, 0, 0], probs, num_bins=2)
    assert table.observed_fraction.tolist() == [1.0, 0.0]


def test_calibration_monte_carlo():
    # 100 records per bin: one binomial standard error is up to 0.05, so
    # single bins are checked at 4 standard errors and pooled bins at 0.05.
    pooled_obs = np.zeros(10)
    pooled_pred = np.zeros(10)
    for seed in range(10):
        rng = SplitMix64(seed)
        probs = rng.random(1000)
        labels = (rng.random(1000) < probs).astype(int)
        table = calibration(labels, probs)
        se = np.sqrt(table.mean_predicted * (1 - table.mean_predicted) / table.count)
        assert np.all(np.abs(table.observed_fraction - table.mean_predicted) <= 4 * se + 1e-3)
        pooled_obs += table.observed_fraction / 10
        pooled_pred += table.mean_predicted / 10
    assert np.max(np.abs(pooled_obs - pooled_pred)) <= 0.05


def test_calibration_errors():
    with pytest.raises(ValueError):
        calibration([1, 0], [0.2, 0.3], num_bins=0)
    with pytest.raises(ValueError):
        calibration([1, 0], [0.2, 0.3], num_bins=3)


def test_calibration_csv():
    buf = io.StringIO()
    calibration([0, 1, 0, 1], [0.1, 0.2, 0.3, 0.4], num_bins=2).to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "bin_index,count,mean_predicted,observed_fraction"
    assert lines[1].startswith("0,2,")
