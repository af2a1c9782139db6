import math
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

import oracles
from pwrc.classic import kendall_tau
from pwrc.core import PredictionSet, ScoreSet, ground_truth_pairing
from pwrc.exceptions import DegenerateDataError, TiedRanksError, ValidationError
from pwrc.indicator import (
    ActivationConfig,
    SaStCurve,
    activation,
    auc_ca,
    derive_c1,
    detection,
    importance_weights,
    pwrc,
    sa_st_curve,
    threshold_grid,
    threshold_range,
    uniform_weights,
)

X5 = np.array([0.0, 10.0, 30.0, 60.0, 100.0])
P5 = np.arange(1, 6)
CONST = ActivationConfig.constant()


def test_derive_c1_default():
    assert derive_c1(8.577) == pytest.approx(0.175, abs=5e-4)
    with pytest.raises(ValidationError):
        derive_c1(0.0)


def test_activation_anchor_points():
    assert activation(10, 30, 20) == 0.5
    sigma = 8.577
    cfg = ActivationConfig(derive_c1(sigma))
    assert activation(0, 20 + 2 * sigma, 20, cfg) == pytest.approx(0.95, abs=5e-3)
    assert activation(0, 1, 50, CONST) == 1.0


def test_detection():
    assert detection(1, 2, 1, 2) == 1
    assert detection(1, 2, 2, 1) == -1
    with pytest.raises(TiedRanksError):
        detection(1, 1, 1, 2)


def test_importance_weights_example():
    w = importance_weights(P5, [1, 2, 3, 5, 4])
    assert w.d_term[3, 4] == pytest.approx(0.25)
    assert w.l_term[3, 4] == pytest.approx(1.0)
    assert w.w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diag(w.w) == 0)
    assert np.allclose(w.w, w.w.T)


def test_uniform_weights_sum():
    for n in range(2, 9):
        w = uniform_weights(n)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert w[0, 1] + w[1, 0] == pytest.approx(2 / (n * n - n))


def test_weights_grow_with_level():
    # with q = p all deviations vanish, so only the level term moves
    w = importance_weights(P5, P5).w
    assert w[0, 1] < w[1, 2] < w[2, 3] < w[3, 4]


def test_weights_grow_with_deviation():
    a = importance_weights(P5, [2, 1, 3, 4, 5]).w[0, 2]
    b = importance_weights(P5, [3, 2, 1, 4, 5]).w[0, 2]
    # raw weight of the (1, 3) pair grows with |p - q|; compare unnormalized by ratio to a fixed pair
    ra = a / importance_weights(P5, [2, 1, 3, 4, 5]).w[3, 4]
    rb = b / importance_weights(P5, [3, 2, 1, 4, 5]).w[3, 4]
    assert rb > ra


def test_pwrc_perfect_and_reversed():
    assert pwrc(X5, P5, P5) > 0.99 * pwrc(X5, P5, P5, config=CONST)
    assert pwrc(X5, P5, P5, config=CONST) == pytest.approx(1.0)
    assert pwrc(X5, P5, P5[::-1], config=CONST) == pytest.approx(-1.0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_pwrc_matches_literal_loop(n):
    x = np.cumsum(np.arange(1, n + 1) ** 1.5)
    x = (x - x[0]) / (x[-1] - x[0]) * 100
    p = np.arange(1, n + 1)
    for q in permutations(range(1, n + 1)):
        for t in (0.0, 12.5, 60.0):
            got = pwrc(x, p, q, t)
            ref = oracles.pwrc(x.tolist(), list(q), t, c1=0.175)
            assert got == pytest.approx(ref, abs=1e-12)
        assert pwrc(x, p, q, config=CONST) == pytest.approx(oracles.pwrc(x.tolist(), list(q)), abs=1e-12)


@pytest.mark.parametrize("n", [5, 6])
def test_tau_reduction(n):
    x = np.linspace(0, 100, n)
    p = np.arange(1, n + 1)
    for q in permutations(range(1, n + 1)):
        assert pwrc(x, p, q, config=CONST, weights="uniform") == pytest.approx(kendall_tau(p, q), abs=1e-12)


def test_pwrc_rejects_noncanonical_and_negative_threshold():
    with pytest.raises(ValidationError, match="canonical"):
        pwrc(X5, [2, 1, 3, 4, 5], P5)
    with pytest.raises(TiedRanksError):
        pwrc(X5, P5, [1, 1, 3, 4, 5])
    with pytest.raises(ValidationError):
        pwrc(X5, P5, P5, threshold=-1)
    with pytest.raises(ValidationError):
        pwrc(X5[:4], P5, P5)


def test_symmetry_not_guaranteed():
    """Swapping the roles of prediction and truth generally changes S."""
    x = ScoreSet.from_arrays([5, 10, 20, 35, 55])
    y = PredictionSet.from_arrays([12, 4, 50, 20, 33], ids=x.ids)
    fwd = ground_truth_pairing(x, y)
    y_as_truth = ScoreSet.from_arrays(y.values, ids=x.ids)
    bwd = ground_truth_pairing(y_as_truth, PredictionSet.from_arrays(x.scores, ids=x.ids))
    s_xy = pwrc(fwd.xhat, fwd.p, fwd.q, 10.0)
    s_yx = pwrc(bwd.xhat, bwd.p, bwd.q, 10.0)
    assert abs(s_xy - s_yx) > 1e-3


def test_curve_monotone_for_perfect_ranking():
    curve = sa_st_curve(X5, P5, P5, threshold_grid(0, 100, 20))
    assert np.all(np.diff(curve.accuracies) < 0)
    assert np.all(curve.accuracies > 0)


def test_curve_constant_activation_is_flat():
    curve = sa_st_curve(X5, P5, [2, 1, 3, 4, 5], threshold_grid(0, 100, 20), CONST)
    assert np.ptp(curve.accuracies) == 0


def test_curve_validation():
    with pytest.raises(ValidationError):
        sa_st_curve(X5, P5, P5, [])
    with pytest.raises(ValidationError):
        sa_st_curve(X5, P5, P5, [5.0])
    with pytest.raises(ValidationError):
        sa_st_curve(X5, P5, P5, [0, -1])
    with pytest.raises(ValidationError, match="increasing"):
        SaStCurve([0, 2, 1], [0, 0, 0], 0.175)


def test_auc_constant_and_linear_closed_form():
    t = np.linspace(0, 50, 101)
    const = SaStCurve(t, np.full(101, 0.7), 0.175)
    assert auc_ca(const, 0, 50) == pytest.approx(35.0, abs=1e-9)
    lin = SaStCurve(t, 1 - t / 50, 0.175)
    assert auc_ca(lin, 0, 50) == pytest.approx(25.0, abs=1e-9)
    # interior bounds between samples are interpolated exactly for linear data
    assert auc_ca(lin, 3.3, 41.7) == pytest.approx((41.7 - 3.3) - (41.7**2 - 3.3**2) / 100, abs=1e-9)


def test_auc_against_quad_on_real_curve():
    q = [1, 3, 2, 5, 4]
    t = np.linspace(10, 30, 101)
    curve = sa_st_curve(X5, P5, q, t)
    ref, _ = integrate.quad(lambda v: oracles.pwrc(X5.tolist(), q, v, c1=0.175), 10, 30)
    assert auc_ca(curve, 10, 30) == pytest.approx(ref, abs=1e-3)


def test_auc_errors():
    curve = SaStCurve([0, 1, 2], [1, 1, 1], 0.175)
    with pytest.raises(DegenerateDataError):
        auc_ca(curve, 1, 1)
    with pytest.raises(ValidationError, match="inverted"):
        auc_ca(curve, 2, 1)
    with pytest.raises(ValidationError, match="exceeds"):
        auc_ca(curve, 0, 3)


def test_threshold_range():
    assert threshold_range([3.0, 5.0, 4.0]) == (6.0, 10.0)
    assert threshold_range([4.0, 4.0]) == (8.0, 8.0)
    with pytest.raises(ValidationError):
        threshold_range([])
    with pytest.raises(ValidationError):
        threshold_range([-1.0])


def test_top_swap_costs_more_than_bottom_swap():
    for n in range(3, 9):
        x = np.linspace(0, 100, n)
        p = np.arange(1, n + 1)
        base = pwrc(x, p, p)
        top = p.copy()
        top[[-1, -2]] = top[[-2, -1]]
        bottom = p.copy()
        bottom[[0, 1]] = bottom[[1, 0]]
        assert base - pwrc(x, p, top) > base - pwrc(x, p, bottom)


score_sets = st.integers(2, 7).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0, 100, allow_nan=False), min_size=n, max_size=n, unique=True),
        st.permutations(list(range(1, n + 1))),
    )
)


@settings(max_examples=200)
@given(score_sets, st.floats(0, 100), st.sampled_from([0.05, 0.175, 1.0]))
def test_bounded(data, threshold, c1):
    xs, q = data
    x = np.sort(np.array(xs))
    p = np.arange(1, len(q) + 1)
    v = pwrc(x, p, q, threshold, ActivationConfig(c1))
    assert -1 - 1e-12 <= v <= 1 + 1e-12


@settings(max_examples=100)
@given(score_sets)
def test_higher_threshold_never_raises_perfect_score(data):
    xs, q = data
    x = np.sort(np.array(xs))
    p = np.arange(1, len(q) + 1)
    curve = sa_st_curve(x, p, p, [0, 20, 40, 80])
    assert np.all(np.diff(curve.accuracies) <= 1e-15)


def test_sigmoid_oracle_agrees():
    cfg = ActivationConfig(0.3)
    for gap in (0.0, 3.0, 17.0, 90.0):
        assert activation(0, gap, 10, cfg) == pytest.approx(oracles.sigmoid(0.3 * (gap - 10)), abs=1e-15)
    assert math.isclose(activation(0, 1000, 0, cfg), 1.0)
