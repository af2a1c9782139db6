import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pwrc import PWRCScorer, ScoreNormalizer, kendall_tau
from pwrc.exceptions import DegenerateDataError

Y = np.array([5.0, 10.0, 20.0, 35.0, 55.0])
SD = np.array([4.0, 5.0, 6.0, 5.0, 3.0])


def test_normalizer_round_trip():
    norm = ScoreNormalizer().fit(Y)
    np.testing.assert_allclose(norm.transform(Y), [0, 10, 30, 60, 100])
    np.testing.assert_allclose(norm.transform_std(SD), SD * 2)
    dm = ScoreNormalizer(polarity="dmos").fit(Y)
    np.testing.assert_allclose(dm.fit_transform(Y), [100, 90, 70, 40, 0])


def test_get_params_and_clone():
    est = PWRCScorer(c1="auto", weights="uniform", n_samples=51)
    params = est.get_params()
    assert params["c1"] == "auto" and params["n_samples"] == 51
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(c1=0.3)
    assert est.c1 == 0.3 and twin.c1 == "auto"


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        PWRCScorer().score(Y, Y)


def test_fit_attributes():
    est = PWRCScorer().fit(Y, SD)
    assert est.omega_ == pytest.approx(0.02)
    assert (est.t_min_, est.t_max_) == pytest.approx((12.0, 24.0))
    auto = PWRCScorer(c1="auto").fit(Y, SD)
    assert auto.config_.c1 == pytest.approx(3 / (2 * np.mean(SD * 2)))


def test_tau_reduction_via_estimator():
    est = PWRCScorer(activation="constant", weights="uniform").fit(Y, SD)
    pred = np.array([1.0, 2.0, 3.0, 5.0, 4.0])
    assert est.pwrc(Y, pred) == pytest.approx(kendall_tau([1, 2, 3, 4, 5], [1, 2, 3, 5, 4]))


def test_score_prefers_better_prediction():
    est = PWRCScorer().fit(Y, SD)
    good = Y + np.array([0.1, -0.1, 0.2, 0.0, 0.3])
    top_swapped = np.array([5.0, 10.0, 20.0, 56.0, 34.0])
    assert est.score(Y, good) > est.score(Y, top_swapped)


def test_lower_is_better_predictions():
    up = PWRCScorer().fit(Y, SD)
    down = PWRCScorer(prediction_polarity="lower").fit(Y, SD)
    assert down.score(Y, -Y) == pytest.approx(up.score(Y, Y))


def test_report_columns():
    rep = PWRCScorer().fit(Y, SD).report(Y, Y)
    assert set(rep) == {"SRCC", "KRCC", "PWRC", "AUCca", "dMOS"}
    assert rep["SRCC"] == pytest.approx(1.0)
    assert rep["dMOS"] > 0


def test_zero_width_range():
    est = PWRCScorer().fit(Y)
    with pytest.raises(DegenerateDataError):
        est.score(Y, Y)
    est = PWRCScorer(t_min=0, t_max=20).fit(Y)
    assert est.score(Y, Y) > 0
