import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fiscalipw.errors import ConvergenceError, EmptyCellError
from fiscalipw.propensity import (
    check_no_empty_cell, clip_probs, fit_gps, propensity_from_probs)
from fiscalipw.regress import softmax
from fiscalipw.treatment import TreatmentAssignment


def draw_logit(rng, n, B):
    x = rng.standard_normal((n, B.shape[1] - 1))
    scores = np.column_stack([np.zeros(n), np.column_stack([np.ones(n), x]) @ B.T])
    P = np.exp(scores - scores.max(axis=1, keepdims=True))
    P /= P.sum(axis=1, keepdims=True)
    u = rng.random(n)
    q = (u[:, None] > np.cumsum(P, axis=1)).sum(axis=1) + 1
    return x, np.minimum(q, B.shape[0] + 1), P


def test_uninformative_covariates_weights_four(rng):
    # every covariate value appears once in each class, so x carries no information
    x = np.repeat(rng.standard_normal((100, 2)), 4, axis=0)
    q = np.tile([1, 2, 3, 4], 100)
    fit = fit_gps(x, TreatmentAssignment.from_labels(q, 4))
    np.testing.assert_allclose(fit.weights, 4.0, rtol=1e-8)
    assert fit.clipped_count == 0


def test_noisy_covariates_weights_near_four(rng):
    q = np.tile([1, 2, 3, 4], 1000)
    fit = fit_gps(rng.standard_normal((4000, 2)), TreatmentAssignment.from_labels(q, 4))
    assert np.quantile(np.abs(fit.weights - 4), 0.95) < 0.5
    assert fit.weights.mean() == pytest.approx(4.0, rel=0.01)


def test_balanced_binary_weights_two(rng):
    q = np.repeat([1, 2], 1000)
    x = rng.standard_normal((2000, 1))  # noise only; the predictive variable is withheld
    fit = fit_gps(x, TreatmentAssignment.from_labels(q, 2), e_min=0.05)
    assert np.abs(fit.weights - 2).max() < 0.2


def test_recovers_known_logit():
    rng = np.random.default_rng(2000)
    B = np.array([[0.2, 0.8, -0.5], [-0.3, -0.4, 1.0], [0.1, 1.2, 0.6]])
    x, q, P = draw_logit(rng, 5000, B)
    fit = fit_gps(x, TreatmentAssignment.from_labels(q, 4))
    assert np.abs(fit.raw_probs - P).max() < 0.03


def test_intercept_score_equations(rng):
    B = np.array([[0.5, 1.0], [-0.5, 2.0], [0.0, -1.0]])
    x, q, _ = draw_logit(rng, 300, B)
    a = TreatmentAssignment.from_labels(q, 4)
    fit = fit_gps(x, a)
    np.testing.assert_allclose((a.dummies - fit.raw_probs).sum(axis=0), 0, atol=1e-8)


def test_horvitz_thompson_balance():
    rng = np.random.default_rng(77)
    B = np.array([[0.3, 0.6, -0.2], [0.1, -0.8, 0.4], [-0.2, 0.9, 0.9]])
    x, q, P = draw_logit(rng, 4000, B)
    a = TreatmentAssignment.from_labels(q, 4)
    ratio = a.dummies / P
    mean = ratio.mean(axis=0)
    half = 3 * np.sqrt(ratio.var(axis=0, ddof=1) / len(q))
    assert np.all(np.abs(mean - 1) <= half)


def test_weights_are_inverse_own_probability(rng):
    B = np.array([[0.2, 1.0], [0.1, -1.0], [0.0, 2.0]])
    x, q, _ = draw_logit(rng, 500, B)
    fit = fit_gps(x, TreatmentAssignment.from_labels(q, 4), e_min=0.05)
    own = fit.probs[np.arange(500), q - 1]
    np.testing.assert_array_equal(fit.weights, 1 / own)
    assert fit.weights.min() >= 1 and fit.weights.max() <= 1 / 0.05 + 1e-12


def test_empty_class_rejected(rng):
    a = TreatmentAssignment.from_labels(np.tile([1, 2, 4], 20), 4)
    with pytest.raises(EmptyCellError, match=r"\[3\]"):
        fit_gps(rng.standard_normal((60, 2)), a)


@pytest.mark.parametrize("e_min", [0.25, 0.3, 0.0, -0.01])
def test_floor_bounds(rng, e_min):
    a = TreatmentAssignment.from_labels(np.tile([1, 2, 3, 4], 10), 4)
    with pytest.raises(ValueError):
        fit_gps(rng.standard_normal((40, 1)), a, e_min=e_min)


def test_nonconvergence_surfaces(rng, monkeypatch):
    import fiscalipw.regress as regress
    original = regress.mnl_fit
    monkeypatch.setattr("fiscalipw.propensity.mnl_fit",
                        lambda X, q, J: original(X, q, J, max_iter=1))
    x, q, _ = draw_logit(rng, 300, np.array([[0.5, 2.0], [-0.5, 1.0], [0.0, -2.0]]))
    with pytest.raises(ConvergenceError):
        fit_gps(x, TreatmentAssignment.from_labels(q, 4))


def test_clip_example():
    P, count = clip_probs([[0.001, 0.299, 0.3, 0.4]], 0.01)
    assert count == 1
    assert P[0, 0] == 0.01
    np.testing.assert_allclose(P[0, 1:], np.array([0.299, 0.3, 0.4]) * 0.99 / 0.999, rtol=1e-15)


def test_clip_cascades():
    # raising the first entry pushes the second under the floor
    P, count = clip_probs([[0.0, 0.0101, 0.4899, 0.5]], 0.05)
    assert count == 2
    np.testing.assert_allclose(P[0, :2], 0.05)
    assert P.min() >= 0.05 and P.sum() == pytest.approx(1, abs=1e-12)


prob_rows = arrays(np.float64, st.tuples(st.integers(1, 25), st.just(4)),
                   elements=st.floats(-30, 30)).map(softmax)


@settings(max_examples=300)
@given(prob_rows, st.floats(1e-4, 0.2499))
def test_clip_invariants(P, e_min):
    C, count = clip_probs(P, e_min)
    np.testing.assert_allclose(C.sum(axis=1), 1.0, rtol=0, atol=1e-12)
    assert np.all(C >= e_min)
    assert count >= int((P < e_min).sum())
    again, zero = clip_probs(C, e_min)
    np.testing.assert_array_equal(again, C)
    assert zero == 0
    untouched = ~(P < e_min).any(axis=1)
    np.testing.assert_array_equal(C[untouched], P[untouched])
    labels = np.argmax(P, axis=1) + 1
    w = propensity_from_probs(P, TreatmentAssignment.from_labels(labels, 4), e_min).weights
    assert np.all(w >= 1) and np.all(w <= 1 / e_min)


def test_propensity_shape_check():
    with pytest.raises(ValueError):
        propensity_from_probs(np.full((3, 3), 1 / 3), TreatmentAssignment.from_labels([1, 2, 3], 4))


def test_report_clean():
    P = np.array([[0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]])
    fit = propensity_from_probs(P, TreatmentAssignment.from_labels([4, 1], 4), 0.01)
    report = check_no_empty_cell(fit)
    assert not report.violation and fit.clipped_count == 0 and report.below_floor == 0
    assert report.min_prob == (0.1, 0.2, 0.2, 0.1)
    assert report.max_weight == pytest.approx(1 / 0.4, abs=1e-12)


def test_report_violation():
    P = np.array([[0.001, 0.299, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25]])
    fit = propensity_from_probs(P, TreatmentAssignment.from_labels([1, 2], 4), 0.01)
    report = check_no_empty_cell(fit)
    assert report.violation and report.below_floor == 1 and fit.clipped_count >= 1
    assert report.min_prob[0] == 0.001
    assert report.max_weight == pytest.approx(1 / fit.probs[np.arange(2), [0, 1]].min(), abs=1e-12)
    assert check_no_empty_cell(fit, e_min=0.0005).violation is False


def test_report_serialisation():
    P = np.array([[0.001, 0.299, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25]])
    report = check_no_empty_cell(propensity_from_probs(P, TreatmentAssignment.from_labels([1, 2], 4)))
    text = report.to_text()
    assert "VIOLATED" in text and "class 4" in text
    kv = dict(line.split("=", 1) for line in report.to_keyvalue().splitlines())
    assert kv["violation"] == "true"
    assert kv["below_floor"] == "1"
    assert float(kv["min_prob_1"]) == 0.001
    assert report.as_dict()["min_prob"] == list(report.min_prob)


def test_fixture_overlap(fixture_panel):
    from fiscalipw.treatment import classify
    fit = fit_gps(fixture_panel.x, classify(fixture_panel.g))
    report = check_no_empty_cell(fit)
    assert fit.model.converged
    assert report.max_weight <= 100
