import itertools
import json

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss

import fiscalipw.mc as mc
from fiscalipw.errors import SpecError
from fiscalipw.mc import DgpSpec, growth_centers, run_experiment, simulate_dgp, true_effects

SMALL = DgpSpec(n=400)


def test_simulation_is_deterministic():
    a, b = simulate_dgp(DgpSpec(seed=42)), simulate_dgp(DgpSpec(seed=42))
    for name in ("y", "y_next", "g", "x", "z"):
        np.testing.assert_array_equal(getattr(a.panel, name), getattr(b.panel, name))
    np.testing.assert_array_equal(a.labels, b.labels)
    assert not np.array_equal(a.panel.y, simulate_dgp(DgpSpec(seed=43)).panel.y)


def test_uniform_assignment_shares():
    spec = DgpSpec(n=4000, prop_coeffs=((0, 0, 0, 0),) * 3)
    data = simulate_dgp(spec)
    shares = np.bincount(data.labels - 1, minlength=4) / spec.n
    np.testing.assert_allclose(data.true_probs, 0.25, rtol=1e-15)
    assert np.all(np.abs(shares - 0.25) <= 3 * np.sqrt(0.25 * 0.75 / spec.n))


def test_vanishing_noise_gives_exact_class_means():
    spec = DgpSpec(n=200, noise_sd=1e-300, outcome_coeffs=(0.0, 0.0, 0.0))
    data = simulate_dgp(spec)
    base = 0.5 + data.panel.z @ np.array([0.8, -0.4])
    gain = data.panel.y_next - base
    for j in range(4):
        m = data.labels == j + 1
        assert np.var(gain[m]) < 1e-28
        assert gain[m].mean() == pytest.approx(spec.mu[j], abs=1e-14)


def test_policy_growth_monotone_in_class():
    data = simulate_dgp(DgpSpec(n=1000))
    for j in range(1, 4):
        assert data.panel.g[data.labels == j].max() < data.panel.g[data.labels == j + 1].min()


@pytest.mark.parametrize("mu", [(-1.0, 0.0, 1.0, 2.0), (0.0, 0.0, 0.0, 0.0)])
def test_true_effects_analytic(mu):
    np.testing.assert_array_equal(true_effects(DgpSpec(mu=mu)), mu)


@pytest.mark.parametrize("theta", [0.25, 0.5, 1.0])
def test_true_effects_match_quadrature(theta):
    # E[g] = sum_j c_j E[p_j(x)], with the expectation over x ~ N(0, I) by tensor Gauss-Hermite
    spec = DgpSpec(theta=theta)
    nodes, w = hermegauss(20)
    w = w / w.sum()
    X = np.array(list(itertools.product(nodes, repeat=3)))
    W = np.prod(np.array(list(itertools.product(w, repeat=3))), axis=1)
    B = np.array(spec.prop_coeffs)
    S = np.column_stack([np.zeros(len(X)), np.column_stack([np.ones(len(X)), X]) @ B.T])
    P = np.exp(S)
    P /= P.sum(axis=1, keepdims=True)
    expected = np.array(spec.mu) + theta * (W @ P) @ growth_centers(4)
    # tolerance: about five standard errors of a 10^6-draw mean
    np.testing.assert_allclose(true_effects(spec), expected, rtol=0, atol=6e-3)


@pytest.mark.parametrize("changes", [dict(n=30), dict(noise_sd=0.0), dict(mu=(1.0, 2.0)),
                                     dict(prop_coeffs=((0, 1),)), dict(outcome_coeffs=(1.0,)),
                                     dict(J=1), dict(seed=-1), dict(e_min=0.3)])
def test_invalid_spec(changes):
    with pytest.raises(SpecError):
        DgpSpec().replace(**changes)


def test_too_few_replications():
    with pytest.raises(SpecError):
        run_experiment(SMALL, 10)


def test_report_reproducible():
    a = run_experiment(SMALL, 50)
    b = run_experiment(SMALL, 50)
    assert a.to_json() == b.to_json()
    assert a.to_csv() == b.to_csv()
    assert a.to_json() != run_experiment(SMALL.replace(seed=7), 50).to_json()


def test_parallel_equals_serial():
    serial = run_experiment(SMALL.replace(theta=0.5), 60)
    parallel = run_experiment(SMALL.replace(theta=0.5), 60, n_jobs=3)
    assert serial.to_json() == parallel.to_json()
    for v in serial.estimates:
        np.testing.assert_array_equal(serial.estimates[v], parallel.estimates[v])


def test_report_contents():
    rep = run_experiment(SMALL, 50)
    assert rep.replications == 50 and rep.failed == 0
    for v in ("WLS_A2", "WLS_A1", "OLS_A2"):
        assert rep.estimates[v].shape == (50, 4)
        assert np.all((rep.coverage[v] >= 0) & (rep.coverage[v] <= 1))
        np.testing.assert_allclose(rep.mean_bias[v], rep.estimates[v].mean(axis=0) - rep.true_effects)
    doc = json.loads(rep.to_json())
    assert doc["spec"]["n"] == 400 and doc["failed"] == 0
    assert rep.to_csv().splitlines()[0] == "metric,variant,class,value"
    assert "share |bias A1| > |bias A2|" in rep.to_text()


def test_true_propensities_are_unbiased():
    rep = run_experiment(DgpSpec(n=1000), 200, propensity="true", variants=("WLS_A2",))
    assert np.all(np.abs(rep.mean_bias["WLS_A2"]) <= 3 * rep.mc_std_error["WLS_A2"])


def test_unweighted_means_are_confounded():
    rep = run_experiment(DgpSpec(n=1000), 50, variants=("OLS_A2",))
    assert np.any(np.abs(rep.mean_bias["OLS_A2"]) > 5 * rep.mc_std_error["OLS_A2"])


def test_root_n_scaling():
    sizes = (250, 500, 1000, 2000)
    scaled = []
    for n in sizes:
        rep = run_experiment(DgpSpec(n=n), 100, variants=("WLS_A2",))
        scaled.append(rep.rmse["WLS_A2"] * np.sqrt(n))
    scaled = np.array(scaled)
    # sqrt(n) * RMSE should stay flat; allow a factor-of-two band per class
    assert np.all(scaled.max(axis=0) / scaled.min(axis=0) < 2)


def test_failures_recorded(monkeypatch):
    calls = {"n": 0}
    original = mc.fit_gps

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] % 10 == 0:
            raise RuntimeError("synthetic failure")
        return original(*args, **kwargs)

    monkeypatch.setattr(mc, "fit_gps", flaky)
    rep = run_experiment(SMALL, 50)
    assert rep.failed == 5 and len(rep.failures) == 5
    assert all("synthetic failure" in msg for _, msg in rep.failures)
    assert rep.estimates["WLS_A2"].shape == (45, 4)


@pytest.mark.parametrize("theta", [0.25, 0.5, 1.0])
def test_violation_sweep_hurts_a1(theta):
    rep = run_experiment(DgpSpec(theta=theta, n=1000), 50, variants=("WLS_A2", "WLS_A1"))
    assert rep.a1_worse_share[[0, 3]].min() >= 0.8
