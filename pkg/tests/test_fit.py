import math

import numpy as np
import pytest
from scipy.optimize import minimize

from skillirt.fit import FitConfig, check_gradient, fit_baseline, fit_map
from skillirt.model import ModelParams, PriorConfig, gradient, objective_and_gradient, record_probs
from skillirt.optim import GRADIENT_TOL, MAX_ITER, LineSearchError, NonFiniteObjectiveError, minimize_lbfgs
from skillirt.synth import SynthSpec, generate

from conftest import random_table, table_from


def bisect(f, lo, hi, tol=1e-13):
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def single_cell_gap(n_correct, sigma2=100.0):
    """theta - beta for one student, one skill and only correct answers.

    At the optimum theta = -beta = d/2 and n (1 - sigmoid(d)) = d / (2 sigma^2).
    """
    return bisect(lambda d: n_correct * (1 - 1 / (1 + math.exp(-d))) - d / (2 * sigma2), 0.0, 60.0)


# --- optimiser on textbook functions -------------------------------------------


def rosenbrock(x):
    f = 100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2
    g = np.array([-400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]), 200 * (x[1] - x[0] ** 2)])
    return f, g


def test_lbfgs_rosenbrock():
    out = minimize_lbfgs(rosenbrock, np.array([-1.2, 1.0]), gradient_tolerance=1e-8, objective_relative_tolerance=1e-16)
    assert out.termination_reason == GRADIENT_TOL
    np.testing.assert_allclose(out.x, [1.0, 1.0], atol=1e-6)
    assert all(b <= a for a, b in zip(out.objective_trace, out.objective_trace[1:]))


def test_lbfgs_quadratic_ill_conditioned():
    scales = np.logspace(0, 4, 30)
    out = minimize_lbfgs(lambda x: (0.5 * np.sum(scales * x * x), scales * x), np.ones(30), gradient_tolerance=1e-9, objective_relative_tolerance=1e-30, max_iterations=1000)
    assert out.converged
    assert np.max(np.abs(out.x)) < 1e-9


def test_lbfgs_max_iter():
    out = minimize_lbfgs(rosenbrock, np.array([-1.2, 1.0]), max_iterations=3)
    assert out.termination_reason == MAX_ITER and not out.converged and out.iterations == 3


def test_lbfgs_non_finite_start():
    with pytest.raises(NonFiniteObjectiveError) as info:
        minimize_lbfgs(lambda x: (float("nan"), x), np.ones(2))
    assert info.value.iteration == 0


def test_lbfgs_non_finite_everywhere_along_the_step():
    def f(x):
        if np.all(x == 1.0):
            return 1.0, np.ones(2)
        return float("inf"), np.full(2, np.inf)

    with pytest.raises(NonFiniteObjectiveError) as info:
        minimize_lbfgs(f, np.ones(2))
    assert info.value.iteration == 1


def test_lbfgs_line_search_failure():
    # the reported gradient points the wrong way, so no step can decrease f
    with pytest.raises(LineSearchError):
        minimize_lbfgs(lambda x: (float(x @ x) + 1.0, -2 * x), np.ones(3))


# --- MAP fit --------------------------------------------------------------------


def test_symmetric_cell_fits_to_zero():
    table = table_from([("s", "k", i % 2) for i in range(10)])
    result = fit_map(table)
    assert result.converged
    assert abs(result.params.theta[0]) <= 1e-6 and abs(result.params.beta[0]) <= 1e-6


def test_all_correct_cell_matches_bisection():
    table = table_from([("s", "k", 1)] * 10)
    d = single_cell_gap(10)
    assert d == pytest.approx(5.8, abs=0.05)
    result = fit_map(table)
    theta, beta = result.params.theta[0], result.params.beta[0]
    assert theta - beta == pytest.approx(d, abs=1e-3)
    assert theta == pytest.approx(-beta, abs=1e-3)


def test_stationary_when_gradient_converged(rng):
    table = random_table(rng, 25, 6, 300)
    result = fit_map(table, config=FitConfig(objective_relative_tolerance=1e-15))
    assert result.termination_reason == GRADIENT_TOL
    g = np.concatenate(gradient(result.params, table))
    assert np.max(np.abs(g)) <= 1e-5
    assert result.final_gradient_norm == pytest.approx(np.max(np.abs(g)))


def test_monotone_descent(rng):
    table = random_table(rng, 40, 8, 600)
    trace = fit_map(table).objective_trace
    assert len(trace) > 2
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_fit_is_deterministic(rng):
    table = random_table(rng, 40, 8, 600)
    a, b = fit_map(table), fit_map(table)
    assert a.params.to_vector().tobytes() == b.params.to_vector().tobytes()
    assert a.final_objective == b.final_objective


def test_agrees_with_scipy_lbfgsb(rng):
    table = random_table(rng, 30, 7, 400)
    prior = PriorConfig(100.0)
    ours = fit_map(table, prior, FitConfig(gradient_tolerance=1e-8, objective_relative_tolerance=1e-15))
    ref = minimize(
        lambda x: objective_and_gradient(x, table, prior),
        np.zeros(37),
        jac=True,
        method="L-BFGS-B",
        options=dict(gtol=1e-10, ftol=1e-15, maxiter=5000, maxcor=20),
    )
    assert ours.final_objective == pytest.approx(ref.fun, abs=1e-8)
    np.testing.assert_allclose(ours.params.to_vector(), ref.x, atol=1e-4)


def test_start_from_given_params(rng):
    table = random_table(rng, 10, 3, 100)
    cfg = FitConfig(gradient_tolerance=1e-7, objective_relative_tolerance=1e-15)
    start = ModelParams(rng.uniform(-3, 3, 10), rng.uniform(-3, 3, 3))
    a = fit_map(table, config=cfg, initial=start)
    b = fit_map(table, config=cfg)
    np.testing.assert_allclose(a.params.to_vector(), b.params.to_vector(), atol=1e-4)
    with pytest.raises(ValueError):
        fit_map(table, initial=ModelParams(np.zeros(3), np.zeros(3)))


def test_separated_skill_stays_finite():
    rows = [(f"s{i % 40}", "easy", 1) for i in range(400)]
    rows += [(f"s{i % 40}", f"k{i % 3}", (i * 7) % 3 != 0) for i in range(600)]
    result = fit_map(table_from(rows))
    beta = dict(zip(result.params.skill_labels, result.params.beta))
    assert np.isfinite(beta["easy"]) and -40 < beta["easy"] < -5


def test_recovers_generating_parameters():
    table, truth = generate(SynthSpec(150, 10, 60, seed=3))
    result = fit_map(table)
    assert np.corrcoef(result.params.theta, truth.theta)[0, 1] >= 0.9
    assert np.corrcoef(result.params.beta, truth.beta)[0, 1] >= 0.95


def test_diagnostics_json():
    result = fit_map(table_from([("s", "k", 1), ("s", "k", 0)]))
    assert result.diagnostics()["termination_reason"] == result.termination_reason
    assert '"theta"' in result.to_json()


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(max_iterations=0)
    with pytest.raises(ValueError):
        FitConfig(gradient_tolerance=0)


# --- baseline -------------------------------------------------------------------


def test_baseline_saturated_cell():
    table = table_from([("s", "k", int(i < 7)) for i in range(10)])
    model = fit_baseline(table)
    assert model.converged
    assert model.predict(table)[0] == pytest.approx(0.7, abs=1e-3)


def test_baseline_all_correct_is_finite():
    table = table_from([(f"s{i % 4}", f"k{i % 3}", 1) for i in range(24)])
    model = fit_baseline(table)
    assert np.isfinite(model.intercept)
    assert np.all(model.predict(table) >= 0.99)


def test_baseline_null_data():
    # every student and every skill is exactly half right: logit(0.5) = 0
    rows = [(f"s{s}", f"k{k}", (s + k) % 2) for s in range(6) for k in range(4)]
    model = fit_baseline(table_from(rows))
    assert abs(model.intercept) <= 1e-2
    assert np.max(np.abs(model.student_effects)) <= 1e-2
    assert np.max(np.abs(model.skill_effects)) <= 1e-2


def test_baseline_diagnostics():
    model = fit_baseline(table_from([("s", "k", 1), ("s", "k", 0)]))
    d = model.diagnostics()
    assert d["ridge_epsilon"] == 1e-6 and d["converged"]


# --- gradient check harness ------------------------------------------------------


def test_check_gradient_at_zero(rng):
    table = random_table(rng, 5, 3, 20)
    assert check_gradient(table, PriorConfig(), ModelParams.zeros(table), 1e-5) <= 1e-7


def test_check_gradient_random(rng):
    table = random_table(rng, 6, 4, 20)
    params = ModelParams(rng.uniform(-3, 3, 6), rng.uniform(-3, 3, 4))
    assert check_gradient(table, PriorConfig(), params, 1e-5) <= 1e-6


def test_check_gradient_detects_a_wrong_gradient(rng, monkeypatch):
    import skillirt.fit as fit_module

    table = random_table(rng, 4, 2, 12)
    params = ModelParams(rng.normal(size=4), rng.normal(size=2))
    monkeypatch.setattr(fit_module, "gradient", lambda p, t, pr: tuple(2 * g for g in gradient(p, t, pr)))
    assert check_gradient(table, PriorConfig(), params, 1e-5) > 1e-2


def test_check_gradient_step_must_be_positive(rng):
    table = random_table(rng, 2, 2, 4)
    with pytest.raises(ValueError):
        check_gradient(table, PriorConfig(), ModelParams.zeros(table), 0.0)
