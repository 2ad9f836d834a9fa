"""MAP fitting of the ability/difficulty model and the one-hot logistic baseline."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit

from .ingest import InteractionTable
from .model import ModelParams, PriorConfig, gradient, neg_log_posterior, objective_and_gradient
from .optim import LBFGSOutcome, minimize_lbfgs


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-5
    objective_relative_tolerance: float = 1e-9
    history_size: int = 10
    initial_value: float = 0.0
    ridge_epsilon: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1 or self.history_size < 1:
            raise ValueError("max_iterations and history_size must be >= 1")
        if not (self.gradient_tolerance > 0 and self.objective_relative_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.ridge_epsilon < 0:
            raise ValueError("ridge_epsilon must be non-negative")

    def optimizer_kwargs(self) -> dict:
        return dict(
            max_iterations=self.max_iterations,
            gradient_tolerance=self.gradient_tolerance,
            objective_relative_tolerance=self.objective_relative_tolerance,
            history_size=self.history_size,
        )


@dataclass
class FitResult:
    params: ModelParams
    converged: bool
    iterations: int
    final_objective: float
    final_gradient_norm: float
    termination_reason: str
    prior: PriorConfig = field(default_factory=PriorConfig)
    objective_trace: list[float] = field(default_factory=list, repr=False)

    def diagnostics(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_objective": self.final_objective,
            "final_gradient_norm": self.final_gradient_norm,
            "termination_reason": self.termination_reason,
            "sigma_squared": self.prior.sigma_squared,
        }

    def to_json(self) -> str:
        return json.dumps({"diagnostics": self.diagnostics(), "params": self.params.to_dict()}, indent=2)


def fit_map(
    table: InteractionTable,
    prior: PriorConfig = PriorConfig(),
    config: FitConfig = FitConfig(),
    initial: ModelParams | None = None,
) -> FitResult:
    """Maximum a posteriori abilities and difficulties for ``table``.

    Starts from ``initial`` if given, else from ``config.initial_value`` everywhere.
    """
    x0 = initial.to_vector() if initial is not None else np.full(
        table.num_students + table.num_skills, config.initial_value
    )
    if initial is not None:
        initial.check_table(table)
    out = minimize_lbfgs(lambda x: objective_and_gradient(x, table, prior), x0, **config.optimizer_kwargs())
    return FitResult(
        params=ModelParams.from_vector(out.x, table),
        converged=out.converged,
        iterations=out.iterations,
        final_objective=out.final_objective,
        final_gradient_norm=out.final_gradient_norm,
        termination_reason=out.termination_reason,
        prior=prior,
        objective_trace=out.objective_trace,
    )


@dataclass
class BaselineModel:
    """Intercept plus one indicator weight per student and per skill.

    No reference level is dropped; the ridge on the indicator weights makes
    the otherwise rank-deficient fit well posed.
    """

    intercept: float
    student_effects: np.ndarray
    skill_effects: np.ndarray
    ridge_epsilon: float
    student_labels: tuple[str, ...]
    skill_labels: tuple[str, ...]
    outcome: LBFGSOutcome = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return self.outcome is None or self.outcome.converged

    def predict(self, table: InteractionTable) -> np.ndarray:
        s_pos = {lab: i for i, lab in enumerate(self.student_labels)}
        k_pos = {lab: i for i, lab in enumerate(self.skill_labels)}
        u = np.array([self.student_effects[s_pos[l]] if l in s_pos else 0.0 for l in table.student_labels])
        v = np.array([self.skill_effects[k_pos[l]] if l in k_pos else 0.0 for l in table.skill_labels])
        return expit(self.intercept + u[table.student] + v[table.skill])

    def diagnostics(self) -> dict:
        o = self.outcome
        return {
            "converged": self.converged,
            "iterations": o.iterations if o else 0,
            "final_objective": o.final_objective if o else None,
            "final_gradient_norm": o.final_gradient_norm if o else None,
            "termination_reason": o.termination_reason if o else None,
            "ridge_epsilon": self.ridge_epsilon,
            "intercept": self.intercept,
        }


def _baseline_objective(x, table: InteractionTable, eps: float):
    S = table.num_students
    b0, u, v = x[0], x[1 : 1 + S], x[1 + S :]
    z = b0 + u[table.student] + v[table.skill]
    f = math.fsum(np.logaddexp(0.0, z) - table.correct * z) + 0.5 * eps * (math.fsum(u * u) + math.fsum(v * v))
    r = expit(z) - table.correct
    g = np.concatenate(
        [
            [math.fsum(r)],
            np.bincount(table.student, r, S) + eps * u,
            np.bincount(table.skill, r, table.num_skills) + eps * v,
        ]
    )
    return f, g


def fit_baseline(table: InteractionTable, config: FitConfig = FitConfig()) -> BaselineModel:
    """Near-maximum-likelihood one-hot logistic regression (ridge ``config.ridge_epsilon``)."""
    S = table.num_students
    x0 = np.zeros(1 + S + table.num_skills)
    eps = config.ridge_epsilon
    out = minimize_lbfgs(lambda x: _baseline_objective(x, table, eps), x0, **config.optimizer_kwargs())
    return BaselineModel(
        intercept=float(out.x[0]),
        student_effects=out.x[1 : 1 + S],
        skill_effects=out.x[1 + S :],
        ridge_epsilon=eps,
        student_labels=table.student_labels,
        skill_labels=table.skill_labels,
        outcome=out,
    )


def check_gradient(
    table: InteractionTable,
    prior: PriorConfig,
    trial_params: ModelParams,
    step: float = 1e-5,
) -> float:
    """Largest disagreement between analytic and central-difference gradients.

    Each coordinate's error is ``|analytic - numeric| / max(1, |analytic|, |numeric|)``,
    i.e. relative for large components and absolute near zero.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    trial_params.check_table(table)
    g_theta, g_beta = gradient(trial_params, table, prior)
    analytic = np.concatenate([g_theta, g_beta])
    x = trial_params.to_vector()
    worst = 0.0
    for j in range(x.size):
        up = x.copy()
        down = x.copy()
        up[j] += step
        down[j] -= step
        numeric = (
            neg_log_posterior(ModelParams.from_vector(up, table), table, prior)
            - neg_log_posterior(ModelParams.from_vector(down, table), table, prior)
        ) / (2 * step)
        err = abs(analytic[j] - numeric) / max(1.0, abs(analytic[j]), abs(numeric))
        worst = max(worst, err)
    return worst
