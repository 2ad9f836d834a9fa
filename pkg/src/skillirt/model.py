"""Ability/difficulty logistic model with Gaussian priors.

A response by student ``s`` on skill ``k`` is correct with probability
``sigmoid(theta[s] - beta[k])``. Both parameter families get independent
N(0, sigma_squared) priors; fitting minimises the negative log-posterior

    sum_i softplus(x_i) - y_i * x_i  +  |theta|^2 / (2 sigma^2)  +  |beta|^2 / (2 sigma^2)

with ``x_i = theta[s_i] - beta[k_i]``. ``softplus(x) - y x`` is the Bernoulli
negative log-likelihood written without ever forming ``log(p)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.special import expit

from .ingest import InteractionTable


@dataclass(frozen=True)
class PriorConfig:
    sigma_squared: float = 100.0
    # separate difficulty prior variance; None means "same as sigma_squared"
    beta_sigma_squared: float | None = None

    def __post_init__(self):
        if not self.sigma_squared > 0:
            raise ValueError("sigma_squared must be positive")
        if self.beta_sigma_squared is not None and not self.beta_sigma_squared > 0:
            raise ValueError("beta_sigma_squared must be positive")

    @property
    def theta_precision(self) -> float:
        return 1.0 / self.sigma_squared

    @property
    def beta_precision(self) -> float:
        return 1.0 / (self.beta_sigma_squared or self.sigma_squared)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Abilities ``theta`` (per student) and difficulties ``beta`` (per skill), in logits."""

    theta: np.ndarray
    beta: np.ndarray
    student_labels: tuple[str, ...] | None = None
    skill_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).reshape(-1)
        beta = np.array(self.beta, dtype=np.float64).reshape(-1)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(beta))):
            raise ValueError("parameters must be finite")
        if self.student_labels is not None and len(self.student_labels) != len(theta):
            raise ValueError("student labels do not match theta")
        if self.skill_labels is not None and len(self.skill_labels) != len(beta):
            raise ValueError("skill labels do not match beta")
        theta.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def zeros(cls, table: InteractionTable, value: float = 0.0) -> "ModelParams":
        return cls(
            np.full(table.num_students, value),
            np.full(table.num_skills, value),
            table.student_labels,
            table.skill_labels,
        )

    @classmethod
    def from_vector(cls, x: np.ndarray, table: InteractionTable) -> "ModelParams":
        return cls(x[: table.num_students], x[table.num_students :], table.student_labels, table.skill_labels)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.theta, self.beta])

    def check_table(self, table: InteractionTable) -> None:
        if len(self.theta) != table.num_students or len(self.beta) != table.num_skills:
            raise ValueError(
                f"params sized ({len(self.theta)}, {len(self.beta)}) for table "
                f"({table.num_students}, {table.num_skills})"
            )

    def aligned_to(self, table: InteractionTable) -> tuple[np.ndarray, np.ndarray]:
        """Parameter vectors indexed like ``table``, matched by label.

        Entities the parameters have never seen get 0, the prior mean.
        """
        if self.student_labels is None or self.skill_labels is None:
            self.check_table(table)
            return self.theta, self.beta
        s_pos = {lab: i for i, lab in enumerate(self.student_labels)}
        k_pos = {lab: i for i, lab in enumerate(self.skill_labels)}
        theta = np.array([self.theta[s_pos[l]] if l in s_pos else 0.0 for l in table.student_labels])
        beta = np.array([self.beta[k_pos[l]] if l in k_pos else 0.0 for l in table.skill_labels])
        return theta, beta

    def _labels(self, labels, n):
        return labels if labels is not None else tuple(str(i) for i in range(n))

    def to_dict(self) -> dict:
        return {
            "theta": dict(zip(self._labels(self.student_labels, len(self.theta)), self.theta.tolist())),
            "beta": dict(zip(self._labels(self.skill_labels, len(self.beta)), self.beta.tolist())),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelParams":
        return cls(
            list(doc["theta"].values()),
            list(doc["beta"].values()),
            tuple(doc["theta"]),
            tuple(doc["beta"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["parameter", "label", "value"])
        for kind, values in self.to_dict().items():
            for label, v in values.items():
                w.writerow([kind, label, repr(v)])


def predict_prob(theta, beta):
    """Probability of a correct response, ``1 / (1 + exp(-(theta - beta)))``.

    Works elementwise on arrays; scalars in give a float out.

    >>> float(predict_prob(0.0, 0.0))
    0.5
    """
    theta = np.asarray(theta, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(beta))):
        raise ValueError("predict_prob needs finite logits")
    p = expit(theta - beta)
    return float(p) if p.ndim == 0 else p


def record_logits(params: ModelParams, table: InteractionTable) -> np.ndarray:
    params.check_table(table)
    return params.theta[table.student] - params.beta[table.skill]


def record_probs(params: ModelParams, table: InteractionTable) -> np.ndarray:
    """Predicted probability for every record, params matched to the table by label."""
    theta, beta = params.aligned_to(table)
    return expit(theta[table.student] - beta[table.skill])


def _penalty(v: np.ndarray, precision: float) -> float:
    return 0.5 * precision * math.fsum(v * v)


def neg_log_posterior(params: ModelParams, table: InteractionTable, prior: PriorConfig = PriorConfig()) -> float:
    x = record_logits(params, table)
    nll = math.fsum(np.logaddexp(0.0, x) - table.correct * x)
    return nll + _penalty(params.theta, prior.theta_precision) + _penalty(params.beta, prior.beta_precision)


def gradient(
    params: ModelParams, table: InteractionTable, prior: PriorConfig = PriorConfig()
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of :func:`neg_log_posterior` as (d/dtheta, d/dbeta).

    Per-entity residual sums use ``np.bincount``, which accumulates in record
    order, so repeated calls are bit-identical.
    """
    x = record_logits(params, table)
    resid = table.correct - expit(x)
    g_theta = -np.bincount(table.student, resid, table.num_students) + prior.theta_precision * params.theta
    g_beta = np.bincount(table.skill, resid, table.num_skills) + prior.beta_precision * params.beta
    return g_theta, g_beta


def objective_and_gradient(x: np.ndarray, table: InteractionTable, prior: PriorConfig) -> tuple[float, np.ndarray]:
    """Flat-vector form used by the optimiser: ``x = [theta, beta]``."""
    theta, beta = x[: table.num_students], x[table.num_students :]
    z = theta[table.student] - beta[table.skill]
    nll = math.fsum(np.logaddexp(0.0, z) - table.correct * z)
    f = nll + _penalty(theta, prior.theta_precision) + _penalty(beta, prior.beta_precision)
    resid = table.correct - expit(z)
    g = np.concatenate(
        [
            -np.bincount(table.student, resid, table.num_students) + prior.theta_precision * theta,
            np.bincount(table.skill, resid, table.num_skills) + prior.beta_precision * beta,
        ]
    )
    return f, g
