"""Simulated response logs drawn from the model with known parameters."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .ingest import InteractionTable
from .model import ModelParams
from .rng import SplitMix64

MAX_COVERAGE_REDRAWS = 1000


@dataclass(frozen=True)
class SynthSpec:
    num_students: int
    num_skills: int
    responses_per_student: int | tuple[int, int] = 100
    theta_mean: float = 0.0
    theta_sd: float = 1.0
    beta_mean: float = 0.0
    beta_sd: float = 1.0
    seed: int = 0
    # relative skill popularity; uniform when None
    skill_weights: Sequence[float] | None = None

    def __post_init__(self):
        if self.num_students < 1 or self.num_skills < 1:
            raise ValueError("need at least one student and one skill")
        lo, hi = self.response_range
        if lo < 1 or hi < lo:
            raise ValueError(f"bad responses_per_student {self.responses_per_student}")
        if self.theta_sd < 0 or self.beta_sd < 0:
            raise ValueError("standard deviations must be non-negative")
        if self.skill_weights is not None:
            w = np.asarray(self.skill_weights, dtype=np.float64)
            if w.shape != (self.num_skills,) or np.any(w <= 0):
                raise ValueError("skill_weights needs one positive weight per skill")

    @property
    def response_range(self) -> tuple[int, int]:
        r = self.responses_per_student
        return (r, r) if isinstance(r, int) else (int(r[0]), int(r[1]))


def _labels(prefix: str, n: int) -> tuple[str, ...]:
    width = len(str(n - 1))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(n))


def generate(spec: SynthSpec) -> tuple[InteractionTable, ModelParams]:
    """Simulate a table and return it with the generating parameters.

    Draw order from one SplitMix64 stream seeded with ``spec.seed``: abilities,
    difficulties, per-student response counts (when a range is given), then
    skill assignments (redrawn until every skill occurs), then one uniform per
    response, which is correct when below ``sigmoid(theta - beta)``.
    Students attempt in turn: all of student 0's responses, then student 1's, ...
    """
    lo, hi = spec.response_range
    rng = SplitMix64(spec.seed)
    theta = rng.normal(spec.num_students, spec.theta_mean, spec.theta_sd)
    beta = rng.normal(spec.num_skills, spec.beta_mean, spec.beta_sd)
    if lo == hi:
        counts = np.full(spec.num_students, lo, dtype=np.int64)
    else:
        counts = lo + rng.below(np.full(spec.num_students, hi - lo + 1))
    total = int(counts.sum())
    if spec.num_skills > total:
        raise ValueError(f"{total} responses cannot cover {spec.num_skills} skills")

    if spec.skill_weights is None:
        cdf = None
    else:
        w = np.asarray(spec.skill_weights, dtype=np.float64)
        cdf = np.cumsum(w) / w.sum()
    for _ in range(MAX_COVERAGE_REDRAWS):
        u = rng.random(total)
        if cdf is None:
            skill = np.minimum((u * spec.num_skills).astype(np.int64), spec.num_skills - 1)
        else:
            skill = np.minimum(np.searchsorted(cdf, u, side="right"), spec.num_skills - 1)
        if np.unique(skill).size == spec.num_skills:
            break
    else:
        raise ValueError("could not cover every skill; check skill_weights")

    student = np.repeat(np.arange(spec.num_students), counts)
    correct = (rng.random(total) < expit(theta[student] - beta[skill])).astype(np.int8)
    students = _labels("s", spec.num_students)
    skills = _labels("k", spec.num_skills)
    # intern skills in first-appearance order, like a table read from disk
    first = {}
    for k in skill.tolist():
        first.setdefault(k, len(first))
    remap = np.array([first[k] for k in range(spec.num_skills)])
    order_skills = sorted(range(spec.num_skills), key=first.__getitem__)
    table = InteractionTable(
        student=student,
        skill=remap[skill],
        correct=correct,
        order=np.arange(total),
        student_labels=students,
        skill_labels=tuple(skills[k] for k in order_skills),
    )
    truth = ModelParams(theta, beta[order_skills], students, table.skill_labels)
    return table, truth
