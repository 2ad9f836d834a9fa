"""Descriptive reports built from a fitted model: summaries, rankings and plot-ready series."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fit import FitResult
from .ingest import InteractionTable
from .model import predict_prob, record_probs


@dataclass(frozen=True)
class Distribution:
    count: int
    mean: float
    std: float
    q25: float
    median: float
    q75: float

    @classmethod
    def of(cls, values) -> "Distribution":
        """Summary with sample std (ddof=1, 0 for a single value) and linearly interpolated quartiles."""
        v = np.asarray(values, dtype=np.float64)
        if v.size == 0:
            raise ValueError("no values to summarise")
        q25, med, q75 = np.percentile(v, [25, 50, 75], method="linear")
        return cls(
            count=int(v.size),
            mean=float(v.mean()),
            std=float(v.std(ddof=1)) if v.size > 1 else 0.0,
            q25=float(q25),
            median=float(med),
            q75=float(q75),
        )


@dataclass(frozen=True)
class CohortSummary:
    ability: Distribution
    difficulty: Distribution


def cohort_summary(result: FitResult) -> CohortSummary:
    return CohortSummary(Distribution.of(result.params.theta), Distribution.of(result.params.beta))


def relative_mastery(summary: CohortSummary) -> float:
    """Mean ability minus mean difficulty, in logits."""
    return summary.ability.mean - summary.difficulty.mean


@dataclass(frozen=True)
class SkillRanking:
    easiest: list[tuple[str, float]]
    hardest: list[tuple[str, float]]


def _skill_labels(result: FitResult) -> tuple[str, ...]:
    labels = result.params.skill_labels
    return labels if labels is not None else tuple(str(i) for i in range(len(result.params.beta)))


def _student_labels(result: FitResult) -> tuple[str, ...]:
    labels = result.params.student_labels
    return labels if labels is not None else tuple(str(i) for i in range(len(result.params.theta)))


def rank_skills(result: FitResult, k: int = 5) -> SkillRanking:
    """The ``k`` lowest and ``k`` highest difficulties; ties go to the smaller label."""
    beta = result.params.beta
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(beta):
        raise ValueError(f"k={k} exceeds the {len(beta)} skills")
    labels = _skill_labels(result)
    pairs = list(zip(labels, beta.tolist()))
    easiest = sorted(pairs, key=lambda p: (p[1], p[0]))[:k]
    hardest = sorted(pairs, key=lambda p: (-p[1], p[0]))[:k]
    return SkillRanking(easiest, hardest)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    proportions: np.ndarray


def ability_histogram(result: FitResult, bins: int = 30) -> Histogram:
    """Equal-width histogram of abilities with heights as proportions of students.

    Bins span [min, max] with the last bin closed. If every ability is the
    same, a single bin of width 1 centred on that value is returned.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    theta = result.params.theta
    lo, hi = float(theta.min()), float(theta.max())
    if lo == hi:
        return Histogram(np.array([lo - 0.5, lo + 0.5]), np.array([1.0]))
    counts, edges = np.histogram(theta, bins=bins, range=(lo, hi))
    return Histogram(edges, counts / theta.size)


@dataclass(frozen=True)
class Scatter:
    labels: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    slope: float
    intercept: float


def _scatter(labels, counts, values) -> Scatter:
    x = np.log10(np.asarray(counts, dtype=np.float64))
    y = np.asarray(values, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    slope = float(dx @ dy) / sxx if sxx > 0 else 0.0
    return Scatter(tuple(labels), x, y, slope, float(y.mean() - slope * x.mean()))


def difficulty_vs_practice(result: FitResult, table: InteractionTable) -> Scatter:
    """Per skill: log10 attempt count against difficulty, with the OLS line."""
    result.params.check_table(table)
    return _scatter(table.skill_labels, table.attempts_per_skill, result.params.beta)


def ability_vs_attempts(result: FitResult, table: InteractionTable) -> Scatter:
    """Per student: log10 attempt count against ability, with the OLS line."""
    result.params.check_table(table)
    return _scatter(table.student_labels, table.attempts_per_student, result.params.theta)


@dataclass(frozen=True)
class SkillComparison:
    skill: str
    count: int
    observed: float
    predicted: float


def skill_observed_vs_predicted(result: FitResult, table: InteractionTable, skills) -> list[SkillComparison]:
    """Observed fraction correct and mean predicted probability on each named skill's records."""
    result.params.check_table(table)
    index = {lab: i for i, lab in enumerate(table.skill_labels)}
    p = record_probs(result.params, table)
    out = []
    for label in skills:
        if label not in index:
            raise KeyError(f"unknown skill {label!r}")
        rows = table.skill == index[label]
        out.append(
            SkillComparison(label, int(rows.sum()), float(table.correct[rows].mean()), float(p[rows].mean()))
        )
    return out


@dataclass(frozen=True)
class TrajectoryPoint:
    attempt_index: int
    skill: str
    probability: float
    correct: int


@dataclass(frozen=True)
class Trajectory:
    student: str
    points: list[TrajectoryPoint]


def student_trajectory(result: FitResult, table: InteractionTable, student: str = "lowest") -> Trajectory:
    """Predicted success probability on each of one student's attempts, in record order.

    ``student`` is a label or one of the selectors ``"lowest"``/``"highest"``
    (minimum/maximum ability; the first such student wins a tie). A real
    student label takes precedence over a selector of the same name.
    """
    result.params.check_table(table)
    labels = _student_labels(result)
    theta = result.params.theta
    if student in labels:
        s = labels.index(student)
    elif student == "lowest":
        s = int(np.argmin(theta))
    elif student == "highest":
        s = int(np.argmax(theta))
    else:
        raise KeyError(f"unknown student {student!r}")
    rows = np.flatnonzero(table.student == s)
    points = [
        TrajectoryPoint(
            i,
            table.skill_labels[table.skill[r]],
            predict_prob(theta[s], result.params.beta[table.skill[r]]),
            int(table.correct[r]),
        )
        for i, r in enumerate(rows)
    ]
    return Trajectory(labels[s], points)
