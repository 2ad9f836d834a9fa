"""Writing analytics and metrics to the CSV/JSON report files.

File names are fixed: summary.csv, rankings.csv, calibration.csv,
fig1_hist.csv, fig2_scatter.csv, fig3_scatter.csv, fig5_extremes.csv,
fig6_trajectory.csv and the combined report.json. Floats are written with
``repr`` so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from . import analytics
from .fit import FitResult
from .ingest import InteractionTable
from .metrics import CalibrationTable

REPORT_FILES = (
    "summary.csv",
    "rankings.csv",
    "calibration.csv",
    "fig1_hist.csv",
    "fig2_scatter.csv",
    "fig3_scatter.csv",
    "fig5_extremes.csv",
    "fig6_trajectory.csv",
)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_json(path: Path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_calibration(path: Path, table: CalibrationTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        table.to_csv(f)


def write_analytics(
    outdir: Path,
    result: FitResult,
    table: InteractionTable,
    *,
    top_k: int = 5,
    bins: int = 30,
    trajectory_student: str = "lowest",
) -> dict:
    """Write every analytics report for a fit on ``table``; returns the combined document."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    summary = analytics.cohort_summary(result)
    _write_csv(
        outdir / "summary.csv",
        ["parameter", "count", "mean", "std", "q25", "median", "q75"],
        [("ability",) + tuple(asdict(summary.ability).values()), ("difficulty",) + tuple(asdict(summary.difficulty).values())],
    )

    k = min(top_k, len(result.params.beta))
    ranking = analytics.rank_skills(result, k)
    _write_csv(
        outdir / "rankings.csv",
        ["group", "rank", "skill", "beta"],
        [("easiest", i + 1, s, b) for i, (s, b) in enumerate(ranking.easiest)]
        + [("hardest", i + 1, s, b) for i, (s, b) in enumerate(ranking.hardest)],
    )

    hist = analytics.ability_histogram(result, bins)
    _write_csv(
        outdir / "fig1_hist.csv",
        ["bin_left", "bin_right", "proportion"],
        zip(hist.edges[:-1].tolist(), hist.edges[1:].tolist(), hist.proportions.tolist()),
    )

    fig2 = analytics.difficulty_vs_practice(result, table)
    _write_csv(outdir / "fig2_scatter.csv", ["skill", "log10_attempts", "beta"], zip(fig2.labels, fig2.x.tolist(), fig2.y.tolist()))
    fig3 = analytics.ability_vs_attempts(result, table)
    _write_csv(outdir / "fig3_scatter.csv", ["student", "log10_attempts", "theta"], zip(fig3.labels, fig3.x.tolist(), fig3.y.tolist()))

    extremes = [("easiest", s) for s, _ in ranking.easiest] + [("hardest", s) for s, _ in ranking.hardest]
    comparisons = analytics.skill_observed_vs_predicted(result, table, [s for _, s in extremes])
    _write_csv(
        outdir / "fig5_extremes.csv",
        ["group", "skill", "count", "observed", "predicted"],
        [(g, c.skill, c.count, c.observed, c.predicted) for (g, _), c in zip(extremes, comparisons)],
    )

    traj = analytics.student_trajectory(result, table, trajectory_student)
    _write_csv(
        outdir / "fig6_trajectory.csv",
        ["student", "attempt_index", "skill", "probability", "correct"],
        [(traj.student, p.attempt_index, p.skill, p.probability, p.correct) for p in traj.points],
    )

    doc = {
        "summary": {"ability": asdict(summary.ability), "difficulty": asdict(summary.difficulty)},
        "relative_mastery": analytics.relative_mastery(summary),
        "rankings": {"easiest": ranking.easiest, "hardest": ranking.hardest},
        "difficulty_vs_practice_trend": {"slope": fig2.slope, "intercept": fig2.intercept},
        "ability_vs_attempts_trend": {"slope": fig3.slope, "intercept": fig3.intercept},
        "trajectory_student": traj.student,
    }
    return doc
