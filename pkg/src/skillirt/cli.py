"""Command-line entry point: ``skillirt {fit,evaluate,report,simulate,check-gradient}``.

Any long option may also come from an INI file passed with ``--config``
(section ``[skillirt]``, keys spelled like the options without leading
dashes, e.g. ``sigma-squared = 100``); options given on the command line win.

Exit status: 0 ok, 1 input error, 2 a fit did not converge.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import reports
from .fit import FitConfig, FitResult, check_gradient, fit_baseline, fit_map
from .ingest import ColumnSchema, EmptyTableError, InteractionTable, RowError, SchemaError, holdout_split, load_table, subsample
from .metrics import auc, calibration, log_loss
from .model import ModelParams, PriorConfig, record_probs
from .optim import OptimizationError
from .rng import SplitMix64
from .synth import SynthSpec, generate

log = logging.getLogger("skillirt")

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2
SENSITIVITY_GRID = ((20000, 42), (20000, 2025), (40000, 42), (40000, 2025))


class InputError(Exception):
    pass


def _column(value: str):
    return int(value) if value.isdigit() else value


def _add_input_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--input", required=True, help="delimited response log")
    g.add_argument("--student-column", type=_column, default="student")
    g.add_argument("--skill-column", type=_column, default="skill")
    g.add_argument("--correct-column", type=_column, default="correct")
    g.add_argument("--order-column", type=_column, default=None)
    g.add_argument("--delimiter", default=",", help="field separator; 'tab' for tab-separated exports")
    g.add_argument("--multi-skill-separator", default=None)
    g.add_argument("--expand-multi-skill", action="store_true", help="one record per listed skill instead of dropping")
    g.add_argument("--true-values", default="1", help="comma-separated cells meaning correct")
    g.add_argument("--false-values", default="0", help="comma-separated cells meaning incorrect")
    g.add_argument("--subsample", type=int, default=None, help="number of records to sample")
    g.add_argument("--seed", type=int, default=42)


def _add_fit_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--sigma-squared", type=float, default=100.0)
    g.add_argument("--max-iterations", type=int, default=500)
    g.add_argument("--gradient-tolerance", type=float, default=1e-5)
    g.add_argument("--objective-tolerance", type=float, default=1e-9)
    g.add_argument("--history-size", type=int, default=10)
    g.add_argument("--ridge-epsilon", type=float, default=1e-6, help="baseline ridge on indicator weights")
    g.add_argument("--holdout", type=float, default=None, metavar="FRACTION", help="score on a held-out record fraction")
    g.add_argument("--output", default="out", help="report directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skillirt", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="INI file with a [skillirt] section")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit both models and write every report")
    _add_input_options(p)
    _add_fit_options(p)
    p.add_argument("--sensitivity", action="store_true", help="also run subsamples {20000,40000} x seeds {42,2025}")
    p.add_argument("--truth", default=None, help="generating parameters (from simulate) for a recovery report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="fit both models and write metrics only")
    _add_input_options(p)
    _add_fit_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="write analytics for previously fitted parameters")
    _add_input_options(p)
    p.add_argument("--params", required=True, help="params.json written by fit")
    p.add_argument("--output", default="out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="write a synthetic response log and its true parameters")
    p.add_argument("--students", type=int, required=True)
    p.add_argument("--skills", type=int, required=True)
    p.add_argument("--per-student", default="100", help="responses per student, N or LO:HI")
    p.add_argument("--theta-mean", type=float, default=0.0)
    p.add_argument("--theta-sd", type=float, default=1.0)
    p.add_argument("--beta-mean", type=float, default=0.0)
    p.add_argument("--beta-sd", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="simulated.csv")
    p.add_argument("--truth-out", default=None, help="defaults to <out stem>_truth.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-gradient", help="compare the analytic gradient with finite differences")
    _add_input_options(p)
    p.add_argument("--sigma-squared", type=float, default=100.0)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--scale", type=float, default=3.0, help="trial parameters uniform in [-scale, scale]")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(func=cmd_check_gradient)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cp = configparser.ConfigParser()
    if not cp.read(known.config):
        raise InputError(f"cannot read config {known.config}")
    if not cp.has_section("skillirt"):
        return
    values = dict(cp.items("skillirt"))
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        defaults = {}
        for action in sp._actions:
            key = action.option_strings[0].lstrip("-") if action.option_strings else None
            if key not in values:
                continue
            raw = values[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[action.dest] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                # argparse applies ``type`` to string defaults
                defaults[action.dest] = raw
                action.required = False
        sp.set_defaults(**defaults)


def schema_from_args(args) -> ColumnSchema:
    delim = "\t" if args.delimiter in ("tab", "\\t") else args.delimiter
    return ColumnSchema(
        student_column=args.student_column,
        skill_column=args.skill_column,
        correct_column=args.correct_column,
        order_column=args.order_column,
        delimiter=delim,
        multi_skill_separator=args.multi_skill_separator,
        expand_multi_skill=args.expand_multi_skill,
        true_values=tuple(v.strip() for v in args.true_values.split(",")),
        false_values=tuple(v.strip() for v in args.false_values.split(",")),
    )


def load_input(args) -> tuple[InteractionTable, InteractionTable, dict]:
    """Returns (full table, working table, cleaning document)."""
    errors: list[RowError] = []
    table, report = load_table(args.input, schema_from_args(args), errors)
    for e in errors[:20]:
        log.warning("row %d (line %d): %s", e.row, e.line, e.message)
    if len(errors) > 20:
        log.warning("... %d malformed rows in total", len(errors))
    doc = {"cleaning": json.loads(report.to_json()), "malformed_rows": len(errors)}
    work = table
    if args.subsample is not None:
        work = subsample(table, args.subsample, args.seed)
    doc["records"] = len(work)
    doc["students"] = work.num_students
    doc["skills"] = work.num_skills
    log.info("%d records, %d students, %d skills", len(work), work.num_students, work.num_skills)
    return table, work, doc


def fit_config(args) -> FitConfig:
    return FitConfig(
        max_iterations=args.max_iterations,
        gradient_tolerance=args.gradient_tolerance,
        objective_relative_tolerance=args.objective_tolerance,
        history_size=args.history_size,
        ridge_epsilon=args.ridge_epsilon,
    )


def _scores(labels, probs) -> dict:
    return {"records": int(len(labels)), "auc": auc(labels, probs), "log_loss": log_loss(labels, probs)}


def evaluate_models(args, full: InteractionTable, work: InteractionTable):
    """Fit the MAP model and the baseline and score both.

    In-sample mode fits and scores the MAP model on the working table and the
    baseline on the full table. Holdout mode splits the working table and
    fits and scores both models on the same split.
    """
    prior = PriorConfig(args.sigma_squared)
    config = fit_config(args)
    if args.holdout is not None:
        train, test = holdout_split(work, args.holdout, args.seed)
        base_train, base_test = train, test
    else:
        train = test = work
        base_train = base_test = full
    result = fit_map(train, prior, config)
    log.info("MAP fit: %s after %d iterations", result.termination_reason, result.iterations)
    baseline = fit_baseline(base_train, config)
    log.info("baseline fit: %s", baseline.outcome.termination_reason)
    p_map = record_probs(result.params, test)
    p_base = baseline.predict(base_test)
    metrics = {
        "evaluation": "holdout" if args.holdout is not None else "in_sample",
        "holdout_fraction": args.holdout,
        "models": [
            {"model": "baseline", **_scores(base_test.correct, p_base)},
            {"model": "hierarchical", "subsample": args.subsample, "seed": args.seed, **_scores(test.correct, p_map)},
        ],
    }
    return result, baseline, train, test, p_map, metrics


def _fit_document(result: FitResult, baseline, load_doc: dict) -> dict:
    return {"input": load_doc, "hierarchical": result.diagnostics(), "baseline": baseline.diagnostics()}


def _run_fit(args, with_analytics: bool) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    full, work, load_doc = load_input(args)
    result, baseline, train, test, p_map, metrics = evaluate_models(args, full, work)
    reports.write_json(out / "metrics.json", metrics)
    reports.write_json(out / "fit.json", _fit_document(result, baseline, load_doc))
    reports.write_json(out / "params.json", result.params.to_dict())
    reports.write_calibration(out / "calibration.csv", calibration(test.correct, p_map))
    ok = result.converged and baseline.converged

    if with_analytics:
        doc = reports.write_analytics(out, result, train)
        doc["metrics"] = metrics
        reports.write_json(out / "report.json", doc)
        if args.truth:
            truth = ModelParams.from_dict(json.loads(Path(args.truth).read_text()))
            t_theta, t_beta = truth.aligned_to(train)
            recovery = {
                "theta_correlation": float(np.corrcoef(result.params.theta, t_theta)[0, 1]),
                "beta_correlation": float(np.corrcoef(result.params.beta, t_beta)[0, 1]),
            }
            reports.write_json(out / "recovery.json", recovery)
            log.info("recovery: %s", recovery)
        if args.sensitivity:
            ok = _run_sensitivity(args, full, out) and ok

    if not ok:
        log.error("a fit did not converge; see fit.json")
        return EXIT_CONVERGENCE
    return EXIT_OK


def _run_sensitivity(args, full: InteractionTable, out: Path) -> bool:
    rows = []
    ok = True
    for n, seed in SENSITIVITY_GRID:
        if n > len(full):
            log.warning("skipping subsample %d: only %d records", n, len(full))
            continue
        run = argparse.Namespace(**{**vars(args), "subsample": n, "seed": seed})
        work = subsample(full, n, seed)
        result, baseline, *_rest, metrics = evaluate_models(run, full, work)
        ok = ok and result.converged and baseline.converged
        if not rows:
            b = metrics["models"][0]
            rows.append(["baseline", "", "", b["records"], b["auc"], b["log_loss"], baseline.converged])
        h = metrics["models"][1]
        rows.append(["hierarchical", n, seed, h["records"], h["auc"], h["log_loss"], result.converged])
    reports._write_csv(out / "sensitivity.csv", ["model", "subsample", "seed", "records", "auc", "log_loss", "converged"], rows)
    return ok


def cmd_fit(args) -> int:
    return _run_fit(args, with_analytics=True)


def cmd_evaluate(args) -> int:
    return _run_fit(args, with_analytics=False)


def cmd_report(args) -> int:
    _, work, _ = load_input(args)
    params = ModelParams.from_dict(json.loads(Path(args.params).read_text()))
    if params.student_labels != work.student_labels or params.skill_labels != work.skill_labels:
        raise InputError("params do not match the input table; use the same input and subsample flags as the fit")
    result = FitResult(params, True, 0, float("nan"), float("nan"), "loaded")
    doc = reports.write_analytics(Path(args.output), result, work)
    reports.write_json(Path(args.output) / "report.json", doc)
    return EXIT_OK


def _per_student(value: str):
    if ":" in value:
        lo, hi = value.split(":")
        return (int(lo), int(hi))
    return int(value)


def cmd_simulate(args) -> int:
    spec = SynthSpec(
        num_students=args.students,
        num_skills=args.skills,
        responses_per_student=_per_student(args.per_student),
        theta_mean=args.theta_mean,
        theta_sd=args.theta_sd,
        beta_mean=args.beta_mean,
        beta_sd=args.beta_sd,
        seed=args.seed,
    )
    table, truth = generate(spec)
    out = Path(args.out)
    with open(out, "w", newline="", encoding="utf-8") as f:
        table.to_csv(f)
    truth_path = Path(args.truth_out) if args.truth_out else out.with_name(out.stem + "_truth.json")
    truth_path.write_text(truth.to_json() + "\n", encoding="utf-8")
    log.info("wrote %d records to %s and parameters to %s", len(table), out, truth_path)
    return EXIT_OK


def cmd_check_gradient(args) -> int:
    _, work, _ = load_input(args)
    rng = SplitMix64(args.seed)
    x = args.scale * (2 * rng.random(work.num_students + work.num_skills) - 1)
    err = check_gradient(work, PriorConfig(args.sigma_squared), ModelParams.from_vector(x, work), args.step)
    print(f"max relative error {err:.3e} over {x.size} parameters")
    return EXIT_OK if err <= args.tolerance else EXIT_CONVERGENCE


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except InputError as e:
        print(f"skillirt: {e}", file=sys.stderr)
        return EXIT_INPUT
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (InputError, SchemaError, EmptyTableError, OSError, ValueError, KeyError) as e:
        log.error("%s", e)
        return EXIT_INPUT
    except OptimizationError as e:
        log.error("%s", e)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
