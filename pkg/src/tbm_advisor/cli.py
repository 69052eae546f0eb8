"""Command-line front door: fit physics, generate data, train, evaluate,
optimize, run studies, serve.

Exit codes: 0 success, 1 invalid input (including bad flags), 2 runtime
failure.  Machine-readable output goes to stdout, everything else to stderr.
Commands that draw random numbers refuse to run without an explicit seed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import datagen, decision, mapping, physics, service, study
from .decision import dumps_document
from .errors import DomainError, FitError, InvalidInputError


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; our contract reserves 2 for
    runtime failures, so bad flags exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(doc: dict) -> None:
    sys.stdout.write(dumps_document(doc) + "\n")


def _log(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _read_json(path, what: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {what} {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{what} {path} must hold a JSON object")
    return doc


def cmd_fit_physics(args) -> int:
    samples = physics.read_cutting_csv(args.cutting_data)
    fn, fn_report = physics.fit_force_polynomial(samples, target="normal")
    fr, fr_report = physics.fit_force_polynomial(samples, target="rolling")
    cp = physics.fit_cp_rule(samples)
    rules = physics.PhysicsRules(fn=fn, fr=fr, cp=cp, layout=physics.default_layout())
    physics.save_rules(rules, args.out)
    _log(f"fitted physics rules from {fn_report.n_samples} samples -> {args.out}")
    _emit(
        {
            "fn": {"rmse": fn_report.rmse, "max_abs_residual": fn_report.max_abs_residual},
            "fr": {"rmse": fr_report.rmse, "max_abs_residual": fr_report.max_abs_residual},
            "cp": {"a": cp.a, "b": cp.b, "ucs_domain_max": cp.ucs_domain_max},
            "n_samples": fn_report.n_samples,
            "digest": physics.rules_digest(rules),
        }
    )
    return 0


def cmd_gen(args) -> int:
    doc = _read_json(args.config, "generator config") if args.config else {}
    doc["seed"] = args.seed
    cfg = datagen.GenConfig.from_dict(doc)
    samples = datagen.generate_dataset(cfg)
    datagen.write_dataset_csv(samples, args.out)
    _log(f"wrote {len(samples)} samples -> {args.out}")
    _emit(
        {
            "rows": len(samples),
            "outliers": sum(1 for s in samples if s.is_outlier),
            "seed": cfg.seed,
            "path": str(args.out),
        }
    )
    return 0


def cmd_train(args) -> int:
    hp_doc = _read_json(args.hp, "hyperparameter file")
    if "seed" not in hp_doc:
        raise InvalidInputError("hyperparameter file must set an explicit seed")
    hp = mapping.Hyperparams.from_dict(hp_doc)
    rules = physics.load_rules(args.physics)
    dataset = datagen.read_dataset_csv(args.data)
    _log(f"training on {len(dataset)} samples (seed {hp.seed})")
    model, report = mapping.train(dataset, hp, rules=rules)
    mapping.save_model(model, args.out)
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    _log(f"model -> {args.out} ({report.wall_time_s:.2f} s)")
    _emit(
        {
            "model_digest": mapping.model_digest(model),
            "metrics": report.metrics.to_dict() if report.metrics else None,
            "train_count": report.train_count,
            "test_count": report.test_count,
        }
    )
    return 0


def cmd_eval(args) -> int:
    model = mapping.load_model(args.model)
    dataset = datagen.read_dataset_csv(args.data)
    metrics = mapping.evaluate(model, dataset)
    _emit(metrics.to_dict())
    return 0


def cmd_optimize(args) -> int:
    model = mapping.load_model(args.model)
    rules = physics.load_rules(args.physics)
    ctx = decision.DecisionContext.from_dict(_read_json(args.context, "context file"))
    limits = (
        decision.RatedLimits.from_dict(_read_json(args.limits, "limits file"))
        if args.limits else None
    )
    cost_model = (
        decision.CostModel.from_dict(_read_json(args.cost, "cost file"))
        if args.cost else None
    )
    grid = (
        decision.GridSpec.from_dict(_read_json(args.grid, "grid file"))
        if args.grid else None
    )
    doc = decision.optimize_document(
        model, rules, ctx, limits, cost_model, grid,
        model_digest=mapping.model_digest(model),
    )
    Path(args.out).write_text(dumps_document(doc) + "\n")
    if args.region_csv:
        result = decision.optimize(model, rules, ctx, limits, cost_model, grid)
        decision.write_region_csv(result, args.region_csv)
    _log(f"decision document -> {args.out}")
    _emit(
        {
            "status": doc["status"],
            "optimum": doc["optimum"],
            "cost": doc["cost"],
            "feasible_count": doc["feasible_count"],
            "path": str(args.out),
        }
    )
    return 0


def cmd_deduce(args) -> int:
    model = mapping.load_model(args.model)
    rules = physics.load_rules(args.physics)
    dgrid = (
        study.DeductionGrid.from_dict(_read_json(args.ranges, "ranges file"))
        if args.ranges else study.DeductionGrid()
    )
    result = study.deduction_study(model, rules, dgrid=dgrid)
    study.write_study_csv(result, args.out)
    _log(
        f"{len(result.rows)} combinations -> {args.out} "
        f"({result.infeasible_count} infeasible)"
    )
    _emit(
        {
            "rows": len(result.rows),
            "infeasible": result.infeasible_count,
            "stats": result.stats_to_dict(),
            "path": str(args.out),
        }
    )
    return 0


def cmd_compare(args) -> int:
    sections = study.read_sections_csv(args.sections)
    _emit(
        {
            metric: study.compare_methods(sections, metric).to_dict()
            for metric in study.METRICS
        }
    )
    return 0


def _parse_addr(addr: str):
    host, sep, port = addr.rpartition(":")
    if not sep or not host:
        raise InvalidInputError(f"--addr must look like HOST:PORT, got {addr!r}")
    try:
        port = int(port)
    except ValueError:
        raise InvalidInputError(f"--addr port must be an integer, got {port!r}")
    if not 0 <= port <= 65535:
        raise InvalidInputError(f"--addr port out of range: {port}")
    return host, port


def cmd_serve(args) -> int:
    host, port = _parse_addr(args.addr)
    config = service.ServiceConfig(
        model_path=args.model, physics_path=args.physics, host=host, port=port,
    )
    return service.run(config)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tbm-advisor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-physics", help="fit force and chip-formation rules from cutting tests")
    p.add_argument("--cutting-data", required=True, help="cutting-test CSV")
    p.add_argument("--out", required=True, help="physics rules JSON to write")
    p.set_defaults(func=cmd_fit_physics)

    p = sub.add_parser("gen", help="generate a synthetic field dataset")
    p.add_argument("--config", help="generator config JSON (optional)")
    p.add_argument("--seed", required=True, type=int, help="RNG seed (mandatory)")
    p.add_argument("--out", required=True, help="dataset CSV to write")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the rock-machine mapping")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--physics", required=True, help="physics rules JSON")
    p.add_argument("--hp", required=True, help="hyperparameter JSON (must include seed)")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.add_argument("--report", help="training report JSON to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="find the cheapest feasible operating point")
    p.add_argument("--model", required=True)
    p.add_argument("--physics", required=True)
    p.add_argument("--context", required=True, help="rock context JSON")
    p.add_argument("--limits", help="rated limits JSON (optional)")
    p.add_argument("--cost", help="cost model JSON (optional)")
    p.add_argument("--grid", help="grid spec JSON (optional)")
    p.add_argument("--out", required=True, help="decision document JSON to write")
    p.add_argument("--region-csv", help="also write the per-cell region CSV here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("deduce", help="sweep rock parameters and summarize optima")
    p.add_argument("--model", required=True)
    p.add_argument("--physics", required=True)
    p.add_argument("--ranges", help="level overrides JSON (optional)")
    p.add_argument("--out", required=True, help="study CSV to write")
    p.set_defaults(func=cmd_deduce)

    p = sub.add_parser("compare", help="compare operator and model sections")
    p.add_argument("--sections", required=True, help="sections CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP advisor service")
    p.add_argument("--model", required=True)
    p.add_argument("--physics", required=True)
    p.add_argument("--addr", required=True, help="HOST:PORT to bind")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    try:
        return args.func(args)
    except (InvalidInputError, DomainError) as exc:
        _log(f"error: {exc}")
        return 1
    except (FitError, OSError) as exc:
        _log(f"runtime error: {exc}")
        return 2
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # pragma: no cover - last resort
        _log(f"unexpected error: {type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
