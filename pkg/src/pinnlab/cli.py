"""Command-line entry point.

    pinnlab train --config paper_tanh [--set learning_rate=1e-3] [--out DIR]
    pinnlab tune --config grid_search [--mode random] [--search-seed 7]
                 [--activations tanh,gelu] [--jobs N] [--out DIR]
    pinnlab export-field --params DIR/params.json [--grid-n 100] [--out DIR]
    pinnlab report --from DIR/report.json [--out DIR]

Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
from datetime import datetime, timezone
import json
import os
from pathlib import Path
import sys
import time

from .config import load_config, preset_names
from .hypertune import SearchReport, run_search
from .network import ConfigError, params_from_json, params_to_json
from .problem import field_csv
from .training import TrainingDiverged, TrainReport, train

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def _write(out_dir, name, text):
    path = Path(out_dir) / name
    path.write_text(text)
    return path


def _write_meta(out_dir, command, wall_seconds, **extra):
    # timestamps live only here so the result files stay byte-identical across reruns
    meta = {
        "command": command,
        "finished_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_seconds": wall_seconds,
        **extra,
    }
    _write(out_dir, "meta.json", json.dumps(meta, indent=1) + "\n")


def _out_dir(args, exp):
    out = Path(args.out or exp.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_train_outputs(out, report: TrainReport):
    _write(out, "report.json", report.to_json())
    _write(out, "loss.csv", report.loss_csv())
    _write(out, "mae.csv", report.mae_csv())
    _write(out, "params.json", params_to_json(report.config.spec, report.final_params))


def write_search_outputs(out, report: SearchReport):
    _write(out, "search.json", report.to_json())
    _write(out, "trials.csv", report.trials_csv())
    _write(out, "summary.csv", report.summary_csv())


def cmd_train(args):
    exp = load_config(args.config, args.set)
    out = _out_dir(args, exp)
    try:
        report = train(exp.train)
    except TrainingDiverged as exc:
        _write(out, "diagnostic.json", json.dumps(exc.diagnostic(), indent=1) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_train_outputs(out, report)
    _write_meta(out, "train", report.wall_seconds)
    maes = ", ".join(f"{k}: {v:.3e}" for k, v in sorted(report.mae_at.items()))
    print(f"{report.stop_reason.value} after {report.epochs_run} epochs; "
          f"final MAE {report.final_mae:.3e}" + (f"; MAE at {maes}" if maes else ""))
    return EXIT_OK


def cmd_tune(args):
    overrides = list(args.set)
    if args.mode:
        overrides.append(f"search.mode={args.mode}")
    if args.search_seed is not None:
        overrides.append(f"search.seed={args.search_seed}")
    if args.activations:
        acts = [a.strip() for a in args.activations.split(",") if a.strip()]
        overrides.append("search.activations=[" + ", ".join(json.dumps(a) for a in acts) + "]")
    exp = load_config(args.config, overrides)
    out = _out_dir(args, exp)
    start = time.perf_counter()
    report = run_search(exp.space, exp.train, exp.search_activations,
                        jobs=args.jobs or os.cpu_count() or 1,
                        search_epochs=exp.search_epochs,
                        retrain_epochs=exp.retrain_epochs or None)
    write_search_outputs(out, report)
    _write_meta(out, "tune", time.perf_counter() - start, trials=len(report.trials))
    for act, best in report.best_per_activation.items():
        mae = best["mae_at"].get(max(best["mae_at"]), float("inf")) if best["mae_at"] else None
        print(f"{act}: best learning rate {best['learning_rate']:.4e}, MAE {mae:.3e}")
    return EXIT_OK


def cmd_export_field(args):
    try:
        text = Path(args.params).read_text()
    except OSError as exc:
        raise ConfigError(f"params file: {exc}") from exc
    spec, params = params_from_json(text)
    if args.config:
        exp = load_config(args.config, args.set)
        if exp.train.spec != spec:
            raise ConfigError("params file: network shape does not match the config's spec")
    out = Path(args.out or Path(args.params).parent)
    out.mkdir(parents=True, exist_ok=True)
    path = _write(out, "field.csv", field_csv(spec, params, args.grid_n))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args):
    src = Path(args.source)
    try:
        doc = json.loads(src.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--from: cannot read {src} ({exc})") from exc
    out = Path(args.out or src.parent)
    out.mkdir(parents=True, exist_ok=True)
    if "trials" in doc:
        write_search_outputs(out, SearchReport.from_dict(doc))
    elif "loss_history" in doc:
        write_train_outputs(out, TrainReport.from_dict(doc))
    else:
        raise ConfigError(f"--from: {src} is neither a training nor a search report")
    print(f"regenerated outputs in {out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="pinnlab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p, required=True):
        p.add_argument("--config", required=required,
                       help=f"config file or preset ({', '.join(preset_names())})")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", help="output directory (default: output_dir from the config)")

    p = sub.add_parser("train", help="train one network")
    with_config(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="learning-rate search")
    with_config(p)
    p.add_argument("--mode", choices=["grid", "random"])
    p.add_argument("--search-seed", type=int)
    p.add_argument("--activations", help="comma separated, e.g. tanh,gelu")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("export-field", help="write field.csv for saved parameters")
    p.add_argument("--params", required=True, help="params.json written by train")
    p.add_argument("--grid-n", type=int, default=100)
    with_config(p, required=False)
    p.set_defaults(func=cmd_export_field)

    p = sub.add_parser("report", help="regenerate CSVs from report.json or search.json")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "grid_n", 2) < 2:
        parser.error("--grid-n must be at least 2")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
