"""Command line entry points.

Subcommands: run, sweep, ablate-decomp, ablate-trainsize, bench-efficiency,
export-weights, decompose, synth. Experiment subcommands read a JSON config
document mirroring ExperimentConfig; --seed and --out override the config's
seed and output directory.

Exit codes: 0 success, 2 configuration error, 3 infeasible data,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import (ConfigError, SweepSpec, ablate_decomposition, ablate_train_size,
                    efficiency_report, export_trained_weights, load_config, run, sweep)
from .data import DatasetError, WindowingError, load_csv
from .decompose import decompose
from .metrics import comparison_report
from .synthetic import SyntheticSpec, generate
from .train import TrainingDivergedError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlinear",
                                     description="linear forecasting benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_args(p):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the training seed")
        p.add_argument("--out", default=None, help="override the output directory")

    p_run = sub.add_parser("run", help="run one experiment end to end")
    experiment_args(p_run)
    p_run.add_argument("--report", action="store_true",
                       help="print a comparison table against published reference numbers")

    p_sweep = sub.add_parser("sweep", help="run a look-back/horizon grid")
    experiment_args(p_sweep)
    p_sweep.add_argument("--L-grid", type=_int_list, default=None,
                         help="comma-separated look-back sizes")
    p_sweep.add_argument("--T-grid", type=_int_list, default=None,
                         help="comma-separated horizons")

    p_ad = sub.add_parser("ablate-decomp",
                          help="configured model vs its no-decomposition counterpart")
    experiment_args(p_ad)

    p_at = sub.add_parser("ablate-trainsize", help="full vs truncated train segment")
    experiment_args(p_at)
    p_at.add_argument("--short-steps", type=int, required=True,
                      help="keep only the most recent K train rows in the short run")

    p_eff = sub.add_parser("bench-efficiency", help="parameter/MAC/timing report")
    experiment_args(p_eff)
    p_eff.add_argument("--runs", type=int, default=5, help="timed forward passes")

    p_ew = sub.add_parser("export-weights", help="train and export branch weight grids")
    experiment_args(p_ew)

    p_dec = sub.add_parser("decompose",
                           help="split a CSV series into trend and remainder CSVs")
    p_dec.add_argument("--input", required=True, help="CSV series file")
    p_dec.add_argument("--out", required=True, help="output directory")
    p_dec.add_argument("--kernel-size", type=int, default=25)
    p_dec.add_argument("--timestamp-column", default=None)

    p_syn = sub.add_parser("synth", help="emit a synthetic series CSV")
    p_syn.add_argument("--kind", required=True,
                       choices=["sinusoid", "linear_trend", "trend_plus_seasonal",
                                "white_noise"])
    p_syn.add_argument("--length", type=int, required=True)
    p_syn.add_argument("--channels", type=int, default=1)
    p_syn.add_argument("--period", type=float, default=24.0)
    p_syn.add_argument("--amplitude", type=float, default=1.0)
    p_syn.add_argument("--slope", type=float, default=0.01)
    p_syn.add_argument("--noise-std", type=float, default=0.0)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--out", required=True, help="output CSV path")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    summary = run(config)
    print(summary.to_json_line())
    if args.report:
        print(comparison_report([summary]))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    doc = json.loads(Path(args.config).read_text())
    sweep_doc = doc.get("sweep", {})
    L_grid = args.L_grid or sweep_doc.get("L_grid")
    T_grid = args.T_grid or sweep_doc.get("T_grid") or [config.T]
    if not L_grid:
        raise ConfigError("sweep needs an L grid (--L-grid or config 'sweep.L_grid')")
    spec = SweepSpec(base=config, L_grid=tuple(L_grid), T_grid=tuple(T_grid))
    summaries = sweep(spec)
    for s in summaries:
        print(s.to_json_line())
    if not summaries:
        print("no feasible grid points", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_ablate_decomp(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    summary_d, summary_l = ablate_decomposition(config)
    print(summary_d.to_json_line())
    print(summary_l.to_json_line())
    print(f"mse delta (dlinear - linear): {summary_d.mse - summary_l.mse:+.6f}")
    return EXIT_OK


def _cmd_ablate_trainsize(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    summary_full, summary_short = ablate_train_size(config, args.short_steps)
    print(summary_full.to_json_line())
    print(summary_short.to_json_line())
    return EXIT_OK


def _cmd_efficiency(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    report = efficiency_report(config, n_runs=args.runs)
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_export_weights(args) -> int:
    config = load_config(args.config, seed=args.seed, output_dir=args.out)
    out_dir = args.out or config.output_dir
    if out_dir is None:
        raise ConfigError("export-weights needs an output directory (--out)")
    for path in export_trained_weights(config, out_dir):
        print(path)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    series = load_csv(args.input, timestamp_column=args.timestamp_column)
    try:
        pair = decompose(series.values, args.kernel_size)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = ["date", *series.variate_names]
    for name, block in (("trend", pair.trend), ("remainder", pair.remainder)):
        with open(out_dir / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for ts, row in zip(series.timestamps, block):
                writer.writerow([ts, *[repr(float(v)) for v in row]])
    print(out_dir / "trend.csv")
    print(out_dir / "remainder.csv")
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(kind=args.kind, length=args.length, channels=args.channels,
                             period=args.period, amplitude=args.amplitude,
                             slope=args.slope, noise_std=args.noise_std, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    series = generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *series.variate_names])
        for ts, row in zip(series.timestamps, series.values):
            writer.writerow([ts, *[repr(float(v)) for v in row]])
    meta = out.with_suffix(out.suffix + ".meta.json")
    meta.write_text(json.dumps(spec.to_dict(), indent=2))
    print(out)
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "ablate-decomp": _cmd_ablate_decomp,
    "ablate-trainsize": _cmd_ablate_trainsize,
    "bench-efficiency": _cmd_efficiency,
    "export-weights": _cmd_export_weights,
    "decompose": _cmd_decompose,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, WindowingError, FileNotFoundError) as exc:
        print(f"infeasible data: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except TrainingDivergedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
