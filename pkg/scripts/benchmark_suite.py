#!/usr/bin/env python3
"""Run the standard multivariate benchmark protocol over local CSVs.

For every benchmark file found under --data-dir, runs the requested models
at the protocol look-back (L=96, or L=36 for the weekly-granularity ILI
file; --long-lookback switches the linear models to L=336) across the
standard horizons, then prints a comparison table with published reference
numbers side by side.

Example:
    python scripts/benchmark_suite.py --data-dir ./data --models repeat-c dlinear-s
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from dlinear.bench import DatasetSpec, ExperimentConfig, run
from dlinear.data import ETT_HOURLY_SPLIT, ETT_MINUTE_SPLIT, SplitSpec
from dlinear.metrics import comparison_report
from dlinear.train import TrainConfig

# dataset id -> (filename, split, L, horizons)
STANDARD = {
    "etth1": ("ETTh1.csv", ETT_HOURLY_SPLIT, 96, (96, 192, 336, 720)),
    "etth2": ("ETTh2.csv", ETT_HOURLY_SPLIT, 96, (96, 192, 336, 720)),
    "ettm1": ("ETTm1.csv", ETT_MINUTE_SPLIT, 96, (96, 192, 336, 720)),
    "ettm2": ("ETTm2.csv", ETT_MINUTE_SPLIT, 96, (96, 192, 336, 720)),
    "electricity": ("electricity.csv", SplitSpec(), 96, (96, 192, 336, 720)),
    "traffic": ("traffic.csv", SplitSpec(), 96, (96, 192, 336, 720)),
    "weather": ("weather.csv", SplitSpec(), 96, (96, 192, 336, 720)),
    "exchange_rate": ("exchange_rate.csv", SplitSpec(), 96, (96, 192, 336, 720)),
    "ili": ("national_illness.csv", SplitSpec(), 36, (24, 36, 48, 60)),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="data")
    parser.add_argument("--models", nargs="+", default=["repeat-c", "dlinear-s"],
                        choices=["repeat-c", "dlinear-s", "dlinear-i", "linear"])
    parser.add_argument("--datasets", nargs="+", default=list(STANDARD),
                        choices=list(STANDARD))
    parser.add_argument("--long-lookback", action="store_true",
                        help="use L=336 for the trained linear models")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="out/benchmark_suite")
    args = parser.parse_args()

    data_dir = Path(args.data_dir)
    summaries = []
    for dataset_id in args.datasets:
        filename, split_spec, L, horizons = STANDARD[dataset_id]
        path = data_dir / filename
        if not path.exists():
            print(f"[skip] {dataset_id}: {path} not found", file=sys.stderr)
            continue
        for model in args.models:
            model_L = L
            if args.long_lookback and model != "repeat-c" and dataset_id != "ili":
                model_L = 336
            for T in horizons:
                config = ExperimentConfig(
                    dataset=DatasetSpec(path=str(path), dataset_id=dataset_id),
                    split=split_spec, L=model_L, T=T, model=model,
                    train=TrainConfig(seed=args.seed),
                    output_dir=f"{args.out}/{dataset_id}_{model}_L{model_L}_T{T}",
                )
                summary = run(config)
                summaries.append(summary)
                print(summary.to_json_line())

    if summaries:
        print()
        print(comparison_report(summaries))
    else:
        print("no benchmark files found; nothing to do", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
