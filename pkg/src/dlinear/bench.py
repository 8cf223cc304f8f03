"""Experiment runner: single runs, sweeps, ablations, efficiency accounting.

A run executes the whole pipeline (load, split, standardize, window, fit,
evaluate) from one declarative config and leaves a self-contained artifact
directory behind: the evaluation summary, the training report, a model
checkpoint, the preprocessing record, and a manifest with the config hash,
seed, data fingerprint, and library versions. Reruns of the same config and
seed reproduce the summary bit for bit.

Grid points of a sweep are independent (own model, own output directory) and
could run in parallel; this implementation runs them sequentially.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .data import (SplitSpec, TimeSeries, WindowingError, apply_scaler,
                   fit_scaler, load_csv, make_windows, save_preprocessing, split)
from .metrics import EvalSummary, evaluate
from .models import (DLinearModel, count_macs, count_params, export_weights,
                     init_linear_map, repeat_c, save_model)
from .synthetic import SyntheticSpec, generate, spec_from_dict
from .train import TrainConfig, fit

log = logging.getLogger(__name__)

MODEL_KINDS = ("dlinear-s", "dlinear-i", "linear", "repeat-c")


class ConfigError(Exception):
    """A config document is malformed or inconsistent."""


@dataclass(frozen=True)
class DatasetSpec:
    """Where a run's data comes from: a CSV path or a synthetic spec.

    ``channels`` alone is enough for efficiency accounting, which never
    touches real data.
    """

    path: Optional[str] = None
    timestamp_column: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    channels: Optional[int] = None
    dataset_id: Optional[str] = None

    def __post_init__(self):
        if sum(x is not None for x in (self.path, self.synthetic, self.channels)) != 1:
            raise ConfigError(
                "dataset must give exactly one of: path, synthetic, channels"
            )

    def resolve_id(self) -> str:
        if self.dataset_id:
            return self.dataset_id
        if self.path is not None:
            return Path(self.path).stem.lower()
        if self.synthetic is not None:
            return f"synthetic-{self.synthetic.kind}"
        return f"channels-{self.channels}"

    def load(self) -> TimeSeries:
        if self.path is not None:
            return load_csv(self.path, timestamp_column=self.timestamp_column)
        if self.synthetic is not None:
            return generate(self.synthetic)
        raise ConfigError("a channels-only dataset has no data to load")

    def fingerprint(self) -> str:
        if self.path is not None:
            h = hashlib.sha256()
            with open(self.path, "rb") as fh:
                for block in iter(lambda: fh.read(1 << 20), b""):
                    h.update(block)
            return h.hexdigest()[:16]
        if self.synthetic is not None:
            doc = json.dumps(self.synthetic.to_dict(), sort_keys=True)
            return hashlib.sha256(doc.encode()).hexdigest()[:16]
        return "none"

    def to_dict(self) -> dict:
        out = {}
        if self.path is not None:
            out["path"] = str(self.path)
            if self.timestamp_column is not None:
                out["timestamp_column"] = self.timestamp_column
        if self.synthetic is not None:
            out["synthetic"] = self.synthetic.to_dict()
        if self.channels is not None:
            out["channels"] = self.channels
        if self.dataset_id is not None:
            out["dataset_id"] = self.dataset_id
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    split: SplitSpec = SplitSpec()
    L: int = 96
    T: int = 96
    model: str = "dlinear-s"
    kernel_size: int = 25
    train: TrainConfig = TrainConfig()
    output_dir: Optional[str] = None
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.L < 1 or self.T < 1:
            raise ConfigError(f"L and T must be positive, got L={self.L}, T={self.T}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")

    def to_dict(self) -> dict:
        split_doc = {"mode": self.split.mode}
        if self.split.mode == "ratio":
            split_doc.update(train_fraction=self.split.train_fraction,
                             val_fraction=self.split.val_fraction,
                             test_fraction=self.split.test_fraction)
        else:
            split_doc.update(train_steps=self.split.train_steps,
                             val_steps=self.split.val_steps,
                             test_steps=self.split.test_steps)
        if self.split.train_truncate_steps is not None:
            split_doc["train_truncate_steps"] = self.split.train_truncate_steps
        return {
            "dataset": self.dataset.to_dict(),
            "split": split_doc,
            "L": self.L,
            "T": self.T,
            "model": self.model,
            "kernel_size": self.kernel_size,
            "train": {
                "learning_rate": self.train.learning_rate,
                "batch_size": self.train.batch_size,
                "max_epochs": self.train.max_epochs,
                "patience": self.train.patience,
                "seed": self.train.seed,
                "optimizer": self.train.optimizer,
            },
            "output_dir": self.output_dir,
            "tags": list(self.tags),
        }

    def hash(self) -> str:
        doc = dict(self.to_dict())
        doc.pop("output_dir", None)  # where artifacts land does not change the run
        canonical = json.dumps(doc, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed config document."""
    try:
        ds_doc = doc["dataset"]
    except (KeyError, TypeError):
        raise ConfigError("config must contain a 'dataset' section") from None
    try:
        synthetic = (spec_from_dict(ds_doc["synthetic"])
                     if "synthetic" in ds_doc else None)
        dataset = DatasetSpec(path=ds_doc.get("path"),
                              timestamp_column=ds_doc.get("timestamp_column"),
                              synthetic=synthetic,
                              channels=ds_doc.get("channels"),
                              dataset_id=ds_doc.get("dataset_id"))
        split_doc = dict(doc.get("split", {}))
        split_spec = SplitSpec(**split_doc) if split_doc else SplitSpec()
        train_doc = dict(doc.get("train", {}))
        train_config = TrainConfig(**train_doc) if train_doc else TrainConfig()
        return ExperimentConfig(
            dataset=dataset,
            split=split_spec,
            L=int(doc.get("L", 96)),
            T=int(doc.get("T", 96)),
            model=doc.get("model", "dlinear-s"),
            kernel_size=int(doc.get("kernel_size", 25)),
            train=train_config,
            output_dir=doc.get("output_dir"),
            tags=tuple(doc.get("tags", ())),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc


def load_config(path, seed: Optional[int] = None,
                output_dir: Optional[str] = None) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    config = config_from_dict(doc)
    if seed is not None:
        config = replace(config, train=replace(config.train, seed=seed))
    if output_dir is not None:
        config = replace(config, output_dir=output_dir)
    return config


def build_model(config: ExperimentConfig, C: int):
    """Instantiate the configured forecaster; None for the repeat baseline."""
    if config.model == "dlinear-s":
        return DLinearModel(mode="shared", L=config.L, T=config.T, C=C,
                            kernel_size=config.kernel_size)
    if config.model == "dlinear-i":
        return DLinearModel(mode="individual", L=config.L, T=config.T, C=C,
                            kernel_size=config.kernel_size)
    if config.model == "linear":
        return init_linear_map(config.L, config.T)
    return None  # repeat-c has no parameters


def _versions() -> dict:
    return {"python": platform.python_version(),
            "numpy": np.__version__,
            "dlinear": __version__}


def _write_manifest(out_dir: Path, config: ExperimentConfig) -> None:
    manifest = {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "seed": config.train.seed,
        "data_fingerprint": config.dataset.fingerprint(),
        "versions": _versions(),
    }
    if config.dataset.synthetic is not None:
        manifest["noise_algorithm"] = config.dataset.synthetic.to_dict()["noise_algorithm"]
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def prepare_windows(config: ExperimentConfig):
    """load -> split -> scale -> window; returns (train, val, test) window lists
    plus the fitted scaler and the raw series."""
    series = config.dataset.load()
    train_seg, val_seg, test_seg = split(series, config.split)
    scaler = fit_scaler(train_seg)
    train_s = apply_scaler(train_seg, scaler, "forward")
    val_s = apply_scaler(val_seg, scaler, "forward")
    test_s = apply_scaler(test_seg, scaler, "forward")

    train_w = make_windows(train_s, None, config.L, config.T)
    # Val and test may look back across their left boundary; a val segment
    # too short to hold a single target block just yields no val windows.
    try:
        val_w = make_windows(val_s, train_s, config.L, config.T)
    except WindowingError:
        val_w = []
    before_test = TimeSeries(
        values=np.concatenate([train_s.values, val_s.values]),
        timestamps=train_s.timestamps + val_s.timestamps,
        variate_names=series.variate_names,
    )
    test_w = make_windows(test_s, before_test, config.L, config.T)
    return series, scaler, train_w, val_w, test_w


def run(config: ExperimentConfig) -> EvalSummary:
    """Execute one experiment end to end and persist its artifacts."""
    series, scaler, train_w, val_w, test_w = prepare_windows(config)
    dataset_id = config.dataset.resolve_id()

    model = build_model(config, series.n_variates)
    report = None
    if model is None:
        forward = lambda x: repeat_c(x, config.T)  # noqa: E731
    else:
        report = fit(model, train_w, val_w, config.train)
        forward = model.forward_batch

    summary = evaluate(forward, test_w, dataset_id=dataset_id, model_id=config.model)

    if config.output_dir is not None:
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "summary.json").write_text(summary.to_json_line() + "\n")
        save_preprocessing(out_dir / "preprocessing.json", config.split,
                           series.n_steps, scaler)
        if report is not None:
            (out_dir / "train_report.json").write_text(report.to_json())
        if model is not None:
            save_model(model, out_dir / "model.json")
        _write_manifest(out_dir, config)
    return summary


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentConfig
    L_grid: tuple[int, ...]
    T_grid: tuple[int, ...]

    def __post_init__(self):
        if not self.L_grid or not self.T_grid:
            raise ConfigError("sweep grids must be non-empty")


def sweep(spec: SweepSpec) -> list[EvalSummary]:
    """Run the L x T cross product with a shared seed; skip infeasible pairs.

    Writes a long-format curve file (L, T, model, mse, mae) under the base
    output directory when one is set.
    """
    summaries = []
    rows = []
    base_out = spec.base.output_dir
    for L in spec.L_grid:
        for T in spec.T_grid:
            out = str(Path(base_out) / f"L{L}_T{T}") if base_out else None
            config = replace(spec.base, L=L, T=T, output_dir=out)
            try:
                summary = run(config)
            except (WindowingError, ValueError) as exc:
                log.warning("skipping infeasible grid point L=%d T=%d: %s", L, T, exc)
                continue
            summaries.append(summary)
            rows.append((L, T, config.model, summary.mse, summary.mae))
    if base_out is not None:
        Path(base_out).mkdir(parents=True, exist_ok=True)
        lines = ["L,T,model,mse,mae"]
        lines += [f"{L},{T},{m},{mse!r},{mae!r}" for L, T, m, mse, mae in rows]
        (Path(base_out) / "curve.csv").write_text("\n".join(lines) + "\n")
    return summaries


def ablate_decomposition(config: ExperimentConfig) -> tuple[EvalSummary, EvalSummary]:
    """The configured decomposition model vs its single-map counterpart,
    on identical data, seed, and training settings."""
    if config.model not in ("dlinear-s", "dlinear-i"):
        raise ConfigError(
            f"decomposition ablation needs a dlinear model, got {config.model!r}"
        )
    base_out = config.output_dir
    with_decomp = replace(
        config, output_dir=str(Path(base_out) / "dlinear") if base_out else None)
    without = replace(
        config, model="linear",
        output_dir=str(Path(base_out) / "linear") if base_out else None)
    summary_d = run(with_decomp)
    summary_l = run(without)
    if base_out is not None:
        delta = {
            "dlinear_mse": summary_d.mse, "linear_mse": summary_l.mse,
            "dlinear_mae": summary_d.mae, "linear_mae": summary_l.mae,
            "mse_delta": summary_d.mse - summary_l.mse,
            "mae_delta": summary_d.mae - summary_l.mae,
        }
        Path(base_out).mkdir(parents=True, exist_ok=True)
        (Path(base_out) / "ablation.json").write_text(json.dumps(delta, indent=2))
    return summary_d, summary_l


def ablate_train_size(config: ExperimentConfig,
                      short_steps: int) -> tuple[EvalSummary, EvalSummary]:
    """Full train segment vs its most recent ``short_steps`` rows."""
    if short_steps < 1:
        raise ConfigError("short_steps must be positive")
    base_out = config.output_dir
    full = replace(config,
                   output_dir=str(Path(base_out) / "full") if base_out else None)
    short_split = replace(config.split, train_truncate_steps=short_steps)
    short = replace(config, split=short_split,
                    output_dir=str(Path(base_out) / "short") if base_out else None)
    summary_full = run(full)
    summary_short = run(short)
    if base_out is not None:
        Path(base_out).mkdir(parents=True, exist_ok=True)
        (Path(base_out) / "trainsize.json").write_text(json.dumps({
            "full_mse": summary_full.mse, "short_mse": summary_short.mse,
            "short_steps": short_steps,
        }, indent=2))
    return summary_full, summary_short


def efficiency_report(config: ExperimentConfig, n_runs: int = 5) -> dict:
    """Parameter, MAC, and wall-clock accounting for one model.

    Timing is the mean of ``n_runs`` forward passes on one batch after a
    warm-up pass, reported with its dispersion, never as a single sample.
    """
    if config.dataset.channels is not None:
        C = config.dataset.channels
    elif config.dataset.synthetic is not None:
        C = config.dataset.synthetic.channels
    else:
        C = config.dataset.load().n_variates
    model = build_model(config, C)
    if model is None:
        params, macs = 0, 0
        forward = lambda x: repeat_c(x, config.T)  # noqa: E731
    else:
        params = count_params(model)
        macs = count_macs(model, C)
        forward = model.forward_batch

    rng = np.random.Generator(np.random.PCG64(config.train.seed))
    batch = rng.standard_normal((config.train.batch_size, config.L, C))
    forward(batch)  # warm-up
    times = []
    for _ in range(max(n_runs, 5)):
        t0 = time.perf_counter()
        forward(batch)
        times.append(time.perf_counter() - t0)
    try:
        import resource
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except Exception:  # platform without rusage
        peak = None
    report = {
        "model": config.model,
        "L": config.L, "T": config.T, "C": C,
        "params": params,
        "macs": macs,
        "batch_size": config.train.batch_size,
        "n_timed_runs": len(times),
        "mean_inference_seconds": float(np.mean(times)),
        "std_inference_seconds": float(np.std(times)),
        "inference_seconds": times,
        "peak_resident_bytes": peak,
    }
    if config.output_dir is not None:
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "efficiency.json").write_text(json.dumps(report, indent=2))
    return report


def export_trained_weights(config: ExperimentConfig, out_dir) -> list[Path]:
    """Train the configured model and export its branch weight grids."""
    series, scaler, train_w, val_w, test_w = prepare_windows(config)
    model = build_model(config, series.n_variates)
    if model is None:
        raise ConfigError("repeat-c has no weights to export")
    fit(model, train_w, val_w, config.train)
    return export_weights(model, out_dir, variate_names=series.variate_names)
