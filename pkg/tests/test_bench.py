import json
from dataclasses import replace

import numpy as np
import pytest

from dlinear.bench import (ConfigError, DatasetSpec, ExperimentConfig, SweepSpec,
                           ablate_decomposition, ablate_train_size, build_model,
                           config_from_dict, efficiency_report, export_trained_weights,
                           prepare_windows, run, sweep)
from dlinear.data import SplitSpec
from dlinear.models import DLinearModel, LinearMap
from dlinear.synthetic import SyntheticSpec
from dlinear.train import TrainConfig


def synth_config(tmp_path=None, *, kind="trend_plus_seasonal", n=900, channels=1,
                 period=24.0, noise=0.2, slope=1e-3, L=48, T=12, model="dlinear-s",
                 seed=0, epochs=4, **train_kw) -> ExperimentConfig:
    return ExperimentConfig(
        dataset=DatasetSpec(synthetic=SyntheticSpec(
            kind=kind, length=n, channels=channels, period=period,
            amplitude=1.0, slope=slope, noise_std=noise, seed=seed)),
        split=SplitSpec(),
        L=L, T=T, model=model, kernel_size=25,
        train=TrainConfig(max_epochs=epochs, patience=epochs, seed=seed, **train_kw),
        output_dir=str(tmp_path) if tmp_path is not None else None,
    )


class TestDatasetSpec:
    def test_exactly_one_source_required(self):
        with pytest.raises(ConfigError, match="exactly one"):
            DatasetSpec()
        with pytest.raises(ConfigError, match="exactly one"):
            DatasetSpec(path="x.csv", channels=3)

    def test_ids(self):
        assert DatasetSpec(path="/data/ETTh1.csv").resolve_id() == "etth1"
        spec = DatasetSpec(synthetic=SyntheticSpec(kind="sinusoid", length=10))
        assert spec.resolve_id() == "synthetic-sinusoid"
        assert DatasetSpec(path="x.csv", dataset_id="custom").resolve_id() == "custom"

    def test_synthetic_fingerprint_tracks_spec(self):
        a = DatasetSpec(synthetic=SyntheticSpec(kind="sinusoid", length=10, seed=1))
        b = DatasetSpec(synthetic=SyntheticSpec(kind="sinusoid", length=10, seed=2))
        assert a.fingerprint() != b.fingerprint()
        assert a.fingerprint() == DatasetSpec(
            synthetic=SyntheticSpec(kind="sinusoid", length=10, seed=1)).fingerprint()


class TestConfigParsing:
    def test_round_trip(self):
        config = synth_config(L=24, T=6, model="linear")
        back = config_from_dict(config.to_dict())
        assert back.L == 24 and back.T == 6 and back.model == "linear"
        assert back.hash() == config.hash()

    def test_hash_ignores_output_dir(self):
        config = synth_config()
        assert config.hash() == replace(config, output_dir="elsewhere").hash()

    def test_hash_tracks_seed(self):
        config = synth_config()
        reseeded = replace(config, train=replace(config.train, seed=99))
        assert config.hash() != reseeded.hash()

    @pytest.mark.parametrize("doc,msg", [
        ({}, "dataset"),
        ({"dataset": {"synthetic": {"kind": "sinusoid", "length": 10}},
          "model": "prophet"}, "model"),
        ({"dataset": {"synthetic": {"kind": "sinusoid", "length": 10}},
          "train": {"optimizer": "rmsprop"}}, "bad config"),
        ({"dataset": {"synthetic": {"kind": "sinusoid", "length": 10}},
          "split": {"mode": "weird"}}, "bad config"),
    ])
    def test_bad_documents(self, doc, msg):
        with pytest.raises(ConfigError, match=msg):
            config_from_dict(doc)

    def test_build_model_kinds(self):
        config = synth_config()
        assert isinstance(build_model(replace(config, model="dlinear-s"), 3), DLinearModel)
        assert build_model(replace(config, model="dlinear-i"), 3).mode == "individual"
        assert isinstance(build_model(replace(config, model="linear"), 3), LinearMap)
        assert build_model(replace(config, model="repeat-c"), 3) is None


class TestRun:
    def test_writes_complete_artifact_directory(self, tmp_path):
        config = synth_config(tmp_path / "runA")
        summary = run(config)
        out = tmp_path / "runA"
        for name in ("summary.json", "train_report.json", "model.json",
                     "preprocessing.json", "manifest.json"):
            assert (out / name).exists(), name
        on_disk = json.loads((out / "summary.json").read_text())
        assert on_disk == json.loads(summary.to_json_line())
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_hash"] == config.hash()
        assert manifest["seed"] == config.train.seed
        assert manifest["data_fingerprint"] == config.dataset.fingerprint()
        assert "numpy" in manifest["versions"]
        assert "PCG64" in manifest["noise_algorithm"]

    def test_manifest_is_enough_to_reexecute(self, tmp_path):
        run(synth_config(tmp_path / "orig", seed=5))
        manifest = json.loads((tmp_path / "orig" / "manifest.json").read_text())
        rebuilt = config_from_dict(manifest["config"])
        rerun = run(replace(rebuilt, output_dir=None))
        first = json.loads((tmp_path / "orig" / "summary.json").read_text())
        assert rerun.to_json_line() == json.dumps(first, sort_keys=True)

    def test_repeat_c_needs_no_training(self, tmp_path):
        config = synth_config(tmp_path / "rc", model="repeat-c")
        summary = run(config)
        assert summary.model_id == "repeat-c"
        assert not (tmp_path / "rc" / "train_report.json").exists()
        assert not (tmp_path / "rc" / "model.json").exists()

    def test_bit_identical_rerun(self, tmp_path):
        config = synth_config()
        assert run(config).to_json_line() == run(config).to_json_line()

    def test_infeasible_window_surfaces(self):
        config = synth_config(n=120, L=200, T=24)
        from dlinear.data import WindowingError
        with pytest.raises(WindowingError):
            run(config)

    def test_ili_protocol_shape_is_feasible(self):
        # the weekly-granularity protocol: 966 rows, L=36, horizons {24,36,48,60}
        for T in (24, 36, 48, 60):
            config = synth_config(n=966, L=36, T=T, model="repeat-c", period=52.0)
            summary = run(config)
            assert summary.L == 36 and summary.T == T

    def test_val_context_crosses_split_boundary(self):
        config = synth_config(n=600, L=48, T=12)
        series, scaler, train_w, val_w, test_w = prepare_windows(config)
        # every target row of val/test is reachable thanks to borrowed context
        assert len(val_w) == 60 - 12 + 1
        assert len(test_w) == 120 - 12 + 1


class TestSweep:
    def test_cross_product_and_curve_file(self, tmp_path):
        base = synth_config(tmp_path / "sw", n=400, epochs=2)
        res = sweep(SweepSpec(base=base, L_grid=(12, 24), T_grid=(6, 12)))
        assert len(res) == 4
        curve = (tmp_path / "sw" / "curve.csv").read_text().strip().splitlines()
        assert curve[0] == "L,T,model,mse,mae"
        assert len(curve) == 5
        assert {int(line.split(",")[0]) for line in curve[1:]} == {12, 24}

    def test_infeasible_points_skipped_with_warning(self, tmp_path, caplog):
        base = synth_config(tmp_path / "sw2", n=400, epochs=2)
        with caplog.at_level("WARNING"):
            res = sweep(SweepSpec(base=base, L_grid=(12, 5000), T_grid=(6,)))
        assert len(res) == 1
        assert any("infeasible" in r.message for r in caplog.records)

    def test_empty_feasible_set(self, tmp_path):
        base = synth_config(tmp_path / "sw3", n=100, epochs=1)
        res = sweep(SweepSpec(base=base, L_grid=(5000,), T_grid=(6,)))
        assert res == []

    def test_empty_grid_rejected(self):
        with pytest.raises(ConfigError, match="non-empty"):
            SweepSpec(base=synth_config(), L_grid=(), T_grid=(6,))

    def test_longer_lookback_wins_when_period_exceeds_short_window(self, tmp_path):
        # period 72: a 24-step window sees a third of a cycle, 96 a full one
        base = ExperimentConfig(
            dataset=DatasetSpec(synthetic=SyntheticSpec(
                kind="trend_plus_seasonal", length=10_000, channels=1, period=72.0,
                amplitude=1.0, slope=1e-4, noise_std=0.4, seed=0)),
            split=SplitSpec(), L=96, T=24, model="dlinear-s",
            train=TrainConfig(learning_rate=0.01, batch_size=128, max_epochs=15,
                              patience=15, seed=0))
        res = sweep(SweepSpec(base=base, L_grid=(24, 96), T_grid=(24,)))
        mses = {s.L: s.mse for s in res}
        assert mses[96] <= mses[24]

    def test_mse_non_increasing_up_to_two_periods(self):
        # with period 24, the claim covers the grid up to the first L >= 48
        base = ExperimentConfig(
            dataset=DatasetSpec(synthetic=SyntheticSpec(
                kind="trend_plus_seasonal", length=8_000, channels=1, period=24.0,
                amplitude=1.0, slope=1e-3, noise_std=0.5, seed=0)),
            split=SplitSpec(), L=48, T=24, model="dlinear-s",
            train=TrainConfig(max_epochs=15, patience=15, seed=0))
        res = sweep(SweepSpec(base=base, L_grid=(12, 24, 48), T_grid=(24,)))
        mses = [s.mse for s in sorted(res, key=lambda s: s.L)]
        for shorter, longer in zip(mses, mses[1:]):
            assert longer <= shorter * 1.05  # 5% noise band

    def test_ablation_is_neutral_without_a_trend(self, tmp_path):
        # pure sinusoid: nothing for the trend branch to exploit
        config = ExperimentConfig(
            dataset=DatasetSpec(synthetic=SyntheticSpec(
                kind="sinusoid", length=12_000, channels=1, period=24.0,
                amplitude=1.0, noise_std=0.5, seed=0)),
            split=SplitSpec(), L=96, T=96, model="dlinear-s",
            train=TrainConfig(optimizer="sgd", learning_rate=0.003, max_epochs=10,
                              patience=10, seed=0))
        summary_d, summary_l = ablate_decomposition(config)
        gap = abs(summary_d.mse - summary_l.mse)
        assert gap < 0.20 * max(summary_d.mse, summary_l.mse)


class TestAblations:
    def test_decomposition_ablation_pairs_and_delta_file(self, tmp_path):
        config = synth_config(tmp_path / "ab", epochs=3)
        summary_d, summary_l = ablate_decomposition(config)
        assert summary_d.model_id == "dlinear-s"
        assert summary_l.model_id == "linear"
        delta = json.loads((tmp_path / "ab" / "ablation.json").read_text())
        assert delta["mse_delta"] == pytest.approx(summary_d.mse - summary_l.mse)

    def test_ablation_requires_decomposition_model(self):
        with pytest.raises(ConfigError, match="dlinear"):
            ablate_decomposition(synth_config(model="linear"))

    def test_trainsize_noop_truncation_is_identical(self, tmp_path):
        config = synth_config(tmp_path / "ts", n=600)
        full_train_rows = 420  # 0.7 of 600
        summary_full, summary_short = ablate_train_size(config, full_train_rows)
        assert summary_full.to_json_line() == summary_short.to_json_line()

    def test_trainsize_stationary_sinusoid_within_ten_percent(self, tmp_path):
        config = synth_config(tmp_path / "ts2", kind="sinusoid", n=2000, slope=0.0,
                              noise=0.3, L=48, T=24, epochs=10)
        full, short = ablate_train_size(config, 480)  # 20 periods, >= 4
        assert abs(short.mse - full.mse) <= 0.10 * full.mse

    def test_trainsize_writes_pair(self, tmp_path):
        config = synth_config(tmp_path / "ts3", n=600)
        ablate_train_size(config, 100)
        doc = json.loads((tmp_path / "ts3" / "trainsize.json").read_text())
        assert doc["short_steps"] == 100
        assert (tmp_path / "ts3" / "full" / "summary.json").exists()
        assert (tmp_path / "ts3" / "short" / "summary.json").exists()


class TestEfficiency:
    def test_headline_accounting_without_data(self):
        config = ExperimentConfig(
            dataset=DatasetSpec(channels=321), split=SplitSpec(),
            L=96, T=720, model="dlinear-s",
            train=TrainConfig(batch_size=8, seed=0))
        report = efficiency_report(config)
        assert report["params"] == 139_680
        assert report["macs"] == 44_375_040
        assert report["n_timed_runs"] >= 5
        assert report["mean_inference_seconds"] > 0
        assert "std_inference_seconds" in report
        assert len(report["inference_seconds"]) == report["n_timed_runs"]

    def test_repeat_c_has_no_cost(self):
        config = ExperimentConfig(
            dataset=DatasetSpec(channels=4), split=SplitSpec(),
            L=24, T=12, model="repeat-c", train=TrainConfig(batch_size=4, seed=0))
        report = efficiency_report(config)
        assert report["params"] == 0
        assert report["macs"] == 0

    def test_report_written_to_output_dir(self, tmp_path):
        config = ExperimentConfig(
            dataset=DatasetSpec(channels=2), split=SplitSpec(),
            L=8, T=4, model="linear", train=TrainConfig(batch_size=4, seed=0),
            output_dir=str(tmp_path / "eff"))
        efficiency_report(config)
        doc = json.loads((tmp_path / "eff" / "efficiency.json").read_text())
        assert doc["macs"] == 8 * 4 * 2


def test_export_trained_weights(tmp_path):
    config = synth_config(channels=2, epochs=2)
    paths = export_trained_weights(config, tmp_path / "w")
    names = sorted(p.name for p in paths)
    assert names == ["weights_remainder.csv", "weights_trend.csv"]
    grid = np.loadtxt(paths[0], delimiter=",")
    assert grid.shape == (12, 48)
