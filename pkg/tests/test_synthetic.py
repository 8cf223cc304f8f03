import math

import numpy as np
import pytest

from dlinear.data import SplitSpec, make_windows, split
from dlinear.decompose import decompose
from dlinear.models import LinearMap, forward_linear
from dlinear.synthetic import (GAUSSIAN_ALGORITHM, SyntheticSpec, generate,
                               sinusoid_recurrence_map, spec_from_dict)


def test_quarter_period_sinusoid():
    ts = generate(SyntheticSpec(kind="sinusoid", length=4, period=4.0, amplitude=1.0))
    np.testing.assert_allclose(ts.values.ravel(), [0.0, 1.0, 0.0, -1.0], atol=1e-15)


def test_linear_trend_value():
    ts = generate(SyntheticSpec(kind="linear_trend", length=8, slope=2.0))
    assert ts.values[5, 0] == 10.0


def test_trend_plus_seasonal_is_the_sum():
    kw = dict(length=50, period=12.0, amplitude=0.7, slope=0.3)
    combo = generate(SyntheticSpec(kind="trend_plus_seasonal", **kw))
    sin = generate(SyntheticSpec(kind="sinusoid", **kw))
    lin = generate(SyntheticSpec(kind="linear_trend", **kw))
    np.testing.assert_allclose(combo.values, sin.values + lin.values, rtol=1e-15)


def test_same_spec_same_series():
    spec = SyntheticSpec(kind="white_noise", length=100, channels=3, noise_std=2.0,
                         seed=99)
    a, b = generate(spec), generate(spec)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.timestamps == b.timestamps


def test_seed_changes_noise():
    base = dict(kind="white_noise", length=100, noise_std=1.0)
    a = generate(SyntheticSpec(seed=1, **base))
    b = generate(SyntheticSpec(seed=2, **base))
    assert a.values.tobytes() != b.values.tobytes()


def test_channels_are_phase_shifted():
    ts = generate(SyntheticSpec(kind="sinusoid", length=30, channels=3, period=10.0))
    # channel j at time t equals channel 0 at time t + j
    np.testing.assert_allclose(ts.values[:-2, 2], ts.values[2:, 0], atol=1e-12)


def test_noise_rides_on_deterministic_kinds():
    clean = generate(SyntheticSpec(kind="sinusoid", length=200, period=24.0, seed=5))
    noisy = generate(SyntheticSpec(kind="sinusoid", length=200, period=24.0,
                                   noise_std=0.1, seed=5))
    delta = noisy.values - clean.values
    assert np.std(delta) == pytest.approx(0.1, rel=0.2)
    assert np.all(np.abs(delta) < 0.1 * 6)


@pytest.mark.parametrize("kwargs,msg", [
    (dict(kind="sawtooth", length=10), "kind"),
    (dict(kind="sinusoid", length=10, period=1.0), "period"),
    (dict(kind="white_noise", length=10, noise_std=-1.0), "noise_std"),
    (dict(kind="sinusoid", length=0), "length"),
])
def test_invalid_specs_rejected(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        SyntheticSpec(**kwargs)


def test_spec_serialization_names_the_noise_algorithm():
    spec = SyntheticSpec(kind="white_noise", length=10, noise_std=1.0, seed=3)
    doc = spec.to_dict()
    assert doc["noise_algorithm"] == GAUSSIAN_ALGORITHM
    assert "PCG64" in doc["noise_algorithm"]
    assert spec_from_dict(doc) == spec


class TestSinusoidRecurrence:
    def test_two_lag_recurrence_holds_exactly(self):
        p = 24.0
        ts = generate(SyntheticSpec(kind="sinusoid", length=200, period=p))
        x = ts.values[:, 0]
        s = 2.0 * math.cos(2.0 * math.pi / p)
        np.testing.assert_allclose(x[2:], s * x[1:-1] - x[:-2], atol=1e-12)

    def test_recurrence_map_is_an_exact_linear_solution(self):
        """The rolled-forward recurrence, materialized as a plain T x L map,
        forecasts a noiseless sinusoid with zero error."""
        p, L, T = 24.0, 48, 24
        ts = generate(SyntheticSpec(kind="sinusoid", length=400, period=p))
        oracle = LinearMap(weight=sinusoid_recurrence_map(p, L, T), bias=np.zeros(T))
        windows = make_windows(ts, None, L, T)
        worst = 0.0
        for w in windows:
            err = forward_linear(oracle, w.input) - w.target
            worst = max(worst, float(np.abs(err).max()))
        assert worst < 1e-10

    def test_trained_plain_linear_reaches_interpolation(self):
        # noiseless sinusoid, standardized: the exact solution above exists,
        # and training must find something nearly as good
        from dlinear.bench import DatasetSpec, ExperimentConfig, run
        from dlinear.train import TrainConfig
        config = ExperimentConfig(
            dataset=DatasetSpec(synthetic=SyntheticSpec(
                kind="sinusoid", length=1200, period=24.0)),
            split=SplitSpec(), L=48, T=24, model="linear",
            train=TrainConfig(optimizer="sgd", learning_rate=0.3, max_epochs=50,
                              patience=50, seed=0))
        summary = run(config)
        assert summary.mse < 1e-4


def test_decompose_linear_trend_interior_remainder_vanishes():
    # a centered average of an affine function is exact away from the edges
    ts = generate(SyntheticSpec(kind="linear_trend", length=120, slope=0.37))
    k = 25
    pair = decompose(ts.values, kernel_size=k)
    half = (k - 1) // 2
    interior = pair.remainder[half:-half]
    assert np.abs(interior).max() < 1e-10
    # the padded edges are genuinely distorted, so the claim is edge-exclusive
    assert np.abs(pair.remainder[0]).max() > 1e-3


def test_generated_series_loads_into_pipeline():
    ts = generate(SyntheticSpec(kind="trend_plus_seasonal", length=60, channels=2,
                                period=6.0, noise_std=0.05, seed=8))
    train, val, test = split(ts, SplitSpec())
    assert train.n_steps + val.n_steps + test.n_steps == 60
    assert ts.variate_names == ("ch0", "ch1")
