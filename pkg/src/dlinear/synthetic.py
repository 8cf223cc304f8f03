"""Deterministic synthetic series for property tests and dataset-free studies.

Channel j of an N-step series is the base signal evaluated at t + j (a
per-channel phase shift), plus optional Gaussian noise drawn once for the
whole (N, C) block. Noise comes from numpy's PCG64 generator through
standard_normal, drawn row-major; the identifier below names that recipe so
an emitted series can be reproduced elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TimeSeries

KINDS = ("sinusoid", "linear_trend", "trend_plus_seasonal", "white_noise")
SEASONAL_KINDS = ("sinusoid", "trend_plus_seasonal")

# Recorded in emitted metadata; fixed so sequences are reproducible from the seed.
GAUSSIAN_ALGORITHM = "numpy.random.Generator(PCG64(seed)).standard_normal((N, C)) * noise_std"


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    length: int
    channels: int = 1
    period: float = 24.0
    amplitude: float = 1.0
    slope: float = 0.01
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.length < 1 or self.channels < 1:
            raise ValueError("length and channels must be positive")
        if self.kind in SEASONAL_KINDS and self.period < 2:
            raise ValueError(f"period must be >= 2 steps, got {self.period}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "length": self.length,
            "channels": self.channels,
            "period": self.period,
            "amplitude": self.amplitude,
            "slope": self.slope,
            "noise_std": self.noise_std,
            "seed": self.seed,
            "noise_algorithm": GAUSSIAN_ALGORITHM,
        }


def spec_from_dict(doc: dict) -> SyntheticSpec:
    known = {k: doc[k] for k in
             ("kind", "length", "channels", "period", "amplitude", "slope",
              "noise_std", "seed") if k in doc}
    return SyntheticSpec(**known)


def generate(spec: SyntheticSpec) -> TimeSeries:
    """Materialize the series a spec describes; same spec, same values."""
    t = np.arange(spec.length, dtype=np.float64)
    shifted = t[:, None] + np.arange(spec.channels, dtype=np.float64)[None, :]
    if spec.kind == "sinusoid":
        values = spec.amplitude * np.sin(2.0 * math.pi * shifted / spec.period)
    elif spec.kind == "linear_trend":
        values = spec.slope * shifted
    elif spec.kind == "trend_plus_seasonal":
        values = (spec.amplitude * np.sin(2.0 * math.pi * shifted / spec.period)
                  + spec.slope * shifted)
    else:  # white_noise
        values = np.zeros((spec.length, spec.channels))
    if spec.noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        values = values + spec.noise_std * rng.standard_normal(values.shape)
    return TimeSeries(values=values,
                      timestamps=tuple(str(i) for i in range(spec.length)),
                      variate_names=tuple(f"ch{j}" for j in range(spec.channels)))


def sinusoid_recurrence_map(period: float, L: int, T: int) -> np.ndarray:
    """The T x L weight grid that rolls x[t] = 2cos(2*pi/p)x[t-1] - x[t-2]
    forward from the last two observed lags.

    Any sinusoid of the given period satisfies that recurrence exactly, so
    this map is a zero-error linear solution for noiseless sinusoid data;
    it is the independent check that such a solution exists.
    """
    if L < 2:
        raise ValueError("the recurrence needs at least two lags")
    s = 2.0 * math.cos(2.0 * math.pi / period)
    weight = np.zeros((T, L))
    alpha, beta = 0.0, 1.0      # forecast step as alpha*x[L-2] + beta*x[L-1]
    prev_alpha, prev_beta = 1.0, 0.0
    for row in range(T):
        alpha, prev_alpha = s * alpha - prev_alpha, alpha
        beta, prev_beta = s * beta - prev_beta, beta
        weight[row, L - 2] = alpha
        weight[row, L - 1] = beta
    return weight
