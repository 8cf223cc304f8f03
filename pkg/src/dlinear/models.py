"""Forecasters: decomposition-linear models, a plain linear map, and Repeat-C.

A decomposition-linear forecaster splits its input into trend and remainder
blocks and applies one linear map per branch, summing the two branch
forecasts. "shared" mode uses the same pair of maps for every variate;
"individual" mode keeps a pair per variate. The plain linear map is the
no-decomposition ablation, shared across variates. Repeat-C is the naive
baseline that repeats the last observed row across the horizon.

Freshly initialized maps use the same weight 1/L everywhere and zero biases,
so the initial forecast of every model is the look-back mean of each variate.

Models are immutable during inference; only the training loop mutates the
parameter arrays, and never concurrently with a forward pass.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .decompose import DEFAULT_KERNEL_SIZE, _check_kernel, decompose_batch

SHARED = "shared"
INDIVIDUAL = "individual"


def _as_batch(input: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(input, dtype=np.float64)
    if x.ndim == 2:
        return x[None], True
    if x.ndim == 3:
        return x, False
    raise ValueError(f"expected an (L, C) block or (B, L, C) batch, got shape {x.shape}")


@dataclass(eq=False)
class LinearMap:
    """One dense map from a length-L history to a length-T forecast."""

    weight: np.ndarray  # (T, L)
    bias: np.ndarray    # (T,)

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2:
            raise ValueError(f"weight must be (T, L), got shape {self.weight.shape}")
        if self.bias.shape != (self.weight.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match T={self.weight.shape[0]}"
            )

    @property
    def T(self) -> int:
        return self.weight.shape[0]

    @property
    def L(self) -> int:
        return self.weight.shape[1]

    def forward_batch(self, inputs: np.ndarray) -> np.ndarray:
        """(B, L, C) -> (B, T, C), the same map applied to every variate."""
        if inputs.shape[1] != self.L:
            raise ValueError(f"input has L={inputs.shape[1]}, map expects {self.L}")
        return np.einsum("tl,blc->btc", self.weight, inputs) + self.bias[None, :, None]

    def param_arrays(self) -> dict[str, np.ndarray]:
        return {"weight": self.weight, "bias": self.bias}


def init_linear_map(L: int, T: int) -> LinearMap:
    """A fresh map: every weight 1/L, every bias 0."""
    if L < 1 or T < 1:
        raise ValueError(f"L and T must be positive, got L={L}, T={T}")
    return LinearMap(weight=np.full((T, L), 1.0 / L), bias=np.zeros(T))


def forward_linear(map: LinearMap, input: np.ndarray) -> np.ndarray:
    """Apply a single map directly to the raw input, no decomposition."""
    x, squeeze = _as_batch(input)
    out = map.forward_batch(x)
    return out[0] if squeeze else out


@dataclass(eq=False)
class DLinearModel:
    """Two-branch linear forecaster over a moving-average decomposition.

    Parameters are stored stacked: weights are (M, T, L) and biases (M, T)
    with M = 1 in shared mode and M = C in individual mode.
    """

    mode: str
    L: int
    T: int
    C: int
    kernel_size: int = DEFAULT_KERNEL_SIZE
    trend_weight: np.ndarray = field(default=None, repr=False)
    trend_bias: np.ndarray = field(default=None, repr=False)
    remainder_weight: np.ndarray = field(default=None, repr=False)
    remainder_bias: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in (SHARED, INDIVIDUAL):
            raise ValueError(f"mode must be '{SHARED}' or '{INDIVIDUAL}', got {self.mode!r}")
        if min(self.L, self.T, self.C) < 1:
            raise ValueError(f"L, T, C must be positive, got {(self.L, self.T, self.C)}")
        _check_kernel(self.kernel_size)
        m = 1 if self.mode == SHARED else self.C
        if self.trend_weight is None:
            self.trend_weight = np.full((m, self.T, self.L), 1.0 / self.L)
            self.trend_bias = np.zeros((m, self.T))
            self.remainder_weight = np.full((m, self.T, self.L), 1.0 / self.L)
            self.remainder_bias = np.zeros((m, self.T))
        for name in ("trend_weight", "trend_bias", "remainder_weight", "remainder_bias"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.trend_weight.shape != (m, self.T, self.L):
            raise ValueError(
                f"trend weight shape {self.trend_weight.shape} != {(m, self.T, self.L)}"
            )
        if self.trend_bias.shape != (m, self.T):
            raise ValueError(f"trend bias shape {self.trend_bias.shape} != {(m, self.T)}")
        if self.remainder_weight.shape != self.trend_weight.shape:
            raise ValueError("branch weight shapes differ")
        if self.remainder_bias.shape != self.trend_bias.shape:
            raise ValueError("branch bias shapes differ")

    @property
    def trend_maps(self) -> list[LinearMap]:
        return [LinearMap(w, b) for w, b in zip(self.trend_weight, self.trend_bias)]

    @property
    def remainder_maps(self) -> list[LinearMap]:
        return [LinearMap(w, b) for w, b in zip(self.remainder_weight, self.remainder_bias)]

    def _branch(self, weight, bias, blocks):
        if self.mode == SHARED:
            return np.einsum("tl,blc->btc", weight[0], blocks) + bias[0][None, :, None]
        out = np.einsum("ctl,blc->btc", weight, blocks)
        return out + bias.T[None]

    def forward_batch(self, inputs: np.ndarray) -> np.ndarray:
        """(B, L, C) -> (B, T, C): trend branch plus remainder branch."""
        if inputs.shape[1:] != (self.L, self.C):
            raise ValueError(
                f"input shape {inputs.shape[1:]} does not match (L, C)=({self.L}, {self.C})"
            )
        trend, remainder = decompose_batch(inputs, self.kernel_size)
        return (self._branch(self.trend_weight, self.trend_bias, trend)
                + self._branch(self.remainder_weight, self.remainder_bias, remainder))

    def param_arrays(self) -> dict[str, np.ndarray]:
        return {
            "trend_weight": self.trend_weight,
            "trend_bias": self.trend_bias,
            "remainder_weight": self.remainder_weight,
            "remainder_bias": self.remainder_bias,
        }


def forward(model: DLinearModel, input: np.ndarray) -> np.ndarray:
    """Forecast one (L, C) block or a (B, L, C) batch with a two-branch model."""
    x, squeeze = _as_batch(input)
    out = model.forward_batch(x)
    return out[0] if squeeze else out


def repeat_c(input: np.ndarray, T: int) -> np.ndarray:
    """Repeat the last observed row across all T future steps."""
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    x, squeeze = _as_batch(input)
    out = np.repeat(x[:, -1:, :], T, axis=1)
    return out[0] if squeeze else out


def count_params(model) -> int:
    """Exact number of stored weights plus biases."""
    if isinstance(model, DLinearModel):
        m = 1 if model.mode == SHARED else model.C
        return 2 * m * (model.T * model.L + model.T)
    if isinstance(model, LinearMap):
        return model.T * model.L + model.T
    raise TypeError(f"cannot count parameters of {type(model).__name__}")


def count_macs(model, C: int) -> int:
    """Multiply-accumulates for one forward pass on one window of C variates.

    Only weight multiplies count; bias adds and the decomposition's additions
    are excluded.
    """
    if C < 1:
        raise ValueError(f"C must be positive, got {C}")
    if isinstance(model, DLinearModel):
        return 2 * model.T * model.L * C
    if isinstance(model, LinearMap):
        return model.T * model.L * C
    raise TypeError(f"cannot count MACs of {type(model).__name__}")


def _write_grid(path: Path, grid: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in grid:
            writer.writerow([repr(float(v)) for v in row])


def export_weights(model, out_dir, variate_names=None) -> list[Path]:
    """Write each branch's T x L weight grid to CSV (row = forecast step,
    column = input lag; lag L-1 is the most recent observation).

    Shared mode writes one file per branch; individual mode writes one pair
    per variate, tagged with the variate's name. A plain LinearMap writes a
    single file. Returns the written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if isinstance(model, LinearMap):
        path = out_dir / "weights_linear.csv"
        _write_grid(path, model.weight)
        return [path]
    if not isinstance(model, DLinearModel):
        raise TypeError(f"cannot export weights of {type(model).__name__}")
    if model.mode == SHARED:
        for branch, weight in (("trend", model.trend_weight[0]),
                               ("remainder", model.remainder_weight[0])):
            path = out_dir / f"weights_{branch}.csv"
            _write_grid(path, weight)
            written.append(path)
        return written
    if variate_names is None:
        variate_names = [f"ch{j}" for j in range(model.C)]
    if len(variate_names) != model.C:
        raise ValueError(f"{len(variate_names)} names for {model.C} variates")
    for j, name in enumerate(variate_names):
        for branch, weight in (("trend", model.trend_weight[j]),
                               ("remainder", model.remainder_weight[j])):
            path = out_dir / f"weights_{branch}_{name}.csv"
            _write_grid(path, weight)
            written.append(path)
    return written


def model_to_dict(model) -> dict:
    """JSON-ready snapshot of a model's kind, shape, and parameters."""
    if isinstance(model, DLinearModel):
        return {
            "kind": "dlinear",
            "mode": model.mode,
            "L": model.L,
            "T": model.T,
            "C": model.C,
            "kernel_size": model.kernel_size,
            "trend_weight": model.trend_weight.tolist(),
            "trend_bias": model.trend_bias.tolist(),
            "remainder_weight": model.remainder_weight.tolist(),
            "remainder_bias": model.remainder_bias.tolist(),
        }
    if isinstance(model, LinearMap):
        return {
            "kind": "linear",
            "L": model.L,
            "T": model.T,
            "weight": model.weight.tolist(),
            "bias": model.bias.tolist(),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "dlinear":
        return DLinearModel(
            mode=doc["mode"], L=doc["L"], T=doc["T"], C=doc["C"],
            kernel_size=doc["kernel_size"],
            trend_weight=np.array(doc["trend_weight"]),
            trend_bias=np.array(doc["trend_bias"]),
            remainder_weight=np.array(doc["remainder_weight"]),
            remainder_bias=np.array(doc["remainder_bias"]),
        )
    if kind == "linear":
        return LinearMap(weight=np.array(doc["weight"]), bias=np.array(doc["bias"]))
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)))


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
