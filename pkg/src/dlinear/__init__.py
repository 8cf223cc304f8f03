"""Decomposition-linear forecasting toolkit and benchmark harness.

Direct multi-step forecasting with moving-average seasonal-trend
decomposition and per-branch linear maps, plus the naive repeat-last-value
baseline, a from-scratch trainer with analytic gradients, benchmark-protocol
data handling, and a CLI experiment runner.
"""

__version__ = "0.1.0"

from .data import (Scaler, SplitSpec, TimeSeries, WindowPair, apply_scaler,
                   fit_scaler, load_csv, make_windows, split)
from .decompose import DecompPair, decompose
from .metrics import EvalSummary, evaluate
from .models import (DLinearModel, LinearMap, count_macs, count_params,
                     export_weights, forward, forward_linear, init_linear_map,
                     repeat_c)
from .synthetic import SyntheticSpec, generate
from .train import TrainConfig, TrainReport, fit, grad, mse_loss

__all__ = [
    "__version__",
    "TimeSeries", "SplitSpec", "Scaler", "WindowPair",
    "load_csv", "split", "fit_scaler", "apply_scaler", "make_windows",
    "DecompPair", "decompose",
    "DLinearModel", "LinearMap", "forward", "forward_linear", "repeat_c",
    "init_linear_map", "count_params", "count_macs", "export_weights",
    "TrainConfig", "TrainReport", "mse_loss", "grad", "fit",
    "EvalSummary", "evaluate",
    "SyntheticSpec", "generate",
]
