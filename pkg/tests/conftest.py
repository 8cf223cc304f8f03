import os
from pathlib import Path

import numpy as np
import pytest

from dlinear.data import TimeSeries

# Benchmark CSVs are not bundled. Tests that need them look in
# $DLINEAR_DATA_DIR (default: ./data next to this repo) and skip cleanly
# when a file is absent.
DATA_DIR = Path(os.environ.get("DLINEAR_DATA_DIR",
                               Path(__file__).resolve().parent.parent / "data"))


def dataset_path(name: str) -> Path:
    return DATA_DIR / name


def requires_dataset(name: str):
    return pytest.mark.skipif(
        not dataset_path(name).exists(),
        reason=f"benchmark file {name} not found under {DATA_DIR} "
               f"(set DLINEAR_DATA_DIR to enable)",
    )


def series_from(values) -> TimeSeries:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[0] == 1 and values.shape[1] > 1:
        values = values.T
    n, c = values.shape
    return TimeSeries(values=values,
                      timestamps=tuple(str(i) for i in range(n)),
                      variate_names=tuple(f"v{j}" for j in range(c)))
