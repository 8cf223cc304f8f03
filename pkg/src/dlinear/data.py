"""Dataset loading, chronological splitting, standardization, and windowing.

The pipeline implemented here is the usual long-horizon forecasting protocol:
load a multivariate CSV, cut it chronologically into train/val/test, fit a
per-variate scaler on the train segment only, and slide (L, T) windows over
each segment. Val/test windows may borrow their look-back context from the
tail of the preceding segment so that every target row of a segment is
reachable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

EPSILON_DEFAULT = 1e-8


class DatasetError(Exception):
    """A data file is missing, malformed, or too short to use."""


class WindowingError(Exception):
    """A segment cannot produce any (L, T) windows."""


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A timestamped multivariate series: rows are time steps, columns variates.

    Timestamps are carried as opaque labels (row order is authoritative) and
    are never consumed by the models. Instances are immutable; the value
    matrix is a read-only float64 array.
    """

    values: np.ndarray
    timestamps: tuple[str, ...]
    variate_names: tuple[str, ...]

    def __post_init__(self):
        values = _freeze(np.atleast_2d(np.asarray(self.values, dtype=np.float64)))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(str(t) for t in self.timestamps))
        object.__setattr__(self, "variate_names", tuple(str(v) for v in self.variate_names))
        n, c = values.shape
        if n < 1 or c < 1:
            raise ValueError(f"series must be at least 1x1, got {values.shape}")
        if len(self.timestamps) != n:
            raise ValueError(f"{len(self.timestamps)} timestamps for {n} rows")
        if len(self.variate_names) != c:
            raise ValueError(f"{len(self.variate_names)} names for {c} columns")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValueError(f"non-finite value at row {bad[0]}, column {bad[1]}")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_variates(self) -> int:
        return self.values.shape[1]

    def slice_rows(self, start: int, stop: int) -> "TimeSeries":
        return TimeSeries(
            values=self.values[start:stop],
            timestamps=self.timestamps[start:stop],
            variate_names=self.variate_names,
        )


def load_csv(path, timestamp_column: Optional[str] = None) -> TimeSeries:
    """Load a comma-separated series file into a TimeSeries.

    The first row is a header. A timestamp column is used when
    ``timestamp_column`` names one, or, by default, when the first header
    cell is "date" (case-insensitive); every other column must parse as a
    finite real with '.' decimal separator.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if timestamp_column is not None:
            if timestamp_column not in header:
                raise DatasetError(
                    f"{path}: timestamp column {timestamp_column!r} not in header {header}"
                )
            ts_idx = header.index(timestamp_column)
        elif header and header[0].lower() == "date":
            ts_idx = 0
        else:
            ts_idx = None

        variate_names = [h for i, h in enumerate(header) if i != ts_idx]
        if not variate_names:
            raise DatasetError(f"{path}: no variate columns")

        timestamps: list[str] = []
        rows: list[list[float]] = []
        for row_no, row in enumerate(reader, start=2):  # 1-based, counting the header
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            parsed = []
            for col_idx, cell in enumerate(row):
                if col_idx == ts_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: unparseable cell at row {row_no}, "
                        f"column {header[col_idx]!r}: {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DatasetError(
                        f"{path}: non-finite value at row {row_no}, column {header[col_idx]!r}"
                    )
                parsed.append(v)
            timestamps.append(row[ts_idx].strip() if ts_idx is not None else str(row_no - 2))
            rows.append(parsed)

    if len(rows) < 2:
        raise DatasetError(f"{path}: need at least 2 data rows, got {len(rows)}")
    return TimeSeries(values=np.array(rows), timestamps=tuple(timestamps),
                      variate_names=tuple(variate_names))


@dataclass(frozen=True)
class SplitSpec:
    """How to cut a series into chronological train/val/test segments.

    ``ratio`` mode assigns floor(N*fraction) rows to train and val and the
    remainder to test. ``ett-calendar`` mode takes explicit step counts from
    the start of the series; rows beyond the three segments are left unused.
    ``train_truncate_steps`` keeps only the most recent K rows of the train
    segment, after the boundaries are fixed.
    """

    mode: str = "ratio"
    train_fraction: float = 0.7
    val_fraction: float = 0.1
    test_fraction: float = 0.2
    train_steps: int = 0
    val_steps: int = 0
    test_steps: int = 0
    train_truncate_steps: Optional[int] = None

    def __post_init__(self):
        if self.mode == "ratio":
            fracs = (self.train_fraction, self.val_fraction, self.test_fraction)
            if not all(0.0 < f < 1.0 for f in fracs):
                raise ValueError(f"fractions must be in (0,1), got {fracs}")
            if abs(sum(fracs) - 1.0) > 1e-9:
                raise ValueError(f"fractions must sum to 1, got {sum(fracs)!r}")
        elif self.mode == "ett-calendar":
            steps = (self.train_steps, self.val_steps, self.test_steps)
            if not all(s > 0 for s in steps):
                raise ValueError(f"segment steps must be positive, got {steps}")
        else:
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.train_truncate_steps is not None and self.train_truncate_steps <= 0:
            raise ValueError("train_truncate_steps must be positive when set")

    def boundaries(self, n_rows: int) -> tuple[int, int, int]:
        """Exclusive row boundaries (train_end, val_end, test_end)."""
        if self.mode == "ratio":
            # floor, guarded against products like 10*0.7 landing at 6.999...
            n_train = int(n_rows * self.train_fraction + 1e-9)
            n_val = int(n_rows * self.val_fraction + 1e-9)
            return n_train, n_train + n_val, n_rows
        total = self.train_steps + self.val_steps + self.test_steps
        if total > n_rows:
            raise ValueError(
                f"split needs {total} rows but the series has only {n_rows}"
            )
        return (self.train_steps,
                self.train_steps + self.val_steps,
                total)


# ETT files are split on calendar months: 12/4/4 at hourly and 15-minute rates.
ETT_HOURLY_SPLIT = SplitSpec(mode="ett-calendar", train_steps=12 * 30 * 24,
                             val_steps=4 * 30 * 24, test_steps=4 * 30 * 24)
ETT_MINUTE_SPLIT = SplitSpec(mode="ett-calendar", train_steps=12 * 30 * 24 * 4,
                             val_steps=4 * 30 * 24 * 4, test_steps=4 * 30 * 24 * 4)


def split(series: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    """Cut a series into contiguous, non-overlapping train/val/test segments."""
    t_end, v_end, s_end = spec.boundaries(series.n_steps)
    for name, lo, hi in (("train", 0, t_end), ("val", t_end, v_end), ("test", v_end, s_end)):
        if hi - lo < 1:
            raise ValueError(
                f"split of a {series.n_steps}-row series leaves the {name} segment empty"
            )
    train = series.slice_rows(0, t_end)
    val = series.slice_rows(t_end, v_end)
    test = series.slice_rows(v_end, s_end)
    k = spec.train_truncate_steps
    if k is not None:
        if k > train.n_steps:
            raise ValueError(
                f"train_truncate_steps={k} exceeds train segment of {train.n_steps} rows"
            )
        train = train.slice_rows(train.n_steps - k, train.n_steps)
    return train, val, test


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-variate standardization statistics, fitted on the train segment only."""

    means: np.ndarray
    stds: np.ndarray
    epsilon: float = EPSILON_DEFAULT

    def __post_init__(self):
        object.__setattr__(self, "means", _freeze(np.asarray(self.means, dtype=np.float64).ravel()))
        object.__setattr__(self, "stds", _freeze(np.asarray(self.stds, dtype=np.float64).ravel()))
        if self.means.shape != self.stds.shape:
            raise ValueError("means and stds must have the same length")
        if np.any(self.stds < 0):
            raise ValueError("stds must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def safe_stds(self) -> np.ndarray:
        return np.maximum(self.stds, self.epsilon)


def fit_scaler(train: TimeSeries, epsilon: float = EPSILON_DEFAULT) -> Scaler:
    """Fit per-column mean and population standard deviation (divisor N)."""
    if train.n_steps < 2:
        raise ValueError(f"need at least 2 rows to fit a scaler, got {train.n_steps}")
    return Scaler(means=train.values.mean(axis=0),
                  stds=train.values.std(axis=0),  # ddof=0
                  epsilon=epsilon)


def apply_scaler(series: TimeSeries, scaler: Scaler, direction: str = "forward") -> TimeSeries:
    """Standardize (forward) or de-standardize (inverse) every column."""
    if series.n_variates != scaler.means.shape[0]:
        raise ValueError(
            f"series has {series.n_variates} columns, scaler has {scaler.means.shape[0]}"
        )
    if direction == "forward":
        values = (series.values - scaler.means) / scaler.safe_stds
    elif direction == "inverse":
        values = series.values * scaler.safe_stds + scaler.means
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return TimeSeries(values=values, timestamps=series.timestamps,
                      variate_names=series.variate_names)


@dataclass(frozen=True, eq=False)
class WindowPair:
    """One supervised example: L history rows and the T rows that follow.

    ``origin_index`` is the index of the first target row within the segment
    the window was cut from; the input block may reach back into the context
    rows supplied to make_windows.
    """

    input: np.ndarray   # (L, C), read-only view
    target: np.ndarray  # (T, C), read-only view
    origin_index: int


def make_windows(segment: TimeSeries, context: Optional[TimeSeries],
                 L: int, T: int) -> list[WindowPair]:
    """Slide (L, T) windows over a segment.

    Targets lie strictly inside ``segment``. ``context``, when given, is the
    data immediately preceding the segment; its trailing rows extend the
    look-back so early targets stay reachable. Inputs and targets are
    read-only views, not copies.
    """
    if L < 1 or T < 1:
        raise ValueError(f"L and T must be positive, got L={L}, T={T}")
    if context is not None and context.n_variates != segment.n_variates:
        raise ValueError("context and segment have different column counts")
    ctx = min(L, context.n_steps) if context is not None else 0
    if ctx > 0:
        joined = np.concatenate([context.values[context.n_steps - ctx:], segment.values])
        joined.flags.writeable = False
    else:
        joined = segment.values

    first_origin = max(0, L - ctx)
    last_origin = segment.n_steps - T  # inclusive
    if last_origin < first_origin:
        raise WindowingError(
            f"segment of {segment.n_steps} rows (context {ctx}) cannot fit any window "
            f"with L={L}, T={T}"
        )
    windows = []
    for origin in range(first_origin, last_origin + 1):
        j = ctx + origin  # position of the first target row in `joined`
        windows.append(WindowPair(input=joined[j - L:j],
                                  target=joined[j:j + T],
                                  origin_index=origin))
    return windows


def windows_to_arrays(windows: Sequence[WindowPair]) -> tuple[np.ndarray, np.ndarray]:
    """Stack a window list into (N, L, C) inputs and (N, T, C) targets."""
    if not windows:
        raise ValueError("empty window sequence")
    x = np.stack([w.input for w in windows])
    y = np.stack([w.target for w in windows])
    return x, y


def serialize_preprocessing(spec: SplitSpec, n_rows: int, scaler: Scaler) -> dict:
    """JSON-ready record of the split boundaries and scaler statistics."""
    t_end, v_end, s_end = spec.boundaries(n_rows)
    return {
        "mode": spec.mode,
        "boundaries": [t_end, v_end, s_end],
        "means": scaler.means.tolist(),
        "stds": scaler.stds.tolist(),
        "epsilon": scaler.epsilon,
    }


def save_preprocessing(path, spec: SplitSpec, n_rows: int, scaler: Scaler) -> None:
    Path(path).write_text(json.dumps(serialize_preprocessing(spec, n_rows, scaler)))


def load_scaler(path) -> Scaler:
    doc = json.loads(Path(path).read_text())
    return Scaler(means=np.array(doc["means"]), stds=np.array(doc["stds"]),
                  epsilon=doc["epsilon"])
