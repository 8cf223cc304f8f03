"""Seasonal-trend decomposition by centered moving average.

Each column is padded at both ends by replicating its first and last value
(k-1)/2 times, then smoothed with a length-k mean centered on every step, so
the trend keeps the input's shape. The remainder is whatever the moving
average leaves behind: remainder = input - trend. Both pieces always add
back to the input.

Pure functions throughout; safe to call from any number of workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

DEFAULT_KERNEL_SIZE = 25


def _check_kernel(kernel_size: int) -> None:
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValueError(f"kernel_size must be odd and positive, got {kernel_size}")


@dataclass(frozen=True, eq=False)
class DecompPair:
    """Trend and remainder blocks of one input, same shape as the input."""

    trend: np.ndarray
    remainder: np.ndarray
    kernel_size: int

    @property
    def reconstruction(self) -> np.ndarray:
        return self.trend + self.remainder


def moving_average(values: np.ndarray, kernel_size: int, time_axis: int = 0) -> np.ndarray:
    """Centered moving average along ``time_axis`` with replicate padding."""
    _check_kernel(kernel_size)
    # One canonical layout so identical columns reduce identically no matter
    # how the caller's array was strided.
    values = np.ascontiguousarray(values, dtype=np.float64)
    if kernel_size == 1:
        return values.copy()
    half = (kernel_size - 1) // 2
    pad = [(0, 0)] * values.ndim
    pad[time_axis] = (half, half)
    padded = np.pad(values, pad, mode="edge")
    return sliding_window_view(padded, kernel_size, axis=time_axis).mean(axis=-1)


def decompose(input: np.ndarray, kernel_size: int = DEFAULT_KERNEL_SIZE) -> DecompPair:
    """Split an (L, C) block into trend and remainder, column by column.

    A 1-D input is treated as a single column.
    """
    values = np.ascontiguousarray(input, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValueError(f"expected an (L, C) block, got shape {values.shape}")
    trend = moving_average(values, kernel_size, time_axis=0)
    return DecompPair(trend=trend, remainder=values - trend, kernel_size=kernel_size)


def decompose_batch(inputs: np.ndarray, kernel_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Trend/remainder for a (B, L, C) batch, smoothing along the L axis."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    trend = moving_average(inputs, kernel_size, time_axis=1)
    return trend, inputs - trend
