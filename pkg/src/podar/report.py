"""Attenuation curves and per-driver summary tables."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np


def sample_grid(stop: float, step: float) -> np.ndarray:
    """0, step, ..., stop with the endpoint included."""
    n = int(round(stop / step))
    return np.linspace(0.0, n * step, n + 1)


def temporal_curves(params: Mapping[str, object], t_max: float = 7.0,
                    step: float = 0.05) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    t = sample_grid(t_max, step)
    return t, {d: np.exp(-float(p.A) * t) for d, p in params.items()}


def spatial_curves(params: Mapping[str, object], d_max: float = 3.0,
                   step: float = 0.02) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    d = sample_grid(d_max, step)
    return d, {name: np.exp(-float(p.B) * d) for name, p in params.items()}


def spread_peak_time(rate_min: float, rate_max: float) -> float:
    """Argmax over x >= 0 of exp(-rate_min x) - exp(-rate_max x)."""
    if rate_max < rate_min:
        rate_min, rate_max = rate_max, rate_min
    if rate_max == rate_min:
        return math.nan
    if rate_min == 0.0:
        return math.inf
    return math.log(rate_max / rate_min) / (rate_max - rate_min)


def spread_curve(rates: Sequence[float], x: np.ndarray) -> np.ndarray:
    """Largest pairwise gap between exponential curves, i.e. between the
    flattest and steepest one."""
    lo, hi = min(rates), max(rates)
    return np.abs(np.exp(-lo * x) - np.exp(-hi * x))


def attenuation_table(params: Mapping[str, object], times: Sequence[float] = (2.0, 3.0),
                      distances: Sequence[float] = (1.0, 2.0)) -> list[dict]:
    rows = []
    for driver, p in params.items():
        row = {"driver": driver}
        for t in times:
            row[f"omega_T@{t:g}s"] = math.exp(-float(p.A) * t)
        for d in distances:
            row[f"omega_D@{d:g}m"] = math.exp(-float(p.B) * d)
        rows.append(row)
    return rows
