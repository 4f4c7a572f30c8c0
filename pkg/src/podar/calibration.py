"""Fitting per-driver (k, A, B) to standardized risk signals.

The scene risk is a max over cells of ``k * G * exp(-A t - B d)``, so with
the winning cell held fixed it is log-linear in A and B and linear in k.
The gradient of the mean squared error follows from the winning cell of
each scene; projected Adam on the full batch does the rest.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numba
import numpy as np

from .exceptions import InvalidInputError, NormalizationError, OptimizationError
from .risk import (
    DEFAULT_ALPHA,
    DEFAULT_DT,
    PodarParams,
    Scene,
    evaluate_scene,
    scene_components,
)

MSA_THRESHOLD_DEG = 2.0


class SignalKind(str, enum.Enum):
    OBJECTIVE = "objective"    # maximum steering angle, degrees
    SUBJECTIVE = "subjective"  # oral response number, unitless


class BoundaryGradientWarning(UserWarning):
    """Gradient requested at k = 0 where the loss still pulls on k."""


@dataclass
class StandardizedDataset:
    """Per-driver signal vectors scaled into [0, 1].

    ``divisors`` records what each driver's values were divided by; with
    ``scope == "global"`` every driver shares one divisor.
    """

    values: dict[str, np.ndarray]
    kind: SignalKind
    threshold: Optional[float]
    divisors: dict[str, float]
    scope: str

    @property
    def drivers(self) -> list[str]:
        return list(self.values)

    def __getitem__(self, driver: str) -> np.ndarray:
        return self.values[driver]


def _as_raw(raw: Mapping[str, Sequence[float]]) -> dict[str, np.ndarray]:
    if not raw:
        raise InvalidInputError("no drivers in dataset")
    out = {}
    for driver, vals in raw.items():
        arr = np.asarray(vals, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidInputError(f"{driver}: expected a non-empty 1-d signal vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise InvalidInputError(f"{driver}: signals must be finite and non-negative")
        out[driver] = arr
    return out


def standardize_objective(raw_msa: Mapping[str, Sequence[float]],
                          threshold: float = MSA_THRESHOLD_DEG) -> StandardizedDataset:
    """Zero steering angles below ``threshold`` degrees, then divide every
    driver by the single largest remaining angle."""
    raw = _as_raw(raw_msa)
    kept = {d: np.where(v < threshold, 0.0, v) for d, v in raw.items()}
    top = max(float(v.max()) for v in kept.values())
    if top <= 0:
        raise NormalizationError("all objective signals are zero after thresholding")
    return StandardizedDataset({d: v / top for d, v in kept.items()}, SignalKind.OBJECTIVE,
                               threshold, {d: top for d in kept}, "global")


def standardize_subjective(raw_orn: Mapping[str, Sequence[float]]) -> StandardizedDataset:
    """Divide each driver's responses by that driver's own maximum."""
    raw = _as_raw(raw_orn)
    divisors = {}
    for d, v in raw.items():
        top = float(v.max())
        if top <= 0:
            raise NormalizationError(f"driver {d} reported only zeros")
        divisors[d] = top
    return StandardizedDataset({d: v / divisors[d] for d, v in raw.items()},
                               SignalKind.SUBJECTIVE, None, divisors, "per-driver")


# --------------------------------------------------------------------------
# Batched cells


@dataclass(frozen=True)
class CellBatch:
    """Every candidate cell of every scene, padded to a rectangle.

    Row ``s`` lists scene ``s``'s cells in step-major, object-minor order so
    that the first maximum matches :func:`podar.risk.first_argmax`.
    Non-positive damage is stored as 0 since those cells clamp to 0.
    """

    damage: np.ndarray
    log_damage: np.ndarray
    times: np.ndarray
    distance: np.ndarray


def build_batch(scenarios: Sequence[Scene], horizon: float, dt: float = DEFAULT_DT,
                alpha: float = DEFAULT_ALPHA) -> CellBatch:
    comps = [scene_components(s.host, s.objects, horizon, dt, alpha) for s in scenarios]
    width = max(c.damage.size for c in comps)
    n = len(comps)
    damage = np.zeros((n, width))
    times = np.zeros((n, width))
    distance = np.zeros((n, width))
    for i, c in enumerate(comps):
        m = c.damage.size
        damage[i, :m] = np.maximum(c.damage.T.ravel(), 0.0)
        times[i, :m] = np.repeat(c.times, c.damage.shape[0])
        distance[i, :m] = c.distance.T.ravel()
    with np.errstate(divide="ignore"):
        log_damage = np.where(damage > 0, np.log(damage), -np.inf)
    return CellBatch(damage, log_damage, times, distance)


@numba.njit(cache=True)
def _winners(log_damage, times, distance, A, B):
    n, width = log_damage.shape
    idx = np.zeros(n, dtype=np.int64)
    for s in range(n):
        best = -np.inf
        for c in range(width):
            val = log_damage[s, c] - A * times[s, c] - B * distance[s, c]
            if val > best:
                best = val
                idx[s] = c
    return idx


@numba.njit(cache=True)
def _loss_grad(damage, log_damage, times, distance, y, k, A, B, grad):
    n = y.shape[0]
    idx = _winners(log_damage, times, distance, A, B)
    total = 0.0
    gk = 0.0
    ga = 0.0
    gb = 0.0
    for s in range(n):
        c = idx[s]
        unit = damage[s, c] * math.exp(-A * times[s, c]) * math.exp(-B * distance[s, c])
        p = k * unit
        r = p - y[s]
        total += r * r
        gk += r * unit
        ga -= r * times[s, c] * p
        gb -= r * distance[s, c] * p
    scale = 2.0 / n
    grad[0] = gk * scale
    grad[1] = ga * scale
    grad[2] = gb * scale
    return total / n


@numba.njit(cache=True)
def _adam_descent(damage, log_damage, times, distance, y, theta, iterations, lr,
                  beta1, beta2, eps, trace_every, trace):
    """Projected Adam. Returns (iterations completed, final loss)."""
    m = np.zeros(3)
    v = np.zeros(3)
    grad = np.zeros(3)
    b1t = 1.0
    b2t = 1.0
    for it in range(iterations):
        loss = _loss_grad(damage, log_damage, times, distance, y,
                          theta[0], theta[1], theta[2], grad)
        if it % trace_every == 0:
            trace[it // trace_every] = loss
        if not (math.isfinite(loss) and math.isfinite(grad[0])
                and math.isfinite(grad[1]) and math.isfinite(grad[2])):
            return it, loss
        b1t *= beta1
        b2t *= beta2
        for j in range(3):
            m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j]
            v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j]
            mhat = m[j] / (1.0 - b1t)
            vhat = v[j] / (1.0 - b2t)
            theta[j] = max(theta[j] - lr * mhat / (math.sqrt(vhat) + eps), 0.0)
    loss = _loss_grad(damage, log_damage, times, distance, y,
                      theta[0], theta[1], theta[2], grad)
    if iterations % trace_every == 0:
        trace[iterations // trace_every] = loss
    return iterations, loss


def _check_counts(signals, scenarios):
    y = np.asarray(signals, dtype=float)
    if y.ndim != 1 or len(y) != len(scenarios):
        raise InvalidInputError(
            f"{len(scenarios)} scenarios but signal vector of shape {y.shape}")
    return y


def loss(params: Sequence[float], T: float, signals, scenarios: Sequence[Scene],
         dt: float = DEFAULT_DT, alpha: float = DEFAULT_ALPHA) -> float:
    """Mean squared error between predicted scene risk and signals."""
    y = _check_counts(signals, scenarios)
    k, A, B = (float(p) for p in params)
    if k < 0 or A < 0 or B < 0:
        raise InvalidInputError("k, A, B must be non-negative")
    pred = np.array([evaluate_scene(s, PodarParams(T, k, A, B, alpha, dt)).final_podar
                     for s in scenarios])
    return float(np.mean((pred - y) ** 2))


def analytic_gradient(params: Sequence[float], T: float, signals, scenarios: Sequence[Scene],
                      dt: float = DEFAULT_DT, alpha: float = DEFAULT_ALPHA) -> np.ndarray:
    """(dL/dk, dL/dA, dL/dB) of the mean squared error.

    Uses the winning cell of each scene; at exact ties the same cell that
    the forward model reports.
    """
    y = _check_counts(signals, scenarios)
    k, A, B = (float(p) for p in params)
    batch = build_batch(scenarios, T, dt, alpha)
    grad = np.zeros(3)
    _loss_grad(batch.damage, batch.log_damage, batch.times, batch.distance, y, k, A, B, grad)
    if k == 0.0 and grad[0] != 0.0:
        warnings.warn("gradient evaluated at the k = 0 boundary", BoundaryGradientWarning,
                      stacklevel=2)
    return grad


def r_squared(predicted, observed) -> float:
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    if predicted.shape != observed.shape or observed.ndim != 1 or observed.size < 2:
        raise InvalidInputError("R^2 needs two equal-length vectors of length >= 2")
    ss_tot = float(np.sum((observed - observed.mean()) ** 2))
    if ss_tot == 0.0:
        raise InvalidInputError("observed values are constant; R^2 is undefined")
    ss_res = float(np.sum((observed - predicted) ** 2))
    return 1.0 - ss_res / ss_tot


# --------------------------------------------------------------------------
# Calibration


@dataclass(frozen=True)
class CalibrationConfig:
    learning_rate: float = 1e-4
    iterations: int = 100_000
    batch_size: int = 77
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    horizons: tuple[float, ...] = (1, 2, 3, 4, 5, 6, 7)
    k0: float = 1.0
    A0: float = 1.0
    B0: float = 1.0
    seed: int = 0
    trace_every: int = 100
    # R^2 values closer than this count as a tie when choosing T.
    horizon_tie_tol: float = 1e-6

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be >= 1")
        if self.trace_every < 1:
            raise InvalidInputError("trace_every must be >= 1")
        if min(self.k0, self.A0, self.B0) < 0:
            raise InvalidInputError("initial k, A, B must be non-negative")
        if not self.horizons:
            raise InvalidInputError("horizon candidate set is empty")
        object.__setattr__(self, "horizons", tuple(float(h) for h in self.horizons))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CalibrationResult:
    driver: str
    kind: Optional[str]
    T: float
    k: float
    A: float
    B: float
    loss: float
    r2: float
    predicted: np.ndarray
    residuals: np.ndarray
    loss_trace: list = field(default_factory=list)
    trace_every: int = 100
    iterations: int = 0

    @property
    def params(self) -> tuple[float, float, float]:
        return self.k, self.A, self.B

    def podar_params(self, dt: float = DEFAULT_DT, alpha: float = DEFAULT_ALPHA) -> PodarParams:
        return PodarParams(self.T, self.k, self.A, self.B, alpha, dt)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["predicted"] = self.predicted.tolist()
        out["residuals"] = self.residuals.tolist()
        out["loss_trace"] = [float(x) for x in self.loss_trace]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "CalibrationResult":
        data = dict(data)
        data["predicted"] = np.asarray(data["predicted"], dtype=float)
        data["residuals"] = np.asarray(data["residuals"], dtype=float)
        return cls(**data)


def calibrate(signals, scenarios: Sequence[Scene], T: float,
              config: Optional[CalibrationConfig] = None, *, driver: str = "",
              kind: Optional[SignalKind] = None, dt: float = DEFAULT_DT,
              alpha: float = DEFAULT_ALPHA) -> CalibrationResult:
    """Fit (k, A, B) at a fixed horizon ``T`` with full-batch projected Adam."""
    config = CalibrationConfig() if config is None else config
    y = _check_counts(signals, scenarios)
    if config.batch_size < len(y):
        raise InvalidInputError("mini-batching is not supported; batch_size must cover "
                                f"all {len(y)} scenes")
    batch = build_batch(scenarios, T, dt, alpha)
    theta = np.array([config.k0, config.A0, config.B0], dtype=float)
    trace = np.full(config.iterations // config.trace_every + 1, np.nan)
    done, final_loss = _adam_descent(batch.damage, batch.log_damage, batch.times, batch.distance,
                                     y, theta, config.iterations, config.learning_rate,
                                     config.beta1, config.beta2, config.eps,
                                     config.trace_every, trace)
    trace_list = [float(x) for x in trace[: done // config.trace_every + 1] if not math.isnan(x)]
    if done < config.iterations or not math.isfinite(final_loss):
        raise OptimizationError(
            f"loss became non-finite at iteration {done} (T={T:g}, driver {driver!r})",
            trace_list)

    k, A, B = (float(x) for x in theta)
    params = PodarParams(T, k, A, B, alpha, dt)
    predicted = np.array([evaluate_scene(s, params).final_podar for s in scenarios])
    residuals = predicted - y
    try:
        r2 = r_squared(predicted, y)
    except InvalidInputError:
        r2 = math.nan
    return CalibrationResult(
        driver=driver,
        kind=None if kind is None else SignalKind(kind).value,
        T=float(T), k=k, A=A, B=B,
        loss=float(np.mean(residuals ** 2)),
        r2=r2,
        predicted=predicted,
        residuals=residuals,
        loss_trace=trace_list,
        trace_every=config.trace_every,
        iterations=config.iterations,
    )


@dataclass
class HorizonSearch:
    best: CalibrationResult
    results: dict[float, CalibrationResult]
    failures: dict[float, str]

    @property
    def T_best(self) -> float:
        return self.best.T


def select_horizon(signals, scenarios: Sequence[Scene],
                   config: Optional[CalibrationConfig] = None, **kwargs) -> HorizonSearch:
    """Calibrate at every candidate horizon and keep the best R^2.

    Ties (within ``config.horizon_tie_tol``) go to the shorter horizon.
    A candidate whose optimization fails is recorded in ``failures``.
    """
    config = CalibrationConfig() if config is None else config
    results, failures = {}, {}
    for T in sorted(config.horizons):
        try:
            results[T] = calibrate(signals, scenarios, T, config, **kwargs)
        except OptimizationError as exc:
            failures[T] = str(exc)
    if not results:
        raise OptimizationError("calibration failed for every horizon candidate: "
                                + "; ".join(f"T={t:g}: {m}" for t, m in failures.items()))
    if len(results) == 1:
        return HorizonSearch(next(iter(results.values())), results, failures)
    scored = {T: (-math.inf if math.isnan(r.r2) else r.r2) for T, r in results.items()}
    top = max(scored.values())
    T_best = min(T for T, s in scored.items() if s >= top - config.horizon_tie_tol)
    return HorizonSearch(results[T_best], results, failures)


# --------------------------------------------------------------------------
# Objective vs subjective parameters


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx, dy = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return math.nan
    return float(np.clip(float(dx @ dy) / denom, -1.0, 1.0))


def _outliers(drivers, residuals, cutoff):
    # Modified z-score of the signed offset from the identity line.
    res = np.asarray(residuals, dtype=float)
    dev = np.abs(res - np.median(res))
    mad = float(np.median(dev))
    if mad == 0.0:
        return [d for d, e in zip(drivers, dev) if e > 0.0]
    z = 0.6745 * dev / mad
    return [d for d, zi in zip(drivers, z) if zi > cutoff]


@dataclass
class SignalComparison:
    drivers: list[str]
    A_pairs: list[tuple[float, float]]
    B_pairs: list[tuple[float, float]]
    A_correlation: float
    B_correlation: float
    A_outliers: list[str]
    B_outliers: list[str]

    def rows(self):
        for d, (ao, asub), (bo, bsub) in zip(self.drivers, self.A_pairs, self.B_pairs):
            yield d, ao, asub, bo, bsub


def compare_signals(objective: Mapping[str, object], subjective: Mapping[str, object],
                    outlier_cutoff: float = 3.5) -> SignalComparison:
    """Pair each driver's objective and subjective (A, B).

    Values may be :class:`CalibrationResult` objects or anything with ``A``
    and ``B`` attributes. A driver is an outlier for a parameter when its
    offset from the identity line ``subjective == objective`` has a
    modified z-score above ``outlier_cutoff``.
    """
    if set(objective) != set(subjective):
        raise InvalidInputError(
            f"driver sets differ: {sorted(set(objective) ^ set(subjective))}")
    drivers = sorted(objective, key=_driver_key)
    A_pairs = [(float(objective[d].A), float(subjective[d].A)) for d in drivers]
    B_pairs = [(float(objective[d].B), float(subjective[d].B)) for d in drivers]
    A_o, A_s = zip(*A_pairs)
    B_o, B_s = zip(*B_pairs)
    return SignalComparison(
        drivers=drivers,
        A_pairs=A_pairs,
        B_pairs=B_pairs,
        A_correlation=pearson(A_o, A_s),
        B_correlation=pearson(B_o, B_s),
        A_outliers=_outliers(drivers, np.subtract(A_s, A_o), outlier_cutoff),
        B_outliers=_outliers(drivers, np.subtract(B_s, B_o), outlier_cutoff),
    )


def _driver_key(name: str):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (name.rstrip("0123456789"), int(digits) if digits else -1, name)
