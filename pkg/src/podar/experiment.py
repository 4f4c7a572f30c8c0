"""The 77-obstacle avoidance grid, signal files and synthetic datasets."""

from __future__ import annotations

import configparser
import csv
import io
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .calibration import SignalKind
from .exceptions import InvalidInputError, NormalizationError, SignalParseError
from .geometry import BodyGeometry, KinematicState
from .risk import (
    DEFAULT_ALPHA,
    DEFAULT_DT,
    DEFAULT_MASS,
    PodarParams,
    RoadObject,
    Scene,
    evaluate_scene,
)

N_OBSTACLES = 77
DRIVER_PATTERN = re.compile(r"P[1-9][0-9]*")

PathLike = Union[str, Path]


def _default_lateral():
    # Sub-sequence gaps to the 2 m wide host evenly spaced over 0.2-2.0 m.
    outer = tuple(round(1.0 + g, 10) for g in np.linspace(0.2, 2.0, 5))
    return tuple(-y for y in reversed(outer)) + (0.0,) + outer


@dataclass(frozen=True)
class GridConfig:
    """Obstacle layout of the avoidance experiment.

    ``longitudinal`` lists the column distances (m, from the host center)
    in obstacle-id order and ``lateral`` the row offsets (m) within each
    column, so obstacle ``c * len(lateral) + r + 1`` sits at
    ``(longitudinal[c], lateral[r])``. The defaults number the farthest
    column first, which puts the main-sequence ids at O6, O17, ..., O72.
    """

    host_speed: float = 25.0
    longitudinal: tuple[float, ...] = (175.0, 150.0, 125.0, 100.0, 75.0, 50.0, 25.0)
    lateral: tuple[float, ...] = field(default_factory=_default_lateral)
    host_length: float = 4.0
    host_width: float = 2.0
    host_mass: float = DEFAULT_MASS
    obstacle_mass: float = DEFAULT_MASS

    def __post_init__(self):
        object.__setattr__(self, "longitudinal", tuple(float(x) for x in self.longitudinal))
        object.__setattr__(self, "lateral", tuple(float(y) for y in self.lateral))
        if len(self.longitudinal) * len(self.lateral) != N_OBSTACLES:
            raise InvalidInputError(
                f"grid has {len(self.longitudinal)} x {len(self.lateral)} cells, "
                f"expected {N_OBSTACLES}")
        if sorted(self.lateral) != sorted(-y for y in self.lateral):
            raise InvalidInputError(f"lateral offsets are not symmetric: {self.lateral}")
        if sum(1 for y in self.lateral if y == 0.0) != 1:
            raise InvalidInputError("lateral offsets need exactly one zero entry")
        if len(set(self.lateral)) != len(self.lateral):
            raise InvalidInputError("duplicate lateral offsets")
        if not all(math.isfinite(v) for v in (*self.longitudinal, *self.lateral)):
            raise InvalidInputError("grid coordinates must be finite")
        if not self.host_speed > 0:
            raise InvalidInputError("host speed must be positive")
        BodyGeometry.rectangle(self.host_length, self.host_width)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScenarioSet:
    """One single-obstacle scene per grid cell, indexed by obstacle id - 1."""

    config: GridConfig
    scenes: tuple[Scene, ...]
    obstacle_ids: tuple[str, ...]
    positions: np.ndarray

    def __len__(self):
        return len(self.scenes)

    def __iter__(self):
        return iter(self.scenes)

    def __getitem__(self, i):
        return self.scenes[i]

    @property
    def main_sequence(self) -> list[int]:
        """Scene indices of the centerline obstacles, farthest-first by id."""
        return [i for i, (_, y) in enumerate(self.positions) if y == 0.0]

    def index_of(self, obstacle_id: str) -> int:
        return self.obstacle_ids.index(obstacle_id)


def obstacle_label(index: int) -> str:
    return f"O{index + 1}"


def build_grid_scenarios(config: Optional[GridConfig] = None) -> ScenarioSet:
    config = GridConfig() if config is None else config
    host = RoadObject(
        "host",
        KinematicState.create((0.0, 0.0), (config.host_speed, 0.0)),
        BodyGeometry.rectangle(config.host_length, config.host_width),
        object_type="vehicle",
        mass=config.host_mass,
    )
    scenes, ids, positions = [], [], []
    for x in config.longitudinal:
        for y in config.lateral:
            label = obstacle_label(len(ids))
            obstacle = RoadObject(label, KinematicState.create((x, y)), BodyGeometry.point(),
                                  object_type="obstacle", mass=config.obstacle_mass)
            scenes.append(Scene(host, (obstacle,)))
            ids.append(label)
            positions.append((x, y))
    return ScenarioSet(config, tuple(scenes), tuple(ids), np.array(positions))


# --------------------------------------------------------------------------
# Files


def read_grid_config(path: PathLike) -> GridConfig:
    """Parse a ``[grid]`` key-value file; missing keys keep their defaults."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise SignalParseError(f"{path}: {exc}") from None
    if not parser.has_section("grid"):
        raise SignalParseError(f"{path}: missing [grid] section")
    sec = parser["grid"]
    known = {"host_speed", "longitudinal", "lateral", "host_length", "host_width",
             "host_mass", "obstacle_mass"}
    unknown = set(sec) - known
    if unknown:
        raise SignalParseError(f"{path}: unknown grid keys {sorted(unknown)}")
    kwargs = {}
    try:
        for key in known & set(sec):
            if key in ("longitudinal", "lateral"):
                kwargs[key] = tuple(float(v) for v in sec[key].split(",") if v.strip())
            else:
                kwargs[key] = float(sec[key])
    except ValueError as exc:
        raise SignalParseError(f"{path}: {exc}") from None
    return GridConfig(**kwargs)


def write_grid_config(path: PathLike, config: GridConfig) -> None:
    lines = ["[grid]"]
    for key, value in config.to_dict().items():
        if isinstance(value, tuple):
            value = ", ".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_signals(path: PathLike, kind: Optional[SignalKind] = None,
                 n_obstacles: int = N_OBSTACLES) -> dict[str, np.ndarray]:
    """Read ``driver,obstacle,signal`` rows into one vector per driver.

    Drivers keep their first-appearance order. ``kind`` is accepted for
    symmetry with the calibration entry points; both signal kinds share
    one file layout.
    """
    if kind is not None:
        SignalKind(kind)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SignalParseError(f"{path}: not UTF-8 ({exc})") from None
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        raise SignalParseError(f"{path}: empty file", row=1)
    if [h.strip() for h in header] != ["driver", "obstacle", "signal"]:
        raise SignalParseError(f"expected header driver,obstacle,signal, got {header}", row=1)

    data: dict[str, dict[int, float]] = {}
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise SignalParseError(f"expected 3 fields, got {len(row)}", row=lineno)
        driver, obstacle, signal = (c.strip() for c in row)
        if not DRIVER_PATTERN.fullmatch(driver):
            raise SignalParseError(f"bad driver id {driver!r}", row=lineno)
        try:
            obs = int(obstacle)
        except ValueError:
            raise SignalParseError(f"bad obstacle id {obstacle!r}", row=lineno) from None
        if not 1 <= obs <= n_obstacles:
            raise SignalParseError(f"obstacle id {obs} outside 1-{n_obstacles}", row=lineno)
        try:
            value = float(signal)
        except ValueError:
            raise SignalParseError(f"bad signal value {signal!r}", row=lineno) from None
        if not math.isfinite(value) or value < 0:
            raise SignalParseError(f"signal must be a non-negative number, got {signal}",
                                   row=lineno)
        cells = data.setdefault(driver, {})
        if obs in cells:
            raise SignalParseError(f"duplicate entry for ({driver}, {obs})", row=lineno)
        cells[obs] = value

    if not data:
        raise SignalParseError(f"{path}: no data rows", row=2)
    out = {}
    for driver, cells in data.items():
        missing = sorted(set(range(1, n_obstacles + 1)) - set(cells))
        if missing:
            raise SignalParseError(f"driver {driver} missing obstacles {missing}")
        out[driver] = np.array([cells[i] for i in range(1, n_obstacles + 1)])
    return out


def format_number(x: float) -> str:
    return f"{x:.6g}"


def signals_csv(signals: Mapping[str, Sequence[float]], exact: bool = True) -> str:
    """CSV text with one row per (driver, obstacle).

    ``exact`` writes shortest round-trip reprs; otherwise 6 significant digits.
    """
    fmt = repr if exact else format_number
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["driver", "obstacle", "signal"])
    for driver, vals in signals.items():
        for i, v in enumerate(vals, start=1):
            writer.writerow([driver, i, fmt(float(v))])
    return buf.getvalue()


def write_signals(path: PathLike, signals: Mapping[str, Sequence[float]],
                  exact: bool = True) -> None:
    Path(path).write_text(signals_csv(signals, exact), encoding="utf-8")


# --------------------------------------------------------------------------
# Synthetic data


@dataclass(frozen=True)
class SyntheticSpec:
    T: float
    k: float
    A: float
    B: float
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        PodarParams(self.T, self.k, self.A, self.B)
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InvalidInputError(f"noise sigma must be >= 0, got {self.sigma}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SyntheticDataset:
    """Normalized signals plus what is needed to score a recovery.

    The signals equal the ground-truth risk divided by ``divisor`` (before
    noise), so a perfect fit has ``k == spec.k / divisor``.
    """

    spec: SyntheticSpec
    signals: np.ndarray
    clean_podar: np.ndarray
    divisor: float

    @property
    def k_effective(self) -> float:
        return self.spec.k / self.divisor


def generate_synthetic(scenarios: Sequence[Scene], spec: SyntheticSpec,
                       dt: float = DEFAULT_DT, alpha: float = DEFAULT_ALPHA) -> SyntheticDataset:
    params = PodarParams(spec.T, spec.k, spec.A, spec.B, alpha, dt)
    podar = np.array([evaluate_scene(s, params).final_podar for s in scenarios])
    top = float(podar.max()) if podar.size else 0.0
    if not top > 0:
        raise NormalizationError("ground-truth parameters produce no risk on any scene")
    clean = podar / top
    if spec.sigma > 0:
        rng = np.random.default_rng(spec.seed)
        noisy = np.maximum(clean + rng.normal(0.0, spec.sigma, size=clean.shape), 0.0)
    else:
        noisy = clean
    peak = float(noisy.max())
    if not peak > 0:
        raise NormalizationError("noisy synthetic signals are all zero")
    return SyntheticDataset(spec, noisy / peak, podar, top * peak)
