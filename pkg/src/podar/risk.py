"""Forward evaluation of the potential-damage risk (PODAR) of a scene.

Every surrounding object and the host are rolled forward with a constant
velocity model. At each predicted step a virtual collision is assumed; its
kinetic-energy-like damage is discounted by ``exp(-A t)`` in time and
``exp(-B d)`` in contour gap, scaled by ``k``, and the largest discounted
value over all steps and objects is the scene risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import DegenerateGeometryError, InvalidInputError
from .geometry import BodyGeometry, KinematicState, body_gap, rect_point_gap, rect_rect_gaps

OBJECT_TYPES = ("vehicle", "pedestrian", "bicycle", "obstacle")

DEFAULT_MASS = 1.8
DEFAULT_SENSITIVITY = {"vehicle": 1.0, "obstacle": 1.0, "pedestrian": 1.0, "bicycle": 1.0}

DEFAULT_ALPHA = 0.7
DEFAULT_DT = 0.1

# Centers closer than this are treated as coincident.
COINCIDENT_TOL = 1e-9


@dataclass(frozen=True)
class RoadObject:
    id: str
    state: KinematicState
    geometry: BodyGeometry = field(default_factory=BodyGeometry.point)
    object_type: str = "vehicle"
    mass: float = DEFAULT_MASS
    sensitivity: Optional[float] = None

    def __post_init__(self):
        if self.object_type not in OBJECT_TYPES:
            raise InvalidInputError(f"unknown object type {self.object_type!r}")
        if self.sensitivity is None:
            object.__setattr__(self, "sensitivity", DEFAULT_SENSITIVITY[self.object_type])
        if not (self.mass >= 0 and self.sensitivity >= 0):
            raise InvalidInputError(
                f"{self.id}: mass and sensitivity must be non-negative")
        if not (math.isfinite(self.mass) and math.isfinite(self.sensitivity)):
            raise InvalidInputError(f"{self.id}: mass and sensitivity must be finite")

    @property
    def virtual_mass(self) -> float:
        return self.mass * self.sensitivity

    def with_state(self, state: KinematicState) -> "RoadObject":
        return RoadObject(self.id, state, self.geometry, self.object_type,
                          self.mass, self.sensitivity)


@dataclass(frozen=True)
class Scene:
    """A host and the objects around it at the current instant."""

    host: RoadObject
    objects: tuple[RoadObject, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    def reflected(self) -> "Scene":
        """Mirror image of the whole scene about the x axis."""
        return Scene(self.host.with_state(self.host.state.reflected()),
                     tuple(o.with_state(o.state.reflected()) for o in self.objects))


@dataclass(frozen=True)
class PodarParams:
    """Per-driver model parameters.

    T is the prediction horizon (s), k the damage scale, A the temporal
    attenuation rate (1/s) and B the spatial attenuation rate (1/m).
    ``alpha`` weights the projected relative velocity against the speed
    sum; ``dt`` is the prediction step.
    """

    T: float
    k: float = 1.0
    A: float = 1.0
    B: float = 1.0
    alpha: float = DEFAULT_ALPHA
    dt: float = DEFAULT_DT

    def __post_init__(self):
        vals = (self.T, self.k, self.A, self.B, self.alpha, self.dt)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError(f"non-finite parameters: {self}")
        if not self.T > 0:
            raise InvalidInputError(f"horizon T must be positive, got {self.T}")
        if self.k < 0 or self.A < 0 or self.B < 0:
            raise InvalidInputError(f"k, A, B must be non-negative: {self}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0 < self.dt <= self.T:
            raise InvalidInputError(f"dt must lie in (0, T], got {self.dt}")

    def replace(self, **changes) -> "PodarParams":
        values = dict(T=self.T, k=self.k, A=self.A, B=self.B, alpha=self.alpha, dt=self.dt)
        values.update(changes)
        return PodarParams(**values)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    velocity: tuple[float, float]
    heading: float

    def __len__(self):
        return len(self.times)

    @property
    def states(self) -> list[KinematicState]:
        return [KinematicState(tuple(p), self.velocity, self.heading) for p in self.positions]


@dataclass(frozen=True)
class SceneComponents:
    """Parameter-independent pieces of every (object, step) cell.

    ``damage`` and ``distance`` have shape (objects, steps).
    """

    object_ids: tuple[str, ...]
    times: np.ndarray
    damage: np.ndarray
    distance: np.ndarray


@dataclass(frozen=True)
class RiskBreakdown:
    final_podar: float
    argmax: tuple[str, int]
    argmax_index: tuple[int, int]
    object_ids: tuple[str, ...]
    times: np.ndarray
    per_pair: np.ndarray
    damage: np.ndarray
    omega_t: np.ndarray
    omega_d: np.ndarray
    distance: np.ndarray


def n_steps(horizon: float, dt: float) -> int:
    # Small slack so that e.g. 0.3 / 0.1 counts three whole steps.
    return int(math.floor(horizon / dt + 1e-9)) + 1


def predict_constant_velocity(state: KinematicState, horizon: float, dt: float) -> Trajectory:
    if not (horizon > 0 and dt > 0) or not (math.isfinite(horizon) and math.isfinite(dt)):
        raise InvalidInputError(f"horizon and dt must be positive, got {horizon}, {dt}")
    times = np.arange(n_steps(horizon, dt)) * dt
    pos = np.asarray(state.position, dtype=float)
    vel = np.asarray(state.velocity, dtype=float)
    positions = pos + vel * times[:, None]
    return Trajectory(times, positions, state.velocity, state.heading)


def contour_distance(host: RoadObject, obstacle: RoadObject) -> float:
    """Gap in meters between the two bodies' contours at their current states."""
    return body_gap(host.state.position, host.state.heading, host.geometry,
                    obstacle.state.position, obstacle.state.heading, obstacle.geometry)


def _closing_speeds(p_host, v_host, p_obj, v_obj, alpha):
    """Blended closing speed at each predicted step.

    When the centers coincide at a later step the direction is taken from
    the approach just before (the relative velocity reversed); coincidence
    at the first step has no such limit and is rejected.
    """
    rel = p_host - p_obj
    dist = np.hypot(rel[:, 0], rel[:, 1])
    v_rel = v_obj - v_host
    coincident = dist <= COINCIDENT_TOL
    if coincident[0]:
        raise DegenerateGeometryError("host and object centers coincide")
    unit = np.empty_like(rel)
    ok = ~coincident
    unit[ok] = rel[ok] / dist[ok, None]
    if coincident.any():
        unit[coincident] = v_rel / math.hypot(*v_rel)
    projected = unit[:, 0] * v_rel[0] + unit[:, 1] * v_rel[1]
    magnitude = math.hypot(*v_obj) + math.hypot(*v_host)
    return alpha * projected + (1.0 - alpha) * magnitude


def closing_speed(host_state: KinematicState, obj_state: KinematicState,
                  alpha: float = DEFAULT_ALPHA) -> float:
    p_h = np.asarray([host_state.position], dtype=float)
    p_o = np.asarray([obj_state.position], dtype=float)
    v_h = np.asarray(host_state.velocity, dtype=float)
    v_o = np.asarray(obj_state.velocity, dtype=float)
    return float(_closing_speeds(p_h, v_h, p_o, v_o, alpha)[0])


def damage_from_speed(total_virtual_mass, speed):
    """Signed kinetic-energy-like damage; negative for separating bodies."""
    return 0.5 * total_virtual_mass * speed * np.abs(speed)


def potential_damage(host: RoadObject, obstacle: RoadObject,
                     host_state: Optional[KinematicState] = None,
                     obj_state: Optional[KinematicState] = None,
                     alpha: float = DEFAULT_ALPHA) -> float:
    host_state = host.state if host_state is None else host_state
    obj_state = obstacle.state if obj_state is None else obj_state
    v = closing_speed(host_state, obj_state, alpha)
    return float(damage_from_speed(host.virtual_mass + obstacle.virtual_mass, v))


def temporal_attenuation(t, A):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or A < 0 or np.any(np.isnan(t)) or math.isnan(A):
        raise InvalidInputError("time and A must be non-negative")
    out = np.exp(-A * t)
    return float(out) if out.ndim == 0 else out


def spatial_attenuation(d, B):
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or B < 0 or np.any(np.isnan(d)) or math.isnan(B):
        raise InvalidInputError("distance and B must be non-negative")
    out = np.exp(-B * d)
    return float(out) if out.ndim == 0 else out


def scene_components(host: RoadObject, objects: Sequence[RoadObject], horizon: float,
                     dt: float = DEFAULT_DT, alpha: float = DEFAULT_ALPHA) -> SceneComponents:
    if len(objects) == 0:
        raise InvalidInputError("scene needs at least one surrounding object")
    host_traj = predict_constant_velocity(host.state, horizon, dt)
    v_host = np.asarray(host.state.velocity, dtype=float)
    n_t = len(host_traj)
    damage = np.empty((len(objects), n_t))
    distance = np.empty((len(objects), n_t))
    for n, obj in enumerate(objects):
        traj = predict_constant_velocity(obj.state, horizon, dt)
        v_obj = np.asarray(obj.state.velocity, dtype=float)
        speed = _closing_speeds(host_traj.positions, v_host, traj.positions, v_obj, alpha)
        damage[n] = damage_from_speed(host.virtual_mass + obj.virtual_mass, speed)
        distance[n] = _gaps(host, host_traj, obj, traj)
    return SceneComponents(tuple(o.id for o in objects), host_traj.times, damage, distance)


def _gaps(host, host_traj, obj, obj_traj):
    hg, og = host.geometry, obj.geometry
    if hg.is_point and og.is_point:
        rel = obj_traj.positions - host_traj.positions
        return np.hypot(rel[:, 0], rel[:, 1])
    if og.is_point:
        return rect_point_gap(host_traj.positions, host_traj.heading, hg.length, hg.width,
                              obj_traj.positions)
    if hg.is_point:
        return rect_point_gap(obj_traj.positions, obj_traj.heading, og.length, og.width,
                              host_traj.positions)
    return rect_rect_gaps(host_traj.positions, host_traj.heading, hg,
                          obj_traj.positions, obj_traj.heading, og)


def cell_values(damage, times, distance, k, A, B):
    """Discounted damage per cell, with separating (negative) cells clamped to 0."""
    omega_t = np.exp(-A * times)
    omega_d = np.exp(-B * distance)
    return np.maximum(k * damage * omega_t * omega_d, 0.0)


def first_argmax(per_pair: np.ndarray) -> tuple[int, int]:
    """(object, step) of the maximum; ties go to the earliest step, then lowest object."""
    flat = int(np.argmax(per_pair.T))
    step, obj = divmod(flat, per_pair.shape[0])
    return obj, step


def evaluate_components(comp: SceneComponents, params: PodarParams) -> RiskBreakdown:
    per_pair = cell_values(comp.damage, comp.times, comp.distance, params.k, params.A, params.B)
    obj, step = first_argmax(per_pair)
    omega_t = np.broadcast_to(np.exp(-params.A * comp.times), per_pair.shape)
    omega_d = np.exp(-params.B * comp.distance)
    return RiskBreakdown(
        final_podar=float(per_pair[obj, step]),
        argmax=(comp.object_ids[obj], step),
        argmax_index=(obj, step),
        object_ids=comp.object_ids,
        times=comp.times,
        per_pair=per_pair,
        damage=comp.damage,
        omega_t=omega_t,
        omega_d=omega_d,
        distance=comp.distance,
    )


def podar_scene(host: RoadObject, objects: Sequence[RoadObject], params: PodarParams) -> RiskBreakdown:
    comp = scene_components(host, objects, params.T, params.dt, params.alpha)
    return evaluate_components(comp, params)


def evaluate_scene(scene: Scene, params: PodarParams) -> RiskBreakdown:
    return podar_scene(scene.host, scene.objects, params)
