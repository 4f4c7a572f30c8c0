"""Planar kinematic states, body shapes and contour gaps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidInputError


@dataclass(frozen=True)
class KinematicState:
    """Position (m), velocity (m/s) and heading (rad) of a body at one instant.

    Use :meth:`create` to build a state from raw numbers; it derives the
    heading from the velocity whenever the body is moving.
    """

    position: tuple[float, float]
    velocity: tuple[float, float]
    heading: float = 0.0

    def __post_init__(self):
        values = (*self.position, *self.velocity, self.heading)
        if len(self.position) != 2 or len(self.velocity) != 2:
            raise InvalidInputError("position and velocity must be 2-vectors")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError(f"non-finite kinematic state: {values}")
        if not -math.pi <= self.heading <= math.pi:
            raise InvalidInputError(f"heading {self.heading} outside [-pi, pi]")

    @classmethod
    def create(cls, position: Sequence[float], velocity: Sequence[float] = (0.0, 0.0),
               heading: Optional[float] = None) -> "KinematicState":
        px, py = (float(v) for v in position)
        vx, vy = (float(v) for v in velocity)
        if not all(math.isfinite(v) for v in (px, py, vx, vy)):
            raise InvalidInputError(f"non-finite kinematic state: {(px, py, vx, vy)}")
        if vx != 0.0 or vy != 0.0:
            heading = math.atan2(vy, vx)
        elif heading is None:
            heading = 0.0
        return cls((px, py), (vx, vy), float(heading))

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    def reflected(self) -> "KinematicState":
        """Mirror image about the x axis."""
        return KinematicState((self.position[0], -self.position[1]),
                              (self.velocity[0], -self.velocity[1]), -self.heading)


@dataclass(frozen=True)
class BodyGeometry:
    """Either a heading-aligned rectangle centered on the body position or a point."""

    shape: str = "point"
    length: float = 0.0
    width: float = 0.0

    def __post_init__(self):
        if self.shape not in ("rectangle", "point"):
            raise InvalidInputError(f"unknown shape {self.shape!r}")
        if self.shape == "rectangle":
            if not (self.length > 0 and self.width > 0):
                raise InvalidInputError(
                    f"degenerate rectangle {self.length} x {self.width}")
            if not (math.isfinite(self.length) and math.isfinite(self.width)):
                raise InvalidInputError("rectangle extents must be finite")

    @classmethod
    def rectangle(cls, length: float, width: float) -> "BodyGeometry":
        return cls("rectangle", float(length), float(width))

    @classmethod
    def point(cls) -> "BodyGeometry":
        return cls("point")

    @property
    def is_point(self) -> bool:
        return self.shape == "point"


def rect_point_gap(centers, headings, length, width, points):
    """Euclidean gap between rectangles and points, vectorized.

    ``centers`` and ``points`` broadcast as (..., 2); ``headings`` as (...).
    Zero when the point lies inside or on the rectangle.
    """
    centers = np.asarray(centers, dtype=float)
    points = np.asarray(points, dtype=float)
    headings = np.asarray(headings, dtype=float)
    c, s = np.cos(headings), np.sin(headings)
    rx = points[..., 0] - centers[..., 0]
    ry = points[..., 1] - centers[..., 1]
    # Express the point in the rectangle's body frame.
    along = rx * c + ry * s
    across = -rx * s + ry * c
    ex = np.maximum(np.abs(along) - 0.5 * length, 0.0)
    ey = np.maximum(np.abs(across) - 0.5 * width, 0.0)
    return np.hypot(ex, ey)


def _corners(centers, headings, length, width):
    """Corner coordinates, shape (n, 4, 2), counter-clockwise."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    headings = np.broadcast_to(np.asarray(headings, dtype=float), centers.shape[:1])
    c, s = np.cos(headings)[:, None], np.sin(headings)[:, None]
    hl, hw = 0.5 * length, 0.5 * width
    lx = np.array([hl, -hl, -hl, hl])
    ly = np.array([hw, hw, -hw, -hw])
    x = centers[:, :1] + lx * c - ly * s
    y = centers[:, 1:] + lx * s + ly * c
    return np.stack([x, y], axis=-1)


def _overlap(ca, cb):
    # Separating-axis test on the edge normals; touching counts as overlap.
    apart = np.zeros(ca.shape[0], dtype=bool)
    for poly in (ca, cb):
        for i in range(2):
            edge = poly[:, i + 1] - poly[:, i]
            axis = np.stack([-edge[:, 1], edge[:, 0]], axis=-1)
            pa = np.einsum("nkj,nj->nk", ca, axis)
            pb = np.einsum("nkj,nj->nk", cb, axis)
            apart |= (pa.max(axis=1) < pb.min(axis=1)) | (pb.max(axis=1) < pa.min(axis=1))
    return ~apart


def _vertex_edge_dist(pts, poly):
    """Smallest distance from any of ``pts`` (n, 4, 2) to the edges of ``poly``."""
    a = poly[:, None, :, :]
    ab = np.roll(poly, -1, axis=1)[:, None, :, :] - a
    ap = pts[:, :, None, :] - a
    u = np.clip(np.sum(ap * ab, axis=-1) / np.sum(ab * ab, axis=-1), 0.0, 1.0)
    diff = ap - u[..., None] * ab
    return np.hypot(diff[..., 0], diff[..., 1]).min(axis=(1, 2))


def rect_rect_gaps(centers_a, headings_a, geom_a, centers_b, headings_b, geom_b) -> np.ndarray:
    """Gap between paired rectangles, one entry per row of ``centers_a``."""
    ca = _corners(centers_a, headings_a, geom_a.length, geom_a.width)
    cb = _corners(centers_b, headings_b, geom_b.length, geom_b.width)
    gap = np.minimum(_vertex_edge_dist(ca, cb), _vertex_edge_dist(cb, ca))
    return np.where(_overlap(ca, cb), 0.0, gap)


def rect_rect_gap(center_a, heading_a, geom_a, center_b, heading_b, geom_b) -> float:
    return float(rect_rect_gaps(center_a, heading_a, geom_a, center_b, heading_b, geom_b)[0])


def body_gap(center_a, heading_a, geom_a: BodyGeometry,
             center_b, heading_b, geom_b: BodyGeometry) -> float:
    """Contour-to-contour gap between two placed bodies (0 on contact)."""
    if geom_a.is_point and geom_b.is_point:
        return float(math.hypot(center_b[0] - center_a[0], center_b[1] - center_a[1]))
    if geom_b.is_point:
        return float(rect_point_gap(center_a, heading_a, geom_a.length, geom_a.width, center_b))
    if geom_a.is_point:
        return float(rect_point_gap(center_b, heading_b, geom_b.length, geom_b.width, center_a))
    return rect_rect_gap(center_a, heading_a, geom_a, center_b, heading_b, geom_b)
