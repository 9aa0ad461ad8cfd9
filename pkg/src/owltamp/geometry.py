"""6-DoF poses and axis-aligned box arithmetic for the tabletop world."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle into [-pi, pi]."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a - math.pi


@dataclass(frozen=True)
class Pose6:
    """Position plus roll/pitch/yaw, angles normalized into [-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "roll", "pitch", "yaw"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"non-finite pose component {name}={v!r}")
        object.__setattr__(self, "roll", wrap_angle(self.roll))
        object.__setattr__(self, "pitch", wrap_angle(self.pitch))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def rpy(self) -> tuple[float, float, float]:
        return (self.roll, self.pitch, self.yaw)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.x, self.y, self.z, self.roll, self.pitch, self.yaw)

    def moved(self, **kw) -> "Pose6":
        return replace(self, **kw)

    @staticmethod
    def from_sequence(vals) -> "Pose6":
        vals = [float(v) for v in vals]
        if len(vals) != 6:
            raise ValueError(f"pose needs 6 components, got {len(vals)}")
        return Pose6(*vals)


def rotation_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """World-frame rotation R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


def rotated_half_extents(half_extents, roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Half extents of the axis-aligned hull of a rotated box.

    Equals |R| @ h, which matches the max over the 8 rotated corners.
    """
    r = np.abs(rotation_matrix(roll, pitch, yaw))
    return r @ np.asarray(half_extents, dtype=float)


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box; lower <= upper componentwise."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        up = tuple(float(v) for v in self.upper)
        if any(l > u for l, u in zip(lo, up)):
            raise ValueError(f"inverted box: lower={lo} upper={up}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @staticmethod
    def from_center(center, half_extents) -> "Aabb":
        c = np.asarray(center, dtype=float)
        h = np.asarray(half_extents, dtype=float)
        return Aabb(tuple(c - h), tuple(c + h))

    @property
    def center(self) -> tuple[float, float, float]:
        return tuple((l + u) / 2.0 for l, u in zip(self.lower, self.upper))

    @property
    def half_extents(self) -> tuple[float, float, float]:
        return tuple((u - l) / 2.0 for l, u in zip(self.lower, self.upper))

    def contains_point(self, p, slack: float = 0.0) -> bool:
        return all(l - slack <= v <= u + slack for v, l, u in zip(p, self.lower, self.upper))

    def contains_xy(self, x: float, y: float, slack: float = 0.0) -> bool:
        return (self.lower[0] - slack <= x <= self.upper[0] + slack
                and self.lower[1] - slack <= y <= self.upper[1] + slack)

    def contains_box(self, other: "Aabb", slack: float = 0.0) -> bool:
        return all(sl - slack <= ol and ou <= su + slack
                   for sl, su, ol, ou in zip(self.lower, self.upper, other.lower, other.upper))

    def overlap_extent(self, other: "Aabb") -> tuple[float, float, float]:
        """Per-axis interval overlap length (negative when separated)."""
        return tuple(min(su, ou) - max(sl, ol)
                     for sl, su, ol, ou in zip(self.lower, self.upper, other.lower, other.upper))

    def overlaps(self, other: "Aabb", tol: float = 0.0) -> bool:
        """True when boxes interpenetrate strictly more than tol on every axis."""
        return all(o > tol for o in self.overlap_extent(other))

    def inflate(self, margin: float) -> "Aabb":
        return Aabb(tuple(l - margin for l in self.lower), tuple(u + margin for u in self.upper))


def box_at_pose(pose: Pose6, half_extents) -> Aabb:
    """Axis-aligned hull of a box with canonical half extents at a pose."""
    h = rotated_half_extents(half_extents, pose.roll, pose.pitch, pose.yaw)
    return Aabb.from_center(pose.position, h)
