"""Bounds-algebra helper library available to constraint programs.

Every modifier intersects the incoming bounds with a region derived from a
target object's axis-aligned box and returns new bounds; empty intersections
raise InfeasibleBoundsError rather than clamping.  Modifiers touch only the
translational axes; angular components pass through untouched.

Directional convention: +x points away from the robot, so "behind" an object
means larger x and "in front" smaller x; "left" means smaller y, "right"
larger y.  Scene files share this convention.
"""

from __future__ import annotations

import math

from ..geometry import Pose6, rotated_half_extents
from ..world import CONTACT_TOL, FLOOR_THICKNESS, WorldState, aabb_of, interior_box
from .ast import BoundsBox, InfeasibleBoundsError

VERTICAL_BAND = 0.5     # how far above/below counts for the above/below helpers
ONTOP_SLACK = 0.01      # z slack above the exact resting height for "ontop"
ANYWHERE_DROP_BAND = 0.35

X, Y, Z = 0, 1, 2


def default_bounds(w: WorldState) -> BoundsBox:
    """Broad starting bounds: the workspace box, all orientations."""
    ws = w.scene.workspace
    return BoundsBox.from_xyz(ws.lower, ws.upper)


def get_aabb_bounds(w: WorldState, name: str) -> BoundsBox:
    """The object's axis-aligned box as pose bounds (orientation unconstrained)."""
    box = aabb_of(w, name)
    return BoundsBox.from_xyz(box.lower, box.upper)


def get_obj_center(w: WorldState, name: str) -> Pose6:
    """Current pose of the named object."""
    return w.pose(w.scene.resolve(name))


def _half_height(w: WorldState, name: str) -> float:
    """Vertical half extent of an object at its current rotation, or the
    conservative box bound when it is held or riding."""
    name = w.scene.resolve(name)
    model = w.scene.model(name)
    try:
        pose = w.pose(name)
    except Exception:
        return max(model.half_extents)
    return rotated_half_extents(model.half_extents, *pose.rpy)[2]


def modify_bounds_behind(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Restrict x to lie strictly beyond the object's far side (larger x)."""
    box = aabb_of(w, name)
    return b.clamp_axis(X, box.upper[X] + CONTACT_TOL, math.inf)


def modify_bounds_in_front_of(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Restrict x to lie strictly between the robot and the object (smaller x)."""
    box = aabb_of(w, name)
    return b.clamp_axis(X, -math.inf, box.lower[X] - CONTACT_TOL)


def modify_bounds_left_of(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Restrict y strictly below the object's minimum y."""
    box = aabb_of(w, name)
    return b.clamp_axis(Y, -math.inf, box.lower[Y] - CONTACT_TOL)


def modify_bounds_right_of(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Restrict y strictly above the object's maximum y."""
    box = aabb_of(w, name)
    return b.clamp_axis(Y, box.upper[Y] + CONTACT_TOL, math.inf)


def _clamp_footprint(b: BoundsBox, box) -> BoundsBox:
    return b.clamp_axis(X, box.lower[X], box.upper[X]).clamp_axis(
        Y, box.lower[Y], box.upper[Y])


def modify_bounds_above(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Directly over the object's footprint, in a band above its top face."""
    box = aabb_of(w, name)
    return _clamp_footprint(b, box).clamp_axis(
        Z, box.upper[Z], box.upper[Z] + VERTICAL_BAND)


def modify_bounds_below(w: WorldState, b: BoundsBox, name: str) -> BoundsBox:
    """Directly under the object's footprint, in a band below its bottom face."""
    box = aabb_of(w, name)
    return _clamp_footprint(b, box).clamp_axis(
        Z, box.lower[Z] - VERTICAL_BAND, box.lower[Z])


def modify_bounds_near(w: WorldState, b: BoundsBox, name: str,
                       closeness: float) -> BoundsBox:
    """Within `closeness` of the object's center along each of x, y, z."""
    center = aabb_of(w, name).center
    out = b
    for axis in (X, Y, Z):
        out = out.clamp_axis(axis, center[axis] - closeness, center[axis] + closeness)
    return out


def modify_bounds_ontop(w: WorldState, b: BoundsBox, obj1: str, obj2: str) -> BoundsBox:
    """Resting on obj2's top face: xy within its footprint, z pinned to the
    top plus obj1's half height (a narrow band)."""
    support = aabb_of(w, obj2)
    hz = _half_height(w, obj1)
    return _clamp_footprint(b, support).clamp_axis(
        Z, support.upper[Z] - CONTACT_TOL, support.upper[Z] + 2.0 * hz + ONTOP_SLACK)


def modify_bounds_inside(w: WorldState, b: BoundsBox, *args: str) -> BoundsBox:
    """Within a container: xy inside its footprint, z within its interior.

    Callable with just the container, or with (placed_object, container).
    """
    if not args or len(args) > 2:
        raise InfeasibleBoundsError("inside expects one or two object arguments")
    container = args[-1]
    box = aabb_of(w, container)
    try:
        floor = interior_box(w, container).lower[Z]
    except Exception:
        floor = box.lower[Z] + FLOOR_THICKNESS
    return _clamp_footprint(b, box).clamp_axis(Z, floor, box.upper[Z])


def position_within_bounds(p: Pose6, b: BoundsBox) -> bool:
    """Checks the xyz position of a pose against the bounds (inclusive)."""
    return b.contains_position(p.position if isinstance(p, Pose6) else p)


def initialize_bounds_anywhere_on_object(w: WorldState, name: str) -> BoundsBox:
    """Positions over the object's footprint in a drop band above its top,
    any orientation."""
    box = aabb_of(w, name)
    return BoundsBox.from_xyz(
        (box.lower[X], box.lower[Y], box.upper[Z]),
        (box.upper[X], box.upper[Y], box.upper[Z] + ANYWHERE_DROP_BAND))


def sample_pose_uniform(b: BoundsBox, rng) -> Pose6:
    """Uniform draw over all six pose dimensions within the bounds."""
    vals = [rng.uniform(lo, up) if up > lo else lo
            for lo, up in zip(b.lower, b.upper)]
    return Pose6(*vals)


# Registry: canonical name -> implementation (world-taking helpers only).
HELPER_IMPLS = {
    "get_aabb_bounds": get_aabb_bounds,
    "get_obj_center": get_obj_center,
    "modify_bounds_behind": modify_bounds_behind,
    "modify_bounds_in_front_of": modify_bounds_in_front_of,
    "modify_bounds_left_of": modify_bounds_left_of,
    "modify_bounds_right_of": modify_bounds_right_of,
    "modify_bounds_above": modify_bounds_above,
    "modify_bounds_below": modify_bounds_below,
    "modify_bounds_near": modify_bounds_near,
    "modify_bounds_ontop": modify_bounds_ontop,
    "modify_bounds_inside": modify_bounds_inside,
    "position_within_bounds": position_within_bounds,
    "initialize_bounds_anywhere_on_object": initialize_bounds_anywhere_on_object,
}

# Long emitted-style names accepted by the parser.
HELPER_ALIASES = {
    "modify_pose_bounds_to_be_behind_object": "modify_bounds_behind",
    "modify_pose_bounds_to_be_in_front_of_object": "modify_bounds_in_front_of",
    "modify_pose_bounds_to_be_left_of_object": "modify_bounds_left_of",
    "modify_pose_bounds_to_be_right_of_object": "modify_bounds_right_of",
    "modify_pose_bounds_to_be_above_object": "modify_bounds_above",
    "modify_pose_bounds_to_be_below_object": "modify_bounds_below",
    "modify_pose_bounds_to_be_near_object": "modify_bounds_near",
    "modify_pose_bounds_to_be_ontop_of_object": "modify_bounds_ontop",
    "modify_pose_bounds_to_be_inside_object": "modify_bounds_inside",
}

_B, _S, _O, _P, _BO = "bounds", "scalar", "object", "pose", "bool"

# name -> list of (argument types, return type); multiple rows allow arity
# variants.  The world handle is injected by the evaluator, never written.
HELPER_SIGNATURES = {
    "get_aabb_bounds": [((_O,), _B)],
    "get_obj_center": [((_O,), _P)],
    "modify_bounds_behind": [((_B, _O), _B)],
    "modify_bounds_in_front_of": [((_B, _O), _B)],
    "modify_bounds_left_of": [((_B, _O), _B)],
    "modify_bounds_right_of": [((_B, _O), _B)],
    "modify_bounds_above": [((_B, _O), _B)],
    "modify_bounds_below": [((_B, _O), _B)],
    "modify_bounds_near": [((_B, _O, _S), _B)],
    "modify_bounds_ontop": [((_B, _O, _O), _B)],
    "modify_bounds_inside": [((_B, _O), _B), ((_B, _O, _O), _B)],
    "position_within_bounds": [((_P, _B), _BO)],
    "initialize_bounds_anywhere_on_object": [((_O,), _B)],
}
