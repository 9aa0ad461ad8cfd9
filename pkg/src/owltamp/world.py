"""Deterministic tabletop world: box-shaped objects, three skills, no physics.

Objects are axis-aligned hulls of rotated boxes.  Placement settles
analytically: the object drops straight down from the release pose onto the
highest support under its center (or a container's interior floor), keeping
its orientation.  Skills are pure functions returning outcome records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .geometry import Aabb, Pose6, box_at_pose, rotated_half_extents

CONTACT_TOL = 1e-4          # boxes collide only when interpenetrating beyond this
POUR_TILT_MIN = 1.2         # radians of tilt needed for contents to fall out
GRASP_MARGIN = 0.02         # grasp point may lie this far outside the object box
GRASP_TILT_TOL = 0.2        # roll/pitch distance from level (0 or pi) for a valid grasp
GRIPPER_CLEARANCE = 0.08    # narrower container openings block grasps inside them
UPRIGHT_TOL = 0.1           # |roll|,|pitch| below this counts as upright
WALL_THICKNESS = 0.008      # container wall, shrinks the interior footprint
FLOOR_THICKNESS = 0.01      # container floor height above its box bottom
SPILL_GAP = 0.01            # gap between poured-out contents and the container
DEFAULT_DROP_BAND = (0.01, 0.35)


class WorldError(Exception):
    pass


class UnknownObjectError(WorldError):
    pass


class ObjectHeldError(WorldError):
    pass


@dataclass(frozen=True)
class ObjectModel:
    name: str
    half_extents: tuple[float, float, float]
    kind: str = "item"  # item | surface | container
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("item", "surface", "container"):
            raise WorldError(f"{self.name}: bad kind {self.kind!r}")
        if any(h <= 0 for h in self.half_extents):
            raise WorldError(f"{self.name}: half extents must be positive")
        object.__setattr__(self, "half_extents", tuple(float(h) for h in self.half_extents))
        object.__setattr__(self, "tags", tuple(self.tags))


@dataclass(frozen=True)
class Scene:
    """Immutable scene description shared by every WorldState of a task."""

    models: dict[str, ObjectModel]
    workspace: Aabb
    table: str = "table_surface"
    aliases: tuple[tuple[str, str], ...] = (("table", "table_surface"),)

    def __post_init__(self):
        surfaces = [m for m in self.models.values()
                    if m.kind == "surface" and m.name == self.table]
        if len(surfaces) != 1:
            raise WorldError(f"scene needs exactly one surface named {self.table!r}")

    def model(self, name: str) -> ObjectModel:
        resolved = self.resolve(name)
        try:
            return self.models[resolved]
        except KeyError:
            raise UnknownObjectError(f"unknown object {name!r}") from None

    def resolve(self, name: str) -> str:
        for alias, target in self.aliases:
            if name == alias:
                return target
        return name


@dataclass(frozen=True)
class HeldItem:
    name: str
    grasp: Pose6
    # Contained objects riding along, as (name, offset of their center from
    # the container center at pick time, original orientation).
    riders: tuple[tuple[str, tuple[float, float, float], tuple[float, float, float]], ...] = ()
    # Container orientation at pick time; rider offsets are relative to it.
    base_rpy: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class WorldState:
    scene: Scene
    poses: dict[str, Pose6]
    held: HeldItem | None = None
    robot_conf: tuple[float, float, float] = (0.2, 0.0, 0.3)

    def pose(self, name: str) -> Pose6:
        name = self.scene.resolve(name)
        if self.held is not None and name == self.held.name:
            raise ObjectHeldError(f"{name!r} is held")
        try:
            return self.poses[name]
        except KeyError:
            if name in self.scene.models:
                raise ObjectHeldError(f"{name!r} has no pose (riding in a container)") from None
            raise UnknownObjectError(f"unknown object {name!r}") from None

    def placed_objects(self) -> list[str]:
        return sorted(self.poses)

    def all_objects(self) -> list[str]:
        return sorted(self.scene.models)

    def _replace(self, **kw) -> "WorldState":
        return replace(self, **kw)


@dataclass(frozen=True)
class SkillOutcome:
    new_world: WorldState
    success: bool
    failure_reason: str = ""

    def __post_init__(self):
        if self.success and self.failure_reason:
            raise WorldError("successful outcome must carry no failure reason")


def _fail(w: WorldState, reason: str) -> SkillOutcome:
    return SkillOutcome(w, False, reason)


def aabb_of(w: WorldState, name: str) -> Aabb:
    """Axis-aligned hull of the object's rotated box at its current pose."""
    name = w.scene.resolve(name)
    model = w.scene.model(name)
    return box_at_pose(w.pose(name), model.half_extents)


def aabb_at(w: WorldState, name: str, pose: Pose6) -> Aabb:
    return box_at_pose(pose, w.scene.model(name).half_extents)


def interior_box(w: WorldState, name: str) -> Aabb:
    """Open interior of a container: footprint shrunk by the wall, floor raised."""
    name = w.scene.resolve(name)
    model = w.scene.model(name)
    if model.kind != "container":
        raise WorldError(f"{name!r} is not a container")
    outer = aabb_of(w, name)
    lo, up = outer.lower, outer.upper
    inner_lo = (lo[0] + WALL_THICKNESS, lo[1] + WALL_THICKNESS, lo[2] + FLOOR_THICKNESS)
    inner_up = (up[0] - WALL_THICKNESS, up[1] - WALL_THICKNESS, up[2])
    if any(l >= u for l, u in zip(inner_lo[:2], inner_up[:2])):
        raise WorldError(f"{name!r} interior collapsed; walls too thick")
    return Aabb(inner_lo, inner_up)


def contents(w: WorldState, container: str) -> list[str]:
    """Objects whose center currently lies in the container's interior."""
    container = w.scene.resolve(container)
    if w.scene.model(container).kind != "container":
        return []
    if w.held is not None and w.held.name == container:
        return [name for name, _, _ in w.held.riders]
    inner = interior_box(w, container)
    out = []
    for name in w.poses:
        if name == container:
            continue
        if inner.contains_point(w.pose(name).position, slack=CONTACT_TOL):
            out.append(name)
    return sorted(out)


def boxes_collide(scene: Scene, o1: str, pose1, o2: str, pose2) -> bool:
    """Strict-overlap test between two objects at explicit poses.

    Containers do not collide with objects that sit inside their open
    interior (footprint within the walls and above the floor).
    """
    o1, o2 = scene.resolve(o1), scene.resolve(o2)
    m1, m2 = scene.model(o1), scene.model(o2)
    p1 = pose1 if isinstance(pose1, Pose6) else Pose6.from_sequence(pose1)
    p2 = pose2 if isinstance(pose2, Pose6) else Pose6.from_sequence(pose2)
    b1, b2 = box_at_pose(p1, m1.half_extents), box_at_pose(p2, m2.half_extents)
    if not b1.overlaps(b2, CONTACT_TOL):
        return False
    if m2.kind == "container" and _inside_open_interior(b1, b2):
        return False
    if m1.kind == "container" and _inside_open_interior(b2, b1):
        return False
    return True


def _inside_open_interior(box: Aabb, container_box: Aabb) -> bool:
    lo, up = container_box.lower, container_box.upper
    return (box.lower[0] >= lo[0] + WALL_THICKNESS - CONTACT_TOL
            and box.upper[0] <= up[0] - WALL_THICKNESS + CONTACT_TOL
            and box.lower[1] >= lo[1] + WALL_THICKNESS - CONTACT_TOL
            and box.upper[1] <= up[1] - WALL_THICKNESS + CONTACT_TOL
            and box.lower[2] >= lo[2] + FLOOR_THICKNESS - CONTACT_TOL)


def collision(w: WorldState, name: str, pose: Pose6, exclude: tuple[str, ...] = ()) -> bool:
    """True iff `name` at `pose` interpenetrates any other placed non-surface object."""
    name = w.scene.resolve(name)
    w.scene.model(name)
    skip = {name, *(w.scene.resolve(e) for e in exclude)}
    for other in w.poses:
        if other in skip or w.scene.model(other).kind == "surface":
            continue
        if boxes_collide(w.scene, name, pose, other, w.pose(other)):
            return True
    return False


def reachable(w: WorldState, pose: Pose6) -> bool:
    """Workspace-box feasibility test standing in for kinematics and motion."""
    return w.scene.workspace.contains_point(pose.position)


def supported_by(w: WorldState, name: str) -> str | None:
    """The object directly supporting `name`: the containing container, or the
    body whose top face its bottom rests on at its center."""
    name = w.scene.resolve(name)
    box = aabb_of(w, name)
    cx, cy = (box.lower[0] + box.upper[0]) / 2, (box.lower[1] + box.upper[1]) / 2
    bottom = box.lower[2]
    for other in w.poses:
        if other == name or w.scene.model(other).kind != "container":
            continue
        if name in contents(w, other):
            return other
    best, best_top = None, -math.inf
    for other in w.poses:
        if other == name:
            continue
        obox = aabb_of(w, other)
        if not obox.contains_xy(cx, cy, slack=CONTACT_TOL):
            continue
        top = obox.upper[2]
        if abs(top - bottom) <= 0.02 + CONTACT_TOL and top > best_top:
            best, best_top = other, top
    return best


def _support_height(w: WorldState, name: str, x: float, y: float,
                    descend_into: str | None, skip: tuple[str, ...] = ()):
    """Resting height and supporting object for a drop at (x, y).

    Returns (support_name, top_z) or None when nothing lies underneath.
    With `descend_into` set, that container's interior floor becomes a
    candidate instead of its rim.
    """
    skip_set = {w.scene.resolve(s) for s in skip} | {w.scene.resolve(name)}
    best = None
    for other in w.poses:
        if other in skip_set:
            continue
        obox = aabb_of(w, other)
        if descend_into is not None and other == descend_into:
            inner = interior_box(w, other)
            if not inner.contains_xy(x, y):
                continue
            floor = inner.lower[2]
            for member in contents(w, other):
                if member in skip_set:
                    continue
                mbox = aabb_of(w, member)
                if mbox.contains_xy(x, y):
                    floor = max(floor, mbox.upper[2])
            cand = (other, floor)
        else:
            if not obox.contains_xy(x, y):
                continue
            cand = (other, obox.upper[2])
        if best is None or cand[1] > best[1]:
            best = cand
    return best


def _settle(w: WorldState, name: str, drop: Pose6, descend_into: str | None = None,
            skip: tuple[str, ...] = ()):
    """Project a drop pose down onto its support; returns (pose, support) or None."""
    support = _support_height(w, name, drop.x, drop.y, descend_into, skip)
    if support is None:
        return None
    hz = rotated_half_extents(w.scene.model(name).half_extents,
                              drop.roll, drop.pitch, drop.yaw)[2]
    pose = drop.moved(z=support[1] + hz)
    return pose, support[0]


def grasp_level(angle: float) -> float:
    """Distance of a grasp roll/pitch from a level hand (0 or pi)."""
    return min(abs(angle), math.pi - abs(angle))


def exec_pick(w: WorldState, name: str, grasp: Pose6) -> SkillOutcome:
    """Grasp an object: the hand closes at `grasp`, contents ride along, and
    anything merely stacked on top cascades down onto the next support."""
    name = w.scene.resolve(name)
    model = w.scene.model(name)
    if w.held is not None:
        return _fail(w, "hand-not-empty")
    if name not in w.poses:
        raise UnknownObjectError(f"unknown or unplaced object {name!r}")
    box = aabb_of(w, name)
    if not box.inflate(GRASP_MARGIN).contains_point(grasp.position):
        return _fail(w, "grasp-outside-object")
    if not reachable(w, grasp):
        return _fail(w, "unreachable")
    if grasp_level(grasp.roll) > GRASP_TILT_TOL or grasp_level(grasp.pitch) > GRASP_TILT_TOL:
        return _fail(w, "grasp-not-level")
    for other in w.poses:
        if other == name or w.scene.model(other).kind == "surface":
            continue
        obox = aabb_of(w, other)
        if not obox.contains_point(grasp.position, slack=-CONTACT_TOL):
            continue
        if w.scene.model(other).kind == "container":
            # Reaching into an open container is fine when the opening admits
            # the gripper; narrow ones make their contents unreachable.
            inner = interior_box(w, other)
            width = min(inner.upper[0] - inner.lower[0], inner.upper[1] - inner.lower[1])
            if width >= GRIPPER_CLEARANCE and inner.contains_point(grasp.position):
                continue
        return _fail(w, "grasp-obstructed")

    riders = []
    base_rpy = (0.0, 0.0, 0.0)
    if model.kind == "container":
        base = w.pose(name)
        base_rpy = base.rpy
        for member in contents(w, name):
            mp = w.pose(member)
            offset = (mp.x - base.x, mp.y - base.y, mp.z - base.z)
            riders.append((member, offset, mp.rpy))
    rider_names = {r[0] for r in riders}

    new_poses = {k: v for k, v in w.poses.items() if k != name and k not in rider_names}
    lifted = WorldState(w.scene, new_poses,
                        HeldItem(name, grasp, tuple(riders), base_rpy),
                        grasp.position)

    # Objects that rested on the picked body drop straight down.
    stacked = sorted(o for o in w.poses
                     if o not in rider_names and o != name and supported_by(w, o) == name)
    for obj in stacked:
        cur = lifted.pose(obj)
        settled = _settle(lifted, obj, cur)
        if settled is None:
            return _fail(w, "cascade-unsupported")
        new_poses[obj] = settled[0]
    if stacked:
        lifted = WorldState(w.scene, new_poses, lifted.held, lifted.robot_conf)
    return SkillOutcome(lifted, True)


def _restore_riders(w: WorldState, held: HeldItem, poses: dict[str, Pose6]):
    """Re-seat riders inside a just-placed container.

    Relative xy offsets follow the container's yaw change and are clamped to
    the interior so contents never end up embedded in a wall.
    """
    container = held.name
    base = poses[container]
    model = w.scene.model(container)
    dyaw = base.yaw - held.base_rpy[2]
    cd, sd = math.cos(dyaw), math.sin(dyaw)
    inner_half = (model.half_extents[0] - WALL_THICKNESS,
                  model.half_extents[1] - WALL_THICKNESS)
    inner_floor = base.z - model.half_extents[2] + FLOOR_THICKNESS
    for name, offset, rpy in riders_sorted(held.riders):
        new_rpy = (rpy[0], rpy[1], rpy[2] + dyaw)
        ext = rotated_half_extents(w.scene.model(name).half_extents, *new_rpy)
        ox = offset[0] * cd - offset[1] * sd
        oy = offset[0] * sd + offset[1] * cd
        for axis, o in ((0, ox), (1, oy)):
            limit = max(0.0, inner_half[axis] - ext[axis])
            if axis == 0:
                ox = min(max(o, -limit), limit)
            else:
                oy = min(max(o, -limit), limit)
        poses[name] = Pose6(base.x + ox, base.y + oy, inner_floor + ext[2], *new_rpy)


def riders_sorted(riders):
    return sorted(riders, key=lambda r: r[0])


def exec_place(w: WorldState, name: str, target: str, drop: Pose6) -> SkillOutcome:
    """Release the held object at `drop`, settling it onto/into `target`.

    Placement into a container requires the rotated footprint to fit through
    the opening; placement onto anything rests on the top face.  The actual
    support is whatever lies underneath - a mismatch with `target` is for the
    caller to detect.
    """
    name, target = w.scene.resolve(name), w.scene.resolve(target)
    if w.held is None or w.held.name != name:
        return _fail(w, "not-holding")
    w.scene.model(target)
    if not reachable(w, drop):
        return _fail(w, "unreachable")

    descend = None
    if w.scene.model(target).kind == "container" and target in w.poses:
        inner = interior_box(w, target)
        ext = rotated_half_extents(w.scene.model(name).half_extents,
                                   drop.roll, drop.pitch, drop.yaw)
        fits = (2 * ext[0] <= inner.upper[0] - inner.lower[0]
                and 2 * ext[1] <= inner.upper[1] - inner.lower[1])
        if inner.contains_xy(drop.x, drop.y):
            if not fits:
                return _fail(w, "does-not-fit")
            descend = target

    settled = _settle(w, name, drop, descend_into=descend)
    if settled is None:
        return _fail(w, "no-support")
    pose, _support = settled
    if drop.z < pose.z - CONTACT_TOL:
        return _fail(w, "release-below-rest")
    if collision(w, name, pose, exclude=(target,)):
        return _fail(w, "collision")

    poses = dict(w.poses)
    poses[name] = pose
    if w.held.riders:
        _restore_riders(w, w.held, poses)
    after = WorldState(w.scene, poses, None, drop.position)
    for rider, _, _ in w.held.riders:
        if collision(after, rider, after.pose(rider), exclude=(name,)):
            return _fail(w, "contents-collision")
    return SkillOutcome(after, True)


def exec_pour(w: WorldState, name: str, target: str, params) -> SkillOutcome:
    """Tip the held object above `target`; its contents spill out beside the
    pour point, then the object itself is set down there, still tilted.

    `params` is (x, y, z, tilt): the hand position and the tipping angle.
    """
    name, target = w.scene.resolve(name), w.scene.resolve(target)
    if w.held is None or w.held.name != name:
        return _fail(w, "not-holding")
    params = tuple(float(v) for v in params)
    if len(params) != 4:
        raise WorldError(f"pour expects 4 parameters, got {len(params)}")
    x, y, z, tilt = params
    if not w.scene.workspace.contains_point((x, y, z)):
        return _fail(w, "unreachable")
    tbox = aabb_of(w, target)
    if not tbox.contains_xy(x, y):
        return _fail(w, "not-above")
    if abs(tilt) <= POUR_TILT_MIN:
        return _fail(w, "insufficient-tilt")

    held_ext = rotated_half_extents(w.scene.model(name).half_extents, tilt, 0.0, 0.0)
    poses = dict(w.poses)
    inter = WorldState(w.scene, poses, w.held, w.robot_conf)
    offset = held_ext[0] + SPILL_GAP
    for rider, _, rpy in w.held.riders:
        r_ext = rotated_half_extents(w.scene.model(rider).half_extents, *rpy)
        offset += r_ext[0]
        settled = _settle(inter, rider, Pose6(x + offset, y, z, *rpy))
        if settled is None:
            return _fail(w, "spill-unsupported")
        rpose = settled[0]
        if collision(inter, rider, rpose):
            return _fail(w, "spill-blocked")
        poses[rider] = rpose
        inter = WorldState(w.scene, poses, w.held, w.robot_conf)
        offset += r_ext[0] + SPILL_GAP

    settled = _settle(inter, name, Pose6(x, y, z, tilt, 0.0, 0.0))
    if settled is None:
        return _fail(w, "no-support")
    pose = settled[0]
    if collision(inter, name, pose):
        return _fail(w, "collision")
    poses[name] = pose
    return SkillOutcome(WorldState(w.scene, poses, None, (x, y, z)), True)


def is_upright(pose: Pose6, tol: float = UPRIGHT_TOL) -> bool:
    return abs(pose.roll) < tol and abs(pose.pitch) < tol


# --- Scene files --------------------------------------------------------------

def scene_to_json(w: WorldState) -> dict:
    return {
        "workspace": {"lower": list(w.scene.workspace.lower),
                      "upper": list(w.scene.workspace.upper)},
        "table": w.scene.table,
        "aliases": [list(pair) for pair in w.scene.aliases],
        "objects": [
            {"name": m.name, "half_extents": list(m.half_extents), "kind": m.kind,
             "tags": list(m.tags)}
            for m in sorted(w.scene.models.values(), key=lambda m: m.name)
        ],
        "poses": {name: list(w.poses[name].as_tuple()) for name in sorted(w.poses)},
        "robot_conf": list(w.robot_conf),
    }


def scene_from_json(data: dict) -> WorldState:
    models = {}
    for spec in data["objects"]:
        m = ObjectModel(spec["name"], tuple(spec["half_extents"]),
                        spec.get("kind", "item"), tuple(spec.get("tags", ())))
        models[m.name] = m
    ws = data["workspace"]
    scene = Scene(models, Aabb(tuple(ws["lower"]), tuple(ws["upper"])),
                  data.get("table", "table_surface"),
                  tuple(tuple(p) for p in data.get("aliases", [["table", "table_surface"]])))
    poses = {name: Pose6.from_sequence(vals)
             for name, vals in sorted(data["poses"].items())}
    unknown = set(poses) - set(models)
    if unknown:
        raise WorldError(f"poses reference unknown objects {sorted(unknown)}")
    return WorldState(scene, poses, None, tuple(data.get("robot_conf", (0.2, 0.0, 0.3))))


def save_scene(w: WorldState, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_json(w), fh, indent=2, sort_keys=True)


def load_scene(path: str) -> WorldState:
    with open(path, encoding="utf-8") as fh:
        return scene_from_json(json.load(fh))
