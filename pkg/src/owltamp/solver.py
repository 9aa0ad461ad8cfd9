"""Search-then-sample solving: A* for skeletons, per-action sampling against
the world model, and skeleton-level backtracking under budgets.

Refinement is greedy-commit: each action draws continuous parameters until
one draw survives the skill simulation, the symbolic-effect check, and its
attached constraint programs; cross-action coupling is handled by trying new
skeletons, never by intra-skeleton backjumping.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import world as W
from .geometry import Pose6
from .lang import ConstraintFn, eval_constraint
from .model import (
    GroundAction, Literal, OptimisticEvaluator, SemanticType, State, Value,
    apply, applicable, literal_holds,
)
from .partial_plan import PartialPlan, TransformedProblem, verify_subsequence


class PlanningError(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class Budgets:
    samples_per_action: int = 500
    backtracks: int = 5

    def __post_init__(self):
        if self.samples_per_action < 0 or self.backtracks < 0:
            raise ValueError("budgets must be nonnegative")

    @property
    def skeleton_attempts(self) -> int:
        return max(1, self.backtracks)


@dataclass(frozen=True)
class Skeleton:
    """Ordered ground actions with parallel constraint/hint slots."""

    actions: tuple[GroundAction, ...]
    constraints: tuple[tuple[ConstraintFn, ...], ...]
    hints: tuple[dict | None, ...]
    provenance: str = "initial"

    def __post_init__(self):
        if not (len(self.actions) == len(self.constraints) == len(self.hints)):
            raise ValueError("skeleton slot lists must align")

    def __len__(self):
        return len(self.actions)


@dataclass(frozen=True)
class RefinementFailure:
    index: int          # failing action index; -1 means an empty plan's goal check
    reason: str
    samples_used: int


@dataclass(frozen=True)
class Solution:
    actions: tuple[GroundAction, ...]      # continuous parameters bound
    trace: tuple[W.WorldState, ...]        # world before step i is trace[i]
    final_world: W.WorldState
    samples_used: int
    skeletons_tried: int
    wall_time: float = 0.0


@dataclass(frozen=True)
class Infeasible:
    reason: str
    samples_used: int
    skeletons_tried: int
    wall_time: float = 0.0


# --- Task planning (A*) --------------------------------------------------------


def _executed_level(literals) -> int:
    level = 0
    for lit in literals:
        if lit.predicate.name == "Executed":
            level = max(level, int(str(lit.args[0])))
    return level


def plan_task(s0: State, actions: tuple[GroundAction, ...],
              goal: tuple[Literal, ...], node_cap: int = 100_000) -> list[GroundAction]:
    """Minimum-length applicable sequence reaching the goal under optimistic
    static evaluation.  Unit costs; admissible heuristic combining the
    remaining bookkeeping-chain depth with the count of unmet goal literals."""
    evaluator = OptimisticEvaluator()
    ordered = sorted(actions, key=lambda a: a.discrete_signature())
    chain_target = _executed_level(goal)
    plain_goals = tuple(g for g in goal if g.predicate.name != "Executed")

    def h(literals: frozenset[Literal]) -> int:
        chain = max(0, chain_target - _executed_level(literals))
        unmet = sum(1 for g in plain_goals if not literal_holds(literals, g))
        return max(chain, unmet)

    def satisfied(literals: frozenset[Literal]) -> bool:
        return all(literal_holds(literals, g) for g in goal)

    start = s0.true_literals
    if satisfied(start):
        return []

    counter = itertools.count()
    frontier: list[tuple[int, int, int]] = []
    heapq.heappush(frontier, (h(start), next(counter), 0))
    payloads = {0: (start, None, None)}  # id -> (literals, parent id, action)
    best_g = {start: 0}
    g_of = {0: 0}
    expansions = 0

    while frontier:
        f, _, node_id = heapq.heappop(frontier)
        literals, _, _ = payloads[node_id]
        g = g_of[node_id]
        if g > best_g.get(literals, math.inf):
            continue
        if satisfied(literals):
            plan = []
            cur = node_id
            while payloads[cur][1] is not None:
                plan.append(payloads[cur][2])
                cur = payloads[cur][1]
            return list(reversed(plan))
        expansions += 1
        if expansions > node_cap:
            raise PlanningError("node-cap-exceeded")
        state = State(literals)
        for action in ordered:
            if not applicable(state, action, evaluator):
                continue
            nxt = apply(state, action).true_literals
            ng = g + 1
            if ng >= best_g.get(nxt, math.inf):
                continue
            best_g[nxt] = ng
            nid = next(counter) + 1_000_000_000
            payloads[nid] = (nxt, node_id, action)
            g_of[nid] = ng
            heapq.heappush(frontier, (ng + h(nxt), next(counter), nid))

    raise PlanningError("unreachable-goal")


# --- Samplers -------------------------------------------------------------------

FULL_ANGLE = (-math.pi, math.pi)


@dataclass(frozen=True)
class SamplerSpec:
    """Per-(action, object) orientation restriction bands."""

    roll: tuple[float, float] = FULL_ANGLE
    pitch: tuple[float, float] = FULL_ANGLE
    yaw: tuple[float, float] = FULL_ANGLE

    @staticmethod
    def from_dict(d: dict) -> "SamplerSpec":
        def band(key):
            v = d.get(key)
            return FULL_ANGLE if v is None else (float(v[0]), float(v[1]))
        return SamplerSpec(band("roll"), band("pitch"), band("yaw"))


def _draw_rpy(rng: np.random.Generator, spec: SamplerSpec) -> tuple[float, float, float]:
    return (rng.uniform(*spec.roll), rng.uniform(*spec.pitch), rng.uniform(*spec.yaw))


def sample_grasp(w: W.WorldState, obj: str, rng: np.random.Generator,
                 spec: SamplerSpec) -> Pose6:
    """Anywhere within the object's box, orientation from the given bands."""
    box = W.aabb_of(w, obj)
    pos = rng.uniform(box.lower, box.upper)
    return Pose6(*pos, *_draw_rpy(rng, spec))


def sample_place(w: W.WorldState, obj: str, target: str, rng: np.random.Generator,
                 spec: SamplerSpec, hint: dict | None = None) -> Pose6:
    """A release pose broadly above the target's footprint."""
    box = W.aabb_of(w, target)
    lo, hi = W.DEFAULT_DROP_BAND
    avoid = (hint or {}).get("avoid_xy")
    reach = max(w.scene.model(w.scene.resolve(obj)).half_extents)
    for _ in range(100):
        x = rng.uniform(box.lower[0], box.upper[0])
        y = rng.uniform(box.lower[1], box.upper[1])
        if avoid is not None and (avoid[0][0] - reach <= x <= avoid[1][0] + reach
                                  and avoid[0][1] - reach <= y <= avoid[1][1] + reach):
            continue
        break
    z = rng.uniform(box.upper[2] + lo, box.upper[2] + hi)
    return Pose6(x, y, z, *_draw_rpy(rng, spec))


def sample_pour(w: W.WorldState, obj: str, target: str,
                rng: np.random.Generator) -> tuple[float, float, float, float]:
    """A tipping position above the target plus a tilt angle."""
    box = W.aabb_of(w, target)
    height = 2.0 * w.scene.model(w.scene.resolve(obj)).half_extents[2]
    x = rng.uniform(box.lower[0], box.upper[0])
    y = rng.uniform(box.lower[1], box.upper[1])
    z = rng.uniform(box.upper[2] + height, box.upper[2] + 2.0 * height)
    tilt = rng.uniform(-math.pi, math.pi)
    return (x, y, z, tilt)


class RestrictionTable:
    """Lookup of orientation bands keyed by action name and object."""

    def __init__(self, entries: list[dict] | None = None):
        self._entries = []
        for e in entries or []:
            self._entries.append((e.get("action", "*"), e.get("object", "*"),
                                  SamplerSpec.from_dict(e)))

    def lookup(self, action: str, obj: str) -> SamplerSpec:
        for act, name, spec in self._entries:
            if act in ("*", action) and name in ("*", obj):
                return spec
        return SamplerSpec()


# --- Refinement ------------------------------------------------------------------


def _vec(pose: Pose6) -> Value:
    return Value.vec(pose.as_tuple())


def _action_objects(action: GroundAction) -> dict[str, str]:
    out = {}
    for param, value in action.binding:
        if action.schema.param_type(param) is SemanticType.OBJ:
            out[param] = str(value)
    return out


def _geometric_effects_hold(action: GroundAction, w2: W.WorldState) -> bool:
    name = action.name
    objs = _action_objects(action)
    if name == "place_ontop":
        return W.supported_by(w2, objs["o"]) == w2.scene.resolve(objs["s"])
    if name == "place_inside":
        return objs["o"] in W.contents(w2, objs["s"])
    return True


def _constraints_pass(fns, w2: W.WorldState) -> bool:
    return all(eval_constraint(fn, w2) for fn in fns)


def refine(sk: Skeleton, scene: W.WorldState, goal_fns: tuple[ConstraintFn, ...],
           budgets: Budgets, rng: np.random.Generator,
           restrictions: RestrictionTable | None = None):
    """Sample continuous parameters for each action in order.

    Returns a Solution (with bound actions and the world trace) or a
    RefinementFailure naming the index that exhausted its samples.  Goal
    constraint programs are checked as part of accepting the final action.
    """
    restrictions = restrictions or RestrictionTable()
    if not sk.actions:
        if _constraints_pass(goal_fns, scene):
            return Solution((), (scene,), scene, 0, 1)
        return RefinementFailure(-1, "goal-constraint-unsatisfied", 0)

    world = scene
    trace = [scene]
    bound: list[GroundAction] = []
    samples_used = 0
    last = len(sk.actions) - 1

    for i, action in enumerate(sk.actions):
        objs = {k: scene.scene.resolve(v) for k, v in _action_objects(action).items()}
        fns = sk.constraints[i]
        hint = sk.hints[i]
        accepted = None
        reason = "sampling-exhausted"
        for _ in range(budgets.samples_per_action):
            samples_used += 1
            if action.name == "pick":
                spec = restrictions.lookup("pick", objs["o"])
                if objs["o"] not in world.poses:
                    reason = "precondition"
                    break
                grasp = sample_grasp(world, objs["o"], rng, spec)
                prior_pose = world.pose(objs["o"])
                outcome = W.exec_pick(world, objs["o"], grasp)
                updates = {"g": _vec(grasp), "p": _vec(prior_pose),
                           "q": Value.vec(grasp.position)}
            elif action.name in ("place_ontop", "place_inside"):
                spec = restrictions.lookup(action.name, objs["o"])
                if world.held is None or world.held.name != world.scene.resolve(objs["o"]):
                    reason = "precondition"
                    break
                drop = sample_place(world, objs["o"], objs["s"], rng, spec, hint)
                outcome = W.exec_place(world, objs["o"], objs["s"], drop)
                updates = {"g": _vec(world.held.grasp), "q": Value.vec(drop.position)}
                if outcome.success:
                    updates["p"] = _vec(outcome.new_world.pose(objs["o"]))
            elif action.name == "pour":
                if world.held is None or world.held.name != world.scene.resolve(objs["o"]):
                    reason = "precondition"
                    break
                params = sample_pour(world, objs["o"], objs["s"], rng)
                outcome = W.exec_pour(world, objs["o"], objs["s"], params)
                updates = {"g": _vec(world.held.grasp), "t": Value.vec(params),
                           "q": Value.vec(params[:3])}
                if outcome.success:
                    updates["p"] = _vec(outcome.new_world.pose(objs["o"]))
            else:
                raise PlanningError(f"no skill for action {action.name!r}")

            if not outcome.success:
                reason = outcome.failure_reason
                continue
            if not _geometric_effects_hold(action, outcome.new_world):
                reason = "effects-unsatisfied"
                continue
            if not _constraints_pass(fns, outcome.new_world):
                reason = "constraint-unsatisfied"
                continue
            if i == last and not _constraints_pass(goal_fns, outcome.new_world):
                reason = "goal-constraint-unsatisfied"
                continue
            accepted = (action.with_values(_typed_updates(action, updates)),
                        outcome.new_world)
            break
        if accepted is None:
            return RefinementFailure(i, reason, samples_used)
        bound.append(accepted[0])
        world = accepted[1]
        trace.append(world)

    return Solution(tuple(bound), tuple(trace), world, samples_used, 1)


def _typed_updates(action: GroundAction, updates: dict[str, Value]) -> dict[str, Value]:
    known = {p.name for p in action.schema.params}
    return {k: v for k, v in updates.items() if k in known}


# --- Backtracking ------------------------------------------------------------------


def _hand_empty_before(sk: Skeleton, index: int) -> bool:
    empty = True
    for action in sk.actions[:index]:
        if action.name == "pick":
            empty = False
        elif action.name in ("place_ontop", "place_inside", "pour"):
            empty = True
    return empty


def _insertion_point(sk: Skeleton, index: int) -> int:
    """Earliest position at or before `index` where the hand is free."""
    j = index
    while j > 0 and not _hand_empty_before(sk, j):
        j -= 1
    return j


def _footprint_blockers(scene: W.WorldState, target: str,
                        ignore: set[str]) -> list[str]:
    target = scene.scene.resolve(target)
    if target not in scene.poses:
        return []
    footprint = W.aabb_of(scene, target)
    out = []
    for name in scene.placed_objects():
        if name in ignore or name == target:
            continue
        if scene.scene.model(name).kind == "surface":
            continue
        box = W.aabb_of(scene, name)
        overlap = footprint.overlap_extent(box)
        if overlap[0] > 0 and overlap[1] > 0:
            out.append(name)
    return out


def _fresh_opt(counter: itertools.count, hint: str) -> Value:
    return Value.opt(next(counter), hint)


def _make_ground(domain, name: str, objs: dict[str, str], counter: itertools.count,
                 all_objects: tuple[str, ...]) -> GroundAction:
    from .model import instantiate
    schema = domain.schema(name)
    binding: dict[str, Value] = {}
    for p in schema.params:
        if p.name in objs:
            binding[p.name] = Value.sym(objs[p.name])
        elif p.type is SemanticType.DESCRIPTION:
            binding[p.name] = _fresh_opt(counter, "d")
        else:
            binding[p.name] = _fresh_opt(counter, p.type.value[0])
    return instantiate(schema, binding, objects=all_objects)


_BACKTRACK_IDS = itertools.count(10_000_000)


def backtrack_strategy(fail: RefinementFailure, sk: Skeleton, scene: W.WorldState,
                       domain, rng: np.random.Generator,
                       ids: itertools.count | None = None) -> list[Skeleton]:
    """Candidate successor skeletons after a refinement failure.

    Primary: when a release-type step failed and other objects intrude on the
    target's footprint, insert a clearing sequence per blocker (pick+place to
    open table; containers holding a blocker are emptied by pouring).
    Secondary: retry the same skeleton with a fresh sample stream.
    """
    ids = ids if ids is not None else _BACKTRACK_IDS
    candidates: list[Skeleton] = []
    if 0 <= fail.index < len(sk.actions):
        action = sk.actions[fail.index]
        objs = _action_objects(action)
        if action.name in ("place_ontop", "place_inside", "pour"):
            target = objs["s"]
            ignore = {scene.scene.resolve(objs["o"])}
            blockers = _footprint_blockers(scene, target, ignore)
            order = list(rng.permutation(len(blockers)))
            table = scene.scene.table
            insert_at = _insertion_point(sk, fail.index)
            all_objs = tuple(scene.all_objects())
            for k in order:
                blocker = blockers[k]
                container = W.supported_by(scene, blocker)
                inside = (container is not None
                          and scene.scene.model(container).kind == "container"
                          and blocker in W.contents(scene, container))
                if inside:
                    # Pouring sets the container back down by itself.
                    seq = [
                        _make_ground(domain, "pick", {"o": container}, ids, all_objs),
                        _make_ground(domain, "pour", {"o": container, "s": table},
                                     ids, all_objs),
                    ]
                else:
                    seq = [
                        _make_ground(domain, "pick", {"o": blocker}, ids, all_objs),
                        _make_ground(domain, "place_ontop", {"o": blocker, "s": table},
                                     ids, all_objs),
                    ]
                avoid_box = W.aabb_of(scene, target)
                hints: list[dict | None] = [None] * len(seq)
                for idx, a in enumerate(seq):
                    if a.name == "place_ontop":
                        hints[idx] = {"avoid_xy": (avoid_box.lower, avoid_box.upper)}
                new_actions = sk.actions[:insert_at] + tuple(seq) + sk.actions[insert_at:]
                new_cons = (sk.constraints[:insert_at] + tuple(() for _ in seq)
                            + sk.constraints[insert_at:])
                new_hints = sk.hints[:insert_at] + tuple(hints) + sk.hints[insert_at:]
                candidates.append(Skeleton(new_actions, new_cons, new_hints,
                                           provenance=f"clear:{blocker}"))
    candidates.append(Skeleton(sk.actions, sk.constraints, sk.hints,
                               provenance="resample"))
    return candidates


# --- Top-level solve loop -----------------------------------------------------------


@dataclass(frozen=True)
class SolveReport:
    result: Solution | Infeasible
    claimed: bool
    partial_plan: PartialPlan

    @property
    def solution(self) -> Solution | None:
        return self.result if isinstance(self.result, Solution) else None


def _skeleton_from_plan(plan: list[GroundAction],
                        step_constraints: dict[int, tuple[ConstraintFn, ...]]) -> Skeleton:
    cons = []
    for action in plan:
        step_idx = _executed_level(action.extra_eff)
        cons.append(tuple(step_constraints.get(step_idx, ())))
    return Skeleton(tuple(plan), tuple(cons), tuple(None for _ in plan), "initial")


def solve(scene: W.WorldState, problem: TransformedProblem, domain,
          step_constraints: dict[int, tuple[ConstraintFn, ...]],
          goal_fns: tuple[ConstraintFn, ...], budgets: Budgets, seed: int,
          restrictions: RestrictionTable | None = None,
          relevant_objects: set[str] | None = None,
          node_cap: int = 100_000) -> SolveReport:
    """Plan, refine, and backtrack until a solution or the budgets run out."""
    t0 = time.perf_counter()
    samples_total = 0
    tried = 0

    actions = problem.actions
    if relevant_objects is not None:
        # Prune the planning set to transformed steps plus the fillers a
        # minimum-length embedding can need: picks of relevant objects,
        # hand-freeing places onto the table, and places that achieve a goal
        # literal directly.  Obstacle clearing enters via skeleton surgery,
        # never via search, so this preserves optimal plan lengths.
        keep = {scene.scene.resolve(o) for o in relevant_objects}
        keep.add(scene.scene.table)
        goal_pairs = {tuple(str(a) for a in g.args) for g in problem.goal
                      if g.predicate.name == "Supporting"}
        table = scene.scene.table
        filtered = []
        for idx, a in enumerate(actions):
            if idx in problem.step_actions:
                filtered.append(a)
                continue
            objs = _action_objects(a)
            resolved = {scene.scene.resolve(v) for v in objs.values()}
            if not resolved <= keep:
                continue
            if a.name == "pick":
                if scene.scene.resolve(objs["o"]) != table:
                    filtered.append(a)
            elif a.name in ("place_ontop", "place_inside"):
                pair = (objs["o"], objs["s"])
                target_kind = scene.scene.model(objs["s"]).kind
                geometric_fit = (a.name == "place_inside") == (target_kind == "container")
                if scene.scene.resolve(objs["s"]) == table and a.name == "place_ontop":
                    filtered.append(a)
                elif pair in goal_pairs and geometric_fit:
                    filtered.append(a)
        actions = tuple(filtered)

    try:
        plan = plan_task(State(frozenset(problem.s0.true_literals)), actions,
                         problem.goal, node_cap=node_cap)
    except PlanningError as e:
        wall = time.perf_counter() - t0
        return SolveReport(Infeasible(e.reason, 0, 0, wall), False, problem.plan)

    queue: list[Skeleton] = [_skeleton_from_plan(plan, step_constraints)]
    failure_reason = "backtrack-budget-exhausted"
    master = np.random.default_rng(seed)
    streams = master.spawn(budgets.skeleton_attempts)
    insert_ids = itertools.count(10_000_000)

    while queue and tried < budgets.skeleton_attempts:
        sk = queue.pop(0)
        rng = streams[tried]
        tried += 1
        result = refine(sk, scene, goal_fns, budgets, rng, restrictions)
        if isinstance(result, Solution):
            wall = time.perf_counter() - t0
            sol = Solution(result.actions, result.trace, result.final_world,
                           samples_total + result.samples_used, tried, wall)
            return SolveReport(sol, True, problem.plan)
        samples_total += result.samples_used
        failure_reason = result.reason
        candidates = backtrack_strategy(result, sk, scene, domain, rng, ids=insert_ids)
        queue = candidates + queue

    wall = time.perf_counter() - t0
    return SolveReport(Infeasible(failure_reason, samples_total, tried, wall),
                       False, problem.plan)


# --- Independent replay -------------------------------------------------------------


def replay(scene: W.WorldState, actions: tuple[GroundAction, ...]):
    """Re-execute a bound plan through the world model alone.

    Returns (ok, trace) where trace[i] is the world before action i; used by
    the benchmark's success detectors so soundness is measured outside the
    solver's own bookkeeping.
    """
    world = scene
    trace = [scene]
    for action in actions:
        objs = _action_objects(action)
        if action.name == "pick":
            grasp = Pose6.from_sequence(action.value("g").payload)
            outcome = W.exec_pick(world, objs["o"], grasp)
        elif action.name in ("place_ontop", "place_inside"):
            drop = Pose6.from_sequence(action.value("p").payload)
            outcome = W.exec_place(world, objs["o"], objs["s"], drop)
        elif action.name == "pour":
            outcome = W.exec_pour(world, objs["o"], objs["s"], action.value("t").payload)
        else:
            return False, trace
        if not outcome.success:
            return False, trace
        world = outcome.new_world
        trace.append(world)
    return True, trace


def solution_is_sound(scene: W.WorldState, report: SolveReport,
                      goal_fns: tuple[ConstraintFn, ...],
                      goal_literals: tuple[Literal, ...] = ()) -> bool:
    """Replay + goal re-check, plus the subsequence property."""
    sol = report.solution
    if sol is None:
        return False
    ok, trace = replay(scene, sol.actions)
    if not ok:
        return False
    final = trace[-1]
    if not all(eval_constraint(fn, final) for fn in goal_fns):
        return False
    if not verify_subsequence(list(sol.actions), report.partial_plan):
        return False
    return True
