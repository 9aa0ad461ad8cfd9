"""Benchmark harness: ablation wiring, per-cell runs, metrics, and tables.

A cell is one (task, seed, mode).  Success is judged by replaying the
returned plan through the world model and running the hand-written detector
on the result; `claimed` records whether the planner believed it solved the
task, so soundness (1 - false positives / trials) falls out of the records.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, replace

from . import detectors, solver, tasks
from .grounding import (
    format_action_listing, format_literal_listing, format_state_listing,
    ground_problem,
)
from .model import Value
from .oracle import OracleError, OracleRequest, ScriptedOracle
from .partial_plan import (
    PartialPlan, PartialPlanError, transform, verify_subsequence,
)
from .solver import Budgets, RestrictionTable, Solution

ABLATION_MODES = ("full", "no_vlm", "no_disc", "no_cont", "no_back", "no_sample", "manual")
EXTRA_MODES = ("flawed-discrete", "flawed-continuous")

# Fields that vary run-to-run on the same inputs (timing only).
VOLATILE_FIELDS = ("wall_time", "oracle_time_fraction")


@dataclass(frozen=True)
class ModeConfig:
    variant: str
    use_partial_plan: bool
    use_constraints: bool
    direct_goal: bool

    def adjust_budgets(self, mode: str, budgets: Budgets) -> Budgets:
        if mode == "no_sample":
            return Budgets(1, budgets.backtracks)
        if mode == "no_back":
            return Budgets(budgets.samples_per_action, 1)
        return budgets


MODE_TABLE = {
    "manual": ModeConfig("manual", True, True, False),
    "full": ModeConfig("recorded", True, True, False),
    "no_vlm": ModeConfig("recorded", False, False, True),
    "no_disc": ModeConfig("recorded", False, True, True),
    "no_cont": ModeConfig("recorded", True, False, False),
    "no_back": ModeConfig("recorded", True, True, False),
    "no_sample": ModeConfig("recorded", True, True, False),
    "flawed-discrete": ModeConfig("flawed_discrete", True, True, False),
    "flawed-continuous": ModeConfig("flawed_continuous", True, True, False),
}


@dataclass
class RunRecord:
    task: str
    seed: int
    mode: str
    success: bool
    claimed: bool
    reason: str
    samples: int
    skeletons: int
    plan_length: int
    subsequence_ok: bool
    wall_time: float
    oracle_calls: int
    oracle_time_fraction: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def stable_json(self) -> str:
        data = asdict(self)
        for key in VOLATILE_FIELDS:
            data.pop(key, None)
        return json.dumps(data, sort_keys=True)


def _direct_goal_literals(domain, specs):
    out = []
    for pred_name, args in specs:
        pred = domain.predicate(pred_name)
        out.append(pred(*(Value.sym(a) for a in args)))
    return tuple(out)


def run_cell(task_id: str, seed: int, mode: str, budgets: Budgets,
             oracle=None) -> RunRecord:
    """Execute one benchmark cell and judge it independently."""
    record, _, _ = run_cell_detailed(task_id, seed, mode, budgets, oracle)
    return record


def run_cell_detailed(task_id: str, seed: int, mode: str, budgets: Budgets,
                      oracle=None):
    """run_cell plus the solve report and initial world, for inspection."""
    if mode not in MODE_TABLE:
        raise ValueError(f"unknown mode {mode!r}")
    config = MODE_TABLE[mode]
    budgets = config.adjust_budgets(mode, budgets)
    oracle = oracle or ScriptedOracle(config.variant)

    t_start = time.perf_counter()
    spec, world0 = tasks.load_task(task_id, seed)
    domain = tasks.default_domain()
    s0 = tasks.initial_state(domain, world0)
    objects = [*spec.objects, tasks.TABLE]
    problem = ground_problem(s0, tasks.bench_schemas(domain), objects)

    base_req = OracleRequest(
        kind="", task_id=task_id, goal_text=spec.goal_text,
        action_listing=format_action_listing(problem),
        literal_listing=format_literal_listing(problem),
        scene_summary=format_state_listing(s0))

    def fail_record(reason: str):
        wall = time.perf_counter() - t_start
        frac = _time_fraction(oracle, wall)
        record = RunRecord(task_id, seed, mode, False, False, reason, 0, 0, 0,
                           False, wall, getattr(oracle, "calls", 0), frac)
        return record, None, world0

    pp = PartialPlan(())
    goal_fns: tuple = ()
    step_cons: dict[int, tuple] = {}
    try:
        if config.use_partial_plan:
            pp = oracle.propose_partial_plan(replace(base_req, kind="partial_plan"))
        if config.direct_goal:
            specs_ = oracle.translate_goal_direct(
                replace(base_req, kind="goal_literals"))
            pp = PartialPlan((), _direct_goal_literals(domain, specs_))
        if config.use_constraints:
            goal_fns = tuple(oracle.propose_goal_constraints(
                replace(base_req, kind="goal_constraints")))
            for i, step in enumerate(pp.steps, start=1):
                schema = domain.schemas.get(step.action.lower())
                if schema is None or schema.description_param is None:
                    continue  # steps without language-dependent constraints are skipped
                fns = oracle.propose_action_constraints(replace(
                    base_req, kind="action_constraints", step_index=i, step=step,
                    prior_goal_sources=tuple(f.source_text for f in goal_fns)))
                step_cons[i] = tuple(fns)
        transformed = transform(problem, pp)
    except (OracleError, PartialPlanError) as e:
        return fail_record(f"oracle:{type(e).__name__}:{e}")

    relevant = {o for step in pp.steps for o in step.objects}
    for lit in pp.goal_literals:
        relevant.update(str(a) for a in lit.args)

    restrictions = RestrictionTable(list(spec.sampler_restrictions))
    report = solver.solve(world0, transformed, domain, step_cons, goal_fns,
                          budgets, seed, restrictions,
                          relevant_objects=relevant or None)
    wall = time.perf_counter() - t_start

    result = report.result
    claimed = report.claimed
    success = False
    subsequence_ok = False
    plan_length = 0
    reason = ""
    if isinstance(result, Solution):
        plan_length = len(result.actions)
        ok, trace = solver.replay(world0, result.actions)
        subsequence_ok = verify_subsequence(list(result.actions), pp)
        if not ok:
            reason = "replay-failed"
        else:
            success = detectors.success_detector(spec.detector, trace[-1], trace,
                                                 result.actions)
            reason = "" if success else "detector-rejected"
    else:
        reason = result.reason

    frac = _time_fraction(oracle, wall)
    record = RunRecord(task_id, seed, mode, success, claimed, reason,
                       result.samples_used, result.skeletons_tried, plan_length,
                       subsequence_ok, wall, getattr(oracle, "calls", 0), frac)
    return record, report, world0


def _time_fraction(oracle, wall: float) -> float:
    spent = getattr(oracle, "time_spent", 0.0)
    return spent / wall if wall > 0 else 0.0


@dataclass
class SuiteResult:
    records: list[RunRecord] = field(default_factory=list)
    errors: int = 0

    def rate(self, mode: str, task: str, attr: str = "success") -> float:
        cells = [r for r in self.records if r.mode == mode and r.task == task]
        if not cells:
            return math.nan
        return sum(getattr(r, attr) for r in cells) / len(cells)

    def soundness(self, mode: str, task: str) -> float:
        cells = [r for r in self.records if r.mode == mode and r.task == task]
        if not cells:
            return math.nan
        fp = sum(1 for r in cells if r.claimed and not r.success)
        return 1.0 - fp / len(cells)

    def stable_lines(self) -> list[str]:
        return [r.stable_json() for r in self.records]


def run_suite(task_ids, seeds, modes, budgets: Budgets,
              out_dir: str | None = None, progress=None,
              oracle_factory=None) -> SuiteResult:
    """Run the cross product of tasks, seeds, and modes.

    Per-cell failures are recorded, never raised; only infrastructure errors
    (exceptions outside planning) bump the error count.  `oracle_factory`,
    when given, builds the oracle for each cell (e.g. an external client);
    by default each cell uses the scripted fixtures for its mode.
    """
    result = SuiteResult()
    for mode in modes:
        for task_id in task_ids:
            for seed in seeds:
                try:
                    oracle = oracle_factory(mode, task_id, seed) if oracle_factory else None
                    record = run_cell(task_id, seed, mode, budgets, oracle)
                except Exception as e:  # noqa: BLE001 - must not abort the suite
                    record = RunRecord(task_id, seed, mode, False, False,
                                       f"internal-error:{type(e).__name__}:{e}",
                                       0, 0, 0, False, 0.0, 0, 0.0)
                    result.errors += 1
                result.records.append(record)
                if progress:
                    progress(record)
    if out_dir:
        write_outputs(result, out_dir, task_ids, modes)
    return result


def _mean_ci(values) -> str:
    if not values:
        return "-"
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return f"{mean:.1f}"
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    ci = 1.96 * math.sqrt(var / n)
    return f"{mean:.1f}±{ci:.1f}"


def render_tables(result: SuiteResult, task_ids, modes) -> str:
    lines = []

    def table(title, cell):
        lines.append(title)
        header = ["mode".ljust(18)] + [t[:9].rjust(10) for t in task_ids]
        lines.append("".join(header))
        for mode in modes:
            row = [mode.ljust(18)]
            for task in task_ids:
                row.append(cell(mode, task).rjust(10))
            lines.append("".join(row))
        lines.append("")

    def pct(x: float) -> str:
        return "-" if math.isnan(x) else f"{100 * x:.0f}%"

    table("Success rate", lambda m, t: pct(result.rate(m, t)))
    table("Soundness rate (1 - FP/trials)", lambda m, t: pct(result.soundness(m, t)))

    def samples(m, t):
        vals = [r.samples for r in result.records if r.mode == m and r.task == t]
        return _mean_ci(vals)

    table("Samples (mean±95% CI)", samples)

    def wall(m, t):
        vals = [r.wall_time for r in result.records if r.mode == m and r.task == t]
        return _mean_ci(vals)

    table("Wall time seconds (mean±95% CI; informational)", wall)
    return "\n".join(lines)


def write_outputs(result: SuiteResult, out_dir: str, task_ids, modes) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "records.jsonl"), "w", encoding="utf-8") as fh:
        for r in result.records:
            fh.write(r.to_json() + "\n")
    with open(os.path.join(out_dir, "tables.txt"), "w", encoding="utf-8") as fh:
        fh.write(render_tables(result, task_ids, modes))
    summary = {
        "success": {m: {t: result.rate(m, t) for t in task_ids} for m in modes},
        "soundness": {m: {t: result.soundness(m, t) for t in task_ids} for m in modes},
        "errors": result.errors,
    }
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
