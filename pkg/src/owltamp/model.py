"""Symbolic planning substrate: predicates, literals, states, and parameterized actions.

Actions carry three literal lists: static constraints (checked by an evaluator,
not stored in states), fluent preconditions, and fluent effects.  Continuous
parameters may be bound to optimistic placeholders, which act as unification
wildcards during symbolic search and are replaced by real values during
refinement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources


class SemanticType(Enum):
    OBJ = "obj"
    CONF = "conf"
    TRAJ = "traj"
    GRASP = "grasp"
    POSE = "pose"
    DESCRIPTION = "description"
    INDEX = "index"


# Expected vector dimension per type; traj is free-length (flattened waypoints,
# and a 4-vector (x, y, z, tilt) for pour motions).
_VECTOR_DIMS = {SemanticType.POSE: 6, SemanticType.GRASP: 6, SemanticType.CONF: 3}

_DISCRETE_TYPES = {SemanticType.OBJ, SemanticType.INDEX}


class ModelError(Exception):
    """Raised for malformed domains, bindings, or state transitions."""


@dataclass(frozen=True)
class Value:
    """A parameter value: symbol, numeric vector, description text, or optimistic id."""

    kind: str  # "sym" | "vec" | "text" | "opt"
    payload: object

    def __post_init__(self):
        if self.kind not in ("sym", "vec", "text", "opt"):
            raise ModelError(f"unknown value kind {self.kind!r}")
        if self.kind == "vec":
            object.__setattr__(self, "payload", tuple(float(v) for v in self.payload))

    @staticmethod
    def sym(name: str) -> "Value":
        return Value("sym", str(name))

    @staticmethod
    def vec(vals) -> "Value":
        return Value("vec", tuple(vals))

    @staticmethod
    def text(s: str) -> "Value":
        return Value("text", str(s))

    @staticmethod
    def opt(uid: int, hint: str = "") -> "Value":
        return Value("opt", (int(uid), str(hint)))

    @property
    def is_optimistic(self) -> bool:
        return self.kind == "opt"

    def check_type(self, t: SemanticType) -> bool:
        if self.kind == "opt":
            return True
        if t is SemanticType.OBJ or t is SemanticType.INDEX:
            return self.kind == "sym"
        if t is SemanticType.DESCRIPTION:
            return self.kind == "text"
        if self.kind != "vec":
            return False
        want = _VECTOR_DIMS.get(t)
        return want is None or len(self.payload) == want

    def __str__(self):
        if self.kind == "sym":
            return self.payload
        if self.kind == "text":
            return f"{self.payload!r}"
        if self.kind == "opt":
            uid, hint = self.payload
            return f"#{hint or 'v'}{uid}"
        return "(" + ", ".join(f"{v:.4g}" for v in self.payload) + ")"


@dataclass(frozen=True)
class Predicate:
    name: str
    param_types: tuple[SemanticType, ...]
    kind: str  # "fluent" | "static"

    def __post_init__(self):
        if self.kind not in ("fluent", "static"):
            raise ModelError(f"predicate kind must be fluent/static, got {self.kind!r}")

    def __call__(self, *args: Value, positive: bool = True) -> "Literal":
        return Literal(self, tuple(args), positive)


@dataclass(frozen=True)
class Literal:
    predicate: Predicate
    args: tuple[Value, ...]
    positive: bool = True

    def __post_init__(self):
        if len(self.args) != len(self.predicate.param_types):
            raise ModelError(
                f"{self.predicate.name} expects {len(self.predicate.param_types)} args, "
                f"got {len(self.args)}")
        for a, t in zip(self.args, self.predicate.param_types):
            if not a.check_type(t):
                raise ModelError(f"bad arg {a} for {self.predicate.name}:{t.value}")

    def negate(self) -> "Literal":
        return Literal(self.predicate, self.args, not self.positive)

    def __str__(self):
        s = f"{self.predicate.name}({', '.join(str(a) for a in self.args)})"
        return s if self.positive else "!" + s


def args_unify(a: Value, b: Value) -> bool:
    """Optimistic values match anything; everything else matches by equality."""
    return a == b or a.is_optimistic or b.is_optimistic


def literal_holds(state: frozenset[Literal], lit: Literal) -> bool:
    """Closed-world check with optimistic-wildcard matching on either side."""
    found = any(
        sl.predicate == lit.predicate and all(args_unify(x, y) for x, y in zip(sl.args, lit.args))
        for sl in state)
    return found if lit.positive else not found


@dataclass(frozen=True)
class State:
    """Set of true positive literals; absent literals are false."""

    true_literals: frozenset[Literal]

    def __post_init__(self):
        for lit in self.true_literals:
            if not lit.positive:
                raise ModelError(f"state may only contain positive literals: {lit}")

    def holds(self, lit: Literal) -> bool:
        return literal_holds(self.true_literals, lit)

    def __contains__(self, lit: Literal) -> bool:
        return self.holds(lit)

    def __iter__(self):
        return iter(self.true_literals)

    def __len__(self):
        return len(self.true_literals)


@dataclass(frozen=True)
class Param:
    name: str
    type: SemanticType


@dataclass(frozen=True)
class SchemaLiteral:
    """A literal template over parameter names (plus optional forall wildcard)."""

    predicate: Predicate
    args: tuple[str, ...]
    positive: bool = True


@dataclass(frozen=True)
class CollisionGuard:
    """Compiled form of: no placed object may collide with `obj` put at `pose`.

    `exclude` names parameters whose bound objects are exempt (the support or
    container the object is being placed onto/into).
    """

    obj: str
    pose: str
    exclude: tuple[str, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Param, ...]
    con: tuple[SchemaLiteral, ...]
    pre: tuple[SchemaLiteral, ...]
    eff: tuple[SchemaLiteral, ...]
    nl_description_template: str = ""
    collision_guard: CollisionGuard | None = None

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ModelError(f"{self.name}: duplicate parameter names")
        known = set(names)
        for group in (self.con, self.pre, self.eff):
            for lit in group:
                for a in lit.args:
                    if a != "*" and a not in known:
                        raise ModelError(f"{self.name}: unbound variable {a!r}")
        if self.collision_guard is not None:
            for a in (self.collision_guard.obj, self.collision_guard.pose,
                      *self.collision_guard.exclude):
                if a not in known:
                    raise ModelError(f"{self.name}: unbound guard variable {a!r}")
        d_params = [p for p in self.params if p.type is SemanticType.DESCRIPTION]
        if len(d_params) > 1:
            raise ModelError(f"{self.name}: at most one description parameter allowed")
        if d_params:
            uses = sum(lit.args.count(d_params[0].name) for lit in self.con)
            if uses != 1:
                raise ModelError(
                    f"{self.name}: description parameter must appear exactly once in con")

    def param_type(self, name: str) -> SemanticType:
        for p in self.params:
            if p.name == name:
                return p.type
        raise ModelError(f"{self.name}: no parameter {name!r}")

    @property
    def discrete_params(self) -> tuple[Param, ...]:
        return tuple(p for p in self.params if p.type in _DISCRETE_TYPES)

    @property
    def description_param(self) -> str | None:
        for p in self.params:
            if p.type is SemanticType.DESCRIPTION:
                return p.name
        return None


@dataclass(frozen=True)
class GroundAction:
    """An action schema with every parameter bound to a Value."""

    schema: ActionSchema
    binding: tuple[tuple[str, Value], ...]
    con: tuple[Literal, ...] = field(default=())
    pre: tuple[Literal, ...] = field(default=())
    eff: tuple[Literal, ...] = field(default=())
    # Extra effect/precondition literals injected by problem transformations.
    extra_pre: tuple[Literal, ...] = ()
    extra_eff: tuple[Literal, ...] = ()

    @property
    def name(self) -> str:
        return self.schema.name

    def value(self, param: str) -> Value:
        for k, v in self.binding:
            if k == param:
                return v
        raise ModelError(f"{self.name}: no binding for {param!r}")

    @property
    def binding_map(self) -> dict[str, Value]:
        return dict(self.binding)

    @property
    def preconditions(self) -> tuple[Literal, ...]:
        return self.pre + self.extra_pre

    @property
    def effects(self) -> tuple[Literal, ...]:
        return self.eff + self.extra_eff

    @property
    def optimistic_params(self) -> tuple[str, ...]:
        return tuple(k for k, v in self.binding if v.is_optimistic)

    def discrete_signature(self) -> tuple[str, ...]:
        """Action name plus object arguments, the form used in oracle listings."""
        objs = [str(v) for k, v in self.binding
                if self.schema.param_type(k) is SemanticType.OBJ]
        return (self.name, *objs)

    def with_values(self, updates: dict[str, Value]) -> "GroundAction":
        """Rebind parameters, substituting the old values wherever they occur.

        Safe for optimistic placeholders (unique identities); preserves
        injected extras and expanded wildcard effects.
        """
        old = self.binding_map
        for k, v in updates.items():
            if not v.check_type(self.schema.param_type(k)):
                raise ModelError(f"{self.name}: bad rebinding for {k!r}: {v}")
        value_map = {old[k]: v for k, v in updates.items()}

        def sub(lit: Literal) -> Literal:
            return Literal(lit.predicate,
                           tuple(value_map.get(a, a) for a in lit.args), lit.positive)

        new_binding = tuple((k, updates.get(k, v)) for k, v in self.binding)
        return GroundAction(self.schema, new_binding,
                            tuple(sub(l) for l in self.con),
                            tuple(sub(l) for l in self.pre),
                            tuple(sub(l) for l in self.eff),
                            tuple(sub(l) for l in self.extra_pre),
                            tuple(sub(l) for l in self.extra_eff))

    def with_extras(self, extra_pre: tuple[Literal, ...] = (),
                    extra_eff: tuple[Literal, ...] = ()) -> "GroundAction":
        return GroundAction(self.schema, self.binding, self.con, self.pre, self.eff,
                            self.extra_pre + extra_pre, self.extra_eff + extra_eff)

    def __str__(self):
        sig = self.discrete_signature()
        return f"{sig[0]}({', '.join(sig[1:])})"


def _substitute(lit: SchemaLiteral, binding: dict[str, Value],
                objects: tuple[str, ...] = ()) -> list[Literal]:
    """Instantiate a schema literal; a '*' argument expands over all objects."""
    if "*" in lit.args:
        out = []
        star = lit.args.index("*")
        for obj in objects:
            args = tuple(Value.sym(obj) if i == star else binding[a]
                         for i, a in enumerate(lit.args))
            out.append(Literal(lit.predicate, args, lit.positive))
        return out
    return [Literal(lit.predicate, tuple(binding[a] for a in lit.args), lit.positive)]


def instantiate(schema: ActionSchema, binding: dict[str, Value],
                objects: tuple[str, ...] = (),
                extra_pre: tuple[Literal, ...] = (),
                extra_eff: tuple[Literal, ...] = ()) -> GroundAction:
    """Bind all parameters of a schema, substituting con/pre/eff.

    `objects` supplies the expansion domain for universally-quantified
    wildcard effects; it may be empty when no schema literal uses '*'.
    """
    for p in schema.params:
        if p.name not in binding:
            raise ModelError(f"{schema.name}: missing binding for parameter {p.name!r}")
        v = binding[p.name]
        if not v.check_type(p.type):
            raise ModelError(
                f"{schema.name}: parameter {p.name!r} expects {p.type.value}, got {v}")
    extra = set(binding) - {p.name for p in schema.params}
    if extra:
        raise ModelError(f"{schema.name}: unknown parameters {sorted(extra)}")

    def inst(group):
        out = []
        for lit in group:
            out.extend(_substitute(lit, binding, objects))
        return tuple(out)

    ordered = tuple((p.name, binding[p.name]) for p in schema.params)
    return GroundAction(schema, ordered, inst(schema.con), inst(schema.pre),
                        inst(schema.eff), extra_pre, extra_eff)


class StaticEvaluator:
    """Decides the truth of static constraint literals and collision guards."""

    def evaluate(self, lit: Literal) -> bool:
        raise NotImplementedError

    def guard_ok(self, state: State, action: GroundAction) -> bool:
        raise NotImplementedError


class OptimisticEvaluator(StaticEvaluator):
    """Treats every static constraint as satisfiable (symbolic search mode)."""

    def evaluate(self, lit: Literal) -> bool:
        return True

    def guard_ok(self, state: State, action: GroundAction) -> bool:
        return True


class GeometricEvaluator(StaticEvaluator):
    """Concrete evaluation of Kin/Motion/Collision against a world model.

    VLMPose literals delegate to a caller-provided test (defaults to true;
    refinement checks those via attached constraint programs instead).
    """

    def __init__(self, scene, vlm_pose_test=None):
        self.scene = scene
        self._vlm_pose_test = vlm_pose_test

    def evaluate(self, lit: Literal) -> bool:
        from . import world as _world
        name = lit.predicate.name
        if any(a.is_optimistic for a in lit.args):
            return lit.positive
        if name == "Motion":
            result = True
        elif name == "Kin":
            pose = lit.args[3]
            result = self.scene.workspace.contains_point(pose.payload[:3])
        elif name == "Collision":
            o1, p1, o2, p2 = lit.args
            result = _world.boxes_collide(self.scene, str(o1), p1.payload, str(o2), p2.payload)
        elif name == "VLMPose":
            result = True if self._vlm_pose_test is None else self._vlm_pose_test(lit)
        else:
            raise ModelError(f"unknown static predicate {name}")
        return result if lit.positive else not result

    def guard_ok(self, state: State, action: GroundAction) -> bool:
        guard = action.schema.collision_guard
        if guard is None:
            return True
        bmap = action.binding_map
        obj_v, pose_v = bmap[guard.obj], bmap[guard.pose]
        if obj_v.is_optimistic or pose_v.is_optimistic:
            return True
        excluded = {str(bmap[e]) for e in guard.exclude}
        return self._guard_scan(state, str(obj_v), pose_v, excluded)

    def _guard_scan(self, state: State, obj: str, pose_v: Value, excluded: set[str]) -> bool:
        from . import world as _world
        at_pose = [lit for lit in state if lit.predicate.name == "AtPose"]
        for lit in at_pose:
            other = str(lit.args[0])
            if other == obj or other in excluded:
                continue
            other_pose = lit.args[1]
            if other_pose.is_optimistic:
                continue
            if _world.boxes_collide(self.scene, obj, pose_v.payload,
                                    other, other_pose.payload):
                return False
        return True


def applicable(state: State, action: GroundAction, static_eval: StaticEvaluator) -> bool:
    """True iff all fluent preconditions hold and static constraints pass."""
    if not all(state.holds(lit) for lit in action.preconditions):
        return False
    if not all(static_eval.evaluate(lit) for lit in action.con):
        return False
    return static_eval.guard_ok(state, action)


class PreconditionError(ModelError):
    def __init__(self, action: GroundAction, unmet: list[Literal]):
        self.action = action
        self.unmet = unmet
        super().__init__(f"{action}: unmet preconditions {[str(u) for u in unmet]}")


def apply(state: State, action: GroundAction,
          static_eval: StaticEvaluator | None = None) -> State:
    """Apply effects to a state, returning a new state; the input is unmodified.

    Fluent preconditions are always enforced; pass an evaluator to also
    enforce static constraints.
    """
    unmet = [lit for lit in action.preconditions if not state.holds(lit)]
    if unmet:
        raise PreconditionError(action, unmet)
    if static_eval is not None and not applicable(state, action, static_eval):
        raise PreconditionError(action, [lit for lit in action.con
                                         if not static_eval.evaluate(lit)])
    result = set(state.true_literals)
    for lit in action.effects:
        if lit.positive:
            continue
        result -= {sl for sl in result
                   if sl.predicate == lit.predicate
                   and all(args_unify(x, y) for x, y in zip(sl.args, lit.args))}
    for lit in action.effects:
        if lit.positive:
            result.add(lit)
    return State(frozenset(result))


# --- Domain file parsing -----------------------------------------------------

class DomainParseError(ModelError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")


@dataclass(frozen=True)
class Domain:
    predicates: dict[str, Predicate]
    schemas: dict[str, ActionSchema]

    def predicate(self, name: str) -> Predicate:
        return self.predicates[name]

    def schema(self, name: str) -> ActionSchema:
        return self.schemas[name]


_LIT_RE = re.compile(r"^(!?)\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)$")
_GUARD_RE = re.compile(
    r"^collision-free\s*\(\s*([A-Za-z0-9_]+)\s*,\s*([A-Za-z0-9_]+)\s*"
    r"(?:\|\s*([A-Za-z0-9_,\s]+))?\)$")
_FORALL_RE = re.compile(r"^forall\s+([a-z]+)\s*:\s*(!?)([A-Za-z_][A-Za-z0-9_]*)"
                        r"\s*\(([^)]*)\)$")


def _parse_literal_spec(text: str, predicates: dict[str, Predicate], lineno: int,
                        allow_guard: bool = False):
    text = text.strip()
    guard = _GUARD_RE.match(text)
    if guard:
        if not allow_guard:
            raise DomainParseError("collision-free guard only allowed in pre", lineno)
        exclude = tuple(e.strip() for e in (guard.group(3) or "").split(",") if e.strip())
        return CollisionGuard(guard.group(1), guard.group(2), exclude)
    forall = _FORALL_RE.match(text)
    if forall:
        star_type, neg, pname, argtext = forall.groups()
        if pname not in predicates:
            raise DomainParseError(f"unknown predicate {pname!r}", lineno)
        args = tuple(a.strip() for a in argtext.split(",") if a.strip())
        return SchemaLiteral(predicates[pname], args, positive=not neg)
    m = _LIT_RE.match(text)
    if not m:
        raise DomainParseError(f"cannot parse literal {text!r}", lineno)
    neg, pname, argtext = m.groups()
    if pname not in predicates:
        raise DomainParseError(f"unknown predicate {pname!r}", lineno)
    args = tuple(a.strip() for a in argtext.split(",") if a.strip())
    pred = predicates[pname]
    if len(args) != len(pred.param_types):
        raise DomainParseError(f"{pname} expects {len(pred.param_types)} args", lineno)
    return SchemaLiteral(pred, args, positive=not neg)


def parse_domain(text: str) -> Domain:
    """Parse the declarative domain format: predicate block plus action blocks."""
    predicates: dict[str, Predicate] = {}
    schemas: dict[str, ActionSchema] = {}
    lines = text.splitlines()
    i = 0

    def typed_params(spec: str, lineno: int) -> tuple[Param, ...]:
        params = []
        for piece in spec.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if ":" not in piece:
                raise DomainParseError(f"parameter {piece!r} missing type", lineno)
            name, tname = (s.strip() for s in piece.split(":", 1))
            try:
                params.append(Param(name, SemanticType(tname)))
            except ValueError:
                raise DomainParseError(f"unknown type {tname!r}", lineno) from None
        return tuple(params)

    while i < len(lines):
        raw = lines[i]
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            i += 1
            continue
        if stripped == "predicates:":
            i += 1
            while i < len(lines):
                sub = lines[i].split("#", 1)[0].rstrip()
                if not sub.strip():
                    i += 1
                    continue
                if not sub.startswith((" ", "\t")):
                    break
                m = re.match(r"^(fluent|static)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)$",
                             sub.strip())
                if not m:
                    raise DomainParseError(f"bad predicate line {sub.strip()!r}", i + 1)
                kind, name, argtext = m.groups()
                if name in predicates:
                    raise DomainParseError(f"duplicate predicate {name!r}", i + 1)
                types = []
                for t in (a.strip() for a in argtext.split(",") if a.strip()):
                    try:
                        types.append(SemanticType(t))
                    except ValueError:
                        raise DomainParseError(f"unknown type {t!r}", i + 1) from None
                predicates[name] = Predicate(name, tuple(types), kind)
                i += 1
            continue
        m = re.match(r"^action\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)$", stripped)
        if m:
            name, param_spec = m.groups()
            header_line = i + 1
            if name in schemas:
                raise DomainParseError(f"duplicate action {name!r}", header_line)
            params = typed_params(param_spec, header_line)
            fields: dict[str, list] = {"con": [], "pre": [], "eff": []}
            desc = ""
            guard = None
            i += 1
            while i < len(lines):
                sub = lines[i].split("#", 1)[0].rstrip()
                if not sub.strip():
                    i += 1
                    continue
                if not sub.startswith((" ", "\t")):
                    break
                body = sub.strip()
                fm = re.match(r"^(con|pre|eff|desc):\s*(.*)$", body)
                if not fm:
                    raise DomainParseError(f"bad action field {body!r}", i + 1)
                key, rest = fm.groups()
                if key == "desc":
                    desc = rest.strip().strip('"')
                else:
                    depth = 0
                    piece = ""
                    pieces = []
                    for ch in rest:
                        if ch == "(":
                            depth += 1
                        elif ch == ")":
                            depth -= 1
                        if ch == "," and depth == 0:
                            pieces.append(piece)
                            piece = ""
                        else:
                            piece += ch
                    if piece.strip():
                        pieces.append(piece)
                    for piece in pieces:
                        item = _parse_literal_spec(piece, predicates, i + 1,
                                                   allow_guard=(key == "pre"))
                        if isinstance(item, CollisionGuard):
                            guard = item
                        else:
                            if key == "con" and item.predicate.kind != "static":
                                raise DomainParseError(
                                    f"{item.predicate.name} is not static", i + 1)
                            if key in ("pre", "eff") and item.predicate.kind != "fluent":
                                raise DomainParseError(
                                    f"{item.predicate.name} is not fluent", i + 1)
                            fields[key].append(item)
                i += 1
            try:
                schemas[name] = ActionSchema(
                    name, params, tuple(fields["con"]), tuple(fields["pre"]),
                    tuple(fields["eff"]), desc, guard)
            except ModelError as e:
                raise DomainParseError(str(e), header_line) from None
            continue
        raise DomainParseError(f"unexpected line {stripped!r}", i + 1)

    return Domain(predicates, schemas)


def load_default_domain() -> Domain:
    """The tabletop manipulation domain shipped with the package."""
    text = resources.files("owltamp.data").joinpath("domain.txt").read_text(encoding="utf-8")
    return parse_domain(text)
