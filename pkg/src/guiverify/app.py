"""Declarative GUI application model and the handler mini-language.

An :class:`AppSpec` describes windows, widgets (each firing exactly one
event), bounded integer variables, one handler body per event and a set of
global assertions.  The functions at the bottom of this module give the
single concrete semantics that both the replayer and the static analyzer use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Union


class SpecError(ValueError):
    """Raised for malformed input files (syntax or semantic)."""


class SpecSyntaxError(SpecError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"syntax error{where}: {msg}")


# ---------------------------------------------------------------------------
# Expressions

ARITH_OPS = {"+", "-", "*", "neg"}
CMP_OPS = {"<", "<=", ">", ">=", "==", "!="}
BOOL_OPS = {"and", "or", "not"}


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Op:
    op: str
    args: tuple["Expr", ...]


Expr = Union[Const, Var, Op]


def const(n: int) -> Const:
    return Const(n)


def var(name: str) -> Var:
    return Var(name)


def op(name: str, *args: Expr) -> Op:
    return Op(name, tuple(args))


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class IfElse:
    cond: Expr
    then: tuple["Stmt", ...] = ()
    orelse: tuple["Stmt", ...] = ()


@dataclass(frozen=True)
class SetEnabled:
    widget: str
    value: bool


@dataclass(frozen=True)
class SetVisible:
    window: str
    value: bool


GuiEffect = Union[SetEnabled, SetVisible]
Stmt = Union[Assign, IfElse, SetEnabled, SetVisible]


# ---------------------------------------------------------------------------
# Application structure


@dataclass(frozen=True)
class WidgetSpec:
    id: str
    event: str
    initially_enabled: bool = True


@dataclass(frozen=True)
class WindowSpec:
    id: str
    modal: bool = False
    initially_visible: bool = True
    widgets: tuple[WidgetSpec, ...] = ()


@dataclass(frozen=True)
class VarDecl:
    name: str
    init: int
    lo: int
    hi: int

    def clamp(self, value: int) -> int:
        return min(self.hi, max(self.lo, value))


@dataclass(frozen=True)
class Assertion:
    id: str
    expr: Expr


@dataclass(frozen=True, eq=False)
class AppSpec:
    """The system under verification.

    Validation happens on construction, so every ``AppSpec`` in circulation
    satisfies the uniqueness, coverage and typing invariants.
    """

    windows: tuple[WindowSpec, ...] = ()
    variables: tuple[VarDecl, ...] = ()
    handlers: Mapping[str, tuple[Stmt, ...]] = field(default_factory=dict)
    assertions: tuple[Assertion, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "assertions", tuple(self.assertions))
        object.__setattr__(
            self,
            "handlers",
            MappingProxyType({e: tuple(body) for e, body in self.handlers.items()}),
        )
        _validate(self)

    @cached_property
    def alphabet(self) -> frozenset[str]:
        return frozenset(w.event for win in self.windows for w in win.widgets)

    @cached_property
    def widget_of_event(self) -> Mapping[str, WidgetSpec]:
        return {w.event: w for win in self.windows for w in win.widgets}

    @cached_property
    def window_of_widget(self) -> Mapping[str, WindowSpec]:
        return {w.id: win for win in self.windows for w in win.widgets}

    @cached_property
    def domains(self) -> Mapping[str, VarDecl]:
        return {v.name: v for v in self.variables}

    def assertion(self, aid: str) -> Assertion:
        for a in self.assertions:
            if a.id == aid:
                return a
        raise KeyError(aid)

    def restrict_assertions(self, ids: Iterable[str]) -> "AppSpec":
        """Copy of this app keeping only the named assertions."""
        ids = list(ids)
        known = {a.id for a in self.assertions}
        for aid in ids:
            if aid not in known:
                raise SpecError(f"unknown assertion id {aid}")
        keep = tuple(a for a in self.assertions if a.id in ids)
        return AppSpec(self.windows, self.variables, dict(self.handlers), keep)


def _expr_type(e: Expr, declared: Mapping[str, VarDecl], where: str) -> str:
    match e:
        case Const(value):
            if isinstance(value, bool) or not isinstance(value, int):
                raise SpecError(f"{where}: constant must be an integer, got {value!r}")
            return "int"
        case Var(name):
            if name not in declared:
                raise SpecError(f"{where}: undeclared variable {name}")
            return "int"
        case Op(name, args):
            if name in ("neg", "not"):
                arity_ok = len(args) == 1
            elif name in ("-",) or name in CMP_OPS:
                arity_ok = len(args) == 2
            elif name in ("+", "*", "and", "or"):
                arity_ok = len(args) >= 2
            else:
                raise SpecError(f"{where}: unknown operator {name!r}")
            if not arity_ok:
                raise SpecError(f"{where}: wrong number of operands for {name!r}")
            types = [_expr_type(a, declared, where) for a in args]
            if name in ARITH_OPS or name in CMP_OPS:
                if any(t != "int" for t in types):
                    raise SpecError(f"{where}: operator {name!r} needs integer operands")
                return "int" if name in ARITH_OPS else "bool"
            if any(t != "bool" for t in types):
                raise SpecError(f"{where}: operator {name!r} needs boolean operands")
            return "bool"
    raise SpecError(f"{where}: not an expression: {e!r}")


def _check_stmts(stmts, app: AppSpec, where: str, widgets, windows) -> None:
    for s in stmts:
        match s:
            case Assign(v, e):
                if v not in app.domains:
                    raise SpecError(f"{where}: undeclared variable {v}")
                if _expr_type(e, app.domains, where) != "int":
                    raise SpecError(f"{where}: assignment to {v} needs an integer expression")
            case IfElse(cond, then, orelse):
                if _expr_type(cond, app.domains, where) != "bool":
                    raise SpecError(f"{where}: if condition must be boolean")
                _check_stmts(then, app, where, widgets, windows)
                _check_stmts(orelse, app, where, widgets, windows)
            case SetEnabled(target, value):
                if target not in widgets:
                    raise SpecError(f"{where}: unknown widget {target}")
                if not isinstance(value, bool):
                    raise SpecError(f"{where}: set_enabled value must be boolean")
            case SetVisible(target, value):
                if target not in windows:
                    raise SpecError(f"{where}: unknown window {target}")
                if not isinstance(value, bool):
                    raise SpecError(f"{where}: set_visible value must be boolean")
            case _:
                raise SpecError(f"{where}: not a statement: {s!r}")


def _unique(kind: str, ids: Iterable[str]) -> set[str]:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            raise SpecError(f"duplicate {kind} {i}")
        seen.add(i)
    return seen


def _validate(app: AppSpec) -> None:
    windows = _unique("window id", (w.id for w in app.windows))
    widgets = _unique("widget id", (w.id for win in app.windows for w in win.widgets))
    events = _unique("event id", (w.event for win in app.windows for w in win.widgets))
    _unique("variable", (v.name for v in app.variables))
    _unique("assertion id", (a.id for a in app.assertions))
    for v in app.variables:
        if not v.lo <= v.hi:
            raise SpecError(f"variable {v.name}: empty domain [{v.lo}, {v.hi}]")
        if not v.lo <= v.init <= v.hi:
            raise SpecError(f"variable {v.name}: init {v.init} outside [{v.lo}, {v.hi}]")
    for e in app.handlers:
        if e not in events:
            raise SpecError(f"handler for event {e} which no widget fires")
    for e in events:
        if e not in app.handlers:
            raise SpecError(f"event {e} has no handler entry")
    for e, body in app.handlers.items():
        _check_stmts(body, app, f"handler {e}", widgets, windows)
    for a in app.assertions:
        if _expr_type(a.expr, app.domains, f"assertion {a.id}") != "bool":
            raise SpecError(f"assertion {a.id}: expression must be boolean")


# ---------------------------------------------------------------------------
# JSON encoding


def _expr_from_json(d) -> Expr:
    if not isinstance(d, dict):
        raise SpecError(f"expression must be an object, got {d!r}")
    if "const" in d:
        return Const(d["const"])
    if "var" in d:
        return Var(d["var"])
    if "op" in d:
        args = d.get("args", [])
        if not isinstance(args, list):
            raise SpecError(f"operator {d['op']!r}: args must be a list")
        return Op(d["op"], tuple(_expr_from_json(a) for a in args))
    raise SpecError(f"unrecognised expression {d!r}")


def _stmt_from_json(d) -> Stmt:
    if not isinstance(d, dict) or len(d) != 1:
        raise SpecError(f"statement must be a single-key object, got {d!r}")
    ((kind, body),) = d.items()
    try:
        if kind == "assign":
            return Assign(body["var"], _expr_from_json(body["expr"]))
        if kind == "if":
            return IfElse(
                _expr_from_json(body["cond"]),
                tuple(_stmt_from_json(s) for s in body.get("then", [])),
                tuple(_stmt_from_json(s) for s in body.get("else", [])),
            )
        if kind == "gui":
            if body["op"] == "set_enabled":
                return SetEnabled(body["target"], body["value"])
            if body["op"] == "set_visible":
                return SetVisible(body["target"], body["value"])
            raise SpecError(f"unknown gui op {body['op']!r}")
    except KeyError as exc:
        raise SpecError(f"{kind} statement missing field {exc.args[0]!r}") from None
    raise SpecError(f"unknown statement kind {kind!r}")


def app_from_dict(data: Mapping) -> AppSpec:
    if not isinstance(data, Mapping):
        raise SpecError("app spec must be a JSON object")
    try:
        windows = tuple(
            WindowSpec(
                id=w["id"],
                modal=bool(w.get("modal", False)),
                initially_visible=bool(w.get("initially_visible", True)),
                widgets=tuple(
                    WidgetSpec(x["id"], x["event"], bool(x.get("initially_enabled", True)))
                    for x in w.get("widgets", [])
                ),
            )
            for w in data.get("windows", [])
        )
        variables = []
        for v in data.get("variables", []):
            lo, hi = v["domain"]
            variables.append(VarDecl(v["name"], v["init"], lo, hi))
        handlers = {
            e: tuple(_stmt_from_json(s) for s in body)
            for e, body in data.get("handlers", {}).items()
        }
        assertions = tuple(
            Assertion(a["id"], _expr_from_json(a["expr"])) for a in data.get("assertions", [])
        )
    except KeyError as exc:
        raise SpecError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed app spec: {exc}") from None
    return AppSpec(windows, tuple(variables), handlers, assertions)


def parse_app_spec(text: str) -> AppSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return app_from_dict(data)


def load_app_spec(path) -> AppSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_app_spec(fh.read())


# ---------------------------------------------------------------------------
# Semantics


def _frozen(d: dict) -> Mapping:
    return MappingProxyType(d)


@dataclass(frozen=True)
class ConcreteState:
    """Variable valuation plus the GUI state (widget enabledness, window visibility)."""

    valuation: Mapping[str, int]
    enabled: Mapping[str, bool]
    visible: Mapping[str, bool]

    def __hash__(self):
        return hash(
            (
                tuple(sorted(self.valuation.items())),
                tuple(sorted(self.enabled.items())),
                tuple(sorted(self.visible.items())),
            )
        )

    def __eq__(self, other):
        if not isinstance(other, ConcreteState):
            return NotImplemented
        return (
            dict(self.valuation) == dict(other.valuation)
            and dict(self.enabled) == dict(other.enabled)
            and dict(self.visible) == dict(other.visible)
        )

    def to_dict(self) -> dict:
        return {
            "valuation": dict(self.valuation),
            "enabled": dict(self.enabled),
            "visible": dict(self.visible),
        }


def initial_state(app: AppSpec) -> ConcreteState:
    return ConcreteState(
        _frozen({v.name: v.init for v in app.variables}),
        _frozen({w.id: w.initially_enabled for win in app.windows for w in win.widgets}),
        _frozen({win.id: win.initially_visible for win in app.windows}),
    )


def eval_expr(e: Expr, env: Mapping[str, int]):
    match e:
        case Const(value):
            return value
        case Var(name):
            return env[name]
        case Op(name, args):
            if name == "and":
                return all(eval_expr(a, env) for a in args)
            if name == "or":
                return any(eval_expr(a, env) for a in args)
            vals = [eval_expr(a, env) for a in args]
            match name:
                case "+":
                    return sum(vals)
                case "*":
                    out = 1
                    for v in vals:
                        out *= v
                    return out
                case "-":
                    return vals[0] - vals[1]
                case "neg":
                    return -vals[0]
                case "not":
                    return not vals[0]
                case "<":
                    return vals[0] < vals[1]
                case "<=":
                    return vals[0] <= vals[1]
                case ">":
                    return vals[0] > vals[1]
                case ">=":
                    return vals[0] >= vals[1]
                case "==":
                    return vals[0] == vals[1]
                case "!=":
                    return vals[0] != vals[1]
    raise TypeError(f"cannot evaluate {e!r}")


def _run(stmts, app: AppSpec, env: dict, enabled: dict, visible: dict, gui: bool) -> None:
    for s in stmts:
        match s:
            case Assign(v, e):
                # intermediate results are unbounded; only the stored value saturates
                env[v] = app.domains[v].clamp(eval_expr(e, env))
            case IfElse(cond, then, orelse):
                branch = then if eval_expr(cond, env) else orelse
                _run(branch, app, env, enabled, visible, gui)
            case SetEnabled(widget, value):
                if gui:
                    enabled[widget] = value
            case SetVisible(window, value):
                if gui:
                    visible[window] = value


def exec_handler(
    app: AppSpec, event: str, state: ConcreteState, gui_effects: bool = True
) -> ConcreteState:
    """Run the handler of ``event`` on ``state``.

    With ``gui_effects=False`` the ``set_enabled``/``set_visible`` statements
    are skipped, which is how handlers behave inside the message-loop program.
    """
    if event not in app.handlers:
        raise KeyError(f"unknown event {event}")
    env = dict(state.valuation)
    enabled = dict(state.enabled)
    visible = dict(state.visible)
    _run(app.handlers[event], app, env, enabled, visible, gui_effects)
    if not gui_effects:
        return ConcreteState(_frozen(env), state.enabled, state.visible)
    return ConcreteState(_frozen(env), _frozen(enabled), _frozen(visible))


def run_handler_on_valuation(app: AppSpec, event: str, valuation: Mapping[str, int]) -> dict:
    """Valuation-only handler execution (GUI effects ignored)."""
    env = dict(valuation)
    _run(app.handlers[event], app, env, {}, {}, False)
    return env


def violated_assertions(app: AppSpec, valuation: Mapping[str, int]) -> frozenset[str]:
    return frozenset(a.id for a in app.assertions if not eval_expr(a.expr, valuation))


def check_assertions(app: AppSpec, state: ConcreteState) -> frozenset[str]:
    return violated_assertions(app, state.valuation)
