"""Shared fixtures data, random instance generators and independent oracles."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import networkx as nx

from guiverify.app import (
    AppSpec,
    Assertion,
    Assign,
    IfElse,
    SetEnabled,
    SetVisible,
    VarDecl,
    WidgetSpec,
    WindowSpec,
    const,
    load_app_spec,
    op,
    var,
)
from guiverify.eefg import Eefg, load_eefg

SAMPLES = Path(__file__).resolve().parent.parent / "samples" / "dialog_app"
APP_PATH = SAMPLES / "app.json"
EFG_PATH = SAMPLES / "efg.json"
EXTENDED_EFG_PATH = SAMPLES / "extended_efg.json"


def dialog_app(*assert_ids: str) -> AppSpec:
    app = load_app_spec(APP_PATH)
    return app.restrict_assertions(assert_ids) if assert_ids else app


def base_efg() -> Eefg:
    return load_eefg(EFG_PATH)


def extended_efg() -> Eefg:
    return load_eefg(EXTENDED_EFG_PATH)


# ---------------------------------------------------------------------------
# Oracles that share no code with the search / automata paths under test


def fold_valuation(app: AppSpec, seq) -> dict:
    """Straight-line interpretation of the handlers, GUI calls ignored."""
    env = {v.name: v.init for v in app.variables}
    for e in seq:
        env = _interp(app, app.handlers[e], dict(env))
    return env


def _interp(app, stmts, env):
    for s in stmts:
        if isinstance(s, Assign):
            d = app.domains[s.var]
            env[s.var] = min(d.hi, max(d.lo, _ev(s.expr, env)))
        elif isinstance(s, IfElse):
            env = _interp(app, s.then if _ev(s.cond, env) else s.orelse, env)
    return env


def _ev(e, env):
    from guiverify.app import Const, Op, Var

    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    assert isinstance(e, Op)
    a = [_ev(x, env) for x in e.args]
    table = {
        "+": lambda: sum(a),
        "*": lambda: _prod(a),
        "-": lambda: a[0] - a[1],
        "neg": lambda: -a[0],
        "not": lambda: not a[0],
        "and": lambda: all(a),
        "or": lambda: any(a),
        "<": lambda: a[0] < a[1],
        "<=": lambda: a[0] <= a[1],
        ">": lambda: a[0] > a[1],
        ">=": lambda: a[0] >= a[1],
        "==": lambda: a[0] == a[1],
        "!=": lambda: a[0] != a[1],
    }
    return table[e.op]()


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def violating(app: AppSpec, seq) -> bool:
    env = fold_valuation(app, seq)
    return any(not _ev(a.expr, env) for a in app.assertions)


def all_words(alphabet, k):
    """Every word over ``alphabet`` of length at most ``k``."""
    syms = sorted(alphabet)
    for n in range(k + 1):
        yield from itertools.product(syms, repeat=n)


def possible_by_paths(g: Eefg, k: int) -> set:
    """Oracle straight from the definition: label every path of at most ``k`` locations."""
    out = {()}
    paths = [(l,) for l in g.initial]
    for _ in range(k):
        out.update(tuple(g.locations[l] for l in p) for p in paths)
        paths = [p + (b,) for p in paths for (a, b) in g.edges if a == p[-1]]
    return out


def to_nx(g: Eefg) -> nx.DiGraph:
    d = nx.DiGraph()
    for l, e in g.locations.items():
        d.add_node(l, event=e, initial=l in g.initial)
    d.add_edges_from(g.edges)
    return d


def isomorphic(g1: Eefg, g2: Eefg) -> bool:
    return nx.is_isomorphic(
        to_nx(g1),
        to_nx(g2),
        node_match=lambda a, b: a["event"] == b["event"] and a["initial"] == b["initial"],
    )


# ---------------------------------------------------------------------------
# Random instances


def random_expr(rng: random.Random, names, depth=0):
    roll = rng.random()
    if depth >= 1 or roll < 0.35:
        return const(rng.randint(-3, 3)) if rng.random() < 0.4 else var(rng.choice(names))
    kind = rng.choice(["+", "-", "*", "neg"])
    if kind == "neg":
        return op("neg", random_expr(rng, names, depth + 1))
    return op(kind, random_expr(rng, names, depth + 1), random_expr(rng, names, depth + 1))


def random_cond(rng, names):
    c = op(rng.choice(["<", "<=", ">", ">=", "==", "!="]), var(rng.choice(names)), const(rng.randint(-4, 4)))
    if rng.random() < 0.2:
        c = op("not", c)
    return c


def random_app(rng: random.Random, n_events: int | None = None) -> AppSpec:
    n_events = n_events or rng.randint(1, 4)
    events = [f"e{i + 1}" for i in range(n_events)]
    names = ["x", "y"][: rng.randint(1, 2)]
    variables = [VarDecl(n, rng.randint(-2, 2), -16, 16) for n in names]
    with_dialog = n_events >= 2 and rng.random() < 0.5
    main_events = events if not with_dialog else events[:-1]
    windows = [
        WindowSpec(
            "Main",
            False,
            True,
            tuple(WidgetSpec(f"w_{e}", e, rng.random() < 0.9) for e in main_events),
        )
    ]
    if with_dialog:
        windows.append(
            WindowSpec("Dlg", True, False, (WidgetSpec(f"w_{events[-1]}", events[-1], True),))
        )
    widget_ids = [f"w_{e}" for e in events]

    def gui_stmt():
        if with_dialog and rng.random() < 0.4:
            return SetVisible("Dlg", rng.random() < 0.5)
        return SetEnabled(rng.choice(widget_ids), rng.random() < 0.5)

    def stmt():
        r = rng.random()
        if r < 0.55:
            return Assign(rng.choice(names), random_expr(rng, names))
        if r < 0.8:
            then = (Assign(rng.choice(names), random_expr(rng, names)),)
            if rng.random() < 0.5:
                then += (gui_stmt(),)
            orelse = (gui_stmt(),) if rng.random() < 0.3 else ()
            return IfElse(random_cond(rng, names), then, orelse)
        return gui_stmt()

    handlers = {e: tuple(stmt() for _ in range(rng.randint(1, 3))) for e in events}
    a = Assertion("a", op(rng.choice(["!=", "<", ">"]), var(rng.choice(names)), const(rng.randint(-8, 8))))
    if a.expr.op == "<":
        a = Assertion("a", op("<", a.expr.args[0], const(rng.randint(2, 12))))
    elif a.expr.op == ">":
        a = Assertion("a", op(">", a.expr.args[0], const(rng.randint(-12, -2))))
    return AppSpec(tuple(windows), tuple(variables), handlers, (a,))


def random_eefg(rng: random.Random, events, max_locations: int = 6, edge_p: float = 0.4) -> Eefg:
    events = sorted(events)
    n = rng.randint(min(len(events), max_locations), max_locations)
    locs = {f"l{i}": events[i] if i < len(events) else rng.choice(events) for i in range(n)}
    ids = list(locs)
    initial = {l for l in ids if rng.random() < 0.5} or {rng.choice(ids)}
    edges = {(a, b) for a in ids for b in ids if rng.random() < edge_p}
    return Eefg(locs, frozenset(initial), frozenset(edges), frozenset(events))


def random_instance(seed: int):
    rng = random.Random(seed)
    app = random_app(rng)
    g = random_eefg(rng, app.alphabet)
    walk = random_possible_word(rng, g, max_len=5)
    if walk is not None and rng.random() < 0.5:
        # aim the assertion at a value some possible walk reaches
        name = rng.choice([v.name for v in app.variables])
        target = fold_valuation(app, walk)[name]
        a = Assertion("a", op("!=", var(name), const(target)))
        app = AppSpec(app.windows, app.variables, app.handlers, (a,))
    return app, g


def random_possible_word(rng: random.Random, g: Eefg, max_len: int = 4):
    """A random non-empty possible sequence, or None if the graph has none."""
    if not g.initial:
        return None
    loc = rng.choice(sorted(g.initial))
    word = [g.locations[loc]]
    target = rng.randint(1, max_len)
    while len(word) < target:
        succ = g.successors[loc]
        if not succ:
            break
        loc = rng.choice(succ)
        word.append(g.locations[loc])
    return tuple(word)
