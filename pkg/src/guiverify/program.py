"""The mock message-loop program built from an application and an EEFG.

One block per EEFG location runs that location's event handler and then
jumps nondeterministically to the blocks of its successor locations or to
EXIT, where the assertions live.  START runs the initialization and jumps to
the blocks of the initial locations.  GUI calls inside handlers are no-ops
here: which event may come next is decided by the graph alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

from .app import (
    AppSpec,
    Assign,
    Const,
    IfElse,
    Op,
    SetEnabled,
    SetVisible,
    Var,
    initial_state,
    run_handler_on_valuation,
)
from .eefg import Eefg, dot_quote

START = "START"
EXIT = "EXIT"


@dataclass(frozen=True)
class Block:
    id: str
    event: str | None  # handler run by this block; None for START/EXIT
    successors: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class LoopProgram:
    blocks: Mapping[str, Block]
    entry: str
    exit: str
    loc_of_block: Mapping[str, str]
    efg: Eefg
    assertion_ids: tuple[str, ...]

    def event_of_block(self, block_id: str) -> str:
        return self.efg.locations[self.loc_of_block[block_id]]

    def block_of_loc(self, loc: str) -> str:
        # blocks are named after their locations
        return loc


@dataclass(frozen=True)
class ProgramTrace:
    """Blocks visited from START to EXIT, with the valuation after each one."""

    blocks: tuple[str, ...]
    valuations: tuple[Mapping[str, int], ...]

    @property
    def final_valuation(self) -> Mapping[str, int]:
        return self.valuations[-1]

    def to_dict(self) -> dict:
        return {
            "blocks": list(self.blocks),
            "valuations": [dict(v) for v in self.valuations],
        }


class ProgramError(ValueError):
    pass


def build_message_loop(app: AppSpec, g: Eefg) -> LoopProgram:
    missing = sorted(e for e in set(g.locations.values()) if e not in app.handlers)
    if missing:
        raise ProgramError(f"events without handlers in the application: {missing}")
    for reserved in (START, EXIT):
        if reserved in g.locations:
            raise ProgramError(f"location id {reserved} clashes with a reserved block label")
    blocks: dict[str, Block] = {
        START: Block(START, None, tuple(sorted(g.initial))),
        EXIT: Block(EXIT, None, ()),
    }
    for loc in sorted(g.locations):
        blocks[loc] = Block(loc, g.locations[loc], g.successors[loc] + (EXIT,))
    return LoopProgram(
        MappingProxyType(blocks),
        START,
        EXIT,
        MappingProxyType({loc: loc for loc in g.locations}),
        g,
        tuple(a.id for a in app.assertions),
    )


def least_location_path(g: Eefg, seq: Sequence[str]) -> tuple[str, ...] | None:
    """Lexicographically least location path labeled by ``seq``, if any."""
    n = len(seq)
    if n == 0:
        return ()
    # alive[i]: locations at position i from which the rest of seq can be read
    alive: list[set[str]] = [set() for _ in range(n)]
    alive[n - 1] = {l for l, e in g.locations.items() if e == seq[n - 1]}
    for i in range(n - 2, -1, -1):
        alive[i] = {
            l
            for l, e in g.locations.items()
            if e == seq[i] and any(b in alive[i + 1] for b in g.successors[l])
        }
    cands = sorted(g.initial & alive[0])
    if not cands:
        return None
    path = [cands[0]]
    for i in range(1, n):
        path.append(min(b for b in g.successors[path[-1]] if b in alive[i]))
    return tuple(path)


def trace_of_sequence(p: LoopProgram, app: AppSpec, seq: Sequence[str]) -> ProgramTrace | None:
    """The program trace that realizes ``seq``, or ``None`` when no path does."""
    for e in seq:
        if e not in app.alphabet and e not in p.efg.alphabet:
            raise KeyError(f"unknown event {e}")
    path = least_location_path(p.efg, seq)
    if path is None:
        return None
    val = dict(initial_state(app).valuation)
    blocks = [p.entry]
    vals = [MappingProxyType(dict(val))]
    for loc in path:
        val = run_handler_on_valuation(app, p.efg.locations[loc], val)
        blocks.append(p.block_of_loc(loc))
        vals.append(MappingProxyType(dict(val)))
    blocks.append(p.exit)
    vals.append(vals[-1])
    return ProgramTrace(tuple(blocks), tuple(vals))


def program_sequences(p: LoopProgram, k: int) -> set[tuple[str, ...]]:
    """Event sequences of START..EXIT control paths with at most ``k`` handler blocks."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = {()}
    # (event sequence, current block) pairs; the walk follows block successors only
    layer = {((), p.entry)}
    for _ in range(k):
        nxt = set()
        for word, b in layer:
            for s in p.blocks[b].successors:
                if s == p.exit:
                    continue
                nxt.add((word + (p.blocks[s].event,), s))
        # every handler block can jump to EXIT, so each prefix is a complete path
        out.update(w for w, _ in nxt)
        layer = nxt
    return out


# ---------------------------------------------------------------------------
# Debug renderings


def _fmt_expr(e) -> str:
    match e:
        case Const(v):
            return str(v)
        case Var(n):
            return n
        case Op("neg", (a,)):
            return f"-({_fmt_expr(a)})"
        case Op("not", (a,)):
            return f"!({_fmt_expr(a)})"
        case Op(name, args):
            sym = {"and": "&&", "or": "||"}.get(name, name)
            return "(" + f" {sym} ".join(_fmt_expr(a) for a in args) + ")"
    return repr(e)


def _fmt_stmts(stmts, indent: str, label: str, out: list[str], counter: list[int]) -> None:
    for s in stmts:
        match s:
            case Assign(v, e):
                out.append(f"{indent}{v} := {_fmt_expr(e)};")
            case IfElse(cond, then, orelse):
                counter[0] += 1
                tag = f"{label}_IF{counter[0]}"
                out.append(f"{indent}if ({_fmt_expr(cond)}) {{  // {tag}")
                _fmt_stmts(then, indent + "  ", label, out, counter)
                out.append(f"{indent}}} else {{")
                _fmt_stmts(orelse, indent + "  ", label, out, counter)
                out.append(f"{indent}}}")
            case SetEnabled(w, v):
                out.append(f"{indent}// no-op: call {w}$setEnabled({str(v).lower()});")
            case SetVisible(w, v):
                out.append(f"{indent}// no-op: call {w}$setVisible({str(v).lower()});")


def dump_program(p: LoopProgram, app: AppSpec) -> str:
    """Boogie-flavoured listing for inspection; not meant to be parsed."""
    out = ["procedure EFG_Procedure()", "{", f"  {START}:"]
    for v in app.variables:
        out.append(f"    {v.name} := {v.init};  // domain [{v.lo}, {v.hi}]")
    out.append(f"    goto {', '.join(p.blocks[START].successors) or '/* nothing */'};")
    for bid in sorted(b for b in p.blocks if b not in (START, EXIT)):
        block = p.blocks[bid]
        out.append("")
        out.append(f"  {bid}:  // handler of event {block.event}")
        _fmt_stmts(app.handlers[block.event], "    ", bid, out, [0])
        out.append(f"    goto {', '.join(block.successors)};")
    out.append("")
    out.append(f"  {EXIT}:")
    for a in app.assertions:
        out.append(f"    assert {_fmt_expr(a.expr)};  // {a.id}")
    out.append("    return;")
    out.append("}")
    return "\n".join(out) + "\n"


def program_dot(p: LoopProgram) -> str:
    lines = ['digraph "P_EFG" {', "  node [shape=box];"]
    for bid in sorted(p.blocks):
        block = p.blocks[bid]
        label = bid if block.event is None else f"{bid}: {block.event}"
        lines.append(f"  {dot_quote(bid)} [label={dot_quote(label)}];")
    for bid in sorted(p.blocks):
        for s in p.blocks[bid].successors:
            style = " [style=dashed]" if s == EXIT else ""
            lines.append(f"  {dot_quote(bid)} -> {dot_quote(s)}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
