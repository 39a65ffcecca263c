"""Explicit-state reachability analysis of the message-loop program.

Handlers are deterministic and GUI calls are no-ops inside the program, so
the valuation after a handler block depends on the event sequence alone.
The search therefore walks the program in lock-step over *sets* of blocks
(all blocks that can have read the current sequence) paired with the
current valuation.  Breadth-first order with events expanded in sorted order
makes the first violating state dequeued carry the shortest violating
sequence, and among those the lexicographically least one.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .app import AppSpec, initial_state, run_handler_on_valuation, violated_assertions
from .program import LoopProgram, ProgramTrace, trace_of_sequence


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisLimits:
    max_states: int = 1_000_000
    max_depth: int = 10_000

    def __post_init__(self):
        if self.max_states < 1 or self.max_depth < 1:
            raise ValueError("analysis limits must be positive")


@dataclass(frozen=True)
class Safe:
    kind = "safe"


@dataclass(frozen=True)
class Unsafe:
    sequence: tuple[str, ...]
    trace: ProgramTrace
    violated: tuple[str, ...]
    kind = "unsafe"


@dataclass(frozen=True)
class Unknown:
    reason: str  # "state-limit" | "depth-limit" | "domain-anomaly" | "iteration-limit"
    diagnostics: str = ""
    kind = "unknown"


Verdict = Safe | Unsafe | Unknown


@dataclass(frozen=True)
class AnalysisMetrics:
    states_explored: int
    frontier_peak: int


@dataclass(frozen=True)
class AnalysisResult:
    verdict: Verdict
    metrics: AnalysisMetrics = field(default=AnalysisMetrics(0, 0))

    def to_dict(self) -> dict:
        v = self.verdict
        out: dict = {"verdict": v.kind}
        if isinstance(v, Unsafe):
            out["sequence"] = list(v.sequence)
            out["violated"] = list(v.violated)
            out["trace"] = v.trace.to_dict()
        elif isinstance(v, Unknown):
            out["reason"] = v.reason
            out["diagnostics"] = v.diagnostics
        out["states_explored"] = self.metrics.states_explored
        out["frontier_peak"] = self.metrics.frontier_peak
        return out


def _check_program(p: LoopProgram, app: AppSpec) -> None:
    for bid, block in p.blocks.items():
        if block.event is not None and block.event not in app.handlers:
            raise AnalysisError(f"block {bid} runs event {block.event} unknown to the application")
    names = {a.id for a in app.assertions}
    if set(p.assertion_ids) != names:
        raise AnalysisError("program was built for a different assertion set")


def run_static_analysis(
    p: LoopProgram, app: AppSpec, limits: AnalysisLimits | None = None
) -> AnalysisResult:
    limits = limits or AnalysisLimits()
    _check_program(p, app)
    var_names = [v.name for v in app.variables]

    # successor blocks grouped by event, in sorted event order
    by_event: dict[str | None, dict[str, frozenset[str]]] = {}
    for bid, block in p.blocks.items():
        groups: dict[str, set[str]] = {}
        for s in block.successors:
            ev = p.blocks[s].event
            if ev is not None:
                groups.setdefault(ev, set()).add(s)
        by_event[bid] = {ev: frozenset(bs) for ev, bs in sorted(groups.items())}

    init_val = dict(initial_state(app).valuation)
    start = (frozenset([p.entry]), tuple(init_val[n] for n in var_names))
    seen = {start}
    queue = deque([(start, ())])
    explored = 0
    peak = 1
    depth_cut = False
    while queue:
        (blocks, vals), seq = queue.popleft()
        explored += 1
        valuation = dict(zip(var_names, vals))
        # cut point: after START's initialization, or after a completed handler
        bad = violated_assertions(app, valuation)
        if bad:
            trace = trace_of_sequence(p, app, seq)
            return AnalysisResult(
                Unsafe(seq, trace, tuple(sorted(bad))), AnalysisMetrics(explored, peak)
            )
        succ: dict[str, set[str]] = {}
        for b in sorted(blocks):
            for ev, targets in by_event[b].items():
                succ.setdefault(ev, set()).update(targets)
        if succ and len(seq) >= limits.max_depth:
            depth_cut = True
            continue
        for ev in sorted(succ):
            after = run_handler_on_valuation(app, ev, valuation)
            key = (frozenset(succ[ev]), tuple(after[n] for n in var_names))
            if key in seen:
                continue
            if len(seen) >= limits.max_states:
                return AnalysisResult(
                    Unknown("state-limit", f"more than {limits.max_states} states"),
                    AnalysisMetrics(explored, peak),
                )
            seen.add(key)
            queue.append((key, seq + (ev,)))
        peak = max(peak, len(queue))
    if depth_cut:
        return AnalysisResult(
            Unknown("depth-limit", f"sequences longer than {limits.max_depth} not explored"),
            AnalysisMetrics(explored, peak),
        )
    return AnalysisResult(Safe(), AnalysisMetrics(explored, peak))


def trace_to_event_sequence(t: ProgramTrace, p: LoopProgram) -> tuple[str, ...]:
    """Map the handler blocks on a trace back to the events they run."""
    out = []
    for bid in t.blocks:
        if bid not in p.blocks:
            raise AnalysisError(f"trace visits block {bid} which is not in the program")
        if bid in (p.entry, p.exit):
            continue
        out.append(p.event_of_block(bid))
    return tuple(out)

