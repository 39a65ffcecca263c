"""The verify / replay / refine loop."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .analyzer import AnalysisLimits, Safe, Unknown, Unsafe, run_static_analysis
from .app import AppSpec
from .automata import refine_efg
from .eefg import Eefg, eefg_to_dict
from .program import ProgramError, build_message_loop
from .replayer import ReplayResult, replay

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerifyConfig:
    max_iterations: int = 10
    limits: AnalysisLimits = field(default_factory=AnalysisLimits)
    mode: str = "prefix"
    minimize: bool = False

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.mode not in ("prefix", "factor"):
            raise ValueError(f"unknown refinement mode {self.mode!r}")


@dataclass(frozen=True)
class Iteration:
    counterexample: tuple[str, ...] | None
    replay: ReplayResult | None
    states_explored: int
    frontier_peak: int
    elapsed_ms: float

    def to_dict(self) -> dict:
        r = self.replay
        return {
            "counterexample": list(self.counterexample) if self.counterexample is not None else None,
            "executable": r.executable if r else None,
            "infeasible_prefix": (
                list(r.infeasible_prefix) if r and r.infeasible_prefix is not None else None
            ),
            "violated": [{"step": i, "assertions": list(ids)} for i, ids in r.violated] if r else [],
            "states_explored": self.states_explored,
            "frontier_peak": self.frontier_peak,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


@dataclass
class VerifyReport:
    outcome: str  # "success" | "fail" | "unknown"
    sequence: tuple[str, ...] | None = None
    reason: str | None = None
    iterations: list[Iteration] = field(default_factory=list)
    final_efg: Eefg | None = None
    # EEFG at the start of each iteration; index i goes with iterations[i]
    efg_history: list[Eefg] = field(default_factory=list)

    @property
    def refinements(self) -> int:
        return sum(1 for it in self.iterations if it.replay is not None and not it.replay.executable)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "sequence": list(self.sequence) if self.sequence is not None else None,
            "reason": self.reason,
            "iterations": [it.to_dict() for it in self.iterations],
            "final_efg": eefg_to_dict(self.final_efg) if self.final_efg is not None else None,
        }


def verify(app: AppSpec, g: Eefg, cfg: VerifyConfig | None = None) -> VerifyReport:
    cfg = cfg or VerifyConfig()
    foreign = sorted(set(g.locations.values()) - app.alphabet)
    if foreign:
        raise ProgramError(f"EEFG uses events the application does not define: {foreign}")
    report = VerifyReport("unknown")
    for _ in range(cfg.max_iterations):
        report.efg_history.append(g)
        t0 = time.perf_counter()
        program = build_message_loop(app, g)
        result = run_static_analysis(program, app, cfg.limits)
        verdict = result.verdict
        rep = None
        if isinstance(verdict, Unsafe):
            rep = replay(app, verdict.sequence)
        elapsed = (time.perf_counter() - t0) * 1000
        report.iterations.append(
            Iteration(
                verdict.sequence if isinstance(verdict, Unsafe) else None,
                rep,
                result.metrics.states_explored,
                result.metrics.frontier_peak,
                elapsed,
            )
        )
        report.final_efg = g
        if isinstance(verdict, Safe):
            report.outcome = "success"
            return report
        if isinstance(verdict, Unknown):
            report.reason = verdict.reason
            return report
        log.info("counterexample %s executable=%s", verdict.sequence, rep.executable)
        if rep.executable:
            if rep.concretely_violating:
                report.outcome = "fail"
                report.sequence = verdict.sequence
            else:
                # the program found a violation the concrete run does not show
                report.reason = "domain-anomaly"
            return report
        g = refine_efg(g, rep.infeasible_prefix, cfg.mode, cfg.minimize)
        report.final_efg = g
    report.reason = "iteration-limit"
    return report
