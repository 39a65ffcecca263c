"""Concrete replay of event sequences against the simulated GUI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .app import AppSpec, ConcreteState, check_assertions, exec_handler, initial_state


class ReplayError(RuntimeError):
    """The simulated GUI reached a configuration the model does not support."""


@dataclass(frozen=True)
class ReplayResult:
    executable: bool
    infeasible_prefix: tuple[str, ...] | None
    violated: tuple[tuple[int, tuple[str, ...]], ...] = ()
    final_state: ConcreteState | None = None

    @property
    def concretely_violating(self) -> bool:
        return bool(self.violated)

    def to_dict(self) -> dict:
        return {
            "executable": self.executable,
            "infeasible_prefix": (
                list(self.infeasible_prefix) if self.infeasible_prefix is not None else None
            ),
            "violated": [{"step": i, "assertions": list(ids)} for i, ids in self.violated],
            "final_state": self.final_state.to_dict() if self.final_state else None,
        }


def _visible_modals(app: AppSpec, state: ConcreteState) -> list[str]:
    return [w.id for w in app.windows if w.modal and state.visible[w.id]]


def is_executable(state: ConcreteState, app: AppSpec, event: str) -> bool:
    """An event can fire iff its widget is enabled, its window is visible and
    no *other* modal window is currently showing."""
    if event not in app.widget_of_event:
        raise KeyError(f"unknown event {event}")
    widget = app.widget_of_event[event]
    window = app.window_of_widget[widget.id]
    if not state.enabled[widget.id] or not state.visible[window.id]:
        return False
    return all(m == window.id for m in _visible_modals(app, state))


def step(app: AppSpec, state: ConcreteState, event: str) -> ConcreteState:
    """Fire one (executable) event with full GUI effects."""
    after = exec_handler(app, event, state, gui_effects=True)
    if len(_visible_modals(app, after)) > 1:
        raise ReplayError(
            f"event {event} opened a second modal window: {_visible_modals(app, after)}"
        )
    return after


def replay(app: AppSpec, seq: Sequence[str]) -> ReplayResult:
    """Replay ``seq`` from a fresh initial state.

    Stops at the first event that cannot fire and reports the prefix up to
    and including it.  Assertion violations are recorded with the index of
    the step after which they were observed; step 0 is the initial state.
    """
    for e in seq:
        if e not in app.alphabet:
            raise KeyError(f"unknown event {e}")
    state = initial_state(app)
    bad = check_assertions(app, state)
    violated = [(0, tuple(sorted(bad)))] if bad else []
    for i, e in enumerate(seq):
        if not is_executable(state, app, e):
            return ReplayResult(False, tuple(seq[: i + 1]), tuple(violated), state)
        state = step(app, state, e)
        bad = check_assertions(app, state)
        if bad:
            violated.append((i + 1, tuple(sorted(bad))))
    return ReplayResult(True, None, tuple(violated), state)
