"""Extended event flow graphs.

Locations are labeled with events; several locations may carry the same
event once a graph has been refined.  A sequence of events is *possible* if
it labels a path that starts in an initial location.  The empty sequence is
always possible.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .app import AppSpec, SpecError, SpecSyntaxError, initial_state
from .replayer import is_executable, step


@dataclass(frozen=True, eq=False)
class Eefg:
    locations: Mapping[str, str] = field(default_factory=dict)
    initial: frozenset[str] = frozenset()
    edges: frozenset[tuple[str, str]] = frozenset()
    alphabet: frozenset[str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "locations", MappingProxyType(dict(self.locations)))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "edges", frozenset((a, b) for a, b in self.edges))
        labels = frozenset(self.locations.values())
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", labels)
        else:
            object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        for loc in self.initial:
            if loc not in self.locations:
                raise SpecError(f"initial location {loc} is not a location")
        for a, b in self.edges:
            for end in (a, b):
                if end not in self.locations:
                    raise SpecError(f"edge ({a}, {b}) names unknown location {end}")
        if not labels <= self.alphabet:
            raise SpecError(f"labels {sorted(labels - self.alphabet)} outside the alphabet")

    def __eq__(self, other):
        if not isinstance(other, Eefg):
            return NotImplemented
        return (
            dict(self.locations) == dict(other.locations)
            and self.initial == other.initial
            and self.edges == other.edges
            and self.alphabet == other.alphabet
        )

    __hash__ = None

    @cached_property
    def successors(self) -> Mapping[str, tuple[str, ...]]:
        succ: dict[str, list[str]] = {loc: [] for loc in self.locations}
        for a, b in self.edges:
            succ[a].append(b)
        return {loc: tuple(sorted(v)) for loc, v in succ.items()}

    def label(self, loc: str) -> str:
        return self.locations[loc]

    def step_locations(self, current: Iterable[str] | None, event: str) -> frozenset[str]:
        """Locations reachable by reading ``event``; ``None`` means "before the first event"."""
        if current is None:
            cands = self.initial
        else:
            cands = (b for a in current for b in self.successors[a])
        return frozenset(b for b in cands if self.locations[b] == event)


# ---------------------------------------------------------------------------
# Serialization


def eefg_from_dict(data: Mapping) -> Eefg:
    if not isinstance(data, Mapping):
        raise SpecError("EEFG must be a JSON object")
    try:
        locs: dict[str, str] = {}
        for entry in data.get("locations", []):
            lid, ev = entry["id"], entry["event"]
            if lid in locs:
                raise SpecError(f"duplicate location id {lid}")
            locs[lid] = ev
        initial = list(data.get("initial", []))
        edges = []
        for e in data.get("edges", []):
            if len(e) != 2:
                raise SpecError(f"edge must be a pair, got {e!r}")
            edges.append((e[0], e[1]))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed EEFG: {exc}") from None
    alphabet = data.get("alphabet")
    return Eefg(locs, frozenset(initial), frozenset(edges), alphabet)


def parse_eefg(text: str) -> Eefg:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return eefg_from_dict(data)


def load_eefg(path) -> Eefg:
    with open(path, encoding="utf-8") as fh:
        return parse_eefg(fh.read())


def eefg_to_dict(g: Eefg) -> dict:
    return {
        "locations": [{"id": lid, "event": g.locations[lid]} for lid in sorted(g.locations)],
        "initial": sorted(g.initial),
        "edges": [list(e) for e in sorted(g.edges)],
        "alphabet": sorted(g.alphabet),
    }


def serialize_eefg(g: Eefg) -> str:
    return json.dumps(eefg_to_dict(g), indent=2)


# ---------------------------------------------------------------------------
# Language


def is_possible(g: Eefg, seq: Sequence[str]) -> bool:
    for e in seq:
        if e not in g.alphabet:
            raise KeyError(f"unknown event {e}")
    current = None
    for e in seq:
        current = g.step_locations(current, e)
        if not current:
            return False
    return True


def enumerate_possible(g: Eefg, k: int) -> set[tuple[str, ...]]:
    """All possible sequences of length at most ``k`` (including the empty one)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out: set[tuple[str, ...]] = {()}
    layer: dict[tuple[str, ...], frozenset[str] | None] = {(): None}
    for _ in range(k):
        nxt: dict[tuple[str, ...], frozenset[str]] = {}
        for word, locs in layer.items():
            cands = g.initial if locs is None else {b for a in locs for b in g.successors[a]}
            for b in cands:
                w = word + (g.locations[b],)
                nxt[w] = nxt.get(w, frozenset()) | {b}
        out.update(nxt)
        layer = nxt
        if not layer:
            break
    return out


# ---------------------------------------------------------------------------
# Ripping


@dataclass
class RipResult:
    efg: Eefg
    # one replayable witness per initial event and per edge
    initial_witness: dict[str, tuple[str, ...]]
    edge_witness: dict[tuple[str, str], tuple[str, ...]]
    states_visited: int


def rip_efg_with_witnesses(app: AppSpec, depth: int) -> RipResult:
    """Breadth-first exploration of the simulated GUI.

    Every event sequence of length at most ``depth`` is (conceptually) executed;
    after each one, the events enabled in the reached state are recorded as
    followers of the last event.  States already expanded are not expanded
    again, but followers are still recorded on every arrival.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    alphabet = sorted(app.alphabet)
    s0 = initial_state(app)
    initial_witness = {e: (e,) for e in alphabet if is_executable(s0, app, e)}
    edge_witness: dict[tuple[str, str], tuple[str, ...]] = {}
    expanded = {s0}
    frontier = deque([(s0, ())])
    while frontier:
        state, path = frontier.popleft()
        if len(path) >= depth:
            continue
        for e in alphabet:
            if not is_executable(state, app, e):
                continue
            nxt = step(app, state, e)
            witness = path + (e,)
            for f in alphabet:
                if is_executable(nxt, app, f):
                    edge_witness.setdefault((e, f), witness + (f,))
            if nxt not in expanded:
                expanded.add(nxt)
                frontier.append((nxt, witness))
    locations = {e: e for e in alphabet}
    g = Eefg(locations, frozenset(initial_witness), frozenset(edge_witness), app.alphabet)
    return RipResult(g, initial_witness, edge_witness, len(expanded))


def rip_efg(app: AppSpec, depth: int) -> Eefg:
    return rip_efg_with_witnesses(app, depth).efg


# ---------------------------------------------------------------------------
# Graphviz


def dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g: Eefg, name: str = "eefg") -> str:
    lines = [f"digraph {dot_quote(name)} {{", "  node [shape=box, style=rounded];"]
    for lid in sorted(g.locations):
        attrs = [f"label={dot_quote(g.locations[lid])}"]
        if lid in g.initial:
            attrs.append("peripheries=2")
        lines.append(f"  {dot_quote(lid)} [{', '.join(attrs)}];")
    for a, b in sorted(g.edges):
        lines.append(f"  {dot_quote(a)} -> {dot_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
