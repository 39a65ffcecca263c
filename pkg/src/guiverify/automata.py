"""Finite automata over event alphabets and EEFG refinement.

An EEFG becomes an NFA with one state per location plus a fresh initial
state; every transition is labeled with the event of its target location.
Refinement removes all sequences starting with (or, in ``factor`` mode,
containing) a non-executable sequence by intersecting with the complement of
a small DFA, and turns the product back into an EEFG.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

from .eefg import Eefg, is_possible

State = Hashable


class AutomatonError(ValueError):
    pass


def _skey(q):
    # total order over the state shapes produced here (ints, strings, nested tuples)
    if isinstance(q, tuple):
        return (2, 0, "", tuple(_skey(x) for x in q))
    if isinstance(q, int):
        return (0, q, "", ())
    return (1, 0, str(q), ())


@dataclass(frozen=True)
class Nfa:
    alphabet: frozenset[str]
    states: frozenset[State]
    initial: State
    accepting: frozenset[State]
    transitions: frozenset[tuple[State, str, State]]

    def __post_init__(self):
        for name in ("alphabet", "states", "accepting", "transitions"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.initial not in self.states:
            raise AutomatonError("initial state is not a state")
        if not self.accepting <= self.states:
            raise AutomatonError("accepting states must be states")
        for p, a, q in self.transitions:
            if p not in self.states or q not in self.states:
                raise AutomatonError(f"transition ({p!r}, {a}, {q!r}) leaves the state set")
            if a not in self.alphabet:
                raise AutomatonError(f"transition symbol {a} not in the alphabet")

    @cached_property
    def delta(self) -> Mapping[tuple[State, str], tuple[State, ...]]:
        d: dict[tuple[State, str], list[State]] = {}
        for p, a, q in self.transitions:
            d.setdefault((p, a), []).append(q)
        return {k: tuple(sorted(v, key=_skey)) for k, v in d.items()}

    def step(self, states: Iterable[State], symbol: str) -> frozenset[State]:
        return frozenset(q for p in states for q in self.delta.get((p, symbol), ()))

    @property
    def symbols(self) -> list[str]:
        return sorted(self.alphabet)


def is_deterministic(a: Nfa) -> bool:
    return all(len(v) == 1 for v in a.delta.values())


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# Constructions


def efg_to_nfa(g: Eefg, accept_empty: bool = True) -> Nfa:
    q0 = _fresh("q0", g.locations)
    states = frozenset(g.locations) | {q0}
    trans = {(a, g.locations[b], b) for a, b in g.edges}
    trans |= {(q0, g.locations[l], l) for l in g.initial}
    accepting = frozenset(g.locations) | ({q0} if accept_empty else set())
    return Nfa(g.alphabet, states, q0, accepting, frozenset(trans))


def prefix_automaton(seq: Sequence[str], alphabet: Iterable[str]) -> Nfa:
    """Complete DFA for ``seq`` followed by anything."""
    alphabet = frozenset(alphabet)
    if not seq:
        raise AutomatonError("prefix sequence must be non-empty")
    for e in seq:
        if e not in alphabet:
            raise AutomatonError(f"event {e} not in the alphabet")
    n = len(seq)
    sink = n + 1
    trans = set()
    for i, e in enumerate(seq):
        for a in alphabet:
            trans.add((i, a, i + 1 if a == e else sink))
    for a in alphabet:
        trans.add((n, a, n))
        trans.add((sink, a, sink))
    return Nfa(alphabet, frozenset(range(n + 2)), 0, frozenset([n]), frozenset(trans))


def factor_automaton(seq: Sequence[str], alphabet: Iterable[str]) -> Nfa:
    """Complete DFA for anything, then ``seq``, then anything (KMP construction)."""
    alphabet = frozenset(alphabet)
    if not seq:
        raise AutomatonError("factor sequence must be non-empty")
    for e in seq:
        if e not in alphabet:
            raise AutomatonError(f"event {e} not in the alphabet")
    n = len(seq)
    fail = [0] * (n + 1)
    k = 0
    for i in range(1, n):
        while k and seq[i] != seq[k]:
            k = fail[k]
        if seq[i] == seq[k]:
            k += 1
        fail[i + 1] = k
    trans = set()
    for i in range(n):
        for a in alphabet:
            j = i
            while j and seq[j] != a:
                j = fail[j]
            trans.add((i, a, j + 1 if seq[j] == a else 0))
    for a in alphabet:
        trans.add((n, a, n))
    return Nfa(alphabet, frozenset(range(n + 1)), 0, frozenset([n]), frozenset(trans))


def determinize(a: Nfa, complete: bool = True) -> Nfa:
    """Subset construction; states are numbered in breadth-first discovery order."""
    start = frozenset([a.initial])
    ids = {start: 0}
    order = [start]
    trans = set()
    i = 0
    while i < len(order):
        cur = order[i]
        for sym in a.symbols:
            nxt = a.step(cur, sym)
            if not nxt and not complete:
                continue
            if nxt not in ids:
                ids[nxt] = len(order)
                order.append(nxt)
            trans.add((ids[cur], sym, ids[nxt]))
        i += 1
    accepting = frozenset(ids[s] for s in order if s & a.accepting)
    return Nfa(a.alphabet, frozenset(range(len(order))), 0, accepting, frozenset(trans))


def complement(a: Nfa) -> Nfa:
    d = determinize(a, complete=True)
    return Nfa(d.alphabet, d.states, d.initial, d.states - d.accepting, d.transitions)


def intersect(a: Nfa, b: Nfa) -> Nfa:
    """Product construction restricted to pairs reachable from the initial pair."""
    start = (a.initial, b.initial)
    seen = {start}
    queue = deque([start])
    trans = set()
    common = sorted(a.alphabet & b.alphabet)
    while queue:
        p, q = queue.popleft()
        for sym in common:
            for p2 in a.delta.get((p, sym), ()):
                for q2 in b.delta.get((q, sym), ()):
                    nxt = (p2, q2)
                    trans.add(((p, q), sym, nxt))
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
    accepting = frozenset(s for s in seen if s[0] in a.accepting and s[1] in b.accepting)
    return Nfa(a.alphabet | b.alphabet, frozenset(seen), start, accepting, frozenset(trans))


def trim(a: Nfa) -> Nfa:
    """Keep states reachable from the initial state and co-reachable to acceptance.

    The initial state is always kept so the result stays a well-formed automaton.
    """
    fwd = {a.initial}
    queue = deque([a.initial])
    succ: dict[State, set[State]] = {}
    pred: dict[State, set[State]] = {}
    for p, _, q in a.transitions:
        succ.setdefault(p, set()).add(q)
        pred.setdefault(q, set()).add(p)
    while queue:
        p = queue.popleft()
        for q in succ.get(p, ()):
            if q not in fwd:
                fwd.add(q)
                queue.append(q)
    bwd = set(a.accepting)
    queue = deque(a.accepting)
    while queue:
        q = queue.popleft()
        for p in pred.get(q, ()):
            if p not in bwd:
                bwd.add(p)
                queue.append(p)
    keep = (fwd & bwd) | {a.initial}
    trans = frozenset(t for t in a.transitions if t[0] in keep and t[2] in keep)
    return Nfa(a.alphabet, frozenset(keep), a.initial, a.accepting & keep, trans)


def accepts(a: Nfa, seq: Sequence[str]) -> bool:
    cur = frozenset([a.initial])
    for sym in seq:
        cur = a.step(cur, sym)
        if not cur:
            return False
    return bool(cur & a.accepting)


def enumerate_words(a: Nfa, k: int) -> set[tuple[str, ...]]:
    """Accepted words of length at most ``k``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    layer = {(): frozenset([a.initial])}
    out = set()
    for length in range(k + 1):
        out.update(w for w, cur in layer.items() if cur & a.accepting)
        if length == k:
            break
        nxt = {}
        for w, cur in layer.items():
            for sym in a.symbols:
                s = a.step(cur, sym)
                if s:
                    nxt[w + (sym,)] = s
        layer = nxt
    return out


def incoming_labels(a: Nfa) -> dict[State, set[str]]:
    labels: dict[State, set[str]] = {}
    for _, sym, q in a.transitions:
        labels.setdefault(q, set()).add(sym)
    return labels


def minimize(a: Nfa, respect_labels: bool = True) -> Nfa:
    """Moore partition refinement of a (possibly partial) DFA.

    With ``respect_labels`` states are only merged when they share their
    incoming symbol, so the result can still be read back as an EEFG.
    """
    if not is_deterministic(a):
        raise AutomatonError("minimize needs a deterministic automaton")
    labels = incoming_labels(a) if respect_labels else {}
    states = sorted(a.states, key=_skey)

    def initial_class(q):
        return (q in a.accepting, tuple(sorted(labels.get(q, ()))), q == a.initial and respect_labels)

    block = {q: initial_class(q) for q in states}
    while True:
        sig = {
            q: (block[q],)
            + tuple(
                block[a.delta[(q, s)][0]] if (q, s) in a.delta else None for s in a.symbols
            )
            for q in states
        }
        names: dict = {}
        new_block = {q: names.setdefault(sig[q], len(names)) for q in states}
        if len(names) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    trans = frozenset((block[p], s, block[q]) for p, s, q in a.transitions)
    return Nfa(
        a.alphabet,
        frozenset(block.values()),
        block[a.initial],
        frozenset(block[q] for q in a.accepting),
        trans,
    )


# ---------------------------------------------------------------------------
# Back to EEFGs


def _base_name(q: State, label: str) -> str:
    while isinstance(q, tuple) and q:
        q = q[0]
    return q if isinstance(q, str) else label


def nfa_to_efg(a: Nfa) -> Eefg:
    """Read an automaton back as an EEFG.

    Requirements: no transition enters the initial state, every other state
    is accepting, and all transitions into a state carry the same symbol.
    States that nothing enters are unreachable and are dropped.
    """
    labels = incoming_labels(a)
    if a.initial in labels:
        raise AutomatonError("the initial state has incoming transitions")
    for q, syms in labels.items():
        if len(syms) > 1:
            raise AutomatonError(
                f"state {q!r} has conflicting incoming labels {sorted(syms)}"
            )
        if q not in a.accepting:
            raise AutomatonError(f"state {q!r} is reachable but not accepting")

    # name locations in breadth-first order so output is stable
    names: dict[State, str] = {}
    used: set[str] = set()
    seen = {a.initial}
    queue = deque([a.initial])
    order = []
    while queue:
        p = queue.popleft()
        for sym in a.symbols:
            for q in a.delta.get((p, sym), ()):
                if q not in seen:
                    seen.add(q)
                    order.append(q)
                    queue.append(q)
    # unreachable states with incoming edges (from other unreachable states) come last
    order += sorted((q for q in labels if q not in seen), key=_skey)
    for q in order:
        (label,) = labels[q]
        base = _base_name(q, label)
        name, k = base, 0
        while name in used:
            k += 1
            name = f"{base}#{k}"
        used.add(name)
        names[q] = name

    locations = {names[q]: next(iter(labels[q])) for q in order}
    initial = {names[q] for p, _, q in a.transitions if p == a.initial}
    edges = {(names[p], names[q]) for p, _, q in a.transitions if p != a.initial}
    return Eefg(locations, frozenset(initial), frozenset(edges), a.alphabet)


class RefinementError(ValueError):
    pass


def refine_efg(
    g: Eefg, infeasible: Sequence[str], mode: str = "prefix", minimize_result: bool = False
) -> Eefg:
    """Remove every sequence that starts with ``infeasible`` (``mode="prefix"``)
    or contains it anywhere (``mode="factor"``)."""
    infeasible = tuple(infeasible)
    if not infeasible:
        raise RefinementError("cannot refine with an empty sequence")
    if not is_possible(g, infeasible):
        raise RefinementError(f"{list(infeasible)} is not a possible sequence of the graph")
    if mode == "prefix":
        bad = prefix_automaton(infeasible, g.alphabet)
    elif mode == "factor":
        bad = factor_automaton(infeasible, g.alphabet)
    else:
        raise RefinementError(f"unknown refinement mode {mode!r}")
    product = trim(intersect(efg_to_nfa(g), complement(bad)))
    if minimize_result and is_deterministic(product):
        product = minimize(product)
    return nfa_to_efg(product)
