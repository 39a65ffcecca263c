import random

import pytest

from guiverify.analyzer import (
    AnalysisError,
    AnalysisLimits,
    Safe,
    Unknown,
    Unsafe,
    run_static_analysis,
    trace_to_event_sequence,
)
from guiverify.app import AppSpec, Assertion, Assign, VarDecl, WidgetSpec, WindowSpec, const, op, var
from guiverify.eefg import Eefg, enumerate_possible
from guiverify.program import EXIT, START, ProgramTrace, build_message_loop, trace_of_sequence

import support


def analyze(app, g, **limits):
    return run_static_analysis(build_message_loop(app, g), app, AnalysisLimits(**limits))


def test_shortest_for_x_ne_7(efg):
    app = support.dialog_app("x_ne_7")
    v = analyze(app, efg).verdict
    assert isinstance(v, Unsafe)
    assert v.sequence == ("e1", "e2", "e2", "e2", "e3")
    assert v.violated == ("x_ne_7",)
    assert v.trace.final_valuation["x"] == 7


def test_shortest_for_x_ne_3(efg):
    v = analyze(support.dialog_app("x_ne_3"), efg).verdict
    assert v.sequence == ("e1", "e2", "e2", "e3")


def test_safe_for_x_ne_5(efg):
    app = support.dialog_app("x_ne_5")
    res = analyze(app, efg)
    assert isinstance(res.verdict, Safe)
    # independent check: closure of cut-point values by exhaustive folding
    values = {support.fold_valuation(app, s)["x"] for s in enumerate_possible(efg, 10)}
    assert 5 not in values
    assert {0, 1, 2, 4, 8, 16, 32, 64, -1, 3, 7, 15, 31, 63} <= values


def test_all_assertions_gives_overall_shortest(app, efg):
    v = analyze(app, efg).verdict
    assert v.sequence == ("e1", "e2", "e2", "e3")
    assert v.violated == ("x_ne_3",)


def test_shortest_on_refined_graph(extended_efg):
    app = support.dialog_app("x_ne_7")
    v = analyze(app, extended_efg).verdict
    assert isinstance(v, Unsafe)
    assert len(v.sequence) == 6
    assert support.violating(app, v.sequence)


def test_initial_state_violation():
    app = AppSpec(
        (WindowSpec("W", False, True, (WidgetSpec("w", "e", True),)),),
        (VarDecl("x", 3, 0, 5),),
        {"e": (Assign("x", const(0)),)},
        (Assertion("a", op("!=", var("x"), const(3))),),
    )
    g = Eefg({"l": "e"}, {"l"}, set())
    v = analyze(app, g).verdict
    assert isinstance(v, Unsafe) and v.sequence == ()


def test_empty_graph_is_safe():
    app = support.dialog_app("x_ne_7")
    assert isinstance(analyze(app, Eefg()).verdict, Safe)


def test_state_limit(efg):
    v = analyze(support.dialog_app("x_ne_5"), efg, max_states=5).verdict
    assert isinstance(v, Unknown) and v.reason == "state-limit"


def test_depth_limit(efg):
    v = analyze(support.dialog_app("x_ne_5"), efg, max_depth=3).verdict
    assert isinstance(v, Unknown) and v.reason == "depth-limit"
    # a violation within the bound is still reported
    v = analyze(support.dialog_app("x_ne_3"), efg, max_depth=4).verdict
    assert isinstance(v, Unsafe)


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        AnalysisLimits(max_states=0)


def test_mismatched_program(efg):
    p = build_message_loop(support.dialog_app("x_ne_7"), efg)
    with pytest.raises(AnalysisError):
        run_static_analysis(p, support.dialog_app("x_ne_3"))


def test_determinism(efg):
    app = support.dialog_app("x_ne_7")
    a, b = analyze(app, efg), analyze(app, efg)
    assert a.verdict == b.verdict and a.metrics == b.metrics


def test_trace_to_event_sequence(app, efg, extended_efg):
    p = build_message_loop(app, efg)
    t = trace_of_sequence(p, app, ["e1", "e2", "e2", "e2", "e3"])
    assert trace_to_event_sequence(t, p) == ("e1", "e2", "e2", "e2", "e3")
    assert trace_to_event_sequence(trace_of_sequence(p, app, []), p) == ()
    p5 = build_message_loop(app, extended_efg)
    t5 = trace_of_sequence(p5, app, ["e1", "e2", "e2", "e2", "e1"])
    assert trace_to_event_sequence(t5, p5) == ("e1", "e2", "e2", "e2", "e1")


def test_foreign_trace(app, efg):
    p = build_message_loop(app, efg)
    with pytest.raises(AnalysisError):
        trace_to_event_sequence(ProgramTrace((START, "zz", EXIT), ({}, {}, {})), p)


def test_tie_break_is_lexicographic_by_event():
    # two length-1 violations; "a" < "b" must win regardless of location ids
    app = AppSpec(
        (WindowSpec("W", False, True, (WidgetSpec("wa", "a", True), WidgetSpec("wb", "b", True))),),
        (VarDecl("x", 0, -5, 5),),
        {"a": (Assign("x", const(1)),), "b": (Assign("x", const(1)),)},
        (Assertion("p", op("==", var("x"), const(0))),),
    )
    g = Eefg({"l0": "b", "l1": "a"}, {"l0", "l1"}, set())
    assert analyze(app, g).verdict.sequence == ("a",)


def test_minimality_and_witness_random():
    for seed in range(60):
        app, g = support.random_instance(seed)
        res = analyze(app, g)
        v = res.verdict
        if isinstance(v, Unsafe):
            n = len(v.sequence)
            shorter = [s for s in enumerate_possible(g, n) if support.violating(app, s)]
            assert support.violating(app, v.sequence)
            assert min(len(s) for s in shorter) == n
            # ties broken lexicographically
            assert v.sequence == min(s for s in shorter if len(s) == n)
            p = build_message_loop(app, g)
            assert trace_of_sequence(p, app, v.sequence) == v.trace
        elif isinstance(v, Safe):
            assert not any(support.violating(app, s) for s in enumerate_possible(g, 6))
