"""Verification of GUI applications against (extended) event flow graphs."""

from .analyzer import (
    AnalysisLimits,
    AnalysisResult,
    Safe,
    Unknown,
    Unsafe,
    run_static_analysis,
    trace_to_event_sequence,
)
from .app import (
    AppSpec,
    ConcreteState,
    SpecError,
    check_assertions,
    exec_handler,
    initial_state,
    load_app_spec,
    parse_app_spec,
)
from .automata import (
    Nfa,
    accepts,
    complement,
    efg_to_nfa,
    enumerate_words,
    intersect,
    nfa_to_efg,
    prefix_automaton,
    refine_efg,
    trim,
)
from .driver import VerifyConfig, VerifyReport, verify
from .eefg import (
    Eefg,
    enumerate_possible,
    export_dot,
    is_possible,
    load_eefg,
    parse_eefg,
    rip_efg,
    serialize_eefg,
)
from .program import LoopProgram, build_message_loop, program_sequences, trace_of_sequence
from .replayer import ReplayResult, is_executable, replay

__version__ = "0.1.0"
