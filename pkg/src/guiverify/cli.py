"""Command line interface.

Exit codes: 0 success/safe, 1 fail/unsafe, 2 unknown, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analyzer import AnalysisLimits, Safe, Unsafe, run_static_analysis
from .app import SpecError, load_app_spec
from .automata import AutomatonError, RefinementError, refine_efg
from .driver import VerifyConfig, verify
from .eefg import export_dot, load_eefg, rip_efg, serialize_eefg
from .program import ProgramError, build_message_loop, dump_program, program_dot
from .replayer import ReplayError, replay

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seq(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(x for x in v.split(",") if x)
    return out


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dot_dir(args) -> Path | None:
    if not args.dot:
        return None
    d = Path(args.dot)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_app(args):
    app = load_app_spec(args.app)
    if getattr(args, "assert_id", None):
        app = app.restrict_assertions(args.assert_id)
    return app


def _limits(args) -> AnalysisLimits:
    return AnalysisLimits(max_states=args.max_states, max_depth=args.max_depth)


def cmd_rip(args) -> int:
    app = _load_app(args)
    g = rip_efg(app, args.depth)
    _write(args.out, serialize_eefg(g))
    if d := _dot_dir(args):
        (d / "ripped.dot").write_text(export_dot(g, "ripped"))
    return EXIT_OK


def cmd_build(args) -> int:
    app = _load_app(args)
    p = build_message_loop(app, load_eefg(args.efg))
    _write(args.out, dump_program(p, app))
    if d := _dot_dir(args):
        (d / "program.dot").write_text(program_dot(p))
    return EXIT_OK


def cmd_analyze(args) -> int:
    app = _load_app(args)
    p = build_message_loop(app, load_eefg(args.efg))
    result = run_static_analysis(p, app, _limits(args))
    _write(args.out, json.dumps(result.to_dict(), indent=2))
    if isinstance(result.verdict, Safe):
        return EXIT_OK
    return EXIT_FAIL if isinstance(result.verdict, Unsafe) else EXIT_UNKNOWN


def cmd_replay(args) -> int:
    app = _load_app(args)
    result = replay(app, _seq(args.seq))
    _write(args.out, json.dumps(result.to_dict(), indent=2))
    if not result.executable:
        return EXIT_UNKNOWN
    return EXIT_FAIL if result.violated else EXIT_OK


def cmd_refine(args) -> int:
    g = load_eefg(args.efg)
    refined = refine_efg(g, _seq(args.seq), args.mode, args.minimize)
    _write(args.out, serialize_eefg(refined))
    if d := _dot_dir(args):
        (d / "before.dot").write_text(export_dot(g, "before"))
        (d / "after.dot").write_text(export_dot(refined, "after"))
    return EXIT_OK


def cmd_verify(args) -> int:
    app = _load_app(args)
    g = load_eefg(args.efg)
    cfg = VerifyConfig(args.max_iters, _limits(args), args.mode, args.minimize)
    report = verify(app, g, cfg)
    doc = report.to_dict()
    _write(args.report, json.dumps(doc, indent=2))
    if args.report:
        summary = {k: doc[k] for k in ("outcome", "sequence", "reason")}
        sys.stdout.write(json.dumps(summary) + "\n")
    if d := _dot_dir(args):
        (d / "initial_efg.dot").write_text(export_dot(g, "initial"))
        (d / "final_efg.dot").write_text(export_dot(report.final_efg, "final"))
    return {"success": EXIT_OK, "fail": EXIT_FAIL}.get(report.outcome, EXIT_UNKNOWN)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="guiverify", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, app=True, efg=False):
        if app:
            p.add_argument("--app", required=True, help="application spec (JSON)")
            p.add_argument("--assert-id", nargs="+", metavar="ID", help="check only these assertions")
        if efg:
            p.add_argument("--efg", required=True, help="event flow graph (JSON)")
        p.add_argument("--dot", metavar="DIR", help="write Graphviz renderings into DIR")

    def limits(p):
        p.add_argument("--max-states", type=int, default=1_000_000)
        p.add_argument("--max-depth", type=int, default=10_000)

    p = sub.add_parser("rip", help="infer an event flow graph from the simulated application")
    common(p)
    p.add_argument("--depth", type=int, default=2, help="longest explored event sequence")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_rip)

    p = sub.add_parser("build", help="print the message-loop program")
    common(p, efg=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analyze", help="run the static analysis once")
    common(p, efg=True)
    limits(p)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replay", help="replay an event sequence on the simulated GUI")
    common(p)
    p.add_argument("--seq", nargs="*", default=[], help="events, space or comma separated")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("refine", help="remove a sequence from an event flow graph")
    common(p, app=False, efg=True)
    p.add_argument("--seq", nargs="+", required=True)
    p.add_argument("--mode", choices=("prefix", "factor"), default="prefix")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("verify", help="full verify/replay/refine loop")
    common(p, efg=True)
    limits(p)
    p.add_argument("--max-iters", type=int, default=10)
    p.add_argument("--mode", choices=("prefix", "factor"), default="prefix")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (OSError, SpecError, ProgramError, RefinementError, AutomatonError, ReplayError,
            KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"guiverify: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
