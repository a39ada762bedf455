"""Command-line entry points: the scenario runner, a KB query REPL, and the
golden-trace comparator.

Exit codes: 0 task completed, 1 load error, 2 the run gave up, 3 golden
mismatch.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import kb as kbmod
from .inference import InferenceError
from .kb import KBError, dump_kb, load_kb
from .runtime import asset_text, run_scenario
from .sitlog import (
    NoMatch, ScriptExhausted, SitLogError, ValidationError, render_trace,
)
from .terms import ParseError, parse_term, print_term
from .world import ScenarioError

BUNDLED = {"demo": "scenario_demo.scn",
           "home": "scenario_home.scn",
           "market": "scenario_market.scn"}

LOAD_ERRORS = (FileNotFoundError, ParseError, KBError, ValidationError,
               ScenarioError, ValueError)


def _read_scenario(arg):
    p = Path(arg)
    if p.exists():
        return p.read_text(), str(p.parent)
    if arg in BUNDLED:
        return asset_text(BUNDLED[arg]), None
    raise FileNotFoundError(f"scenario not found: {arg}")


def _normalize(text):
    lines = [line.rstrip() for line in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    return lines


def cmd_run(args):
    try:
        text, base = _read_scenario(args.scenario)
        overrides = {}
        for key, path in (("program", args.program), ("kb", args.kb),
                          ("cost_model", args.cost_model)):
            if path:
                overrides[key] = Path(path).read_text()
        rt, result = run_scenario(text, base_dir=base, seed=args.seed,
                                  interactive=args.interactive,
                                  overrides=overrides)
    except LOAD_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (NoMatch, ScriptExhausted, SitLogError, InferenceError) as err:
        print(f"run aborted: {err}", file=sys.stderr)
        return 2
    trace = render_trace(result)
    if args.trace_out:
        Path(args.trace_out).write_text(trace)
    else:
        print(trace, end="")
    if args.record_out:
        Path(args.record_out).write_text(rt.record.to_jsonl())
    if args.golden:
        golden = Path(args.golden).read_text()
        if _normalize(trace) != _normalize(golden):
            print("golden trace mismatch", file=sys.stderr)
            return 3
    return 0 if rt.outcome == "done" else 2


def _repl_loop(kb, stream_in, stream_out):
    def out(text):
        print(text, file=stream_out)

    for raw in stream_in:
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line in ("quit", "exit"):
            break
        try:
            kb = _repl_command(kb, line, out)
        except Exception as err:  # a bad query must not end the session
            out(f"error: {err}")
    return kb


def _repl_command(kb, line, out):
    cmd, _, rest = line.partition(" ")
    rest = rest.strip()
    if cmd == "ask":
        subject, _, lit = rest.partition(" ")
        out(kbmod.ask(kb, subject, parse_term(lit)))
    elif cmd == "extension":
        kind, _, key = rest.partition(" ")
        got = kbmod.extension_of(kb, kind, parse_term(key) if kind != "class" else key)
        if isinstance(got, dict):
            for ind, exps in got.items():
                out(f"{ind}: " + "; ".join(str(e) for e in exps))
        else:
            out("{" + ", ".join(got) + "}")
    elif cmd in ("classes", "properties", "relations", "explanations"):
        got = kbmod.profile_of_individual(kb, cmd, rest)
        if cmd == "classes":
            out("[" + ", ".join(got) + "]")
        else:
            for item in got:
                out(str(item))
    elif cmd == "preferred":
        scope, _, attr = rest.partition(" ")
        v = kbmod.preferred_value(kb, scope, attr.strip())
        out(print_term(v) if v is not None else "none")
    elif cmd == "preferred-list":
        scope, _, attr = rest.partition(" ")
        vs = kbmod.preferred_value_list(kb, scope, attr.strip())
        out("[" + ", ".join(print_term(v) for v in vs) + "]")
    elif cmd == "abduce":
        subject, _, lit = rest.partition(" ")
        ex = kbmod.abduce(kb, subject, parse_term(lit))
        out(str(ex) if ex else "none")
    elif cmd == "explain":
        subject, _, attr = rest.partition(" ")
        value = kbmod.believed_value(kb, subject, attr.strip())
        if value is None:
            out("none")
        else:
            ex = kbmod.abduce(kb, subject,
                              kbmod.Literal(True, attr.strip(), value))
            out(str(ex) if ex else "none")
    elif cmd == "assert":
        target, _, clause = rest.partition(" ")
        kb = kbmod.update_kb(kb, "assert_clause", f"clause({target}, {clause})")
        out("ok")
    elif cmd == "retract":
        target, _, clause = rest.partition(" ")
        kb = kbmod.update_kb(kb, "retract_clause", f"clause({target}, {clause})")
        out("ok")
    elif cmd == "set":
        parts = rest.split()
        payload = f"value({parts[0]}, {parts[1]}, {parts[2]}" + \
            (f", {parts[3]})" if len(parts) > 3 else ")")
        kb = kbmod.update_kb(kb, "set_value", payload)
        out("ok")
    elif cmd == "add-class":
        kb = kbmod.update_kb(kb, "add_class", parse_term(rest))
        out("ok")
    elif cmd == "remove-class":
        kb = kbmod.update_kb(kb, "remove_class", rest)
        out("ok")
    elif cmd == "add-individual":
        cls, _, spec = rest.partition(" ")
        kb = kbmod.update_kb(kb, "add_individual", f"individual({cls}, {spec})")
        out("ok")
    elif cmd == "remove-individual":
        kb = kbmod.update_kb(kb, "remove_individual", rest)
        out("ok")
    elif cmd == "dump":
        out(dump_kb(kb).rstrip())
    else:
        out(f"unknown command: {cmd}")
    return kb


def cmd_kb(args):
    try:
        kb = load_kb(Path(args.kb).read_text())
    except LOAD_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    _repl_loop(kb, sys.stdin, sys.stdout)
    return 0


def cmd_trace_check(args):
    try:
        trace = _normalize(Path(args.trace).read_text())
        golden = _normalize(Path(args.golden).read_text())
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if trace == golden:
        return 0
    for n, (a, b) in enumerate(zip(trace, golden), start=1):
        if a != b:
            print(f"first difference at line {n}:", file=sys.stderr)
            print(f"  trace:  {a}", file=sys.stderr)
            print(f"  golden: {b}", file=sys.stderr)
            break
    else:
        n = min(len(trace), len(golden)) + 1
        print(f"traces differ in length at line {n}", file=sys.stderr)
    return 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deskbot",
        description="Dialogue-model interpreter, non-monotonic KB and "
                    "scenario replays for a desk-scale service robot.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a scenario (bundled: demo, home, market)")
    run.add_argument("--scenario", required=True,
                     help="scenario file, or a bundled scenario name")
    run.add_argument("--program", help="override the scenario's program file")
    run.add_argument("--kb", help="override the scenario's KB file")
    run.add_argument("--cost-model", help="override the scenario's cost model")
    run.add_argument("--seed", type=int, help="override the scenario's rng seed")
    run.add_argument("--interactive", action="store_true",
                     help="type the user's replies instead of the script")
    run.add_argument("--trace-out", help="write the session trace here")
    run.add_argument("--record-out", help="write the JSON-lines run record here")
    run.add_argument("--golden", help="compare the trace against this file")
    run.set_defaults(fn=cmd_run)

    kb = sub.add_parser("kb", help="interactive KB query session")
    kb.add_argument("--kb", required=True)
    kb.set_defaults(fn=cmd_kb)

    check = sub.add_parser("trace-check",
                           help="compare a trace against a golden file")
    check.add_argument("trace")
    check.add_argument("golden")
    check.set_defaults(fn=cmd_trace_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
