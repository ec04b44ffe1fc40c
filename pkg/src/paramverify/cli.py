"""Command line entry point.

Exit codes: 0 when every selected task completes (whatever the verdict),
1 on an engine error, 2 on a parse error (including empty task lists).
"""

import argparse
import os
import re
import sys

from .errors import EngineError, ParseError
from .runner import RunFlags, run_task_file


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paramverify",
        description="Constraint generation, invariant checking and strengthening "
        "for parametric transition systems and linear hybrid automata.",
    )
    parser.add_argument("taskfile", help="YAML task file")
    parser.add_argument("--task", action="append", help="run only the named task (repeatable)")
    parser.add_argument("--out", help="also write the report to this file")
    parser.add_argument("--assume", default="", help="extra parameter assumptions, ';'-separated atoms")
    parser.add_argument("--max-cases", type=int, default=10000, help="sign case-split budget")
    parser.add_argument("--seed-closure", help="file with extra ground instantiation terms, one per line")
    parser.add_argument("--dump-smtlib", metavar="DIR", help="write reduced problems as SMT-LIB2 scripts")
    parser.add_argument("--dump-reduction", action="store_true", help="append reduced problems to the report")
    parser.add_argument("--parallel", action="store_true", help="run independent tasks concurrently")
    return parser


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = RunFlags(
        tasks=args.task,
        out=args.out,
        assume=args.assume,
        max_cases=args.max_cases,
        seed_closure=args.seed_closure,
        dump_smtlib=args.dump_smtlib,
        dump_reduction=args.dump_reduction,
        parallel=args.parallel,
    )
    try:
        with open(args.taskfile, "r", encoding="utf-8") as fh:
            text = fh.read()
        report, code, outcomes = run_task_file(text, flags)
    except ParseError as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return 2
    except EngineError as exc:
        print("engine error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("cannot read %s: %s" % (args.taskfile, exc), file=sys.stderr)
        return 2
    sys.stdout.write(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report)
    if args.dump_smtlib:
        os.makedirs(args.dump_smtlib, exist_ok=True)
        for outcome in outcomes:
            for label, script in outcome.smtlib:
                path = os.path.join(
                    args.dump_smtlib, "%s__%s.smt2" % (_sanitize(outcome.name), _sanitize(label))
                )
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(script)
    return code


if __name__ == "__main__":
    sys.exit(main())
