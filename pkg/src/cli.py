"""
Command-line front end

    python -m src.cli validate model.ita [--require-ita-minus] [--complete-resets]
    python -m src.cli simulate model.ita run.txt
    python -m src.cli classgraph model.ita [--dot] [--formula F] [--dump-expressions]
    python -m src.cli reach model.ita --target q2 [--method both] [--depth N]
    python -m src.cli to-ita-minus model.ita [-o out.ita] [--max-exprs N]
    python -m src.cli untimed model.ita [--dot] [--words N]
    python -m src.cli check model.ita --formula 'EF (q1 && x2 > x1)'
    python -m src.cli --jobs 4 reach model.ita --target q2
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import commands
from .config import configure_logging


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ita", description="Interrupt timed automata toolkit")
    parser.add_argument("--json", action="store_true", help="print the full JSON payload")
    parser.add_argument("--log-level", default=None, help="logging level (default from LOG_LEVEL)")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker threads for exploration (default from ITA_JOBS, 1 is sequential)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a model")
    p.add_argument("model")
    p.add_argument("--require-ita-minus", action="store_true")
    p.add_argument("--complete-resets", action="store_true", help="write out omitted mandatory resets")

    p = sub.add_parser("simulate", help="replay a run file")
    p.add_argument("model")
    p.add_argument("run")

    p = sub.add_parser("classgraph", help="emit the class graph")
    p.add_argument("model")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--formula", default=None, help="extend the graph with the formula's comparisons")
    p.add_argument("--dump-expressions", action="store_true",
                   help="print the expression sets with their provenance")
    p.add_argument("--max-classes", type=int, default=None)
    p.add_argument("--max-exprs", type=int, default=None)

    p = sub.add_parser("reach", help="decide reachability of a state or label")
    p.add_argument("model")
    p.add_argument("--target", required=True)
    p.add_argument("--method", choices=["classgraph", "bounded", "both"], default="both")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--max-classes", type=int, default=None)

    p = sub.add_parser("to-ita-minus", help="remove updates of frozen clocks")
    p.add_argument("model")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--max-exprs", type=int, default=None)

    p = sub.add_parser("untimed", help="finite automaton of the untimed language")
    p.add_argument("model")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--no-epsilon", action="store_true")
    p.add_argument("--words", type=int, default=0, help="list accepted words up to this length")
    p.add_argument("--max-classes", type=int, default=None)

    p = sub.add_parser("check", help="model-check a formula")
    p.add_argument("model")
    p.add_argument("--formula", required=True)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--max-classes", type=int, default=None)
    p.add_argument("--max-exprs", type=int, default=None)
    return parser


def dispatch(args: argparse.Namespace) -> commands.CommandResult:
    try:
        model = _read(args.model)
        run = _read(args.run) if args.command == "simulate" else None
    except OSError as e:
        return commands.CommandResult(
            payload={"schema": commands.SCHEMA, "command": args.command,
                     "error": {"kind": type(e).__name__, "message": str(e)}},
            text=f"error: {e}", diagnostics=[str(e)], exit_code=commands.EXIT_INPUT,
        )

    if args.command == "validate":
        return commands.cmd_validate(model, require_ita_minus=args.require_ita_minus,
                                     complete=args.complete_resets)
    if args.command == "simulate":
        return commands.cmd_simulate(model, run)
    if args.command == "classgraph":
        return commands.cmd_classgraph(model, fmt="dot" if args.dot else "json", formula=args.formula,
                                       max_classes=args.max_classes, max_exprs=args.max_exprs,
                                       dump_expressions=args.dump_expressions, jobs=args.jobs)
    if args.command == "reach":
        return commands.cmd_reach(model, args.target, method=args.method, depth=args.depth,
                                  max_classes=args.max_classes, jobs=args.jobs)
    if args.command == "to-ita-minus":
        result = commands.cmd_to_ita_minus(model, max_states=args.max_states, max_exprs=args.max_exprs)
        if args.output and not result.is_error:
            Path(args.output).write_text(result.payload["ita"], encoding="utf-8")
        return result
    if args.command == "untimed":
        return commands.cmd_untimed(model, fmt="dot" if args.dot else "json",
                                    eliminate_epsilon=args.no_epsilon, words=args.words,
                                    max_classes=args.max_classes, jobs=args.jobs)
    return commands.cmd_check(model, args.formula, depth=args.depth,
                              max_classes=args.max_classes, max_exprs=args.max_exprs,
                              jobs=args.jobs)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    result = dispatch(args)
    print(result.to_json() if args.json else result.text)
    for line in result.diagnostics:
        if args.json or line not in result.text:
            print(line, file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
