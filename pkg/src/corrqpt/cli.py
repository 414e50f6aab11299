"""Command-line scenario runner: ``corrqpt run | list | validate``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ScenarioError, SingularMatrixError, SpanningError
from .scenarios import BUILTINS, build, builtin_scenario, dump_report, load_scenario, run_scenario

EXIT_OK = 0
EXIT_DEFINITION = 2
EXIT_NUMERICAL = 3


def _load(target: str):
    if not os.path.exists(target) and target in BUILTINS:
        return builtin_scenario(target)
    try:
        return load_scenario(target)
    except OSError as exc:
        raise ScenarioError(f"{target}: cannot read scenario ({exc.strerror})") from None


def cmd_run(args) -> int:
    s = _load(args.scenario)
    build(s)
    report, text = run_scenario(s, seed=args.seed, tol=args.tol)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / f"{s.name}.report.json"
    json_path.write_text(dump_report(report), encoding="utf-8")
    if not args.json_only:
        (out / f"{s.name}.report.txt").write_text(text, encoding="utf-8")
        sys.stdout.write(text)
    print(f"wrote {json_path}", file=sys.stderr)
    return EXIT_OK


def cmd_list(args) -> int:
    if args.json:
        print(json.dumps([{"name": k, "description": v} for k, v in BUILTINS.items()], indent=2))
    else:
        width = max(map(len, BUILTINS))
        for k, v in BUILTINS.items():
            print(f"{k:<{width}}  {v}")
    return EXIT_OK


def cmd_validate(args) -> int:
    s = _load(args.scenario)
    build(s)
    print(f"{args.scenario}: ok")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corrqpt", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file (or a builtin name)")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--tol", type=float, default=None, help="override the CP tolerance")
    run.add_argument("--out-dir", default=".", help="directory for report files")
    run.add_argument("--json-only", action="store_true", help="skip the text report")
    run.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list builtin scenarios")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)

    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("scenario")
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEFINITION
    except (SingularMatrixError, SpanningError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
