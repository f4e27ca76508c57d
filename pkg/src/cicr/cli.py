"""Command-line driver: check, param, embed and eval over .cicr files."""

from __future__ import annotations

import argparse
import os
import sys

from .driver import eval_in_env, run_file
from .embed import check_embedding, embed
from .errors import CicrError
from .param import check_abstraction
from .printer import show
from .reduce import DEFAULT_FUEL


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="cicr")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL,
                       help="reduction step budget per conversion query")

    p = sub.add_parser("check", help="typecheck files and run their commands")
    p.add_argument("files", nargs="+")
    p.add_argument("--continue-on-error", action="store_true")
    common(p)

    p = sub.add_parser("param", help="translate one definition and print it")
    p.add_argument("file")
    p.add_argument("--def", dest="name", required=True)
    common(p)

    p = sub.add_parser("embed", help="print the forgetful embedding of a "
                                     "definition and check it in CIC mode")
    p.add_argument("file")
    p.add_argument("--def", dest="name", required=True)
    p.add_argument("--cic-prop-cumul", action="store_true")
    common(p)

    p = sub.add_parser("eval", help="normalize a term in a file's environment")
    p.add_argument("file")
    p.add_argument("--term", required=True)
    common(p)
    return top


def _require_files(paths) -> bool:
    ok = True
    for path in paths:
        if not os.path.isfile(path):
            print(f"cicr: no such file: {path}", file=sys.stderr)
            ok = False
    return ok


def _run(path: str, args, prop_cumul: bool = False):
    result = run_file(path, fuel=args.fuel,
                      continue_on_error=getattr(args, "continue_on_error",
                                                False),
                      prop_cumul=prop_cumul)
    for line in result.report:
        print(line)
    for diag in result.diagnostics:
        print(diag, file=sys.stderr)
    return result


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "check":
        if not _require_files(args.files):
            return 2
        status = 0
        for path in args.files:
            result = _run(path, args)
            status = max(status, result.status)
        return status

    if not _require_files([args.file]):
        return 2

    if args.command == "param":
        result = _run(args.file, args)
        if result.status:
            return 1
        try:
            res = check_abstraction(args.name, result.env)
        except CicrError as e:
            print(f"{args.file}:0:0: {e.code}: {e}", file=sys.stderr)
            return 1
        env = result.env
        print(f"[{args.name}] = {show(res.relation_witness, env)}")
        print(f"  : {show(res.expected_type, env)}")
        print(f"verified: {res.verified}")
        return 0 if res.verified else 1

    if args.command == "embed":
        result = _run(args.file, args, prop_cumul=args.cic_prop_cumul)
        if result.status:
            return 1
        env = result.env
        try:
            ok = check_embedding(args.name, env,
                                 prop_cumul=args.cic_prop_cumul)
        except CicrError as e:
            print(f"{args.file}:0:0: {e.code}: {e}", file=sys.stderr)
            return 1
        if args.name in env.definitions:
            ty, body = env.definitions[args.name]
            print(f"|{args.name}| : {show(embed(ty), env)}")
            print(f"|{args.name}| := {show(embed(body), env)}")
        elif args.name in env.inductives:
            decl = env.inductive(args.name)
            print(f"|{args.name}| : {show(embed(decl.arity), env)}")
            for c, cty in decl.constructors:
                print(f"|{c}| : {show(embed(cty), env)}")
        elif args.name in env.axioms:
            print(f"|{args.name}| : {show(embed(env.axioms[args.name]), env)}")
        else:
            print(f"cicr: unknown declaration {args.name}", file=sys.stderr)
            return 1
        print(f"embedding check: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    if args.command == "eval":
        result = _run(args.file, args)
        if result.status:
            return 1
        try:
            nf = eval_in_env(args.term, result.env)
        except CicrError as e:
            print(f"{args.file}:0:0: {e.code}: {e}", file=sys.stderr)
            return 1
        print(show(nf, result.env))
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
