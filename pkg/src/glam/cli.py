"""The ``glam`` command-line tool and REPL.

Exit codes: 0 success, 1 domain error (type error, stuck term,
mismatch, missing file), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bde as bdemod
from . import denot, machine, typecheck
from .errors import GlamError
from .frontend import Program, parse_program, parse_term, pretty, pretty_type
from .prelude import load_prelude
from .syntax import App, Box, NAT, STREAM_G, type_alpha_eq

DEFAULT_N = 8
DEFAULT_INDEX = 3


def _default_fuel() -> int:
    env = os.environ.get("GLAM_FUEL")
    return int(env) if env else machine.DEFAULT_FUEL


def _load(path: str) -> Program:
    text = Path(path).read_text()
    return parse_program(text, base=load_prelude())


def _lookup(program: Program, name: str):
    d = program.lookup(name)
    if d is None:
        raise GlamError(f"no definition named {name!r}")
    return d


def _is_stream_type(ty) -> bool:
    if type_alpha_eq(ty, STREAM_G):
        return True
    return isinstance(ty, Box) and type_alpha_eq(ty.body, STREAM_G)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args) -> int:
    program = _load(args.file)
    typecheck.check_program(program)
    for d in program:
        print(f"{d.name} : {pretty_type(d.ty)}")
    return 0


def cmd_run(args) -> int:
    program = _load(args.file)
    d = _lookup(program, args.name)
    out = machine.eval_term(d.resolved(), fuel=args.fuel or _default_fuel())
    if isinstance(out, machine.Value):
        print(pretty(out.term))
        return 0
    kind = "fuel exhausted" if isinstance(out, machine.FuelExhausted) else "stuck"
    print(f"error: {kind} after {out.steps} steps", file=sys.stderr)
    return 1


def cmd_take(args) -> int:
    program = _load(args.file)
    d = _lookup(program, args.name)
    n = args.n if args.n is not None else (args.count or DEFAULT_N)
    xs = machine.take_stream(d.resolved(), n, fuel=args.fuel or _default_fuel())
    print(" ".join(str(x) for x in xs))
    return 0


def cmd_denote(args) -> int:
    program = _load(args.file)
    d = _lookup(program, args.name)
    i = args.index if args.index is not None else (args.stage or DEFAULT_INDEX)
    if type_alpha_eq(d.ty, NAT):
        print(denot.den_nat(d.resolved(), i))
    elif _is_stream_type(d.ty):
        xs = denot.den_take(d.resolved(), i)
        print(" ".join(str(x) for x in xs))
    else:
        raise GlamError(
            f"denote handles Nat and stream definitions, not {pretty_type(d.ty)}"
        )
    return 0


def cmd_bde_compile(args) -> int:
    defs = bdemod.parse_bde(Path(args.file).read_text())
    out = bdemod.compile_bde(defs, args.name)
    print(f"guarded : {pretty_type(out.guarded_type)}")
    print(f"  {pretty(out.guarded)}")
    print(f"lifted : {pretty_type(out.lifted_type)}")
    print(f"  {pretty(out.lifted)}")
    return 0


# Named argument streams available to bde-run: a glam term and its
# host-level twin.
def _bde_arg(name: str):
    prelude = load_prelude()
    if name == "zeros":
        return prelude.lookup("zeros").resolved(), bdemod.host_zeros()
    if name == "toggle":
        return prelude.lookup("toggle").resolved(), bdemod.host_toggle()
    if name == "nats":
        term = parse_term("iterate' (\\x. succ x) 0", env=prelude.env(), strict=True)
        return term, bdemod.host_nats()
    raise GlamError(f"unknown argument stream {name!r} (use zeros, toggle, or nats)")


def cmd_bde_run(args) -> int:
    defs = bdemod.parse_bde(Path(args.file).read_text())
    out = bdemod.compile_bde(defs, args.name)
    pairs = [_bde_arg(a) for a in args.args]
    n = args.n or DEFAULT_N
    applied = out.guarded
    for term, _ in pairs:
        applied = App(applied, term)
    got = machine.take_stream(applied, n, fuel=args.fuel or _default_fuel())
    want = bdemod.oracle_eval(defs, args.name, [h for _, h in pairs], n)
    print("i compiled oracle")
    for i, (g, w) in enumerate(zip(got, want)):
        print(f"{i} {g} {w}")
    if got == want:
        print("MATCH")
        return 0
    print("MISMATCH")
    return 1


def cmd_repl(args) -> int:
    run_repl(sys.stdin, sys.stdout)
    return 0


# ---------------------------------------------------------------------------
# REPL


def run_repl(infile, outfile, fuel: int | None = None) -> None:
    fuel = fuel or _default_fuel()
    program = load_prelude()
    env = program.env()

    def w(line):
        print(line, file=outfile)

    w("glam repl; :t e, :step e, :take n e, :den i e, :load f, :q")
    while True:
        print("glam> ", end="", file=outfile, flush=True)
        line = infile.readline()
        if not line:
            return
        line = line.strip()
        if not line:
            continue
        try:
            if line == ":q":
                return
            if line.startswith(":load "):
                path = line[len(":load "):].strip()
                program = parse_program(Path(path).read_text(), base=load_prelude())
                typecheck.check_program(program)
                env = program.env()
                w(f"loaded {len(program)} definitions")
            elif line.startswith(":t "):
                t = parse_term(line[3:], env=env, strict=True)
                w(pretty_type(typecheck.infer({}, t)))
            elif line.startswith(":step "):
                t = machine.erase(parse_term(line[6:], env=env, strict=True))
                nxt = machine.step(t)
                w(pretty(nxt) if nxt is not None else "(no step: value or stuck)")
            elif line.startswith(":take "):
                rest = line[6:].split(None, 1)
                t = parse_term(rest[1], env=env, strict=True)
                w(" ".join(str(x) for x in machine.take_stream(t, int(rest[0]), fuel)))
            elif line.startswith(":den "):
                rest = line[5:].split(None, 1)
                i = int(rest[0])
                t = parse_term(rest[1], env=env, strict=True)
                ty = typecheck.infer({}, t) if _synthesizes(env, rest[1]) else None
                if ty is not None and type_alpha_eq(ty, NAT):
                    w(str(denot.den_nat(t, i)))
                else:
                    w(" ".join(str(x) for x in denot.den_take(t, i)))
            elif line.startswith(":"):
                w(f"unknown command {line.split()[0]!r}")
            else:
                t = parse_term(line, env=env, strict=True)
                out = machine.eval_term(t, fuel=fuel)
                if isinstance(out, machine.Value):
                    w(pretty(out.term))
                else:
                    w(f"error: no value after {out.steps} steps")
        except GlamError as e:
            w(e.render())


def _synthesizes(env, src: str) -> bool:
    try:
        typecheck.infer({}, parse_term(src, env=env, strict=True))
        return True
    except GlamError:
        return False


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glam", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="type-check a program file")
    c.add_argument("file")
    c.set_defaults(fn=cmd_check)

    c = sub.add_parser("run", help="evaluate a definition to a value")
    c.add_argument("file")
    c.add_argument("name")
    c.add_argument("--fuel", type=int, default=None)
    c.set_defaults(fn=cmd_run)

    c = sub.add_parser("take", help="print the first n elements of a stream")
    c.add_argument("file")
    c.add_argument("name")
    c.add_argument("count", nargs="?", type=int, default=None)
    c.add_argument("--n", type=int, default=None)
    c.add_argument("--fuel", type=int, default=None)
    c.set_defaults(fn=cmd_take)

    c = sub.add_parser("denote", help="print a denotation at a stage index")
    c.add_argument("file")
    c.add_argument("name")
    c.add_argument("stage", nargs="?", type=int, default=None)
    c.add_argument("--index", type=int, default=None)
    c.set_defaults(fn=cmd_denote)

    c = sub.add_parser("bde-compile", help="compile a behavioural equation")
    c.add_argument("file")
    c.add_argument("name")
    c.set_defaults(fn=cmd_bde_compile)

    c = sub.add_parser("bde-run", help="compare a compiled equation with the oracle")
    c.add_argument("file")
    c.add_argument("name")
    c.add_argument("args", nargs="*", help="argument streams: zeros, toggle, nats")
    c.add_argument("--n", type=int, default=None)
    c.add_argument("--fuel", type=int, default=None)
    c.set_defaults(fn=cmd_bde_run)

    c = sub.add_parser("repl", help="interactive session")
    c.set_defaults(fn=cmd_repl)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except GlamError as e:
        print(e.render(), file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
