"""Command-line driver: ``qmlc check|compile|run|render``.

Exit status is 0 on success, 1 when the program produced diagnostics and 2
on usage errors (bad flags, unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config
from .compiler import compile_entry
from .errors import QmlError
from .fqc import circuit_to_json
from .parser import parse_program, parse_state_literal, render_type
from .render import render_ascii, render_dot
from .simulator import run
from .syntax import type_size
from .typecheck import check_program


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmlc", description="Type-check, compile and simulate QML programs.")
    p.add_argument("--json", action="store_true", help="structured diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="type-check every definition")
    c.add_argument("file")

    c = sub.add_parser("compile", help="emit circuit JSON and a manifest")
    c.add_argument("file")
    c.add_argument("--entry", required=True)
    c.add_argument("-o", "--output", help="circuit JSON path; the manifest goes next to it")

    c = sub.add_parser("run", help="simulate an entry point on an input state")
    c.add_argument("file")
    c.add_argument("--entry", required=True)
    c.add_argument("--input", help="state literal, e.g. \"{qfalse | qtrue}\"")
    c.add_argument("--density", action="store_true", help="force channel semantics")
    c.add_argument("--plot", help="write an outcome bar chart (PNG) to this path")

    c = sub.add_parser("render", help="draw the compiled circuit")
    c.add_argument("file")
    c.add_argument("--entry", required=True)
    c.add_argument("--format", choices=["ascii", "dot", "png"], default="ascii")
    c.add_argument("-o", "--output", help="output path (required for png)")

    for sp in sub.choices.values():
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="structured diagnostics on stderr")
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from None


def _wire_names(params) -> list[str]:
    out = []
    for name, ty in params:
        k = type_size(ty)
        out += [name] if k == 1 else [f"{name}.{i}" for i in range(k)]
    return out


def _cmd_check(args) -> int:
    prog = parse_program(_read(args.file), args.file)
    for name, tt in check_program(prog):
        d = prog.lookup(name)
        params = ", ".join(f"{n}:{render_type(t)}" for n, t in d.params)
        mark = "strict" if tt.strict else "non-strict"
        print(f"{name} ({params}) : {render_type(d.result)}  [{mark}]")
    return 0


def _cmd_compile(args) -> int:
    compiled = compile_entry(parse_program(_read(args.file), args.file), args.entry)
    circuit = circuit_to_json(compiled.morphism.circuit)
    manifest = json.dumps(compiled.manifest(), indent=2) + "\n"
    if args.output:
        out = Path(args.output)
        out.write_text(circuit, encoding="utf-8")
        side = out.with_name(out.stem + ".manifest.json")
        side.write_text(manifest, encoding="utf-8")
        print(f"wrote {out} and {side}")
    else:
        sys.stdout.write(manifest)
        sys.stdout.write(circuit)
    return 0


def _cmd_run(args) -> int:
    compiled = compile_entry(parse_program(_read(args.file), args.file), args.entry)
    in_type = compiled.input_type
    if args.input is None:
        if type_size(in_type) > 0:
            raise UsageError(f"'{args.entry}' takes input of type {render_type(in_type)}; pass --input")
        psi = np.ones(1, dtype=complex)
    else:
        psi = parse_state_literal(args.input, in_type)
    result = run(compiled.morphism, psi, compiled.result, density=args.density)
    print(result.to_json())
    if args.plot:
        from .plotting import outcome_figure

        outcome_figure(result.outcomes, args.plot, title=f"{args.entry} {args.input or '()'}")
    return 0


def _cmd_render(args) -> int:
    compiled = compile_entry(parse_program(_read(args.file), args.file), args.entry)
    names = _wire_names(compiled.params)
    m = compiled.morphism
    if args.format == "png":
        if not args.output:
            raise UsageError("--format png needs -o PATH")
        from .plotting import circuit_figure

        circuit_figure(m, args.output, title=args.entry, input_names=names)
        print(f"wrote {args.output}")
        return 0
    text = render_ascii(m, names) if args.format == "ascii" else render_dot(m, args.entry, names)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"check": _cmd_check, "compile": _cmd_compile, "run": _cmd_run, "render": _cmd_render}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    as_json = "--json" in argv
    try:
        config.tolerance_from_env()
    except ValueError as err:
        print(f"qmlc: error: QML_TOLERANCE: {err}", file=sys.stderr)
        return 2
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as err:
        if as_json:
            print(json.dumps({"code": "UsageError", "message": str(err)}), file=sys.stderr)
        else:
            print(f"qmlc: error: {err}", file=sys.stderr)
        return 2
    except QmlError as err:
        if as_json:
            print(json.dumps(err.diagnostic()), file=sys.stderr)
        else:
            print(str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
