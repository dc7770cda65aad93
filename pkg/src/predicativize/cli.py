"""Command-line driver: ``predicativize --input sig.dk [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from predicativize.agda import emit_agda
from predicativize.errors import InternalError, ParseError, PredicativizeError, TypeCheckError, UnknownConstant
from predicativize.rewriting import DEFAULT_FUEL, typecheck_signature
from predicativize.pipeline import translate_signature
from predicativize.syntax import emit_dk, parse_signature, parse_user_constraints
from predicativize.theories import impredicative_theory, theory_from_spec_text

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="predicativize",
        description="Translate a PTS-encoded signature into universe-polymorphic predicative form.",
    )
    p.add_argument("--input", required=True, type=Path, help="source signature")
    p.add_argument("--theory", type=Path, help="PTS spec file (default: the built-in impredicative theory)")
    p.add_argument("--constraints", type=Path, help="user level constraints, one 'entry: l = l' per line")
    p.add_argument("--out-dk", type=Path, help="write the translated signature here")
    p.add_argument("--out-agda", type=Path, help="write an Agda module here")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="reduction steps per judgment")
    p.add_argument("--check", action=argparse.BooleanOptionalAction, default=True,
                   help="re-typecheck the output")
    p.add_argument("--validate-input", action="store_true",
                   help="typecheck the input against the source theory first")
    p.add_argument("--report", type=Path, help="write a name<TAB>status<TAB>detail report")
    return p


def _module_name(path: Path) -> str:
    stem = "".join(ch for ch in path.stem.title() if ch.isalnum())
    return stem if stem and stem[0].isalpha() else "Output"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.fuel <= 0:
        print("error: --fuel must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        delta = parse_signature(args.input.read_text(encoding="utf-8"))
        theory = theory_from_spec_text(args.theory.read_text(encoding="utf-8")) if args.theory else None
        user = parse_user_constraints(args.constraints.read_text(encoding="utf-8")) if args.constraints else {}
    except (OSError, ParseError, PredicativizeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    if args.validate_input:
        try:
            typecheck_signature(theory or impredicative_theory(), delta, args.fuel)
        except (TypeCheckError, PredicativizeError) as e:
            where = f" in {e.entry}" if isinstance(e, TypeCheckError) and e.entry else ""
            print(f"error: input rejected{where}: {e}", file=sys.stderr)
            return EXIT_INPUT

    try:
        out, report = translate_signature(delta, user, fuel=args.fuel, check=args.check)
    except UnknownConstant as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except InternalError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_FAILED

    try:
        if args.out_dk:
            args.out_dk.write_text(emit_dk(out), encoding="utf-8")
        if args.out_agda:
            args.out_agda.write_text(emit_agda(out, _module_name(args.out_agda)), encoding="utf-8")
        if args.report:
            args.report.write_text(report.text(), encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT

    for f in report.failures():
        print(f"{f.name}: {f.status}: {f.detail}", file=sys.stderr)
        for r in f.residual:
            print(f"  {r}", file=sys.stderr)
    if not (args.out_dk or args.out_agda):
        sys.stdout.write(emit_dk(out))
    return EXIT_OK if report.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
