import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import TypeAdapter, ValidationError

from .config.logging_config import setup_logging
from .config.settings import get_settings
from .core.errors import InconsistencyError, InputError, ParameterError, PerkhError
from .core.linalg import parse_field
from .diagram import canonical_payload, parse_diagram
from .homology import homology, khovanov_complex
from .models import PolyTerm, RunReport
from .periodicity import CriterionInstance, LaurentPoly2, khp_from_poincare
from .permutohedra import OrderedPartition
from .runner import Runner, digest, format_pretty

logger = logging.getLogger(__name__)

TERMS = TypeAdapter(List[PolyTerm])
BLOCKS = TypeAdapter(List[List[PolyTerm]])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perkh", description="Khovanov homology of periodic links")
    parser.add_argument("--pretty", action="store_true", help="print a table instead of JSON")
    parser.add_argument("--threads", type=int, default=None, help="worker threads, 0 = available parallelism")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("kh", "Khovanov homology"), ("akh", "annular Khovanov homology")):
        p = sub.add_parser(name, help=text)
        p.add_argument("file")
        p.add_argument("--field", default="2", help="prime characteristic, or 0/Q for the rationals")

    p = sub.add_parser("ekh", help="eigenspace splitting of Kh over F_r")
    p.add_argument("file")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--r", type=int, required=True)

    p = sub.add_parser("borel", help="Borel cohomology over F_p")
    p.add_argument("file")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--annular", action="store_true")

    p = sub.add_parser("verify", help="run a verification sweep")
    p.add_argument("file", nargs="?")
    p.add_argument("which", choices=["smith", "counting", "fixed-gens", "permutohedra"])
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--max-index", type=int, default=5)
    p.add_argument("--max-r", type=int, default=5)

    p = sub.add_parser("periodicity", help="search for splittings of a Khovanov polynomial")
    p.add_argument("file", help="JSON list of {t, q, coef} terms, or a diagram file")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--blocks-file", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--field", default="2", help="coefficients when the input is a diagram")

    p = sub.add_parser("permutohedron", help="faces of Pi_S")
    p.add_argument("--S", default="1,2,3", help="comma separated increasing sequence")
    p.add_argument("--partition", default=None, help="blocks separated by '|', e.g. 1,2|3")
    p.add_argument("--equal", action="append", default=[], help="coordinates forced equal, e.g. 1,3")

    p = sub.add_parser("lift", help="p-fold lift of a diagram")
    p.add_argument("file")
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("quotient", help="quotient of a periodic diagram")
    p.add_argument("file")
    return parser


def read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}")


def parse_ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"Expected comma separated integers, got {text!r}")


def parse_partition(text: str) -> OrderedPartition:
    return OrderedPartition.of(*(parse_ints(block) for block in text.split("|")))


def load_polynomial(text: str, field_name: str) -> LaurentPoly2:
    """A term list, or the Kh polynomial of a diagram file"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON: {e}")
    if isinstance(data, dict):
        F = parse_field(field_name)
        return khp_from_poincare(homology(khovanov_complex(parse_diagram(text), F)))
    try:
        return LaurentPoly2.from_terms(TERMS.validate_python(data))
    except ValidationError as e:
        raise InputError(f"Malformed polynomial file: {e}")


def load_blocks(path: Optional[str]) -> Optional[List[LaurentPoly2]]:
    if path is None:
        return None
    try:
        return [LaurentPoly2.from_terms(block) for block in BLOCKS.validate_json(read_text(path))]
    except ValidationError as e:
        raise InputError(f"Malformed blocks file: {e}")


def dispatch(args: argparse.Namespace, argv: Sequence[str], runner: Runner):
    """Parse the inputs of one command and hand it to the runner"""
    params: Dict[str, Any] = {k: v for k, v in vars(args).items() if k not in ("file", "pretty", "threads")}
    command = args.command

    if command == "permutohedron":
        S = parse_ints(args.S)
        partition = parse_partition(args.partition) if args.partition else None
        equalities = [parse_ints(group) for group in args.equal]
        return runner.run(argv, "", params, lambda: runner.permutohedron(S, partition, equalities))

    if command == "verify" and args.which == "permutohedra":
        return runner.run(argv, "", params, lambda: runner.verify("permutohedra", None, None, args.max_index, args.max_r))

    if args.file is None:
        raise ParameterError(f"{command} needs an input file")
    text = read_text(args.file)

    if command == "periodicity":
        khp = load_polynomial(text, args.field)
        blocks = load_blocks(args.blocks_file)
        inst = CriterionInstance(khp, args.s, args.p, args.n, args.c, args.width, tuple(blocks) if blocks else None)
        payload = json.dumps([term.model_dump() for term in khp.to_terms()], sort_keys=True)
        return runner.run(argv, payload, params, lambda: runner.periodicity(inst, args.limit))

    d = parse_diagram(text)
    payload = canonical_payload(d)
    if command in ("kh", "akh"):
        F = parse_field(args.field)
        task = (lambda: runner.kh(d, F)) if command == "kh" else (lambda: runner.akh(d, F))
    elif command == "ekh":
        task = lambda: runner.ekh(d, args.p, args.n, args.r)  # noqa: E731
    elif command == "borel":
        task = lambda: runner.borel(d, args.p, args.max_degree, args.annular)  # noqa: E731
    elif command == "verify":
        task = lambda: runner.verify(args.which, d, args.p, args.max_index, args.max_r)  # noqa: E731
    elif command == "lift":
        task = lambda: runner.lift(d, args.p)  # noqa: E731
    else:
        task = lambda: runner.quotient(d)  # noqa: E731
    return runner.run(argv, payload, params, task)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    settings = get_settings()
    if args.threads is not None:
        settings.threads = args.threads
    setup_logging(settings)

    runner = Runner()
    try:
        report, code = dispatch(args, argv, runner)
    except PerkhError as e:
        # input problems found before the computation started
        logger.error({"message": "Invalid input", "kind": type(e).__name__, "error": str(e)})
        report = RunReport(
            command=argv,
            digest=digest("", {"argv": argv}),
            result={"error": str(e), "kind": type(e).__name__},
            verdict="fail" if isinstance(e, InconsistencyError) else "n/a",
            wall_time=0.0,
        )
        code = e.exit_code

    if args.pretty:
        print(format_pretty(report))
    else:
        print(report.model_dump_json(indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
