"""Command-line front end.

Subcommands: ``lemmas`` (grid suite), ``indecomp`` (condition checker plus
optional brute-force oracle), ``normpair`` (minimal-pair search),
``decompose`` (full certificate report), ``verify`` (re-check a report file).

Exit codes: 0 all checks passed, 1 a check failed (with a JSON failure
payload on stdout), 2 bad command line, 3 precision or size-guard refusal.
Output contains no timestamps and is byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional, Sequence

from .decomposition import DecompositionReport, decompose, verify_report
from .group_ring import ArithmeticDomainError, is_neg_inf
from .lemma_suite import run_lemma_suite
from .local_field import FieldSpec, FieldSpecError, PrecisionError, Tower
from .norm_pairs import search_minimal
from .rmg_modules import (
    DEFAULT_SIZE_GUARD,
    NormVector,
    brute_indecomposable,
    construct_X,
    indecomp_conditions,
)


def _int_list(text: str) -> List[int]:
    """Accept "2,3" or "1..3"."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(piece) for piece in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}")


def _field_spec(text: str) -> FieldSpec:
    try:
        return FieldSpec.parse(text)
    except FieldSpecError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _norm_vector(text: str) -> NormVector:
    try:
        return NormVector.parse(text)
    except ArithmeticDomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _emit(args, payload: Dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _fail(args, payload: Dict, lines: Sequence[str]) -> int:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)
    return 1


def _vec_text(vec: Optional[NormVector]) -> str:
    return "none" if vec is None else vec.format()


# -- subcommands ---------------------------------------------------------------


def _cmd_lemmas(args) -> int:
    result = run_lemma_suite(
        ps=args.p, ns=args.n, ms=args.m, seed=args.seed, samples=args.samples
    )
    head = (
        f"lemma suite p={','.join(map(str, result.ps))}"
        f" n={','.join(map(str, result.ns))}"
        f" m={','.join(map(str, result.ms))}"
        f" seed={result.seed} samples={result.samples}"
    )
    lines = [head] + result.format_lines() + [f"suite: {'ok' if result.ok else 'FAIL'}"]
    _emit(args, result.serialize(), lines)
    return 0 if result.ok else 1


def _cmd_indecomp(args) -> int:
    try:
        args.a.validate(args.n, args.m)
        conditions = indecomp_conditions(args.p, args.n, args.a, args.d, args.m)
        X = (
            construct_X(args.p, args.n, args.a, args.d, args.m)
            if args.oracle
            else None
        )
    except ArithmeticDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    payload = {
        "p": args.p,
        "n": args.n,
        "m": args.m,
        "a": ["-inf" if is_neg_inf(x) else x for x in args.a],
        "d": args.d,
        "conditions": dict(conditions.conditions),
        "conditions_ok": conditions.ok,
        "oracle": None,
        "agree": True,
    }
    cond_text = " ".join(
        f"{name}={'true' if value else 'false'}"
        for name, value in conditions.conditions.items()
    )
    lines = [
        f"conditions: {cond_text} -> {'ok' if conditions.ok else 'not satisfied'}"
    ]
    if X is not None:
        result = brute_indecomposable(X, size_guard=args.guard)
        if result.status == "too_large":
            print(
                f"guard refusal: search space over |End| = {result.end_size}"
                f" exceeds {result.guard}",
                file=sys.stderr,
            )
            return 3
        payload["oracle"] = {
            "status": result.status,
            "end_size": result.end_size,
            "guard": result.guard,
        }
        lines.append(
            f"oracle: {result.status} (|End| = {result.end_size}, guard {result.guard})"
        )
        agree = not (conditions.ok and result.status == "decomposable")
        payload["agree"] = agree
        lines.append(f"agreement: {'ok' if agree else 'VIOLATED'}")
    if not (conditions.ok and payload["agree"]):
        return _fail(args, payload, lines)
    _emit(args, payload, lines)
    return 0


def _cmd_normpair(args) -> int:
    tower = Tower(args.spec, args.m)
    found = search_minimal(tower, args.m, budget=args.budget)
    payload = {
        "spec": args.spec.label(),
        "m": args.m,
        "complete": found.complete,
        "cells": found.cells,
        "pair": None,
        "residues": list(found.residues),
        "witness": None,
    }
    lines = [
        f"spec: {args.spec.label()}  m: {args.m}",
        f"complete: {'true' if found.complete else 'false'}  cells: {found.cells}",
    ]
    if found.pair is not None:
        payload["pair"] = {"a": found.pair.a.format(), "d": found.pair.d}
        payload["witness"] = found.witness.serialize()
        lines.append(f"pair: {found.pair.format()}")
        lines.append(f"residues: {','.join(map(str, found.residues))}")
    else:
        lines.append("pair: none found within budget")
    if not found.complete:
        return _fail(args, payload, lines)
    _emit(args, payload, lines)
    return 0


def _cmd_decompose(args) -> int:
    tower = Tower(args.spec, args.m, args.digits)
    report = decompose(tower, args.m)
    lines = [
        f"gate: {report.gate}",
        f"p={report.p} n={report.n} m={report.m} nu={report.nu}",
        f"a: {_vec_text(report.a)}  d: {report.d if report.d is not None else 'none'}",
        f"ranks: {','.join(map(str, report.ranks))}",
        "flags: "
        + " ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in report.flags),
    ]
    _emit(args, report.serialize(), lines)
    return 0 if report.ok else 1


def _cmd_verify(args) -> int:
    try:
        with open(args.report, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read report: {exc}", file=sys.stderr)
        return 2
    tower = Tower(args.spec, int(payload["m"]))
    report = DecompositionReport.deserialize(tower, payload)
    flags = verify_report(report, report.tower.jmodule(report.m))
    ok = all(flags.values())
    out = {
        "gate": report.gate,
        "m": report.m,
        "flags": dict(flags),
        "ok": ok,
    }
    lines = [f"gate: {report.gate}  m: {report.m}"]
    lines += [f"{name}: {'pass' if value else 'FAIL'}" for name, value in flags.items()]
    lines.append(f"verdict: {'ok' if ok else 'FAIL'}")
    if not ok:
        return _fail(args, out, lines)
    _emit(args, out, lines)
    return 0


# -- wiring ---------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kummerdec",
        description="Galois-module decomposition of Kummer groups of local fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lem = sub.add_parser("lemmas", help="run the ring/module fact suite on a grid")
    lem.add_argument("--p", type=_int_list, default=[2, 3], metavar="LIST")
    lem.add_argument("--n", type=_int_list, default=[1, 2], metavar="LIST")
    lem.add_argument("--m", type=_int_list, default=[1, 2, 3], metavar="LIST")
    lem.add_argument("--seed", type=int, default=0)
    lem.add_argument("--samples", type=int, default=10_000)
    lem.set_defaults(func=_cmd_lemmas)

    ind = sub.add_parser("indecomp", help="check indecomposability conditions")
    ind.add_argument("--p", type=int, required=True)
    ind.add_argument("--n", type=int, required=True)
    ind.add_argument("--m", type=_positive_int, required=True)
    ind.add_argument(
        "--a",
        type=_norm_vector,
        required=True,
        metavar="VECTOR",
        help='comma list of levels; write --a=-inf,1 for leading "-inf"',
    )
    ind.add_argument("--d", type=int, required=True)
    ind.add_argument("--oracle", action="store_true")
    ind.add_argument("--guard", type=int, default=DEFAULT_SIZE_GUARD)
    ind.set_defaults(func=_cmd_indecomp)

    npair = sub.add_parser("normpair", help="search the minimal norm pair")
    npair.add_argument("--spec", type=_field_spec, required=True)
    npair.add_argument("--m", type=_positive_int, required=True)
    npair.add_argument("--budget", type=int, default=None)
    npair.set_defaults(func=_cmd_normpair)

    dec = sub.add_parser("decompose", help="decompose J_m and emit the report")
    dec.add_argument("--spec", type=_field_spec, required=True)
    dec.add_argument("--m", type=_positive_int, required=True)
    dec.add_argument("--digits", type=int, default=0, help="extra working digits")
    dec.set_defaults(func=_cmd_decompose)

    ver = sub.add_parser("verify", help="re-verify a serialized report")
    ver.add_argument("--report", required=True, metavar="FILE")
    ver.add_argument("--spec", type=_field_spec, required=True)
    ver.set_defaults(func=_cmd_verify)

    for name, p in sub.choices.items():
        p.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except PrecisionError as exc:
        print(f"precision refusal: {exc}", file=sys.stderr)
        return 3
    except ArithmeticDomainError as exc:
        print(json.dumps({"error": str(exc)}, sort_keys=True))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
