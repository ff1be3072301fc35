"""`python -m src.cli <subcommand>`: the command-line front end.

Exit codes: 0 success or proved, 1 negative result (invalid set, candidate
found, nothing found, invalid trace), 2 inconclusive, 3 input error. Results go
to stdout, logs to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from src.core.config import settings
from src.core.errors import BudgetExceededError, InputError
from src.models.modular_set import ModularSet
from src.models.trace import ProofTrace
from src.prover.checker import check_trace
from src.prover.search import ProverLimits, prove_character_impossible
from src.services.independence import (
    character_search_table,
    detect_character,
    detect_independence,
    omega_lambda_check,
    prefix_for_depth,
    search_by_character,
)
from src.services.modular_sets import (
    FORBIDDEN_CHARACTERS,
    enumerate_modular_sets,
    missing_characters,
    table_from_sets,
    verify_modular,
)
from src.services.result_cache import ResultCache, enumerate_with_cache
from src.services.sequences import generate, growth_diagnostics, omitted_set, power_of_two_indices

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 means inconclusive here."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise InputError(f"{self.prog}: {message}")


def parse_int_list(text: str) -> list[int]:
    """Parse "0,3,5,8" (any order); duplicates are an error."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InputError(f"not a comma-separated list of integers: {text!r}") from exc
    if not values:
        raise InputError("empty element list")
    if len(set(values)) != len(values):
        dupes = sorted({v for v in values if values.count(v) > 1})
        raise InputError(f"duplicate elements: {dupes}")
    return sorted(values)


def _emit_json(payload: Any) -> None:
    print(json.dumps(payload, separators=(",", ":")))


def _set_text(ms: ModularSet) -> str:
    omega = "NONE" if ms.omega is None else ms.omega
    return f"N={ms.modulus} {{{','.join(map(str, ms.elements))}}} lambda={ms.lambda_} omega={omega}"


def _open_cache(args: argparse.Namespace) -> ResultCache | None:
    if args.no_cache:
        return None
    return ResultCache(args.cache)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    prefix = generate(parse_int_list(args.set), args.count, args.value_limit)
    if args.format == "json":
        _emit_json(prefix.to_record().model_dump())
    else:
        print(" ".join(map(str, prefix.terms)))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    verdict = verify_modular(parse_int_list(args.set), args.modulus)
    if args.format == "json":
        payload: dict[str, Any] = {"valid": verdict.valid}
        if verdict.valid:
            payload["lambda"] = verdict.lambda_
            payload["omega"] = verdict.omega
        else:
            payload["violation"] = verdict.violation.model_dump(mode="json", exclude_none=True) if verdict.violation else None
        _emit_json(payload)
    else:
        print(verdict.describe())
    return EXIT_OK if verdict.valid else EXIT_NEGATIVE


def cmd_enumerate(args: argparse.Namespace) -> int:
    if args.modulus is not None:
        moduli = [args.modulus]
        sets_by_modulus = {args.modulus: enumerate_modular_sets(args.modulus, workers=args.threads)}
    else:
        top = args.modulus_max if args.modulus_max is not None else settings.ENUMERATION_MAX_MODULUS
        moduli = list(range(1, top + 1))
        sets_by_modulus = enumerate_with_cache(top, _open_cache(args), workers=args.threads)
    rows = [ms for n in moduli for ms in sets_by_modulus[n]]
    if args.format == "json":
        _emit_json([ms.to_record() for ms in rows])
    else:
        for ms in rows:
            print(_set_text(ms))
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    top = args.modulus_max if args.modulus_max is not None else settings.ENUMERATION_MAX_MODULUS
    enumerated = table_from_sets(enumerate_with_cache(top, _open_cache(args), workers=args.threads))
    searched: dict[int, list[tuple[int, ...]]] = {}
    if args.bound is not None:
        searched = character_search_table(args.bound, k_max=args.kmax, workers=args.threads)

    rows: list[dict[str, Any]] = []
    for lam in sorted(set(enumerated) | set(searched)):
        if lam in enumerated:
            ms = enumerated[lam][0]
            rows.append({"lambda": lam, "source": "enumeration", "modulus": ms.modulus, "witness": list(ms.elements)})
        if lam in searched:
            rows.append({"lambda": lam, "source": "sequence search", "witness": list(searched[lam][0])})
    seen = set(enumerated) | set(searched)
    upto = max(seen) if seen else 0
    missing = missing_characters({lam: [] for lam in seen}, upto)
    forbidden_found = sorted(lam for lam in FORBIDDEN_CHARACTERS if lam in seen)

    if args.format == "json":
        _emit_json({"rows": rows, "missing": missing, "forbidden_found": forbidden_found})
    else:
        for row in rows:
            where = f" mod {row['modulus']}" if "modulus" in row else ""
            print(f"lambda={row['lambda']} [{row['source']}] {{{','.join(map(str, row['witness']))}}}{where}")
        print(f"missing: {missing}")
        print(f"forbidden characters found: {forbidden_found}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    gens = parse_int_list(args.set)
    k_max = args.kmax if args.kmax is not None else settings.ANALYZE_K_MAX
    prefix = prefix_for_depth(gens, k_max)

    if args.growth:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["n", "a_n", "ratio_type1", "ratio_type2"])
        diag = growth_diagnostics(prefix, power_of_two_indices(len(prefix)))
        for s in diag.samples:
            writer.writerow([s.n, s.a_n, f"{s.ratio_type1:.6f}", f"{s.ratio_type2:.6f}"])
        return EXIT_OK

    cert = detect_independence(prefix, k_max)
    detection = detect_character(prefix, k_max=k_max)
    omitted = omitted_set(prefix.generators, max(prefix.generators[-1] + 1, 3 * cert.rho if cert else 0))
    omega_check = omega_lambda_check(prefix, cert) if cert is not None else None

    if args.format == "json":
        _emit_json(
            {
                "generators": list(prefix.generators),
                "certificate": cert.model_dump(by_alias=True) if cert else None,
                "detection": detection.model_dump(mode="json") if detection else None,
                "omega": omitted.omega,
                "omega_below_lambda": omega_check.valid if omega_check else None,
            }
        )
    else:
        print(cert.describe() if cert else f"no independence certificate (checked up to k={k_max})")
        if detection is not None:
            print(f"modular prefix: modulus {detection.modulus}, character {detection.character} ({detection.source.value})")
        print(f"omega={'NONE' if omitted.omega is None else omitted.omega}")
        if omega_check is not None:
            print(f"omega < lambda: {omega_check.valid}")
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    bound = args.bound if args.bound is not None else 20
    hits = search_by_character(args.lam, bound, k_max=args.kmax, workers=args.threads)
    if args.format == "json":
        _emit_json({"lambda": args.lam, "generator_sets": [list(g) for g in hits]})
    else:
        for gens in hits:
            print(" ".join(map(str, gens)))
        if not hits:
            print(f"no generator set within [0, {bound}] certifies lambda={args.lam}")
    return EXIT_OK if hits else EXIT_NEGATIVE


def cmd_prove(args: argparse.Namespace) -> int:
    limits = ProverLimits(bound=args.bound)
    if args.budget_nodes is not None:
        limits.max_nodes = args.budget_nodes
    if args.budget_seconds is not None:
        limits.max_seconds = args.budget_seconds
    limits.small_modulus_max = args.small_moduli
    result = prove_character_impossible(args.lam, limits, cache=_open_cache(args), workers=args.threads)
    if args.trace and result.trace is not None:
        Path(args.trace).parent.mkdir(parents=True, exist_ok=True)
        Path(args.trace).write_text(result.trace.to_json(), encoding="utf-8")
    ms = result.candidate
    if args.format == "json":
        payload: dict[str, Any] = {"lambda": args.lam, "verdict": result.verdict.value}
        if ms is not None:
            payload["candidate"] = ms.to_record()
        if result.reason:
            payload["reason"] = result.reason
        if result.small_moduli is not None:
            payload["small_moduli_checked_upto"] = result.small_moduli.checked_upto
            gap = result.small_moduli.uncovered
            payload["uncovered_moduli"] = list(gap) if gap is not None else None
        _emit_json(payload)
    else:
        print(result.verdict.value)
        if ms is not None:
            print(_set_text(ms))
        elif result.reason:
            print(result.reason)
        if result.small_moduli is not None and ms is None:
            print(result.small_moduli.describe())
    return result.exit_code


def cmd_check_trace(args: argparse.Namespace) -> int:
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read trace {args.trace}: {exc.strerror}") from exc
    lam = args.lam
    if lam is None:
        try:
            lam = ProofTrace.from_json(text).lambda_
        except ValueError as exc:
            raise InputError(f"{args.trace} is not a proof trace") from exc
    check = check_trace(text, lam)
    if args.format == "json":
        _emit_json({"valid": check.valid, "path": check.path, "reason": check.reason})
    else:
        print(check.describe())
    return EXIT_OK if check else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--verbose", action="store_true", help="Log at DEBUG to stderr.")


def _subcommand(
    subparsers: argparse._SubParsersAction,
    name: str,
    handler: Callable[[argparse.Namespace], int],
    help_text: str,
) -> argparse.ArgumentParser:
    p = subparsers.add_parser(name, help=help_text, description=help_text)
    _common(p)
    p.set_defaults(handler=handler)
    return p


def _with_cache(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache", default=None, help="JSON-lines cache path (default: STANLEY_CACHE).")
    p.add_argument("--no-cache", action="store_true", help="Neither read nor write the cache.")
    p.add_argument("--threads", type=int, default=None, help="Worker processes (default: WORKERS).")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="stanley", description=settings.APP_NAME)
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = _subcommand(subparsers, "generate", cmd_generate, "Greedy 3-free extension S(A) of a generator set.")
    p.add_argument("--set", required=True)
    p.add_argument("--count", type=int, default=32)
    p.add_argument("--value-limit", type=int, default=None)

    p = _subcommand(subparsers, "verify", cmd_verify, "Check whether a set is a modular set modulo N.")
    p.add_argument("--set", required=True)
    p.add_argument("--modulus", type=int, required=True)

    p = _subcommand(subparsers, "enumerate", cmd_enumerate, "Every modular set for one modulus or up to a maximum.")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--modulus", type=int)
    group.add_argument("--modulus-max", type=int)
    _with_cache(p)

    p = _subcommand(subparsers, "table", cmd_table, "Characters seen by enumeration and sequence search.")
    p.add_argument("--modulus-max", type=int)
    p.add_argument("--bound", type=int, default=None, help="Also search generator sets within [0, bound].")
    p.add_argument("--kmax", type=int, default=None)
    _with_cache(p)

    p = _subcommand(subparsers, "analyze", cmd_analyze, "Independence certificate, modulus and omitted set of S(A).")
    p.add_argument("--set", required=True)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--growth", action="store_true", help="Emit growth ratios as CSV instead.")

    p = _subcommand(subparsers, "search", cmd_search, "Generator sets whose sequences certify a character.")
    p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)

    p = _subcommand(subparsers, "prove", cmd_prove, "Decide whether any modular set with even modulus has character λ.")
    p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--bound", type=int, default=None, help="Offset bound B (default: PROVER_BOUND_FACTOR·λ).")
    p.add_argument("--trace", default=None, help="Write the proof trace here.")
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument(
        "--small-moduli",
        type=int,
        default=None,
        metavar="MAX",
        help="Also enumerate even moduli below 2·N_min up to MAX.",
    )
    _with_cache(p)

    p = _subcommand(subparsers, "check-trace", cmd_check_trace, "Replay a proof trace.")
    p.add_argument("--trace", required=True)
    p.add_argument("--lambda", dest="lam", type=int, default=None)
    return parser


def _log_level(verbose: bool) -> int:
    if verbose or settings.DEBUG:
        return logging.DEBUG
    return getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=_log_level(verbose), stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceededError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
