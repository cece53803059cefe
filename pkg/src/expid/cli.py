"""Command-line front end.

Exit codes: 0 accept/ok, 1 reject, 2 parse error, 3 invalid input,
4 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import descartes, pit
from .builders import InvalidDims, build_example
from .circuit import DEFAULT_TERM_CAP, Circuit, CircuitParseError, ValidationError, difference
from .exppoly import TermBlowup
from .field import FieldParams, find_subgroup_element, generate_prime_pair

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_INCONCLUSIVE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _seed(text: str | None) -> int:
    raw = text if text is not None else os.environ.get("EXPID_SEED", "0")
    try:
        value = int(raw, 0)
    except ValueError:
        raise CliError(f"seed must be an integer, got {raw!r}", EXIT_INVALID) from None
    if not 0 <= value < 1 << 64:
        raise CliError("seed must be a 64-bit unsigned value", EXIT_INVALID)
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bounds(text: str) -> tuple[int, int, int]:
    values = _int_list(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError("bounds must be k,d,w")
    return tuple(values)  # type: ignore[return-value]


def _delta(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("delta must lie in (0, 1)")
    return value


def _load(path: str) -> Circuit:
    try:
        c = Circuit.load(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_PARSE) from None
    except CircuitParseError as exc:
        raise CliError(f"{path}: parse error: {exc}", EXIT_PARSE) from None
    try:
        c.validate()
    except ValidationError as exc:
        raise CliError(f"{path}: {type(exc).__name__}: {exc}", EXIT_INVALID) from None
    return c


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _verdict_code(v: pit.Verdict) -> int:
    return {
        pit.Decision.ACCEPT_ZERO: EXIT_ACCEPT,
        pit.Decision.EMPTY_DOMAIN: EXIT_ACCEPT,
        pit.Decision.REJECT_NONZERO: EXIT_REJECT,
        pit.Decision.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    }[v.decision]


# commands


def cmd_validate(args: argparse.Namespace) -> int:
    c = _load(args.circuit)
    print(f"ok: {c.size} gates, {c.num_inputs} inputs")
    try:
        k, d, w = c.metrics(args.term_cap)
        print(f"metrics: k={k} d={d} w={w}")
    except TermBlowup:
        print(f"metrics: unavailable (more than {args.term_cap} terms)")
    return EXIT_ACCEPT


def _run_zero_test(c: Circuit, args: argparse.Namespace) -> int:
    seed = _seed(args.seed)
    try:
        plan = pit.plan_for_circuit(c, args.delta, seed, args.term_cap, args.bounds, args.q, args.trials)
    except TermBlowup as exc:
        verdict = pit.Verdict(pit.Decision.INCONCLUSIVE, 0, seed, reason=f"{exc}; pass --bounds k,d,w")
        _emit(verdict.to_json(), args.out)
        return EXIT_INCONCLUSIVE
    except pit.PlanError as exc:
        raise CliError(f"invalid plan: {exc}", EXIT_INVALID) from None
    verdict = pit.test_zero(c, plan, args.threads)
    _emit(verdict.to_json(args.timing), args.out)
    return _verdict_code(verdict)


def cmd_test_zero(args: argparse.Namespace) -> int:
    return _run_zero_test(_load(args.circuit), args)


def cmd_test_equiv(args: argparse.Namespace) -> int:
    c1, c2 = _load(args.left), _load(args.right)
    if c1.num_inputs != c2.num_inputs:
        raise CliError(f"input counts differ: {c1.num_inputs} vs {c2.num_inputs}", EXIT_INVALID)
    return _run_zero_test(difference(c1, c2), args)


def cmd_oracle(args: argparse.Namespace) -> int:
    result = pit.exact_zero_oracle(_load(args.circuit), args.term_cap)
    print(result.value)
    return {
        pit.OracleResult.ZERO: EXIT_ACCEPT,
        pit.OracleResult.EMPTY_DOMAIN: EXIT_ACCEPT,
        pit.OracleResult.NONZERO: EXIT_REJECT,
        pit.OracleResult.INCONCLUSIVE: EXIT_INCONCLUSIVE,
    }[result]


def cmd_real_test(args: argparse.Namespace) -> int:
    c = _load(args.circuit)
    verdict = pit.real_model_test(c, args.trials or 20, _seed(args.seed), args.term_cap, args.threads)
    _emit(verdict.to_json(args.timing), args.out)
    return _verdict_code(verdict)


def cmd_gen_params(args: argparse.Namespace) -> int:
    seed = _seed(args.seed)
    try:
        if args.d is None:
            p, q = generate_prime_pair(pit.min_separating_q(args.k, args.w))
            lines = [f"q={q}", f"p={p}", f"a={find_subgroup_element(p, q, seed)}"]
        else:
            plan = pit.select_params(args.k, args.d, args.w, args.delta, seed, args.q, args.trials)
            fp = plan.params
            lines = [f"q={fp.q}", f"p={fp.p}", f"a={fp.a}", f"error={plan.error:.6g}", f"repetitions={plan.repetitions}"]
    except (pit.PlanError, ValueError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    print("\n".join(lines))
    return EXIT_ACCEPT


def cmd_example(args: argparse.Namespace) -> int:
    dims = {}
    for item in args.dims:
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"dimension {item!r} must look like name=value", EXIT_INVALID)
        try:
            dims[key.replace("-", "_")] = int(value)
        except ValueError:
            raise CliError(f"dimension {item!r} needs an integer value", EXIT_INVALID) from None
    try:
        circuits = build_example(args.name, **dims)
    except InvalidDims as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, c in enumerate(circuits):
        path = out / f"{args.name}_{i}.json"
        c.dump(path)
        print(path)
    return EXIT_ACCEPT


def _scan_params(q: int, p: int | None, seed: int) -> FieldParams:
    try:
        if p is None:
            p, q = generate_prime_pair(q)
        return FieldParams(p, q, find_subgroup_element(p, q, seed))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None


def cmd_descartes_scan(args: argparse.Namespace) -> int:
    params = _scan_params(args.q, args.p, _seed(args.seed))
    try:
        reports = [descartes.exhaustive_bound_scan(k, params) for k in args.k]
    except (descartes.SpaceTooLarge, descartes.PreconditionViolation) as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    except descartes.BoundViolation as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return EXIT_REJECT
    if args.out:
        out = Path(args.out)
        with out.open("w", encoding="utf-8", newline="") as fh:
            descartes.write_scan_csv(reports, fh)
        from .plotting import plot_scan_histogram

        for r in reports:
            plot_scan_histogram(r, out.with_name(f"{out.stem}_k{r.k}.png"))
    else:
        descartes.write_scan_csv(reports, sys.stdout)
    return EXIT_ACCEPT


def cmd_descartes_conjecture(args: argparse.Namespace) -> int:
    params = _scan_params(args.q, args.p, _seed(args.seed))
    try:
        r = descartes.conjecture_scan(params, args.k, args.samples, _seed(args.seed))
    except descartes.PreconditionViolation as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    report = {
        "k": r.k,
        "p": params.p,
        "q": params.q,
        "samples": r.samples,
        "max_count": r.max_count,
        "max_fraction": r.max_fraction,
        "worst_alphas": list(r.worst.alphas),
        "worst_betas": list(r.worst.betas),
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_ACCEPT


def cmd_descartes_kelley(args: argparse.Namespace) -> int:
    try:
        r = descartes.kelley_search(args.alphas, args.N, args.n)
    except descartes.PreconditionViolation as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    report = {
        "c": r.c,
        "symmetric_max": r.symmetric_max,
        "one_sided_c": r.one_sided_c,
        "one_sided_max": r.one_sided_max,
        "bound": r.bound,
        "symmetric_met": r.symmetric_met,
        "one_sided_met": r.one_sided_met,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_ACCEPT


def cmd_descartes_crt(args: argparse.Namespace) -> int:
    try:
        r = descartes.verify_crt_isomorphism(args.p, args.q, args.samples, _seed(args.seed))
    except descartes.PreconditionViolation as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    report = {
        "p": r.p,
        "q": r.q,
        "g": r.g,
        "exhaustive": r.exhaustive,
        "elements": r.elements,
        "collisions": r.collisions,
        "pairs": r.pairs,
        "homomorphism_failures": r.homomorphism_failures,
        "ok": r.ok,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_ACCEPT if r.ok else EXIT_REJECT


# parser


def _add_common(p: argparse.ArgumentParser, testing: bool = True) -> None:
    p.add_argument("--seed", help="64-bit seed (default: $EXPID_SEED or 0)")
    p.add_argument("--term-cap", type=int, default=DEFAULT_TERM_CAP, help="maximum terms during fraction conversion")
    p.add_argument("--out", help="write the primary output here instead of stdout")
    if testing:
        p.add_argument("--delta", type=_delta, default=1e-3, help="target failure probability")
        p.add_argument("--q", type=int, help="use this prime q instead of the planned one")
        p.add_argument("--trials", type=int, help="number of trials (overrides the planned count)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
        p.add_argument("--bounds", type=_bounds, help="k,d,w bounds used instead of the circuit's own")
        p.add_argument("--timing", action="store_true", help="include wall time in the verdict")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expid", description="Identity testing for circuits with exponentiation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a circuit file")
    p.add_argument("circuit")
    p.add_argument("--term-cap", type=int, default=DEFAULT_TERM_CAP)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("test-zero", help="randomized test that a circuit vanishes on its domain")
    p.add_argument("circuit")
    _add_common(p)
    p.set_defaults(func=cmd_test_zero)

    p = sub.add_parser("test-equiv", help="randomized test that two circuits agree")
    p.add_argument("left")
    p.add_argument("right")
    _add_common(p)
    p.set_defaults(func=cmd_test_equiv)

    p = sub.add_parser("oracle", help="exact symbolic zero test")
    p.add_argument("circuit")
    p.add_argument("--term-cap", type=int, default=DEFAULT_TERM_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("real-test", help="exact evaluation at random integer points")
    p.add_argument("circuit")
    _add_common(p)
    p.set_defaults(func=cmd_real_test)

    p = sub.add_parser("gen-params", help="choose field parameters for given bounds")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--d", type=int, help="degree bound; when given, plan repetitions as well")
    p.add_argument("--delta", type=_delta, default=1e-3)
    p.add_argument("--q", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed")
    p.set_defaults(func=cmd_gen_params)

    p = sub.add_parser("example", help="write example circuits, one file per output coordinate")
    p.add_argument("name", help="softmax, glu or attention")
    p.add_argument("dims", nargs="*", help="dimensions as name=value, e.g. n=3")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("descartes", help="root-count experiments on the order-q subgroup")
    dsub = p.add_subparsers(dest="experiment", required=True)

    d = dsub.add_parser("scan", help="exhaustive root-count scan; writes CSV and a histogram figure")
    d.add_argument("--k", type=_int_list, required=True, help="sparsity, or a comma-separated list")
    d.add_argument("--q", type=int, required=True)
    d.add_argument("--p", type=int)
    d.add_argument("--seed")
    d.add_argument("--out", help="CSV path; figures go next to it")
    d.set_defaults(func=cmd_descartes_scan)

    d = dsub.add_parser("conjecture", help="sampled scan for the largest root fraction")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--q", type=int, required=True)
    d.add_argument("--p", type=int)
    d.add_argument("--samples", type=int, default=10_000)
    d.add_argument("--seed")
    d.add_argument("--out")
    d.set_defaults(func=cmd_descartes_conjecture)

    d = dsub.add_parser("kelley", help="search for a multiplier with small residues")
    d.add_argument("--alphas", type=_int_list, required=True)
    d.add_argument("--N", type=int, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_descartes_kelley)

    d = dsub.add_parser("crt", help="check the evaluation isomorphism of F_p[x]/(x^q - 1)")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--q", type=int, required=True)
    d.add_argument("--samples", type=int, default=1000)
    d.add_argument("--seed")
    d.add_argument("--out")
    d.set_defaults(func=cmd_descartes_crt)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
