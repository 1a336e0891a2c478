"""Command-line front end.

Every report is a JSON document ``{"command", "config", "result", "meta"}``.
``meta`` holds a SHA-256 of the other keys, so identical configurations
produce identical hashes. It also records when the report was made and which
kernel backend ran it.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 resource cap.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels
from .adversary import refute, validate_certificate
from .bounds import asymptotic_sweep, plan_nonclassical_params, sweep_to_csv
from .classical import (
    TONER_BACON_CONVENTION,
    ClassicalProtocol,
    StageBudget,
    parity_prefix_violations,
    parity_protocol,
    calibrate_reflection,
    constant_protocol,
    random_protocol,
    run_batch,
    search_protocols,
    toner_bacon_chain,
    toner_bacon_temporal,
    verify_protocol,
)
from .errors import CapExceeded, NormalizationError, NotApplicable, TempcorrError, UnsupportedParameters, ValidationError
from .games import DEFAULT_ENUMERATION_CAP, GameSpec, enumerate_promise_inputs, promise_input_array, sample_promise_inputs
from .quantum import (
    DEFAULT_PATH_CAP,
    PRINTED_READINGS,
    printed_kraus_provider,
    qubit_projective_chain,
    random_bloch_settings,
    spatial_outcome_distribution,
    temporal_outcome_distribution,
    win_probability,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
TOLERANCE = 1e-9


class CheckFailed(Exception):
    """Raised by a subcommand after its report is written, to select exit code 1."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def make_report(command: str, config: dict, result: dict) -> dict:
    body = {"command": command, "config": config, "result": result}
    return {
        **body,
        "meta": {
            "content_sha256": hashlib.sha256(_canonical(body).encode()).hexdigest(),
            "kernel_backend": kernels.BACKEND,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    }


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_report(args, command: str, config: dict, result: dict) -> dict:
    report = make_report(command, config, result)
    _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
    return report


def _spec(args) -> GameSpec:
    return GameSpec(args.n, args.m, args.d)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _inputs(spec: GameSpec, args) -> list:
    if args.mode == "exhaustive":
        return [tuple(X) for X in enumerate_promise_inputs(spec, args.cap)]
    return [tuple(int(v) for v in row) for row in sample_promise_inputs(spec, args.count, args.seed)]


# --- subcommands ---------------------------------------------------------------


def cmd_verify_quantum(args) -> None:
    spec = _spec(args)
    inputs = _inputs(spec, args)
    readings = PRINTED_READINGS if spec.m in (2, 4, 6) or spec.m % 2 else ()

    def check(X):
        spatial = spatial_outcome_distribution(spec, X, args.cap)
        temporal = temporal_outcome_distribution(spec, X, cap=args.cap)
        variants = {"derived": spatial.sup_distance(temporal) <= TOLERANCE}
        for reading in readings:
            try:
                alt = temporal_outcome_distribution(spec, X, printed_kraus_provider(reading), cap=args.cap)
                variants[f"printed:{reading}"] = spatial.sup_distance(alt) <= TOLERANCE
            except NormalizationError:
                variants[f"printed:{reading}"] = False
        return {
            "input": list(X),
            "win_spatial": win_probability(spatial, X, spec),
            "win_temporal": win_probability(temporal, X, spec),
            "sup_norm": spatial.sup_distance(temporal),
            "variant_matches": variants,
        }

    rows = _map(check, inputs, args.threads)
    ok = all(
        abs(r["win_spatial"] - 1) <= TOLERANCE and abs(r["win_temporal"] - 1) <= TOLERANCE and r["sup_norm"] <= TOLERANCE
        for r in rows
    )
    matched = {name: all(r["variant_matches"][name] for r in rows) for name in rows[0]["variant_matches"]}
    result = {
        "inputs_checked": len(rows),
        "min_win_spatial": min(r["win_spatial"] for r in rows),
        "min_win_temporal": min(r["win_temporal"] for r in rows),
        "max_sup_norm": max(r["sup_norm"] for r in rows),
        "variants_matching_spatial": matched,
        "all_checks_pass": ok,
        "per_input": rows,
    }
    config = {"spec": spec.to_dict(), "mode": args.mode, "count": args.count, "seed": args.seed, "cap": args.cap}
    _emit_report(args, "verify-quantum", config, result)
    if not ok:
        raise CheckFailed


def _load_protocol(path: str) -> ClassicalProtocol:
    with open(path) as fh:
        return ClassicalProtocol.from_dict(json.load(fh))


def cmd_verify_classical(args) -> None:
    if args.protocol:
        p = _load_protocol(args.protocol)
    else:
        p = parity_protocol(args.n)
    report = verify_protocol(p, mode=args.mode, count=args.count, seed=args.seed, cap=args.cap)
    result = report.to_dict()
    if not args.protocol:
        inputs = promise_input_array(p.spec, args.cap) if args.mode == "exhaustive" else sample_promise_inputs(p.spec, args.count, args.seed)
        Y, M = run_batch(p, inputs)
        result["prefix_invariant_violations"] = int(len(parity_prefix_violations(inputs, Y, M)))
    config = {"protocol": args.protocol or f"parity(n={args.n})", "mode": args.mode, "count": args.count, "seed": args.seed}
    _emit_report(args, "verify-classical", config, result)
    if report.win_rate != 1.0 or result.get("prefix_invariant_violations", 0):
        raise CheckFailed


def _budgets(args, n: int) -> StageBudget:
    if args.budgets:
        return StageBudget(tuple(int(s) for s in args.budgets.split(",")))
    return StageBudget.from_bits(n, args.bits)


def cmd_refute(args) -> None:
    if args.protocol:
        protocols = [_load_protocol(args.protocol)]
        spec, budgets = protocols[0].spec, protocols[0].budgets
        source = {"protocol_file": args.protocol}
    else:
        spec = _spec(args)
        budgets = _budgets(args, spec.n)
        if args.random:
            protocols = [random_protocol(spec, budgets, args.seed + i) for i in range(args.random)]
            source = {"random": args.random, "seed": args.seed}
        else:
            protocols = [constant_protocol(spec, budgets)]
            source = {"constant": True}

    def attempt(p):
        try:
            cert = refute(p, spec, strict=args.strict)
        except NotApplicable as exc:
            return {"status": "not applicable", "reason": str(exc)}
        valid = validate_certificate(cert, p, spec)
        return {"status": "refuted" if valid else "invalid certificate", "certificate": cert.to_dict()}

    outcomes = _map(attempt, protocols, args.threads)
    refuted = sum(o["status"] == "refuted" for o in outcomes)
    invalid = sum(o["status"] == "invalid certificate" for o in outcomes)
    result = {
        "protocols": len(protocols),
        "refuted": refuted,
        "not_applicable": sum(o["status"] == "not applicable" for o in outcomes),
        "invalid_certificates": invalid,
        "refutation_rate": refuted / len(protocols),
        "routes": sorted({o["certificate"]["route"] for o in outcomes if "certificate" in o}),
    }
    if args.certificates:
        with open(args.certificates, "w") as fh:
            json.dump([o.get("certificate") for o in outcomes], fh, indent=1, sort_keys=True)
    if len(protocols) <= 10:
        result["outcomes"] = outcomes
    config = {"spec": spec.to_dict(), "budgets": list(budgets.sizes), "strict": args.strict, **source}
    _emit_report(args, "refute", config, result)
    print(f"refuted {refuted}/{len(protocols)} protocols", file=sys.stderr)
    if invalid:
        raise CheckFailed


def cmd_search(args) -> None:
    spec = _spec(args)
    budgets = _budgets(args, spec.n)
    res = search_protocols(spec, budgets, node_cap=args.node_cap)
    config = {"spec": spec.to_dict(), "budgets": list(budgets.sizes), "node_cap": args.node_cap}
    _emit_report(args, "search", config, res.to_dict())
    if res.status == "partial":
        raise CapExceeded(f"search stopped after {res.nodes} nodes")


def _vector(text: str) -> np.ndarray:
    v = np.array([float(t) for t in text.split(",")])
    if v.shape != (3,):
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return v / np.linalg.norm(v)


def cmd_toner_bacon(args) -> None:
    N = args.samples
    if N < 1:
        raise ValidationError("--samples must be >= 1")
    bound = 4 / math.sqrt(N)
    rng = np.random.default_rng(args.seed)
    reflect = calibrate_reflection(seed=args.seed)
    if args.chain:
        settings = random_bloch_settings(args.chain, rng)
        exact = qubit_projective_chain(settings)
        estimate = toner_bacon_chain(settings, N, args.seed + 1, reflect_first=reflect)
        bound = 5 / math.sqrt(N)
        rows = [{"settings": settings.tolist(), "exact": exact, "estimate": estimate, "within": abs(estimate - exact) <= bound}]
    else:
        if args.a1 is not None and args.a2 is not None:
            pairs = [(args.a1, args.a2)]
        else:
            pairs = [tuple(random_bloch_settings(2, rng)) for _ in range(args.pairs)]
        rows = []
        for i, (a1, a2) in enumerate(pairs):
            exact = float(np.dot(a1, a2))
            estimate = toner_bacon_temporal(a1, a2, N, args.seed + 1 + i, reflect_first=reflect)
            rows.append({"a1": list(map(float, a1)), "a2": list(map(float, a2)), "exact": exact,
                         "estimate": estimate, "within": abs(estimate - exact) <= bound})
    within = sum(r["within"] for r in rows)
    ok = within >= math.ceil(0.99 * len(rows))
    result = {
        "convention": TONER_BACON_CONVENTION if reflect else "unreflected",
        "bound": bound,
        "within_bound": within,
        "cases": len(rows),
        "pass": ok,
        "rows": rows,
    }
    config = {"samples": N, "seed": args.seed, "pairs": args.pairs, "chain": args.chain}
    _emit_report(args, "toner-bacon", config, result)
    if not ok:
        raise CheckFailed


def cmd_plan(args) -> None:
    _emit_report(args, "plan", {"m": args.m}, plan_nonclassical_params(args.m).to_dict())


def cmd_sweep(args) -> None:
    ns = [2**e for e in range(args.min_exp, args.max_exp + 1)]
    rows = [asymptotic_sweep(n, eps, args.m, args.theta) for eps in args.epsilon for n in ns]
    if args.format == "csv":
        _emit(sweep_to_csv(rows), args.out)
        return
    config = {"n": ns, "epsilon": args.epsilon, "m": args.m, "theta_constant": args.theta}
    _emit_report(args, "sweep", config, {"rows": [r.to_dict() for r in rows]})


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tempcorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, game=True, sampling=False):
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
        if game:
            p.add_argument("--n", type=int, default=3, help="number of stages (default: 3)")
            p.add_argument("--m", type=int, default=2, help="output alphabet / qumit dimension (default: 2)")
            p.add_argument("--d", type=int, default=2, help="input alphabet (default: 2)")
        if sampling:
            p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
            p.add_argument("--count", type=int, default=100, help="samples in sampled mode (default: 100)")
            p.add_argument("--seed", type=int, default=0, help="RNG seed (default: 0)")
            p.add_argument("--cap", type=int, default=DEFAULT_PATH_CAP, help="enumeration / state-size cap")

    p = sub.add_parser("verify-quantum", help="spatial vs temporal simulation, win probabilities")
    common(p, sampling=True)
    p.set_defaults(func=cmd_verify_quantum)

    p = sub.add_parser("verify-classical", help="verify a protocol file or the one-bit modulo-(2,2) protocol")
    common(p, sampling=True)
    p.add_argument("--protocol", help="protocol JSON file (default: the one-bit protocol for --n)")
    p.set_defaults(func=cmd_verify_classical, cap=DEFAULT_ENUMERATION_CAP)

    p = sub.add_parser("refute", help="adversary refutation with certificates")
    common(p)
    p.add_argument("--protocol", help="protocol JSON file")
    p.add_argument("--random", type=int, default=0, help="refute this many random protocols")
    p.add_argument("--seed", type=int, default=0, help="base seed; protocol i uses seed + i")
    p.add_argument("--bits", type=int, default=1, help="uniform per-stage message bits (default: 1)")
    p.add_argument("--budgets", help="comma-separated alphabet sizes, overrides --bits")
    p.add_argument("--strict", action="store_true", help="require m*d sub-threshold stages")
    p.add_argument("--certificates", help="write all certificates to this JSON file")
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("search", help="exhaustive protocol search")
    common(p)
    p.add_argument("--bits", type=int, default=1)
    p.add_argument("--budgets")
    p.add_argument("--node-cap", type=int, default=10**6)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("toner-bacon", help="one-bit simulation of qubit temporal correlations")
    common(p, game=False)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=1, help="random setting pairs (default: 1)")
    p.add_argument("--a1", type=_vector)
    p.add_argument("--a2", type=_vector)
    p.add_argument("--chain", type=int, default=0, help="simulate an n-setting chain instead")
    p.set_defaults(func=cmd_toner_bacon)

    p = sub.add_parser("plan", help="parameters for non-classical temporal correlations")
    common(p, game=False)
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="per-stage communication bound over a range of n")
    common(p, game=False)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--epsilon", type=float, nargs="+", default=[0.5])
    p.add_argument("--min-exp", type=int, default=10, help="smallest n is 2^min-exp")
    p.add_argument("--max-exp", type=int, default=24)
    p.add_argument("--theta", type=float, default=1.0, help="constant in d = theta * n^epsilon")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CheckFailed:
        return EXIT_FAIL
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UnsupportedParameters, TempcorrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
