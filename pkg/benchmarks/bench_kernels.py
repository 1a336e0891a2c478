"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R] [--json]

Both backends receive identical inputs and their results are compared
before timing, so a speedup is never reported for a kernel that disagrees.
"""
import argparse
import json
import timeit

import numpy as np

from tempcorr import kernels
from tempcorr.classical import StageBudget, random_protocol
from tempcorr.games import GameSpec, sample_promise_inputs


def _cases():
    rng = np.random.default_rng(0)
    spec = GameSpec(16, 2, 8)
    p = random_protocol(spec, StageBudget.from_bits(16, 1), seed=0)
    out, msg = p.packed
    inputs = sample_promise_inputs(spec, 20_000, seed=1)
    deltas_long = rng.integers(1, 64, size=64)
    # no offset is a multiple of 4, so the DFS walks deep before succeeding
    deltas_dfs = np.array([1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 3, 5], dtype=np.int64)
    return {
        "run_batch (20k runs, n=16)": (lambda b: b.run_batch(out, msg, inputs), 1),
        "first_collision (d=256)": (
            lambda b: b.first_collision(np.arange(256) % 251, np.zeros(256, dtype=np.int64)), 50
        ),
        "subset_sum_reach (64 offsets, mod 512)": (lambda b: b.subset_sum_reach(deltas_long, 512), 20),
        "lex_first_witness (20 offsets, m=2, d=64)": (lambda b: b.lex_first_witness(deltas_dfs, 2, 64), 1),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple) and isinstance(b, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions, best is kept (default: 5)")
    parser.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    args = parser.parse_args(argv)

    available = kernels.backends()
    rows = []
    for name, (fn, number) in _cases().items():
        results = {b: fn(mod) for b, mod in available.items()}
        values = list(results.values())
        agree = all(_same(values[0], v) for v in values[1:])
        timings = {
            b: min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            for b, mod in available.items()
        }
        speedup = timings["python"] / timings["cython"] if "cython" in timings else None
        rows.append({"kernel": name, "agree": agree, "seconds": timings, "speedup": speedup})

    if args.json:
        print(json.dumps({"backends": sorted(available), "rows": rows}, indent=2))
    else:
        print(f"{'kernel':<44} {'python':>11} {'cython':>11} {'speedup':>8}  agree")
        for r in rows:
            py = f"{r['seconds']['python'] * 1e3:9.3f}ms"
            cy = f"{r['seconds']['cython'] * 1e3:9.3f}ms" if "cython" in r["seconds"] else "        n/a"
            sp = f"{r['speedup']:7.1f}x" if r["speedup"] else "     n/a"
            print(f"{r['kernel']:<44} {py:>11} {cy:>11} {sp:>8}  {r['agree']}")
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
