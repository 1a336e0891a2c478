"""Acceptance gate: eleven numbered criteria at their stated tolerances.

Each test prints its measured figures (visible with ``-s``) and the
terminal summary lists one PASS/FAIL line per criterion.
"""
import itertools
import math
import time

import numpy as np
import pytest

from tempcorr.adversary import is_witness_subset, brute_witness_subset, select_witness_subset, refute, validate_certificate
from tempcorr.bounds import holevo_bits, plan_nonclassical_params
from tempcorr.classical import (
    StageBudget,
    parity_prefix_violations,
    parity_protocol,
    calibrate_reflection,
    ghz_paradox_1bit_correlation,
    random_protocol,
    run_batch,
    search_protocols,
    toner_bacon_chain,
    toner_bacon_temporal,
    verify_protocol,
)
from tempcorr.games import GameSpec, check_promise, check_win, enumerate_promise_inputs, promise_input_array, sample_promise_inputs
from tempcorr.quantum import (
    PRINTED_READINGS,
    audit_printed_operators,
    outcome_phase_expectation,
    qubit_projective_chain,
    random_bloch_settings,
    spatial_outcome_distribution,
    temporal_outcome_distribution,
    win_probability,
)

TOL = 1e-9
SMALL_SPECS = [GameSpec(3, 2, 2), GameSpec(3, 3, 3), GameSpec(3, 4, 4), GameSpec(4, 2, 4), GameSpec(3, 6, 6)]


def acceptance(number, title):
    return pytest.mark.acceptance(number, title)


@acceptance(1, "spatial simulation wins every promise input of the small specs")
def test_criterion_01_spatial_certainty():
    start = time.perf_counter()
    worst = 1.0
    for spec in SMALL_SPECS:
        for X in enumerate_promise_inputs(spec):
            p = win_probability(spatial_outcome_distribution(spec, X), X, spec)
            worst = min(worst, p)
            assert abs(p - 1) <= TOL, (spec, X, p)
    elapsed = time.perf_counter() - start
    print(f"criterion 1: min win probability {worst:.15f}, {elapsed:.2f} s")
    assert elapsed < 10


@acceptance(2, "temporal Kraus chain equals the spatial distribution")
def test_criterion_02_temporal_equals_spatial():
    start = time.perf_counter()
    worst = 0.0
    for spec in SMALL_SPECS:
        for X in enumerate_promise_inputs(spec):
            spatial = spatial_outcome_distribution(spec, X)
            temporal = temporal_outcome_distribution(spec, X)
            worst = max(worst, spatial.sup_distance(temporal))
    elapsed = time.perf_counter() - start
    print(f"criterion 2: max sup-norm {worst:.3e}, {elapsed:.2f} s")
    assert worst <= TOL
    assert elapsed < 30


@acceptance(3, "temporal simulation wins at n=16, m=2, d=8 on 100 sampled inputs")
def test_criterion_03_headline_point():
    spec = GameSpec(16, 2, 8)
    start = time.perf_counter()
    inputs = sample_promise_inputs(spec, 100, seed=2024)
    worst = 1.0
    for row in inputs:
        X = tuple(int(v) for v in row)
        assert check_promise(X, spec)
        worst = min(worst, win_probability(temporal_outcome_distribution(spec, X), X, spec))
    elapsed = time.perf_counter() - start
    print(f"criterion 3: min win probability {worst:.15f} over {len(inputs)} inputs, {elapsed:.2f} s")
    assert abs(worst - 1) <= TOL
    assert elapsed < 300


@acceptance(4, "complete deterministic audit of the printed operator readings")
def test_criterion_04_printed_operator_audit():
    records = audit_printed_operators(tolerance=TOL)
    again = audit_printed_operators(tolerance=TOL)
    assert records == again
    covered = {(r["spec"]["m"], r["reading"]) for r in records}
    assert {2, 4, 6} <= {m for m, _ in covered}
    for m in (2, 4, 6):
        assert {reading for mm, reading in covered if mm == m} == set(PRINTED_READINGS)
    for r in records:
        assert isinstance(r["matches"], bool)
        assert r["inputs"] == len(list(enumerate_promise_inputs(GameSpec(**r["spec"]))))
        verdict = "match" if r["matches"] else "FAIL"
        print(
            f"criterion 4: m={r['spec']['m']} d={r['spec']['d']} n={r['spec']['n']} "
            f"reading={r['reading']:<10} literal={r['literal']!s:<5} {verdict:<5} "
            f"sup={r['sup_distance']:.3e} unnormalized={r['unnormalized_inputs']}/{r['inputs']}"
        )


@acceptance(5, "one-bit protocol wins all promise inputs for n=3..20 with the prefix invariant")
def test_criterion_05_one_bit_protocol():
    start = time.perf_counter()
    for n in range(3, 21):
        p = parity_protocol(n)
        X = promise_input_array(p.spec)
        assert len(X) == 2 ** (n - 1)
        report = verify_protocol(p)
        assert report.total == 2 ** (n - 1) and report.wins == report.total, n
        Y, M = run_batch(p, X)
        assert parity_prefix_violations(X, Y, M).size == 0, n
    elapsed = time.perf_counter() - start
    print(f"criterion 5: n=3..20 exhaustive, {elapsed:.2f} s")
    assert elapsed < 10


@acceptance(6, "one-bit wrapper reproduces cos(sum phi) on every n=3 promise configuration")
def test_criterion_06_ghz_paradox():
    spec = GameSpec(3, 2, 2)
    configs = 0
    for phis in itertools.product((0.0, math.pi / 2), repeat=3):
        X = tuple(round(2 * phi / math.pi) for phi in phis)
        if not check_promise(X, spec):
            continue
        configs += 1
        classical = ghz_paradox_1bit_correlation(phis)
        quantum = outcome_phase_expectation(temporal_outcome_distribution(spec, X), spec.m)
        target = math.cos(sum(phis))
        assert classical == round(target)
        assert abs(quantum - target) <= TOL
        assert abs(classical - quantum) <= TOL
    assert configs == 4
    print(f"criterion 6: {configs} configurations reproduced")


@acceptance(7, "every seeded random one-bit protocol at n=16, m=2, d=8 is refuted")
def test_criterion_07_adversary():
    spec = GameSpec(16, 2, 8)
    budgets = StageBudget.from_bits(16, 1)
    start = time.perf_counter()
    refuted = 0
    routes = set()
    for seed in range(10_000):
        p = random_protocol(spec, budgets, seed)
        cert = refute(p)
        routes.add(cert.route)
        assert validate_certificate(cert, p)
        # replay checks spelled out here as well
        assert check_promise(cert.X, spec) and check_promise(cert.X_prime, spec)
        Y = run_batch(p, np.array([cert.X, cert.X_prime]))[0]
        assert (Y[0] == Y[1]).all()
        y = tuple(int(v) for v in Y[0])
        assert not (check_win(cert.X, y, spec) and check_win(cert.X_prime, y, spec))
        refuted += 1
    elapsed = time.perf_counter() - start
    print(f"criterion 7: refuted {refuted}/10000 via {sorted(routes)}, {elapsed:.2f} s")
    assert refuted == 10_000
    assert elapsed < 300


@acceptance(8, "constructive selector and brute-force oracle return valid witnesses")
def test_criterion_08_witness_subsets():
    start = time.perf_counter()

    def valid(deltas, chosen, m, d):
        return chosen is not None and len(chosen) > 0 and is_witness_subset([deltas[k - 1] for k in chosen], m, d)

    for deltas in itertools.product((1, 2, 3), repeat=4):
        assert valid(deltas, select_witness_subset(deltas, 2, 2), 2, 2)
        assert valid(deltas, brute_witness_subset(deltas, 2, 2), 2, 2)
    rng = np.random.default_rng(81)
    for m, d in [(2, 4), (4, 4)]:
        md = m * d
        for _ in range(1000):
            deltas = [int(v) for v in rng.integers(1, md, size=md)]
            assert valid(deltas, select_witness_subset(deltas, m, d), m, d)
            assert valid(deltas, brute_witness_subset(deltas, m, d), m, d)
    elapsed = time.perf_counter() - start
    print(f"criterion 8: 81 exhaustive and 2000 random sequences, {elapsed:.2f} s")
    assert elapsed < 30


@acceptance(9, "no zero-bit protocol wins (3,2,2) while a one-bit protocol does")
def test_criterion_09_search_gap():
    spec = GameSpec(3, 2, 2)
    start = time.perf_counter()
    none = search_protocols(spec, StageBudget.uniform(3, 1))
    found = search_protocols(spec, StageBudget.from_bits(3, 1))
    elapsed = time.perf_counter() - start
    print(f"criterion 9: 0 bits -> {none.status} ({none.nodes} nodes), 1 bit -> {found.status} ({found.nodes} nodes)")
    assert none.status == "none"
    assert found.status == "found" and verify_protocol(found.protocol).win_rate == 1.0
    assert elapsed < 60


@acceptance(10, "Toner-Bacon estimates match a1.a2 and the n=4 chain product")
def test_criterion_10_toner_bacon():
    N = 10**6
    start = time.perf_counter()
    reflect = calibrate_reflection()
    rng = np.random.default_rng(10)
    within = 0
    for i in range(100):
        a1, a2 = random_bloch_settings(2, rng)
        est = toner_bacon_temporal(a1, a2, N, seed=1000 + i, reflect_first=reflect)
        within += abs(est - a1 @ a2) <= 4 / math.sqrt(N)
    chain_errors = []
    for i in range(5):
        a = random_bloch_settings(4, rng)
        exact = qubit_projective_chain(a)
        assert abs(exact - (a[0] @ a[1]) * (a[2] @ a[3])) <= TOL
        chain_errors.append(abs(toner_bacon_chain(a, N, seed=2000 + i, reflect_first=reflect) - exact))
    elapsed = time.perf_counter() - start
    print(f"criterion 10: {within}/100 pairs within 4/sqrt(N), max chain error {max(chain_errors):.2e}, {elapsed:.2f} s")
    assert within >= 99
    assert max(chain_errors) <= 5 / math.sqrt(N)
    assert elapsed < 300


@acceptance(11, "planner regression and invariants for even m up to 64")
def test_criterion_11_planner():
    start = time.perf_counter()
    plan = plan_nonclassical_params(2)
    assert (plan.d, plan.n_min) == (8, 16)
    for m in range(2, 65, 2):
        p = plan_nonclassical_params(m)
        assert p.d <= 2 * m * m
        assert p.required_bits_per_stage > holevo_bits(m)
        assert p.n_min >= m * p.d
    elapsed = time.perf_counter() - start
    print(f"criterion 11: plan(2) d={plan.d} n_min={plan.n_min}, {elapsed * 1000:.1f} ms")
    assert elapsed < 1


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
