import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcorr.errors import CapExceeded, NormalizationError, PromiseViolation, UnsupportedParameters, ValidationError
from tempcorr.games import GameSpec, check_win, enumerate_promise_inputs
from tempcorr.quantum import (
    MAXIMALLY_MIXED,
    OutcomeDistribution,
    audit_printed_operators,
    fourier_matrix,
    ghz_state,
    kraus_from_setting,
    matrix_to_json,
    outcome_phase_expectation,
    printed_kraus,
    printed_kraus_provider,
    phase_matrix,
    qubit_projective_chain,
    random_bloch_settings,
    spatial_outcome_distribution,
    temporal_outcome_distribution,
    win_probability,
)

S322 = GameSpec(3, 2, 2)


def test_fourier_m2_is_hadamard():
    assert np.allclose(fourier_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)


@pytest.mark.parametrize("m", range(2, 9))
def test_fourier_unitary(m):
    F = fourier_matrix(m)
    assert np.max(np.abs(F @ F.conj().T - np.eye(m))) <= 1e-12


def test_fourier_entry_m4():
    assert abs(fourier_matrix(4)[1, 1] - 0.5j) <= 1e-15


def test_phase_matrix_values():
    assert np.allclose(phase_matrix(3, 5, 0), np.eye(3))
    assert np.allclose(phase_matrix(2, 2, 1), np.diag([1, 1j]), atol=1e-15)


@pytest.mark.parametrize("m, d", [(2, 2), (3, 4), (4, 8), (6, 3)])
def test_phase_matrix_power_identity(m, d):
    S = phase_matrix(m, d, 1)
    assert np.allclose(np.linalg.matrix_power(S, d), np.diag(np.exp(2j * np.pi * np.arange(m) / m)), atol=1e-12)
    assert np.max(np.abs(S.conj().T @ S - np.eye(m))) <= 1e-12


def test_ghz_state():
    psi = ghz_state(2, 2).reshape(-1)
    assert np.allclose(psi, np.array([1, 0, 0, 1]) / np.sqrt(2))
    psi = ghz_state(3, 3)
    assert np.count_nonzero(psi) == 3
    assert np.allclose(psi[psi != 0], 1 / np.sqrt(3))
    for n, m in [(2, 2), (4, 3), (5, 4)]:
        assert abs(np.linalg.norm(ghz_state(n, m)) - 1) <= 1e-12
    with pytest.raises(CapExceeded):
        ghz_state(30, 2)


def _kron_spatial(spec, X):
    """Dense oracle: full Kronecker product of the local unitaries on the flat GHZ vector."""
    U = reduce(np.kron, [fourier_matrix(spec.m).conj().T @ phase_matrix(spec.m, spec.d, x) for x in X])
    psi = ghz_state(spec.n, spec.m).reshape(-1)
    return np.abs(U @ psi).reshape((spec.m,) * spec.n) ** 2


@pytest.mark.parametrize("spec", [S322, GameSpec(3, 3, 3), GameSpec(4, 2, 4)])
def test_spatial_matches_kron_oracle(spec):
    for X in enumerate_promise_inputs(spec):
        assert np.max(np.abs(spatial_outcome_distribution(spec, X).probs - _kron_spatial(spec, X))) <= 1e-12


def test_spatial_examples_322():
    d0 = spatial_outcome_distribution(S322, (0, 0, 0))
    for Y, p in d0.items():
        if sum(Y) % 2:
            assert p <= 1e-12
    d1 = spatial_outcome_distribution(S322, (1, 1, 0))
    assert abs(sum(p for Y, p in d1.items() if check_win((1, 1, 0), Y, S322)) - 1) <= 1e-9
    for X in enumerate_promise_inputs(S322):
        assert abs(spatial_outcome_distribution(S322, X).total - 1) <= 1e-9


def test_spatial_requires_promise():
    with pytest.raises(PromiseViolation):
        spatial_outcome_distribution(S322, (1, 0, 0))


def test_kraus_completeness_and_modulus():
    for m in range(2, 9):
        for d in range(2, 9):
            for X in range(d):
                ks = kraus_from_setting(m, d, X)
                assert ks.complete and ks.completeness_defect() <= 1e-10
                assert np.max(np.abs(np.abs(ks.diagonals) - 1 / np.sqrt(m))) <= 1e-10
                dense = ks.matrices()
                gram = sum(K.conj().T @ K for K in dense)
                assert np.max(np.abs(gram - np.eye(m))) <= 1e-10


def test_kraus_entry_example():
    K1 = kraus_from_setting(2, 2, 0).matrices()[1]
    assert np.allclose(K1, np.diag([1, -1]) / np.sqrt(2), atol=1e-15)


def test_kraus_entry_formula():
    # [K_Y]_ii = exp(2 pi i i X/(d m)) exp(-2 pi i Y i / m) / sqrt(m)
    m, d, X = 4, 8, 5
    ks = kraus_from_setting(m, d, X)
    for Y, i in itertools.product(range(m), range(m)):
        expected = np.exp(2j * np.pi * i * X / (d * m)) * np.exp(-2j * np.pi * Y * i / m) / np.sqrt(m)
        assert abs(ks.diagonals[Y, i] - expected) <= 1e-12


def test_kraus_setting_range():
    with pytest.raises(ValidationError):
        kraus_from_setting(2, 2, 2)


def test_printed_sign_tables_literal():
    # with X = 0, M(d) is I/sqrt(m) and K_Y * sqrt(m) is the printed A_Y
    A = {m: printed_kraus(m, 2, 0).diagonals * np.sqrt(m) for m in (2, 4, 6)}
    assert np.allclose(A[2], [[1, 1], [1, -1]])
    assert np.allclose(A[4][1], [1, -1j, -1, 1j])
    assert np.allclose(A[4][3], [1, 1j, -1, -1j])
    assert np.allclose(A[4][2], [1, -1, 1, -1])
    for Y in (1, 3, 5):
        assert np.allclose(A[6][Y], [1, -1, 1, -1, 1, -1])
    for Y in (0, 2, 4):
        assert np.allclose(A[6][Y], np.ones(6))


def test_printed_readings_differ_in_m_phase():
    power = printed_kraus(4, 4, 1, "power").diagonals[0] * 2
    product = printed_kraus(4, 4, 1, "product").diagonals[0] * 2
    assert np.allclose(power, np.exp(1j * np.pi * np.array([0, 2, 6, 14]) / 4))
    assert np.allclose(product, np.exp(1j * np.pi * np.array([0, 2, 4, 6]) / 4))


def test_printed_kraus_odd_and_unsupported():
    ks = printed_kraus(3, 3, 1)
    assert np.allclose(ks.diagonals[0], ks.diagonals[2])
    assert ks.complete
    with pytest.raises(UnsupportedParameters):
        printed_kraus(8, 2, 0)
    with pytest.raises(ValidationError):
        printed_kraus(2, 2, 0, "typo")


@pytest.mark.parametrize("boundary", ["projected", "fourier_readout"])
def test_temporal_equals_spatial_322(boundary):
    for X in enumerate_promise_inputs(S322):
        t = temporal_outcome_distribution(S322, X, boundary=boundary)
        assert abs(t.total - 1) <= 1e-9
        assert t.sup_distance(spatial_outcome_distribution(S322, X)) <= 1e-9
    t0 = temporal_outcome_distribution(S322, (0, 0, 0))
    assert abs(win_probability(t0, (0, 0, 0), S322) - 1) <= 1e-9


@pytest.mark.parametrize("spec", [GameSpec(4, 3, 5), GameSpec(3, 5, 2), GameSpec(5, 2, 8)])
def test_temporal_equals_spatial_other_specs(spec):
    for X in enumerate_promise_inputs(spec):
        s = spatial_outcome_distribution(spec, X)
        assert temporal_outcome_distribution(spec, X).sup_distance(s) <= 1e-9
        assert temporal_outcome_distribution(spec, X, boundary="fourier_readout").sup_distance(s) <= 1e-9
        assert abs(win_probability(s, X, spec) - 1) <= 1e-9


def test_temporal_flags_unnormalized_variant():
    spec = GameSpec(3, 6, 6)
    with pytest.raises(NormalizationError) as info:
        temporal_outcome_distribution(spec, (1, 2, 3), printed_kraus_provider("power"))
    assert info.value.distribution is not None
    assert abs(info.value.distribution.total - 1) > 1e-9


def test_temporal_errors():
    with pytest.raises(PromiseViolation):
        temporal_outcome_distribution(S322, (1, 0, 0))
    with pytest.raises(CapExceeded):
        temporal_outcome_distribution(GameSpec(21, 2, 2), (0,) * 21)
    with pytest.raises(ValidationError):
        temporal_outcome_distribution(S322, (0, 0, 0), boundary="open")


def test_win_probability_uniform_and_point_masses():
    # oracle: count winning outputs directly
    for X in enumerate_promise_inputs(S322):
        winners = sum(check_win(X, Y, S322) for Y in itertools.product(range(2), repeat=3))
        assert win_probability(OutcomeDistribution.uniform(S322), X, S322) == pytest.approx(winners / 8)
        assert winners == 4
    assert win_probability(OutcomeDistribution.point_mass(S322, (0, 0, 0)), (1, 1, 0), S322) == 0
    assert win_probability(OutcomeDistribution.point_mass(S322, (0, 0, 1)), (1, 1, 0), S322) == 1


def test_phase_expectation_matches_cosine():
    for X in enumerate_promise_inputs(S322):
        phis = [np.pi * x / 2 for x in X]
        E = outcome_phase_expectation(temporal_outcome_distribution(S322, X), 2)
        assert abs(E - np.cos(sum(phis))) <= 1e-9
    assert outcome_phase_expectation(OutcomeDistribution.point_mass(S322, (0, 0, 0)), 2) == pytest.approx(1)


def test_distribution_serialization_floor():
    d = spatial_outcome_distribution(S322, (0, 0, 0))
    out = d.to_dict()
    assert set(out) == {"0,0,0", "0,1,1", "1,0,1", "1,1,0"}
    assert sum(out.values()) == pytest.approx(1)


def test_matrix_to_json():
    assert matrix_to_json(np.diag([1, 1j])) == [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]]


def test_audit_reports_every_reading():
    records = audit_printed_operators()
    assert len(records) == 4 * 3
    by_key = {(r["spec"]["m"], r["spec"]["d"], r["reading"]): r for r in records}
    for key, rec in by_key.items():
        assert isinstance(rec["matches"], bool)
    # literal readings lose the 1/m in the phase and fail; the rescaled reading fixes m = 2, 4
    assert not any(r["matches"] for r in records if r["literal"])
    assert by_key[(2, 2, "product_md")]["matches"]
    assert by_key[(4, 4, "product_md")]["matches"]
    assert not by_key[(6, 6, "product_md")]["matches"]
    assert by_key[(6, 6, "product_md")]["unnormalized_inputs"] > 0


# --- qubit chains ----------------------------------------------------------------


def _superoperator_oracle(settings, rho):
    """Signed sum over branches collapsed into one linear map per step."""
    pauli = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    for a in settings:
        A = sum(c * p for c, p in zip(a, pauli))
        Pp, Pm = (np.eye(2) + A) / 2, (np.eye(2) - A) / 2
        rho = Pp @ rho @ Pp - Pm @ rho @ Pm
    return np.trace(rho).real


def test_chain_two_point():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a1, a2 = random_bloch_settings(2, rng)
        assert abs(qubit_projective_chain([a1, a2]) - a1 @ a2) <= 1e-9


def test_chain_three_point_vanishes():
    rng = np.random.default_rng(4)
    for _ in range(10):
        assert abs(qubit_projective_chain(random_bloch_settings(3, rng))) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 4, 6]), st.integers(0, 2**32 - 1))
def test_chain_pair_factorization(n, seed):
    a = random_bloch_settings(n, np.random.default_rng(seed))
    expected = np.prod([a[i] @ a[i + 1] for i in range(0, n, 2)])
    assert abs(qubit_projective_chain(a) - expected) <= 1e-9


def test_chain_matches_superoperator_oracle_from_pure_state():
    rng = np.random.default_rng(8)
    for n in (2, 3, 4, 5):
        a = random_bloch_settings(n, rng)
        v = random_bloch_settings(1, rng)[0]
        rho = (np.eye(2) + v[0] * np.array([[0, 1], [1, 0]]) + v[1] * np.array([[0, -1j], [1j, 0]])
               + v[2] * np.diag([1, -1])) / 2
        assert abs(qubit_projective_chain(a, rho) - _superoperator_oracle(a, rho)) <= 1e-12


def test_pure_initial_state_breaks_mixed_state_factorization():
    # starting along a1 fixes the first outcome to +1, so E = a2 . a3 instead of 0
    a = random_bloch_settings(3, np.random.default_rng(9))
    up = np.eye(2) / 2 + sum(c * p for c, p in zip(a[0], [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])])) / 2
    E = qubit_projective_chain(a, up)
    assert abs(E - a[1] @ a[2]) <= 1e-9
    assert abs(qubit_projective_chain(a, MAXIMALLY_MIXED)) <= 1e-9


def test_chain_validation():
    with pytest.raises(ValidationError):
        qubit_projective_chain([[1, 0, 0]])
    with pytest.raises(ValidationError):
        qubit_projective_chain([[1, 0, 0], [1, 1, 0]])
    with pytest.raises(CapExceeded):
        qubit_projective_chain([[0, 0, 1]] * 12, cap=2**10)
