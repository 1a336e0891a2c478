"""Exact simulation of GHZ-type correlations, spatial and temporal.

Spatial: ``n`` parties share the m-level GHZ state, party ``k`` applies
``F_m^dagger (S_dm)^{X_k}`` and measures in the computational basis.

Temporal: a single qumit prepared in ``|+_m>`` passes through ``n`` diagonal
measurements. The operator for setting ``X`` and outcome ``Y`` is
``[K_Y]_{ii} = <Y| F_m^dagger (S_dm)^X |i>``, read off from the bond tensors
of the GHZ matrix product state. Outcome paths are enumerated explicitly,
which is cheap because every operator is diagonal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CapExceeded, NormalizationError, UnsupportedParameters, ValidationError
from .games import GameSpec, require_promise, validate_outputs

DEFAULT_STATE_CAP = 2**20
DEFAULT_PATH_CAP = 2**20
MASS_TOLERANCE = 1e-9
SERIALIZE_FLOOR = 1e-14

PRINTED_READINGS = ("power", "product", "product_md")


def fourier_matrix(m: int) -> np.ndarray:
    """``F[a, b] = exp(2*pi*i*a*b/m) / sqrt(m)``."""
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    a = np.arange(m)
    return np.exp(2j * np.pi * np.outer(a, a) / m) / np.sqrt(m)


def phase_matrix(m: int, d: int, X: int = 1) -> np.ndarray:
    """``(S_dm)^X``: diagonal with entries ``exp(2*pi*i*b*X/(d*m))``."""
    if m < 2 or d < 2:
        raise ValidationError(f"m and d must be >= 2, got m={m}, d={d}")
    b = np.arange(m)
    return np.diag(np.exp(2j * np.pi * b * X / (d * m)))


def local_unitary(m: int, d: int, X: int) -> np.ndarray:
    return fourier_matrix(m).conj().T @ phase_matrix(m, d, X)


def ghz_state(n: int, m: int, cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """GHZ amplitudes as an ``(m,) * n`` tensor."""
    if n < 1 or m < 2:
        raise ValidationError(f"need n >= 1, m >= 2, got n={n}, m={m}")
    if m**n > cap:
        raise CapExceeded(f"GHZ state needs m^n = {m}^{n} amplitudes, cap is {cap}")
    psi = np.zeros((m,) * n, dtype=complex)
    for i in range(m):
        psi[(i,) * n] = 1 / np.sqrt(m)
    return psi


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint outcome probabilities stored as an ``(m,) * n`` tensor indexed by Y."""

    spec: GameSpec
    probs: np.ndarray

    def __post_init__(self):
        expected = (self.spec.m,) * self.spec.n
        if self.probs.shape != expected:
            raise ValidationError(f"probability tensor has shape {self.probs.shape}, expected {expected}")

    def __getitem__(self, Y) -> float:
        return float(self.probs[validate_outputs(Y, self.spec)])

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def items(self):
        for Y in itertools.product(range(self.spec.m), repeat=self.spec.n):
            yield Y, float(self.probs[Y])

    def sup_distance(self, other: "OutcomeDistribution") -> float:
        return float(np.max(np.abs(self.probs - other.probs)))

    def to_dict(self) -> dict:
        """Outcome strings ("0,1,0") to probabilities; values below 1e-14 are dropped."""
        return {",".join(map(str, Y)): p for Y, p in self.items() if p >= SERIALIZE_FLOOR}

    @classmethod
    def uniform(cls, spec: GameSpec) -> "OutcomeDistribution":
        return cls(spec, np.full((spec.m,) * spec.n, spec.m ** (-spec.n)))

    @classmethod
    def point_mass(cls, spec: GameSpec, Y) -> "OutcomeDistribution":
        probs = np.zeros((spec.m,) * spec.n)
        probs[validate_outputs(Y, spec)] = 1.0
        return cls(spec, probs)


def _check_normalized(dist: OutcomeDistribution, label: str) -> OutcomeDistribution:
    if abs(dist.total - 1.0) > MASS_TOLERANCE:
        raise NormalizationError(f"{label}: total mass {dist.total!r} deviates from 1", dist)
    return dist


def spatial_outcome_distribution(spec: GameSpec, X: Sequence[int], cap: int = DEFAULT_STATE_CAP) -> OutcomeDistribution:
    """Full state-vector simulation of the shared-GHZ protocol."""
    X = require_promise(X, spec)
    psi = ghz_state(spec.n, spec.m, cap)
    for k, x in enumerate(X):
        U = local_unitary(spec.m, spec.d, x)
        psi = np.moveaxis(np.tensordot(U, psi, axes=([1], [k])), 0, k)
    return _check_normalized(OutcomeDistribution(spec, np.abs(psi) ** 2), "spatial")


@dataclass(frozen=True)
class KrausSet:
    """Diagonal measurement operators for one setting.

    ``diagonals[Y, i]`` is the ``(i, i)`` entry of ``K_Y``.
    """

    setting: int
    diagonals: np.ndarray
    provenance: str = "derived"
    complete: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "complete", self.completeness_defect() <= 1e-10)

    @property
    def m(self) -> int:
        return self.diagonals.shape[1]

    def matrices(self) -> np.ndarray:
        """Dense operators, shape ``(outcomes, m, m)``."""
        return np.stack([np.diag(row) for row in self.diagonals])

    def completeness_defect(self) -> float:
        """Max-norm distance of ``sum_Y K_Y^dagger K_Y`` from the identity."""
        gram = np.sum(np.abs(self.diagonals) ** 2, axis=0)
        return float(np.max(np.abs(gram - 1.0)))


def kraus_from_setting(m: int, d: int, X: int) -> KrausSet:
    if m < 2 or d < 2:
        raise ValidationError(f"m and d must be >= 2, got m={m}, d={d}")
    if not 0 <= X < d:
        raise ValidationError(f"setting {X} outside {{0..{d - 1}}}")
    return KrausSet(int(X), local_unitary(m, d, X), "derived")


def printed_sign_table(m: int) -> np.ndarray:
    """The printed A_Y diagonals for m in {2, 4, 6}, rows indexed by Y."""
    if m == 2:
        rows = [[1, 1], [1, -1]]
    elif m == 4:
        rows = [[1, 1, 1, 1], [1, -1j, -1, 1j], [1, -1, 1, -1], [1, 1j, -1, -1j]]
    elif m == 6:
        even, odd = [1] * 6, [1, -1, 1, -1, 1, -1]
        rows = [even, odd, even, odd, even, odd]
    else:
        raise UnsupportedParameters(f"no sign table is printed for m={m}")
    return np.array(rows, dtype=complex)


def printed_kraus(m: int, d: int, X: int, variant: str = "power") -> KrausSet:
    """Printed closed-form operators ``K_Y = A_Y M(d)`` under one reading of M(d).

    The j-th diagonal entry of M(d) (j = 1..m) is
    ``exp(i*X*pi*e_j/d)/sqrt(m)`` with

    * ``"power"``:      ``e_j = 2**j - 2``
    * ``"product"``:    ``e_j = 2*j - 2``
    * ``"product_md"``: ``e_j = (2*j - 2)/m``, M(d) under this reading equals the
      phase part of the bond-space operators.

    Odd m uses ``K_Y = M`` for every outcome. Completeness is computed, not
    assumed (see ``KrausSet.complete``).
    """
    if variant not in PRINTED_READINGS:
        raise ValidationError(f"unknown reading {variant!r}; choose from {PRINTED_READINGS}")
    if m % 2 == 0 and m not in (2, 4, 6):
        raise UnsupportedParameters(f"even m={m} has no printed sign table")
    if not 0 <= X < d:
        raise ValidationError(f"setting {X} outside {{0..{d - 1}}}")
    j = np.arange(1, m + 1, dtype=float)
    if variant == "power":
        exponent = 2.0**j - 2
    elif variant == "product":
        exponent = 2 * j - 2
    else:
        exponent = (2 * j - 2) / m
    M = np.exp(1j * X * np.pi * exponent / d) / np.sqrt(m)
    signs = np.ones((m, m), dtype=complex) if m % 2 else printed_sign_table(m)
    return KrausSet(int(X), signs * M[None, :], f"printed:{variant}")


def printed_kraus_provider(variant: str) -> Callable[[int, int, int], KrausSet]:
    def provider(m, d, X):
        return printed_kraus(m, d, X, variant)

    provider.__name__ = f"printed_kraus[{variant}]"
    return provider


def _path_amplitudes(spec: GameSpec, X, kraus_provider) -> np.ndarray:
    """Products of diagonal entries along every outcome path, shape ``(m,)*n + (m,)``."""
    m = spec.m
    cache = {}
    T = None
    for x in X:
        if x not in cache:
            ks = kraus_provider(m, spec.d, x)
            if ks.diagonals.shape != (m, m):
                raise ValidationError(f"Kraus provider returned shape {ks.diagonals.shape}, expected {(m, m)}")
            cache[x] = ks.diagonals
        D = cache[x]
        T = D if T is None else T[..., None, :] * D
    return T


def temporal_outcome_distribution(
    spec: GameSpec,
    X: Sequence[int],
    kraus_provider: Callable[[int, int, int], KrausSet] = kraus_from_setting,
    boundary: str = "projected",
    cap: int = DEFAULT_PATH_CAP,
) -> OutcomeDistribution:
    """Outcome distribution of the single-qumit measurement chain.

    ``boundary="projected"`` contracts both ends with ``|+_m>`` and scales by m:
    ``P(Y) = m |<+| K_{Y_n} ... K_{Y_1} |+>|^2``.

    ``boundary="fourier_readout"`` is the physical realisation of the same
    statistics: after the last operator the qumit is measured in the Fourier
    basis and that result ``j`` is added (mod m) to the last party's output.

    Raises NormalizationError (carrying the distribution) when the mass is
    off by more than 1e-9; nothing is renormalised.
    """
    X = require_promise(X, spec)
    m = spec.m
    if m**spec.n > cap:
        raise CapExceeded(f"{m}^{spec.n} outcome paths exceed cap {cap}")
    T = _path_amplitudes(spec, X, kraus_provider)
    if boundary == "projected":
        amp = T.sum(axis=-1) / m
        probs = m * np.abs(amp) ** 2
    elif boundary == "fourier_readout":
        F = fourier_matrix(m)
        # <f_j| D |+> for every path and readout j; the readout shifts Y_n
        readout = np.abs(T @ F.conj() / np.sqrt(m)) ** 2
        probs = np.zeros((m,) * spec.n)
        for j in range(m):
            probs += np.roll(readout[..., j], j, axis=-1)
    else:
        raise ValidationError(f"unknown boundary {boundary!r}")
    label = getattr(kraus_provider, "__name__", "kraus")
    return _check_normalized(OutcomeDistribution(spec, probs), f"temporal[{label}, {boundary}]")


def _output_sums(spec: GameSpec) -> np.ndarray:
    total = np.zeros((), dtype=np.int64)
    for _ in range(spec.n):
        total = total[..., None] + np.arange(spec.m)
    return total


def win_probability(dist: OutcomeDistribution, X: Sequence[int], spec: GameSpec) -> float:
    X = require_promise(X, spec)
    wins = (spec.d * _output_sums(spec) - sum(X)) % spec.modulus == 0
    return float(dist.probs[wins].sum())


def outcome_phase_expectation(dist: OutcomeDistribution, m: int) -> complex:
    """``E[exp(2*pi*i*sum(Y)/m)]``; for m = 2 this is the product correlation of +-1 outcomes."""
    phases = np.exp(2j * np.pi * _output_sums(dist.spec) / m)
    return complex(np.sum(dist.probs * phases))


def matrix_to_json(matrix: np.ndarray) -> list:
    """Nested lists of ``[re, im]`` pairs."""
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


# --- qubit projective chains -------------------------------------------------

_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]],
    dtype=complex,
)
MAXIMALLY_MIXED = np.eye(2, dtype=complex) / 2


def bloch_setting(vector) -> np.ndarray:
    a = np.asarray(vector, dtype=float)
    if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValidationError(f"Bloch setting must be a unit 3-vector, got {vector!r}")
    return a


def random_bloch_settings(count: int, rng) -> np.ndarray:
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def qubit_projective_chain(settings, rho0: np.ndarray = MAXIMALLY_MIXED, cap: int = DEFAULT_PATH_CAP) -> float:
    """``E[a_1 ... a_n]`` for sequential +-1 projective measurements with Lueders collapse.

    Evaluated exactly over the full branch tree.
    """
    settings = [bloch_setting(a) for a in settings]
    if len(settings) < 2:
        raise ValidationError("need at least two settings")
    if 2 ** len(settings) > cap:
        raise CapExceeded(f"2^{len(settings)} branches exceed cap {cap}")
    branches = [(1, np.asarray(rho0, dtype=complex))]
    for a in settings:
        a_sigma = np.tensordot(a, _PAULI, axes=1)
        projectors = ((1, (np.eye(2) + a_sigma) / 2), (-1, (np.eye(2) - a_sigma) / 2))
        branches = [(sign * s, P @ rho @ P) for sign, rho in branches for s, P in projectors]
    return float(sum(sign * np.trace(rho).real for sign, rho in branches))


# --- printed-operator audit --------------------------------------------------

AUDIT_SPECS = (GameSpec(3, 2, 2), GameSpec(4, 2, 4), GameSpec(3, 4, 4), GameSpec(3, 6, 6))


def audit_printed_operators(specs: Sequence[GameSpec] = AUDIT_SPECS, tolerance: float = 1e-9) -> list:
    """Compare every printed reading against the spatial distribution on all promise inputs.

    One record per (spec, reading): worst sup-norm distance over normalised
    runs, number of inputs whose chain was not normalised, and ``matches``.
    """
    from .games import enumerate_promise_inputs

    records = []
    for spec in specs:
        spatial = {X: spatial_outcome_distribution(spec, X) for X in enumerate_promise_inputs(spec)}
        for reading in PRINTED_READINGS:
            provider = printed_kraus_provider(reading)
            worst, unnormalized, worst_mass_error = 0.0, 0, 0.0
            for X, reference in spatial.items():
                try:
                    dist = temporal_outcome_distribution(spec, X, provider)
                except NormalizationError as exc:
                    unnormalized += 1
                    dist = exc.distribution
                    worst_mass_error = max(worst_mass_error, abs(dist.total - 1.0))
                worst = max(worst, reference.sup_distance(dist))
            records.append(
                {
                    "spec": spec.to_dict(),
                    "reading": reading,
                    "literal": reading != "product_md",
                    "inputs": len(spatial),
                    "sup_distance": worst,
                    "unnormalized_inputs": unnormalized,
                    "worst_mass_error": worst_mass_error,
                    "matches": unnormalized == 0 and worst <= tolerance,
                }
            )
    return records
