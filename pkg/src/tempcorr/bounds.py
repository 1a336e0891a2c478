"""Communication-bound calculators.

All quantities are in bits. A qumit's classical capacity is ``log2 m``;
the lower bound for the modulo-(m, d) game is ``log2(d/m)`` bits in all but
at most ``m*d - 1`` stages (m even, d a power of two).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

from .errors import UnsupportedParameters, ValidationError
from .games import GameSpec


def holevo_bits(m: int) -> float:
    if m < 2:
        raise ValidationError(f"m must be >= 2, got {m}")
    return math.log2(m)


def next_power_of_two_above(x: int) -> int:
    """Smallest power of two strictly greater than ``x``."""
    return 1 << max(0, int(x)).bit_length()


@dataclass(frozen=True)
class NonclassicalityPlan:
    m: int
    d: int
    n_min: int
    n_cubic: int  # 2 m^3
    n_stages: int  # m d
    holevo_bits: float
    required_bits_per_stage: float
    max_exempt_stages: int

    def to_dict(self) -> dict:
        return asdict(self)


def plan_nonclassical_params(m: int) -> NonclassicalityPlan:
    """Game parameters whose quantum solution beats every Holevo-limited classical one.

    ``d`` is the smallest power of two above ``m^2`` (so ``log2(d/m) > log2 m``)
    and ``n_min = max(2 m^3, m d)``; both thresholds are reported.
    """
    if m < 2 or m % 2:
        raise UnsupportedParameters(f"the lower bound is proved for even m only, got m={m}")
    d = next_power_of_two_above(m * m)
    plan = NonclassicalityPlan(
        m=m,
        d=d,
        n_min=max(2 * m**3, m * d),
        n_cubic=2 * m**3,
        n_stages=m * d,
        holevo_bits=holevo_bits(m),
        required_bits_per_stage=math.log2(d / m),
        max_exempt_stages=m * d - 1,
    )
    assert d > m * m and d <= 2 * m * m and plan.n_min >= m * d
    assert plan.required_bits_per_stage > plan.holevo_bits
    return plan


def required_communication(spec: GameSpec) -> dict:
    if not spec.bound_applicable:
        raise UnsupportedParameters(f"{spec}: need m even and d a power of 2")
    return {
        "bits_per_stage": math.log2(spec.d / spec.m),
        "max_exempt_stages": spec.m * spec.d - 1,
        "exceeds_holevo": spec.d > spec.m**2,
    }


@dataclass(frozen=True)
class SweepRow:
    n: int
    epsilon: float
    m: int
    d: int
    bits_per_stage: float
    exempt_stages: int
    exempt_fraction: float
    vacuous: bool
    theta_constant: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


def asymptotic_sweep(n: int, epsilon: float, m: int = 2, theta_constant: float = 1.0) -> SweepRow:
    """Instantiate ``d = Theta(n^epsilon)`` as the smallest power of two >= c * n^epsilon.

    The row is vacuous (no bound) when ``d <= m``.
    """
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 4:
        raise ValidationError(f"n must be >= 4, got {n}")
    if m < 2 or m % 2:
        raise UnsupportedParameters(f"m must be even, got {m}")
    target = theta_constant * n**epsilon
    # guard against 2^20 ** 0.5 landing a hair above 1024
    s = max(0, math.ceil(math.log2(target) - 1e-9))
    d = 2**s
    vacuous = d <= m
    exempt = m * d - 1
    return SweepRow(
        n=n,
        epsilon=epsilon,
        m=m,
        d=d,
        bits_per_stage=0.0 if vacuous else math.log2(d / m),
        exempt_stages=exempt,
        exempt_fraction=min(1.0, exempt / n),
        vacuous=vacuous,
        theta_constant=theta_constant,
    )


SWEEP_COLUMNS = ("n", "epsilon", "d", "bits_per_stage", "exempt_stages", "exempt_fraction")


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([getattr(row, c) for c in SWEEP_COLUMNS])
    return buf.getvalue()
