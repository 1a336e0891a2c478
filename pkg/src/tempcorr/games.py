"""The sequential modulo-(m, d) game.

``n`` ordered parties receive residues ``X_k`` in ``{0, ..., d-1}`` with the
promise ``sum(X) % d == 0`` and must output residues ``Y_k`` in
``{0, ..., m-1}`` such that ``d * sum(Y) == sum(X)  (mod m*d)``.

Inputs and outputs are plain tuples of ints. Batches of inputs are
``(count, n)`` integer arrays.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapExceeded, PromiseViolation, ValidationError

DEFAULT_ENUMERATION_CAP = 10**6


def is_power_of_two(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class GameSpec:
    n: int
    m: int
    d: int

    def __post_init__(self):
        for name in ("n", "m", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise ValidationError(f"{name} must be >= 2, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def bound_applicable(self) -> bool:
        """True when the communication lower bound's hypotheses hold (m even, d = 2^s)."""
        return self.m % 2 == 0 and is_power_of_two(self.d)

    @property
    def modulus(self) -> int:
        return self.m * self.d

    @property
    def promise_count(self) -> int:
        return self.d ** (self.n - 1)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "GameSpec":
        return cls(int(data["n"]), int(data["m"]), int(data["d"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __str__(self):
        return f"(n={self.n}, m={self.m}, d={self.d})"


def _validate_vector(values: Sequence[int], spec: GameSpec, alphabet: int, what: str) -> tuple:
    values = tuple(int(v) for v in values)
    if len(values) != spec.n:
        raise ValidationError(f"{what} has length {len(values)}, expected n={spec.n}")
    for k, v in enumerate(values):
        if not 0 <= v < alphabet:
            raise ValidationError(f"{what}[{k}] = {v} outside {{0..{alphabet - 1}}}")
    return values


def validate_inputs(X: Sequence[int], spec: GameSpec) -> tuple:
    return _validate_vector(X, spec, spec.d, "input")


def validate_outputs(Y: Sequence[int], spec: GameSpec) -> tuple:
    return _validate_vector(Y, spec, spec.m, "output")


def check_promise(X: Sequence[int], spec: GameSpec) -> bool:
    X = validate_inputs(X, spec)
    return sum(X) % spec.d == 0


def require_promise(X: Sequence[int], spec: GameSpec) -> tuple:
    X = validate_inputs(X, spec)
    if sum(X) % spec.d:
        raise PromiseViolation(f"sum of inputs {X} is {sum(X)}, not divisible by d={spec.d}")
    return X


def check_win(X: Sequence[int], Y: Sequence[int], spec: GameSpec) -> bool:
    """Winning predicate ``d*sum(Y) == sum(X) (mod m*d)``.

    Raises PromiseViolation off-promise: the game does not define a winner there.
    """
    X = require_promise(X, spec)
    Y = validate_outputs(Y, spec)
    return (spec.d * sum(Y) - sum(X)) % spec.modulus == 0


def win_mask(X: np.ndarray, Y: np.ndarray, spec: GameSpec) -> np.ndarray:
    """Vectorised check_win over row-aligned batches; the promise is asserted, not re-validated."""
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    return (spec.d * Y.sum(axis=-1) - X.sum(axis=-1)) % spec.modulus == 0


def _check_cap(spec: GameSpec, cap: int) -> None:
    if spec.promise_count > cap:
        raise CapExceeded(
            f"instance too large, use sampling: {spec} has d^(n-1) = "
            f"{spec.d}^{spec.n - 1} promise inputs, cap is {cap}"
        )


def enumerate_promise_inputs(spec: GameSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple]:
    """Yield every promise input once, lexicographic in the first n-1 entries."""
    _check_cap(spec, cap)
    for head in itertools.product(range(spec.d), repeat=spec.n - 1):
        yield head + ((-sum(head)) % spec.d,)


def promise_input_array(spec: GameSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """All promise inputs as a ``(d^(n-1), n)`` array, same order as enumerate_promise_inputs."""
    _check_cap(spec, cap)
    count = spec.promise_count
    out = np.empty((count, spec.n), dtype=np.int64)
    # mixed-radix digits of the row index, most significant first
    idx = np.arange(count, dtype=np.int64)
    for k in range(spec.n - 2, -1, -1):
        out[:, k] = idx % spec.d
        idx //= spec.d
    out[:, -1] = (-out[:, :-1].sum(axis=1)) % spec.d
    return out


def sample_promise_inputs(spec: GameSpec, count: int, seed) -> np.ndarray:
    """Uniform sample over the promise set: free head, forced last coordinate."""
    rng = np.random.default_rng(seed)
    out = np.empty((count, spec.n), dtype=np.int64)
    out[:, :-1] = rng.integers(0, spec.d, size=(count, spec.n - 1))
    out[:, -1] = (-out[:, :-1].sum(axis=1)) % spec.d
    return out
