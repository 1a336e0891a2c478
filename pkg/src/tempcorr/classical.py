"""Sequential classical protocols with bounded forward communication.

A protocol is a list of ``n`` finite lookup tables. Stage ``k`` (1-based)
maps ``(X_k, incoming message)`` to ``(Y_k, outgoing message)``; stage 1
always receives message 0 and stage ``n`` always sends message 0. Tables
rather than callables keep protocols enumerable and serialisable.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import PromiseViolation, ProtocolInvalid, ValidationError
from .games import (
    DEFAULT_ENUMERATION_CAP,
    GameSpec,
    promise_input_array,
    sample_promise_inputs,
    validate_inputs,
    win_mask,
)


@dataclass(frozen=True)
class StageBudget:
    """Message alphabet sizes ``|M_1|, ..., |M_{n-1}|``; size 1 means silence."""

    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 1 for s in sizes):
            raise ValidationError(f"alphabet sizes must be >= 1, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def bits(self) -> tuple:
        return tuple(math.log2(s) for s in self.sizes)

    def __len__(self):
        return len(self.sizes)

    @classmethod
    def uniform(cls, n: int, size: int) -> "StageBudget":
        return cls((size,) * (n - 1))

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "StageBudget":
        return cls.uniform(n, 2**bits)


def _alphabets(spec: GameSpec, budgets: StageBudget):
    if len(budgets) != spec.n - 1:
        raise ValidationError(f"need {spec.n - 1} stage budgets, got {len(budgets)}")
    incoming = (1,) + budgets.sizes
    outgoing = budgets.sizes + (1,)
    return incoming, outgoing


@dataclass(frozen=True, eq=False)
class ClassicalProtocol:
    spec: GameSpec
    budgets: StageBudget
    outputs: tuple
    messages: tuple

    def __post_init__(self):
        incoming, outgoing = _alphabets(self.spec, self.budgets)
        if len(self.outputs) != self.spec.n or len(self.messages) != self.spec.n:
            raise ProtocolInvalid(f"need {self.spec.n} stage tables")
        outs, msgs = [], []
        for k in range(self.spec.n):
            shape = (self.spec.d, incoming[k])
            out = np.array(self.outputs[k], dtype=np.int64)
            msg = np.array(self.messages[k], dtype=np.int64)
            if out.shape != shape or msg.shape != shape:
                raise ProtocolInvalid(f"stage {k + 1} tables have shapes {out.shape}, {msg.shape}; expected {shape}")
            if out.min() < 0 or out.max() >= self.spec.m:
                raise ProtocolInvalid(f"stage {k + 1} emits an output outside {{0..{self.spec.m - 1}}}")
            if msg.min() < 0 or msg.max() >= outgoing[k]:
                raise ProtocolInvalid(f"stage {k + 1} emits a message outside {{0..{outgoing[k] - 1}}}")
            out.flags.writeable = False
            msg.flags.writeable = False
            outs.append(out)
            msgs.append(msg)
        object.__setattr__(self, "outputs", tuple(outs))
        object.__setattr__(self, "messages", tuple(msgs))

    def stage(self, k: int, x: int, incoming: int) -> tuple:
        """Evaluate stage ``k`` (1-based) on one input; returns ``(Y_k, M_k)``."""
        return int(self.outputs[k - 1][x, incoming]), int(self.messages[k - 1][x, incoming])

    @cached_property
    def packed(self) -> tuple:
        """Tables padded to ``(n, d, max alphabet)`` with -1, as consumed by the kernels."""
        width = max(1, *self.budgets.sizes)
        out = np.full((self.spec.n, self.spec.d, width), -1, dtype=np.int64)
        msg = np.full_like(out, -1)
        for k in range(self.spec.n):
            out[k, :, : self.outputs[k].shape[1]] = self.outputs[k]
            msg[k, :, : self.messages[k].shape[1]] = self.messages[k]
        return out, msg

    def fingerprint(self) -> str:
        h = hashlib.sha256(repr((self.spec.to_dict(), self.budgets.sizes)).encode())
        for out, msg in zip(self.outputs, self.messages):
            h.update(out.tobytes())
            h.update(msg.tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        tables = [
            [[[int(out[x, g]), int(msg[x, g])] for g in range(out.shape[1])] for x in range(out.shape[0])]
            for out, msg in zip(self.outputs, self.messages)
        ]
        return {"spec": self.spec.to_dict(), "budgets": list(self.budgets.sizes), "tables": tables}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassicalProtocol":
        spec = GameSpec.from_dict(data["spec"])
        budgets = StageBudget(tuple(data["budgets"]))
        outputs, messages = [], []
        for table in data["tables"]:
            arr = np.array(table, dtype=np.int64)
            if arr.ndim != 3 or arr.shape[-1] != 2:
                raise ProtocolInvalid("each table entry must be an [output, message] pair")
            outputs.append(arr[..., 0])
            messages.append(arr[..., 1])
        return cls(spec, budgets, tuple(outputs), tuple(messages))


@dataclass(frozen=True)
class Transcript:
    X: tuple
    messages: tuple  # M_0 .. M_n
    Y: tuple

    def to_dict(self) -> dict:
        return {"inputs": list(self.X), "messages": list(self.messages), "outputs": list(self.Y)}

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        return cls(tuple(data["inputs"]), tuple(data["messages"]), tuple(data["outputs"]))


def run_batch(p: ClassicalProtocol, inputs: np.ndarray) -> tuple:
    """Replay ``p`` on every row of ``inputs``; returns ``(Y, M)`` arrays."""
    out, msg = p.packed
    try:
        return kernels.run_batch(out, msg, np.asarray(inputs, dtype=np.int64))
    except ValueError as exc:
        raise ProtocolInvalid(str(exc)) from exc


def run_protocol(p: ClassicalProtocol, X: Sequence[int]) -> Transcript:
    """Run all stages on one input. The promise is not required."""
    X = validate_inputs(X, p.spec)
    Y, M = run_batch(p, np.array([X], dtype=np.int64))
    return Transcript(X, tuple(int(v) for v in M[0]), tuple(int(v) for v in Y[0]))


@dataclass
class VerificationReport:
    spec: GameSpec
    mode: str
    total: int
    wins: int
    failing_input: Optional[tuple] = None
    seed: Optional[int] = None

    @property
    def win_rate(self) -> float:
        return self.wins / self.total if self.total else 1.0

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "mode": self.mode,
            "seed": self.seed,
            "total": self.total,
            "wins": self.wins,
            "win_rate": self.win_rate,
            "failing_input": list(self.failing_input) if self.failing_input is not None else None,
        }


def verify_protocol(
    p: ClassicalProtocol,
    spec: Optional[GameSpec] = None,
    mode: str = "exhaustive",
    count: int = 10_000,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> VerificationReport:
    """Win rate over promise inputs and the earliest failing one.

    ``mode="exhaustive"`` walks every promise input in enumeration order;
    ``mode="sampled"`` draws ``count`` uniform promise inputs from ``seed``.
    """
    spec = spec or p.spec
    if spec != p.spec:
        raise ValidationError(f"protocol is for {p.spec}, asked to verify against {spec}")
    if mode == "exhaustive":
        inputs = promise_input_array(spec, cap)
        seed = None
    elif mode == "sampled":
        inputs = sample_promise_inputs(spec, count, seed)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    Y, _ = run_batch(p, inputs)
    wins = win_mask(inputs, Y, spec)
    failing = None
    if not wins.all():
        failing = tuple(int(v) for v in inputs[int(np.argmin(wins))])
    return VerificationReport(spec, mode, len(inputs), int(wins.sum()), failing, seed)


def constant_protocol(spec: GameSpec, budgets: Optional[StageBudget] = None) -> ClassicalProtocol:
    """Every stage outputs 0 and sends 0."""
    budgets = budgets or StageBudget.uniform(spec.n, 1)
    incoming, _ = _alphabets(spec, budgets)
    zeros = tuple(np.zeros((spec.d, a), dtype=np.int64) for a in incoming)
    return ClassicalProtocol(spec, budgets, zeros, zeros)


def parity_protocol(n: int) -> ClassicalProtocol:
    """One-bit parity-tracking protocol for the modulo-(2, 2) game.

    Party i outputs 1 iff ``X_i == M_{i-1} == 1`` and forwards
    ``(X_i + M_{i-1}) mod 2``. The last party's message is always 0 here;
    on promise inputs the parity it would carry is 0 anyway.
    """
    spec = GameSpec(n, 2, 2)
    budgets = StageBudget.uniform(n, 2)
    x = np.arange(2)[:, None]
    outputs, messages = [], []
    for k in range(n):
        g = np.arange(1 if k == 0 else 2)[None, :]
        outputs.append(x & g)
        messages.append((x + g) % 2 if k < n - 1 else np.zeros((2, g.shape[1]), dtype=np.int64))
    return ClassicalProtocol(spec, budgets, tuple(outputs), tuple(messages))


def parity_prefix_violations(X: np.ndarray, Y: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Rows of a batch run where ``sum_{i<=j} X_i == M_j + 2 sum_{i<=j} Y_i`` fails for some j.

    For ``j = n`` the parity rule's value ``(X_n + M_{n-1}) mod 2`` stands in
    for the final message, so the check is meaningful off-promise too.
    """
    X = np.asarray(X, dtype=np.int64)
    M = np.array(M, dtype=np.int64)
    M[:, -1] = (X[:, -1] + M[:, -2]) % 2
    lhs = np.cumsum(X, axis=1)
    rhs = M[:, 1:] + 2 * np.cumsum(Y, axis=1)
    return np.flatnonzero((lhs != rhs).any(axis=1))


def ghz_paradox_1bit_correlation(phis: Sequence[float]) -> int:
    """Product of +-1 outcomes of the one-bit protocol for settings in {0, pi/2}.

    Setting ``phi_k`` maps to the game input ``X_k = 2*phi_k/pi``. Equals
    ``cos(sum(phi))`` on every promise configuration; single-party marginals
    are not reproduced.
    """
    phis = [float(p) for p in phis]
    if len(phis) < 3:
        raise ValidationError("need at least three parties")
    X = []
    for phi in phis:
        x = round(2 * phi / math.pi)
        if x not in (0, 1) or abs(phi - x * math.pi / 2) > 1e-12:
            raise ValidationError(f"setting {phi} is not 0 or pi/2")
        X.append(x)
    if sum(X) % 2:
        raise PromiseViolation(f"sum of settings {sum(phis)} is not a multiple of pi")
    t = run_protocol(parity_protocol(len(X)), X)
    return (-1) ** sum(t.Y)


# --- Toner-Bacon ------------------------------------------------------------

TONER_BACON_CONVENTION = "first setting reflected (a1 -> -a1) in the singlet protocol"
_CHUNK = 2**18


def _sign(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0, 1, -1)


def _unit_vectors(rng, count: int) -> np.ndarray:
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _toner_bacon_block(a1, a2, rng, count: int, reflect_first: bool) -> np.ndarray:
    """Products of the two outputs for ``count`` shared-randomness draws.

    Singlet protocol: Alice outputs ``-sgn(a.l1)`` and sends the bit
    ``c = sgn(a.l1) sgn(a.l2)``; Bob outputs ``sgn(b.(l1 + c l2))``.
    """
    l1 = _unit_vectors(rng, count)
    l2 = _unit_vectors(rng, count)
    a = -np.asarray(a1) if reflect_first else np.asarray(a1)
    s1, s2 = _sign(l1 @ a), _sign(l2 @ a)
    alpha = -s1
    c = s1 * s2
    beta = _sign((l1 + c[:, None] * l2) @ np.asarray(a2))
    return alpha * beta


def toner_bacon_temporal(a1, a2, samples: int, seed, reflect_first: bool = True) -> float:
    """Monte Carlo estimate of ``E[alpha_1 alpha_2]``; converges to ``a1 . a2`` when reflected."""
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    total, done = 0, 0
    while done < samples:
        c = min(_CHUNK, samples - done)
        total += int(_toner_bacon_block(a1, a2, rng, c, reflect_first).sum())
        done += c
    return total / samples


def calibrate_reflection(samples: int = 20_000, seed: int = 0) -> bool:
    """Whether the first setting must be reflected for the two-point estimator to equal +a1.a2.

    Runs the unreflected singlet protocol at ``a1 == a2``, where the target
    is +1.
    """
    z = np.array([0.0, 0.0, 1.0])
    return toner_bacon_temporal(z, z, samples, seed, reflect_first=False) < 0


def toner_bacon_chain(settings, samples: int, seed, reflect_first: bool = True) -> float:
    """Chain of independent two-party blocks ``(a1, a2), (a3, a4), ...``.

    Estimates ``prod_{i odd} a_i . a_{i+1}``. With an odd number of parties
    the last one outputs a fresh uniform sign, so the estimate tends to 0.
    """
    settings = [np.asarray(a, dtype=float) for a in settings]
    if len(settings) < 2:
        raise ValidationError("need at least two settings")
    rng = np.random.default_rng(seed)
    total, done = 0, 0
    while done < samples:
        c = min(_CHUNK, samples - done)
        prod = np.ones(c, dtype=np.int64)
        for i in range(0, len(settings) - 1, 2):
            prod *= _toner_bacon_block(settings[i], settings[i + 1], rng, c, reflect_first)
        if len(settings) % 2:
            prod *= 2 * rng.integers(0, 2, size=c) - 1
        total += int(prod.sum())
        done += c
    return total / samples


# --- protocol generation ------------------------------------------------------


def random_protocol(spec: GameSpec, budgets: StageBudget, seed) -> ClassicalProtocol:
    """Uniformly random tables; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    incoming, outgoing = _alphabets(spec, budgets)
    outputs, messages = [], []
    for k in range(spec.n):
        outputs.append(rng.integers(0, spec.m, size=(spec.d, incoming[k])))
        messages.append(rng.integers(0, outgoing[k], size=(spec.d, incoming[k])))
    return ClassicalProtocol(spec, budgets, tuple(outputs), tuple(messages))


@dataclass
class SearchResult:
    """Outcome of search_protocols.

    ``status`` is "found" (``protocol`` wins every promise input), "none"
    (the whole table space was covered without a winner) or "partial" (the
    node cap stopped the search; nothing is claimed).
    """

    spec: GameSpec
    budgets: StageBudget
    status: str
    nodes: int
    node_cap: int
    protocol: Optional[ClassicalProtocol] = None
    inputs_checked: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "budgets": list(self.budgets.sizes),
            "status": self.status,
            "nodes": self.nodes,
            "node_cap": self.node_cap,
            "inputs_checked": self.inputs_checked,
            "protocol": self.protocol.to_dict() if self.protocol else None,
            "notes": self.notes,
        }


class _NodeCapHit(Exception):
    pass


def search_protocols(
    spec: GameSpec,
    budgets: StageBudget,
    node_cap: int = 10**6,
    input_cap: int = 4096,
) -> SearchResult:
    """Backtracking search for a protocol that wins every promise input.

    Table entries are assigned lazily, only when some promise input's run
    reaches them; a completed run that loses prunes the branch. Entries no
    promise input ever reaches cannot matter, so exhausting the tree without
    a winner proves none exists for these budgets.
    """
    inputs = [tuple(int(v) for v in row) for row in promise_input_array(spec, input_cap)]
    incoming, outgoing = _alphabets(spec, budgets)
    out = [np.full((spec.d, a), -1, dtype=np.int64) for a in incoming]
    msg = [np.full((spec.d, a), -1, dtype=np.int64) for a in incoming]
    choices = [[(y, g) for y in range(spec.m) for g in range(outgoing[k])] for k in range(spec.n)]
    nodes = 0

    def solve(idx: int) -> bool:
        nonlocal nodes
        if idx == len(inputs):
            return True
        X = inputs[idx]
        g, ysum = 0, 0
        for k, x in enumerate(X):
            if out[k][x, g] < 0:
                for y, nxt in choices[k]:
                    nodes += 1
                    if nodes > node_cap:
                        raise _NodeCapHit
                    out[k][x, g], msg[k][x, g] = y, nxt
                    if solve(idx):
                        return True
                out[k][x, g] = msg[k][x, g] = -1
                return False
            ysum += int(out[k][x, g])
            g = int(msg[k][x, g])
        if (spec.d * ysum - sum(X)) % spec.modulus:
            return False
        return solve(idx + 1)

    try:
        found = solve(0)
    except _NodeCapHit:
        return SearchResult(
            spec, budgets, "partial", nodes - 1, node_cap, None, len(inputs),
            ["node cap reached before the search space was exhausted; no claim is made"],
        )
    if not found:
        return SearchResult(
            spec, budgets, "none", nodes, node_cap, None, len(inputs),
            ["every reachable table assignment loses on some promise input"],
        )
    protocol = ClassicalProtocol(
        spec, budgets, tuple(np.maximum(o, 0) for o in out), tuple(np.maximum(g, 0) for g in msg)
    )
    report = verify_protocol(protocol, mode="exhaustive", cap=input_cap)
    if report.win_rate != 1.0:
        raise AssertionError(f"search returned a protocol failing on {report.failing_input}")
    return SearchResult(spec, budgets, "found", nodes, node_cap, protocol, len(inputs))
