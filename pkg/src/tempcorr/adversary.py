"""Adversary that refutes low-communication protocols for the modulo-(m, d) game.

Given a deterministic protocol in which at least ``m*d`` stages send fewer
than ``d/m`` distinct messages, build two promise inputs ``X`` and ``X'``
on which the protocol produces identical transcripts, although
``sum(X) != sum(X') (mod m*d)``. At most one of the two runs can win.

Construction, stage by stage along the shared transcript:

* in a sub-threshold stage, fewer than ``d`` (message, output) pairs exist,
  so two inputs ``x < x'`` collide; ``X_k = x`` and ``X'_k`` is either
  ``x`` or ``x'`` without affecting the transcript;
* other stages copy an arbitrary input into both vectors;
* the last stage completes the promise.

Finally a subset of the collision offsets is chosen whose sum is
``0 mod d`` but not ``0 mod m*d`` and ``X'`` is shifted on exactly those
stages.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .classical import ClassicalProtocol, StageBudget, Transcript, run_protocol
from .errors import CapExceeded, InternalContradiction, NotApplicable, TempcorrError, UnsupportedParameters
from .games import GameSpec, check_promise, check_win, is_power_of_two

DeltaSpec = Union[Mapping[int, int], Sequence[int]]


def threshold_stages(budgets: StageBudget, spec: GameSpec) -> tuple:
    """1-based stages whose outgoing alphabet satisfies ``|M_k| * m < d``.

    The last stage never qualifies.
    """
    return tuple(k for k, size in enumerate(budgets.sizes, start=1) if size * spec.m < spec.d)


@dataclass(frozen=True)
class CollisionRecord:
    stage: int
    incoming: int
    x: int
    x_prime: int
    output: int
    message: int

    @property
    def delta(self) -> int:
        return self.x_prime - self.x

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "incoming": self.incoming,
            "x": self.x,
            "x_prime": self.x_prime,
            "delta": self.delta,
            "output": self.output,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CollisionRecord":
        return cls(
            int(data["stage"]), int(data["incoming"]), int(data["x"]),
            int(data["x_prime"]), int(data["output"]), int(data["message"]),
        )


def find_collision(p: ClassicalProtocol, k: int, incoming: int) -> CollisionRecord:
    """First pigeonhole collision of stage ``k`` for a fixed incoming message."""
    out = p.outputs[k - 1][:, incoming]
    msg = p.messages[k - 1][:, incoming]
    x, xp = kernels.first_collision(out, msg)
    if x < 0:
        raise InternalContradiction(
            f"stage {k} with incoming message {incoming} has no colliding inputs; "
            "the stage cannot be sub-threshold"
        )
    return CollisionRecord(k, int(incoming), int(x), int(xp), int(out[x]), int(msg[x]))


def _keyed(deltas: DeltaSpec) -> tuple:
    if isinstance(deltas, Mapping):
        keys = list(deltas.keys())
        values = [int(deltas[k]) for k in keys]
    else:
        values = [int(v) for v in deltas]
        keys = list(range(1, len(values) + 1))
    return keys, values


def is_witness_subset(values: Sequence[int], m: int, d: int) -> bool:
    total = sum(values)
    return total % d == 0 and total % (m * d) != 0


def select_witness_subset(deltas: DeltaSpec, m: int, d: int) -> tuple:
    """Subset of keys whose offsets sum to 0 mod d but not 0 mod m*d.

    ``deltas`` is either a mapping ``stage -> offset`` or a sequence, in which
    case keys are the 1-based positions. Only the first ``m*d`` entries are
    used. Constructive: grow the subset-sum sets S_0 = {0}, S_1, ... modulo
    ``m*d`` until one stalls (S_a == S_{a+1}, forced within ``m*d`` steps).
    S_a is then closed under adding the next offset ``D = p * 2^r`` (p odd),
    so it contains ``2^(s-r) * D = p*d (mod m*d)``, which is 0 mod d and, with
    p odd and m even, nonzero mod m*d. That residue is traced back to a
    subset.
    """
    keys, values = _keyed(deltas)
    md = m * d
    if m % 2 or not is_power_of_two(d) or d < 2:
        raise UnsupportedParameters(f"need m even and d a power of 2, got m={m}, d={d}")
    if len(values) < md:
        raise UnsupportedParameters(f"need at least m*d = {md} offsets, got {len(values)}")
    if any(not 1 <= v <= md - 1 for v in values):
        raise UnsupportedParameters(f"offsets must lie in 1..{md - 1}")
    window = values[:md]
    step, parent, stable = kernels.subset_sum_reach(np.array(window, dtype=np.int64), md)
    if stable < 0:
        raise InternalContradiction("subset-sum sets never stalled within m*d steps")
    stall = window[stable]
    r = (stall & -stall).bit_length() - 1
    s = d.bit_length() - 1
    # when r >= s the offset itself is already a nonzero multiple of d
    target = (stall << max(0, s - r)) % md
    if not 1 <= step[target] <= stable:
        raise InternalContradiction(f"residue {target} missing from the stalled set S_{stable}")
    positions, residue = [], target
    while residue != 0:
        positions.append(int(step[residue]) - 1)
        residue = int(parent[residue])
    chosen = sorted(positions)
    if not is_witness_subset([window[i] for i in chosen], m, d):
        raise InternalContradiction(f"constructed subset {chosen} fails the modular conditions")
    return tuple(keys[i] for i in chosen)


def reachable_witness(deltas: DeltaSpec, m: int, d: int) -> Optional[tuple]:
    """Witness subset over *all* given offsets, or None when none exists.

    Exact decision by subset-sum reachability modulo ``m*d``: a witness
    exists iff some residue ``t*d`` with ``0 < t < m`` is reachable. Makes
    no use of the ``m*d`` length bound, so it also covers shorter sequences.
    """
    keys, values = _keyed(deltas)
    md = m * d
    step, parent, _ = kernels.subset_sum_reach(np.array(values, dtype=np.int64), md)
    for target in range(d, md, d):
        if step[target] > 0:
            positions, residue = [], target
            while residue != 0:
                positions.append(int(step[residue]) - 1)
                residue = int(parent[residue])
            return tuple(keys[i] for i in sorted(positions))
    return None


def brute_witness_subset(deltas: DeltaSpec, m: int, d: int, cap: int = 2**20) -> Optional[tuple]:
    """Exhaustive oracle: lexicographically first witness subset, or None.

    Searches the same window of the first ``m*d`` entries the constructive
    route uses. No parity or power-of-two hypotheses are needed.
    """
    keys, values = _keyed(deltas)
    window = values[: m * d]
    if 2 ** len(window) > cap:
        raise CapExceeded(f"2^{len(window)} subsets exceed cap {cap}")
    found = kernels.lex_first_witness(np.array(window, dtype=np.int64), m, d)
    if found is None:
        return None
    return tuple(keys[i] for i in found)


@dataclass(frozen=True)
class RefutationCertificate:
    spec: GameSpec
    budgets: StageBudget
    subthreshold: tuple
    k0: tuple
    collisions: tuple
    k0_prime: tuple
    X: tuple
    X_prime: tuple
    transcript: Transcript
    transcript_prime: Transcript
    protocol_fingerprint: str = ""
    route: str = "guaranteed"

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "spec": self.spec.to_dict(),
            "budgets": list(self.budgets.sizes),
            "subthreshold_stages": list(self.subthreshold),
            "k0": list(self.k0),
            "collisions": [c.to_dict() for c in self.collisions],
            "k0_prime": list(self.k0_prime),
            "X": list(self.X),
            "X_prime": list(self.X_prime),
            "transcript": self.transcript.to_dict(),
            "transcript_prime": self.transcript_prime.to_dict(),
            "protocol_fingerprint": self.protocol_fingerprint,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RefutationCertificate":
        return cls(
            GameSpec.from_dict(data["spec"]),
            StageBudget(tuple(data["budgets"])),
            tuple(data["subthreshold_stages"]),
            tuple(data["k0"]),
            tuple(CollisionRecord.from_dict(c) for c in data["collisions"]),
            tuple(data["k0_prime"]),
            tuple(data["X"]),
            tuple(data["X_prime"]),
            Transcript.from_dict(data["transcript"]),
            Transcript.from_dict(data["transcript_prime"]),
            data.get("protocol_fingerprint", ""),
            data.get("route", "guaranteed"),
        )


def refute(p: ClassicalProtocol, spec: Optional[GameSpec] = None, seed=None, strict: bool = False) -> RefutationCertificate:
    """Build and validate a certificate that ``p`` loses some promise input.

    With at least ``m*d`` sub-threshold stages the first ``m*d`` of them are
    used and the offset subset comes from select_witness_subset (the
    "guaranteed" route). With fewer, unless ``strict``, every sub-threshold stage is used and the
    subset is searched exactly by reachable_witness ("extended" route); the
    guarantee no longer applies there, but any certificate returned is
    validated all the same.

    Inputs at stages outside the collision set are 0, or drawn from ``seed``
    when one is given.

    Raises NotApplicable if m is odd or d is not a power of two, if no stage
    is sub-threshold (this is not a claim that ``p`` wins), or if the
    extended route finds no witness.
    """
    spec = spec or p.spec
    if spec != p.spec:
        raise NotApplicable(f"protocol is for {p.spec}, not {spec}")
    if not spec.bound_applicable:
        raise NotApplicable(f"{spec}: requires m even and d a power of 2")
    sub = threshold_stages(p.budgets, spec)
    md = spec.modulus
    if len(sub) >= md:
        route, k0 = "guaranteed", sub[:md]
    elif strict or not sub:
        raise NotApplicable(f"only {len(sub)} sub-threshold stages, need m*d = {md}")
    else:
        route, k0 = "extended", sub
    in_k0 = set(k0)
    rng = np.random.default_rng(seed) if seed is not None else None

    n = spec.n
    X = [0] * n
    collisions = []
    incoming = 0
    for k in range(1, n + 1):
        if k == n:
            X[k - 1] = (-sum(X[:-1])) % spec.d
        elif k in in_k0:
            rec = find_collision(p, k, incoming)
            collisions.append(rec)
            X[k - 1] = rec.x
        elif rng is not None:
            X[k - 1] = int(rng.integers(0, spec.d))
        _, incoming = p.stage(k, X[k - 1], incoming)

    offsets = {c.stage: c.delta for c in collisions}
    if route == "guaranteed":
        k0_prime = select_witness_subset(offsets, spec.m, spec.d)
    else:
        k0_prime = reachable_witness(offsets, spec.m, spec.d)
        if k0_prime is None:
            raise NotApplicable(
                f"{len(sub)} sub-threshold stages (< m*d = {md}) and no offset subset "
                f"sums to a nonzero multiple of d mod {md}"
            )
    X_prime = list(X)
    shifted = set(k0_prime)
    for c in collisions:
        if c.stage in shifted:
            X_prime[c.stage - 1] = c.x_prime

    cert = RefutationCertificate(
        spec, p.budgets, sub, k0, tuple(collisions), k0_prime, tuple(X), tuple(X_prime),
        run_protocol(p, X), run_protocol(p, X_prime), p.fingerprint(), route,
    )
    if not validate_certificate(cert, p, spec):
        raise InternalContradiction("constructed certificate failed validation")
    return cert


def validate_certificate(cert: RefutationCertificate, p: ClassicalProtocol, spec: Optional[GameSpec] = None) -> bool:
    """Independent replay: both inputs on-promise, stored transcripts reproduced,
    outputs identical, sums distinct mod m*d, and at most one run winning."""
    spec = spec or p.spec
    try:
        if cert.spec != spec or p.spec != spec:
            return False
        X, Xp = tuple(cert.X), tuple(cert.X_prime)
        if not (check_promise(X, spec) and check_promise(Xp, spec)):
            return False
        t, tp = run_protocol(p, X), run_protocol(p, Xp)
        if t != cert.transcript or tp != cert.transcript_prime:
            return False
        if t.Y != tp.Y:
            return False
        if (sum(X) - sum(Xp)) % spec.modulus == 0:
            return False
        if check_win(X, t.Y, spec) and check_win(Xp, tp.Y, spec):
            return False
        if not set(cert.k0_prime) <= set(cert.k0):
            return False
        return all(a == b or k in cert.k0_prime for k, (a, b) in enumerate(zip(X, Xp), start=1))
    except TempcorrError:
        return False
