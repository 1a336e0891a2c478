"""Pure-Python/numpy reference kernels.

Must stay signature- and result-compatible with ``_ckernels.pyx``; the test
suite runs both against each other.
"""
import numpy as np


def run_batch(outputs, messages, inputs):
    """Replay a table protocol on a batch of input rows.

    ``outputs`` and ``messages`` are ``(n, d, A)`` int64 tables indexed by
    (stage, input, incoming message); entries outside a stage's alphabet are
    -1. Returns ``(Y, M)`` with ``Y`` of shape ``(N, n)`` and ``M`` of shape
    ``(N, n + 1)``, ``M[:, 0] == 0``.
    """
    outputs = np.asarray(outputs, dtype=np.int64)
    messages = np.asarray(messages, dtype=np.int64)
    inputs = np.asarray(inputs, dtype=np.int64)
    count, n = inputs.shape
    A = outputs.shape[2]
    Y = np.empty((count, n), dtype=np.int64)
    M = np.zeros((count, n + 1), dtype=np.int64)
    if count and (inputs.min() < 0 or inputs.max() >= outputs.shape[1]):
        raise ValueError("input residue outside table")
    msg = M[:, 0]
    for k in range(n):
        x = inputs[:, k]
        y = outputs[k, x, msg]
        nxt = messages[k, x, msg]
        if count and (y.min() < 0 or nxt.min() < 0 or nxt.max() >= A):
            bad = int(np.flatnonzero((y < 0) | (nxt < 0) | (nxt >= A))[0])
            raise ValueError(f"stage {k + 1} left its alphabet on row {bad}")
        Y[:, k] = y
        M[:, k + 1] = nxt
        msg = nxt
    return Y, M


def first_collision(out_row, msg_row):
    """First pair x < x' with equal (output, message); smallest x' wins, then smallest x.

    Returns ``(-1, -1)`` when all pairs are distinct.
    """
    seen = {}
    for xp in range(len(out_row)):
        key = (int(out_row[xp]), int(msg_row[xp]))
        if key in seen:
            return seen[key], xp
        seen[key] = xp
    return -1, -1


def subset_sum_reach(deltas, modulus):
    """Incremental subset-sum reachability modulo ``modulus``.

    Returns ``(step, parent, stable)``: ``step[r]`` is the shortest prefix
    length whose subset sums reach residue ``r`` (0 for r = 0, -1 if never),
    ``parent[r]`` the residue it was reached from, and ``stable`` the first
    prefix length ``a`` with S_a == S_{a+1} (-1 if the sets never stall).
    """
    step = [-1] * modulus
    parent = [-1] * modulus
    step[0] = 0
    stable = -1
    for i, delta in enumerate(deltas, start=1):
        delta = int(delta)
        grew = False
        for r in range(modulus):
            if 0 <= step[r] < i:
                r2 = (r + delta) % modulus
                if step[r2] == -1:
                    step[r2] = i
                    parent[r2] = r
                    grew = True
        if not grew and stable == -1:
            stable = i - 1
    return np.array(step, dtype=np.int64), np.array(parent, dtype=np.int64), stable


def lex_first_witness(deltas, m, d):
    """Lexicographically first index subset with sum == 0 mod d and != 0 mod m*d.

    Subsets are compared as increasing index tuples; returns a list of 0-based
    indices, or None.
    """
    deltas = [int(v) for v in deltas]
    k = len(deltas)
    md = m * d
    path = []

    def visit(start, total):
        for j in range(start, k):
            s = total + deltas[j]
            path.append(j)
            if s % d == 0 and s % md != 0:
                return True
            if visit(j + 1, s):
                return True
            path.pop()
        return False

    return list(path) if visit(0, 0) else None
