# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=False
"""Compiled kernels; drop-in replacements for ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def run_batch(outputs, messages, inputs):
    cdef const i64[:, :, ::1] out_t = np.ascontiguousarray(outputs, dtype=np.int64)
    cdef const i64[:, :, ::1] msg_t = np.ascontiguousarray(messages, dtype=np.int64)
    cdef const i64[:, ::1] X = np.ascontiguousarray(inputs, dtype=np.int64)
    cdef Py_ssize_t count = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t d = out_t.shape[1], A = out_t.shape[2]
    Y_arr = np.empty((count, n), dtype=np.int64)
    M_arr = np.zeros((count, n + 1), dtype=np.int64)
    cdef i64[:, ::1] Y = Y_arr
    cdef i64[:, ::1] M = M_arr
    cdef Py_ssize_t row, k
    cdef i64 msg, x, y, nxt
    for row in range(count):
        msg = 0
        for k in range(n):
            x = X[row, k]
            if x < 0 or x >= d:
                raise ValueError(f"input {x} at stage {k + 1} outside table")
            y = out_t[k, x, msg]
            nxt = msg_t[k, x, msg]
            if y < 0 or nxt < 0 or nxt >= A:
                raise ValueError(f"stage {k + 1} left its alphabet on row {row}")
            Y[row, k] = y
            M[row, k + 1] = nxt
            msg = nxt
    return Y_arr, M_arr


def first_collision(out_row, msg_row):
    cdef const i64[::1] o = np.ascontiguousarray(out_row, dtype=np.int64)
    cdef const i64[::1] g = np.ascontiguousarray(msg_row, dtype=np.int64)
    cdef Py_ssize_t x, xp, d = o.shape[0]
    for xp in range(d):
        for x in range(xp):
            if o[x] == o[xp] and g[x] == g[xp]:
                return x, xp
    return -1, -1


def subset_sum_reach(deltas, Py_ssize_t modulus):
    cdef const i64[::1] dl = np.ascontiguousarray(deltas, dtype=np.int64)
    step_arr = np.full(modulus, -1, dtype=np.int64)
    parent_arr = np.full(modulus, -1, dtype=np.int64)
    cdef i64[::1] step = step_arr
    cdef i64[::1] parent = parent_arr
    cdef Py_ssize_t i, r, r2, k = dl.shape[0]
    cdef i64 delta
    cdef bint grew
    cdef Py_ssize_t stable = -1
    step[0] = 0
    for i in range(1, k + 1):
        delta = dl[i - 1] % modulus
        if delta < 0:
            delta += modulus
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
    return step_arr, parent_arr, stable


def lex_first_witness(deltas, i64 m, i64 d):
    cdef const i64[::1] dl = np.ascontiguousarray(deltas, dtype=np.int64)
    cdef Py_ssize_t k = dl.shape[0]
    cdef i64 md = m * d
    if k == 0:
        return None
    # explicit DFS stack: path[depth] is the index chosen at that depth
    path_arr = np.empty(k, dtype=np.int64)
    sums_arr = np.zeros(k + 1, dtype=np.int64)
    cdef i64[::1] path = path_arr
    cdef i64[::1] sums = sums_arr
    cdef Py_ssize_t depth = 0
    cdef i64 j = 0, s
    while True:
        if j < k:
            path[depth] = j
            s = sums[depth] + dl[j]
            sums[depth + 1] = s
            if s % d == 0 and s % md != 0:
                return [int(path[t]) for t in range(depth + 1)]
            depth += 1
            j += 1
        else:
            if depth == 0:
                return None
            depth -= 1
            j = path[depth] + 1
