"""Hot loops for the covering-path solvers.

Two implementations live side by side: scalar loops compiled with numba
and vectorized numpy code. The environment variable ``SPHEREPATH_BACKEND``
(``numba`` or ``numpy``) picks the default; numba is used when importable.
Both must return identical paths, including on ties.

All node ids here are 0-based: node ``k < n`` is observation ``k``, node
``k + n`` its variant. Forbidden entries of the weight matrix are ``+inf``.
"""

import itertools
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


def _resolve_backend():
    requested = os.environ.get("SPHEREPATH_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"SPHEREPATH_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


BACKEND = _resolve_backend()


def njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def masked_weights(logcost):
    """Copy of ``logcost`` with the diagonal and counterpart pairs set to +inf."""
    w = np.array(logcost, dtype=np.float64, copy=True)
    m = w.shape[0]
    n = m // 2
    idx = np.arange(n)
    w[np.arange(m), np.arange(m)] = np.inf
    w[idx, idx + n] = np.inf
    w[idx + n, idx] = np.inf
    return w


# --------------------------------------------------------------------------
# Prim-style greedy covering path
# --------------------------------------------------------------------------


def _heuristic_loop(w):
    m = w.shape[0]
    n = m // 2
    # seed edge: lexicographically first (i, j), i < j, among the minima
    best = np.inf
    bi = -1
    bj = -1
    for i in range(m):
        for j in range(i + 1, m):
            if w[i, j] < best:
                best = w[i, j]
                bi = i
                bj = j
    buf = np.empty(2 * n + 1, dtype=np.int64)
    lo = n
    hi = n + 1
    buf[lo] = bi
    buf[hi] = bj
    avail = np.ones(m, dtype=np.bool_)
    for v in (bi, bj):
        avail[v] = False
        avail[(v + n) % m] = False
    for _ in range(n - 2):
        left = buf[lo]
        right = buf[hi]
        r_small = left if left < right else right
        r_big = right if left < right else left
        best = np.inf
        bq = -1
        br = -1
        for q in range(m):
            if not avail[q]:
                continue
            if w[r_small, q] < best:
                best = w[r_small, q]
                bq = q
                br = r_small
            if w[r_big, q] < best:
                best = w[r_big, q]
                bq = q
                br = r_big
        if bq < 0:
            # every remaining candidate edge is +inf (cannot happen for finite costs)
            for q in range(m):
                if avail[q]:
                    bq = q
                    br = r_small
                    break
        if br == left:
            lo -= 1
            buf[lo] = bq
        else:
            hi += 1
            buf[hi] = bq
        avail[bq] = False
        avail[(bq + n) % m] = False
    return buf[lo : hi + 1].copy()


def heuristic_numpy(w, trace=None):
    """Vectorized greedy path. ``trace`` (a list) receives ``(A0, A1, E)`` after each step.

    Sets in the trace use 1-based node ids.
    """
    m = w.shape[0]
    n = m // 2
    upper = np.where(np.triu(np.ones((m, m), dtype=bool), k=1), w, np.inf)
    flat = int(np.argmin(upper))  # first occurrence in row-major order
    bi, bj = divmod(flat, m)
    path = [bi, bj]
    visited = [bi, bj]
    avail = np.ones(m, dtype=bool)
    avail[[bi, bj, (bi + n) % m, (bj + n) % m]] = False
    if trace is not None:
        trace.append(_trace_entry(visited, avail, path))
    for _ in range(n - 2):
        ends = sorted((path[0], path[-1]))
        cand = np.flatnonzero(avail)
        rows = w[np.ix_(ends, cand)]
        colmin = rows.min(axis=0)
        best = colmin.min()
        pos = int(np.flatnonzero(colmin == best)[0]) if np.isfinite(best) else 0
        q = int(cand[pos])
        r = ends[0] if rows[0, pos] == colmin[pos] else ends[1]
        if r == path[0]:
            path.insert(0, q)
        else:
            path.append(q)
        visited.append(q)
        avail[[q, (q + n) % m]] = False
        if trace is not None:
            trace.append(_trace_entry(visited, avail, path))
    return np.asarray(path, dtype=np.int64)


def _trace_entry(visited, avail, path):
    return (
        frozenset(v + 1 for v in visited),
        frozenset(int(v) + 1 for v in np.flatnonzero(avail)),
        frozenset((path[0] + 1, path[-1] + 1)),
    )


# --------------------------------------------------------------------------
# exhaustive covering-path search
# --------------------------------------------------------------------------


def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


def _next_permutation(p):
    k = p.shape[0] - 2
    while k >= 0 and p[k] >= p[k + 1]:
        k -= 1
    if k < 0:
        return False
    j = p.shape[0] - 1
    while p[j] <= p[k]:
        j -= 1
    p[k], p[j] = p[j], p[k]
    i = k + 1
    j = p.shape[0] - 1
    while i < j:
        p[i], p[j] = p[j], p[i]
        i += 1
        j -= 1
    return True


def _exact_loop(ecost, n):
    perm = np.arange(n)
    best_nodes = np.empty(n, dtype=np.int64)
    nodes = np.empty(n, dtype=np.int64)
    best = np.inf
    count = 0
    while True:
        if perm[0] < perm[n - 1]:
            for mask in range(1 << n):
                for i in range(n):
                    k = perm[i]
                    nodes[i] = k if (mask >> k) & 1 else k + n
                total = 0.0
                for i in range(n - 1):
                    total += ecost[nodes[i], nodes[i + 1]]
                count += 1
                if total < best or (total == best and _lex_less(nodes, best_nodes)):
                    best = total
                    best_nodes[:] = nodes
        if not _next_permutation(perm):
            break
    return best_nodes, best, count


def exact_numpy(ecost, n):
    masks = np.arange(1 << n)
    # bit k of a mask set -> original node k on the path
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    best = np.inf
    best_nodes = None
    count = 0
    for perm in itertools.permutations(range(n)):
        if perm[0] > perm[-1]:
            continue
        perm = np.asarray(perm)
        nodes = perm[None, :] + n * (1 - bits[:, perm])
        total = np.zeros(masks.shape[0])
        for i in range(n - 1):
            total += ecost[nodes[:, i], nodes[:, i + 1]]
        count += masks.shape[0]
        low = total.min()
        if low > best:
            continue
        ties = nodes[total == low]
        order = np.lexsort(ties.T[::-1])
        cand = ties[order[0]]
        if low < best or _lex_less(cand, best_nodes):
            best = low
            best_nodes = cand.copy()
    return best_nodes.astype(np.int64), best, count


if HAVE_NUMBA:
    _lex_less = njit(_lex_less)
    _next_permutation = njit(_next_permutation)
    heuristic_numba = njit(_heuristic_loop)
    exact_numba = njit(_exact_loop)
else:  # pragma: no cover
    heuristic_numba = None
    exact_numba = None


def heuristic(w, backend=None):
    backend = backend or BACKEND
    if backend == "numba" and HAVE_NUMBA:
        return heuristic_numba(w)
    return heuristic_numpy(w)


def exact(ecost, n, backend=None):
    backend = backend or BACKEND
    if backend == "numba" and HAVE_NUMBA:
        return exact_numba(np.ascontiguousarray(ecost, dtype=np.float64), n)
    return exact_numpy(ecost, n)
