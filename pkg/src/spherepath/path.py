"""Covering-path solvers and sign/rank extraction."""

import numpy as np

from . import _kernels
from .errors import EnumerationCapError, InvariantViolationError
from .model import DEFAULT_ENUMERATION_CAP, CostMatrix, CoveringPath, SignRankProfile


def _to_path(nodes0, n, method):
    return CoveringPath.canonical([int(v) + 1 for v in nodes0], n, method)


def heuristic_path(cost: CostMatrix, backend=None, trace=None) -> CoveringPath:
    """Greedy Prim-style covering path.

    Starts from the cheapest allowed edge and repeatedly attaches the
    cheapest node (not yet covered, counterpart not covered) to either
    endpoint. Ties go to the smallest ``(q, r)`` node-id pair.

    Parameters
    ----------
    cost : CostMatrix
    backend : {"numba", "numpy"}, optional
        Overrides the process-wide default.
    trace : list, optional
        When given, the numpy implementation is used and the visited set,
        candidate set and endpoint set (1-based) are appended after each step.
    """
    n = cost.n
    if n < 2:
        raise InvariantViolationError("a covering path needs at least two observations")
    w = _kernels.masked_weights(cost.logcost)
    if trace is not None:
        nodes0 = _kernels.heuristic_numpy(w, trace=trace)
    else:
        nodes0 = _kernels.heuristic(w, backend=backend)
    return _to_path(nodes0, n, "heuristic")


def exact_path(cost: CostMatrix, cap: int = DEFAULT_ENUMERATION_CAP, backend=None) -> CoveringPath:
    """Minimum-cost covering path by exhaustive enumeration.

    Path cost is the sum of ``exp(logcost)`` over its edges. All
    ``2**(n-1) * n!`` distinct paths are scored; ties go to the
    lexicographically smallest node sequence.
    """
    n = cost.n
    if n > cap:
        raise EnumerationCapError(n, cap)
    if n < 2:
        raise InvariantViolationError("a covering path needs at least two observations")
    ecost = np.exp(cost.logcost)
    nodes0, _, _ = _kernels.exact(ecost, n, backend=backend)
    return _to_path(nodes0, n, "exact")


def enumerated_path_count(cost: CostMatrix, backend=None) -> int:
    """Number of distinct paths visited by :func:`exact_path` (no cap check)."""
    ecost = np.exp(cost.logcost)
    return int(_kernels.exact(ecost, cost.n, backend=backend)[2])


def path_cost(cost: CostMatrix, path: CoveringPath) -> float:
    nodes = np.asarray(path.nodes) - 1
    ecost = np.exp(cost.logcost)
    total = 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        total += ecost[a, b]
    return total


def extract_profile(path: CoveringPath, n: int | None = None) -> SignRankProfile:
    """String signs, anti-ranks and ranks along ``path``."""
    if n is not None and n != path.n:
        raise InvariantViolationError(f"path covers {path.n} observations, expected {n}")
    return SignRankProfile.from_nodes(path.nodes, path.n)
