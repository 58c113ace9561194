"""Edge-cost kernels over the augmented node set.

Every kernel returns a log-cost (the edge cost is ``exp`` of it), so all
values are ``<= 0`` and orderings are preserved without underflow.
"""

import numpy as np

from .errors import DegenerateInputError, InvalidDimensionError
from .model import AugmentedSet, CostKind, CostMatrix


def _pair(z_i, z_j):
    z_i = np.asarray(z_i, dtype=float).ravel()
    z_j = np.asarray(z_j, dtype=float).ravel()
    if z_i.shape != z_j.shape:
        raise InvalidDimensionError(f"dimension mismatch: {z_i.size} vs {z_j.size}")
    if z_i.size == 0:
        raise InvalidDimensionError("vectors must have at least one coordinate")
    return z_i, z_j


def inner_logcost(z_i, z_j):
    """``-((z_i . z_j) / d) ** 2``."""
    z_i, z_j = _pair(z_i, z_j)
    return -((z_i @ z_j) / z_i.size) ** 2


def diag_logcost(z_i, z_j):
    """``-(1/d) * sum_q z_iq**2 * z_jq**2``; ignores cross-coordinate terms."""
    z_i, z_j = _pair(z_i, z_j)
    return -float(np.sum(z_i**2 * z_j**2)) / z_i.size


def cosine_logcost(z_i, z_j):
    """Negative squared cosine similarity. Undefined for zero vectors."""
    z_i, z_j = _pair(z_i, z_j)
    ni = np.linalg.norm(z_i)
    nj = np.linalg.norm(z_j)
    if ni == 0.0 or nj == 0.0:
        raise DegenerateInputError("cosine similarity is undefined for a zero vector")
    c = (z_i @ z_j) / (ni * nj)
    return -min(c * c, 1.0)


KERNELS = {
    CostKind.INNER_PRODUCT: inner_logcost,
    CostKind.SQUARED_COORDINATE: diag_logcost,
    CostKind.COSINE: cosine_logcost,
}


def _symmetrize(mat):
    upper = np.triu(mat)
    return upper + np.triu(mat, 1).T


def logcost_matrix(z, kind):
    """Dense log-costs for a ``(m, d)`` node matrix, forbidden entries included."""
    z = np.asarray(z, dtype=float)
    d = z.shape[1]
    if kind is CostKind.INNER_PRODUCT:
        gram = z @ z.T
        out = -((gram / d) ** 2)
    elif kind is CostKind.SQUARED_COORDINATE:
        sq = z * z
        out = -(sq @ sq.T) / d
    elif kind is CostKind.COSINE:
        norms = np.linalg.norm(z, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateInputError(
                f"cosine cost undefined: node {int(zero[0]) + 1} has zero norm"
            )
        u = z / norms[:, None]
        out = -np.minimum((u @ u.T) ** 2, 1.0)
    else:
        raise ValueError(f"unknown cost kind {kind!r}")
    out = _symmetrize(out)
    # -0.0 and tiny positive rounding residue are normalised to 0
    np.minimum(out, 0.0, out=out)
    out += 0.0
    return out


def cost_matrix(aug: AugmentedSet, kind: CostKind = CostKind.INNER_PRODUCT) -> CostMatrix:
    """Assemble the ``2n x 2n`` cost matrix of ``aug`` for the chosen kernel."""
    if not isinstance(kind, CostKind):
        kind = CostKind(kind)
    return CostMatrix(logcost_matrix(aug.nodes, kind), kind)
