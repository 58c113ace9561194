"""Spherically symmetric variants, centering and the unknown-center transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, SampleTooSmallError
from .model import AugmentedSet, ObservationMatrix

_UINT64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Counter-keyed random stream.

    The stream is fully determined by ``(seed, key)``; :meth:`child`
    appends ids to the key, so substreams never depend on the order in
    which they are consumed.
    """

    seed: int
    key: tuple = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < _UINT64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "key", tuple(int(k) % _UINT64 for k in self.key))

    def child(self, *ids) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))


def _as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))


def sample_unit_sphere(d: int, rng) -> np.ndarray:
    """Uniform draw from the unit sphere in ``R^d`` (normalized Gaussian)."""
    if int(d) < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {d}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    while True:
        g = gen.standard_normal(int(d))
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return g / norm


def spherical_variant(x, rng) -> np.ndarray:
    """``||x|| * U`` with ``U`` uniform on the sphere; the zero vector maps to zero."""
    x = np.asarray(x, dtype=float).ravel()
    u = sample_unit_sphere(x.size, rng)
    return np.linalg.norm(x) * u


def augment(data: ObservationMatrix, rng) -> AugmentedSet:
    """Pair each observation with an independent spherical variant.

    Observation ``k`` (0-based) draws its direction from ``rng.child(k)``.
    """
    stream = _as_stream(rng)
    x = data.values
    variants = np.empty_like(x)
    for k in range(data.n):
        variants[k] = spherical_variant(x[k], stream.child(k))
    return AugmentedSet(data, variants)


def split_differences(data: ObservationMatrix) -> ObservationMatrix:
    """``Z_i = X_i - X_{m+i}`` with ``m = n // 2``; an odd last row is dropped."""
    n = data.n
    if n < 4:
        raise SampleTooSmallError(f"sample splitting needs n >= 4, got {n}")
    m = n // 2
    x = data.values
    return ObservationMatrix(x[:m] - x[m : 2 * m])


@dataclass(frozen=True, eq=False)
class SpatialMedian:
    location: np.ndarray
    converged: bool
    n_iter: int


def _escape_step(x, j, tol):
    """Descent step away from data point ``x[j]``, or ``None`` if it is the minimizer.

    Uses the Vardi-Zhang rule: the point is optimal iff the resultant of the
    unit vectors towards the other points has norm at most the multiplicity
    of ``x[j]``; otherwise move along that resultant.
    """
    diff = x - x[j]
    dist = np.linalg.norm(diff, axis=1)
    same = dist <= tol
    mult = np.count_nonzero(same)
    others = ~same
    if not np.any(others):
        return None
    resultant = (diff[others] / dist[others, None]).sum(axis=0)
    strength = np.linalg.norm(resultant)
    if strength <= mult:
        return None
    step = (strength - mult) / (1.0 / dist[others]).sum()
    return x[j] + step * resultant / strength


def spatial_median(data: ObservationMatrix, tol: float = 1e-8, max_iter: int = 500) -> SpatialMedian:
    """Weiszfeld iteration for ``argmin_m sum_i ||X_i - m||``.

    If an iterate lands on a data point, that point is returned when it
    satisfies the optimality condition; otherwise the iteration restarts
    from a descent step off the point.
    """
    x = data.values
    if data.n == 1:
        return SpatialMedian(x[0].copy(), True, 0)
    m = x.mean(axis=0)
    for it in range(1, max_iter + 1):
        dist = np.linalg.norm(x - m, axis=1)
        hit = np.flatnonzero(dist <= tol)
        if hit.size:
            j = int(hit[0])
            moved = _escape_step(x, j, tol)
            if moved is None:
                return SpatialMedian(x[j].copy(), True, it)
            m = moved
            continue
        w = 1.0 / dist
        new = (w[:, None] * x).sum(axis=0) / w.sum()
        step = np.linalg.norm(new - m)
        m = new
        if step < tol:
            return SpatialMedian(m, True, it)
    return SpatialMedian(m, False, max_iter)


def center(data: ObservationMatrix, mu) -> ObservationMatrix:
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.size != data.d:
        raise InvalidDimensionError(f"center has dimension {mu.size}, data has {data.d}")
    return ObservationMatrix(data.values - mu[None, :])
