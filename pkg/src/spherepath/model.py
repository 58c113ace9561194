"""Immutable domain types shared across the package.

Node ids in :class:`CoveringPath` are 1-based: node ``k`` is observation
``k`` and node ``k + n`` is its spherically symmetric variant.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .errors import DataError, EnumerationCapError, InvariantViolationError

STATISTICS = (
    "sign",
    "runs",
    "lr",
    "modified_sign",
    "modified_runs",
    "diag_sign",
    "diag_runs",
)
CALIBRATIONS = ("exact", "asymptotic")
PATH_METHODS = ("heuristic", "exact")
CENTER_MODES = ("known_origin", "sample_split", "spatial_median")
DEFAULT_ENUMERATION_CAP = 8


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    """An ``n x d`` sample with observations in rows."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DataError(f"expected a 2-D matrix, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"empty sample of shape {arr.shape}")
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-finite value at row {i + 1}, column {j + 1}")
        object.__setattr__(self, "values", _frozen_array(arr))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class AugmentedSet:
    """Observations paired with their spherically symmetric variants."""

    base: ObservationMatrix
    variants: np.ndarray

    def __post_init__(self):
        var = np.asarray(self.variants, dtype=float)
        if var.shape != self.base.values.shape:
            raise InvariantViolationError(
                f"variants shape {var.shape} != base shape {self.base.values.shape}"
            )
        norm_x = np.linalg.norm(self.base.values, axis=1)
        norm_v = np.linalg.norm(var, axis=1)
        if not np.allclose(norm_v, norm_x, rtol=1e-9, atol=1e-300):
            raise InvariantViolationError("variant norms differ from observation norms")
        object.__setattr__(self, "variants", _frozen_array(var))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def nodes(self) -> np.ndarray:
        """The ``2n x d`` stacked node matrix ``[X; X']``."""
        return np.vstack([self.base.values, self.variants])


class CostKind(enum.Enum):
    INNER_PRODUCT = "inner_product"
    SQUARED_COORDINATE = "squared_coordinate"
    COSINE = "cosine"


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Symmetric ``2n x 2n`` log-costs; the edge cost is ``exp(logcost)``."""

    logcost: np.ndarray
    kind: CostKind

    def __post_init__(self):
        lc = np.asarray(self.logcost, dtype=float)
        if lc.ndim != 2 or lc.shape[0] != lc.shape[1] or lc.shape[0] % 2:
            raise InvariantViolationError(f"bad cost matrix shape {lc.shape}")
        if not np.array_equal(lc, lc.T):
            raise InvariantViolationError("cost matrix is not symmetric")
        if np.any(lc > 0) or np.any(np.isnan(lc)):
            raise InvariantViolationError("log-costs must be <= 0")
        object.__setattr__(self, "logcost", _frozen_array(lc))

    @property
    def size(self) -> int:
        return self.logcost.shape[0]

    @property
    def n(self) -> int:
        return self.size // 2

    @property
    def forbidden(self) -> np.ndarray:
        m = self.size
        n = m // 2
        mask = np.eye(m, dtype=bool)
        idx = np.arange(n)
        mask[idx, idx + n] = True
        mask[idx + n, idx] = True
        return mask


def observation_of(node: int, n: int) -> int:
    """1-based observation index covered by a 1-based node id."""
    return node if node <= n else node - n


@dataclass(frozen=True)
class CoveringPath:
    nodes: tuple
    n: int
    method: str = "heuristic"

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if self.method not in PATH_METHODS:
            raise ValueError(f"unknown path method {self.method!r}")
        _check_covering(nodes, self.n)
        if observation_of(nodes[-1], self.n) < observation_of(nodes[0], self.n):
            raise InvariantViolationError("path is not in canonical orientation")

    @classmethod
    def canonical(cls, nodes, n, method="heuristic") -> "CoveringPath":
        nodes = [int(v) for v in nodes]
        if observation_of(nodes[-1], n) < observation_of(nodes[0], n):
            nodes.reverse()
        return cls(tuple(nodes), n, method)


def _check_covering(nodes, n):
    if len(nodes) != n:
        raise InvariantViolationError(f"covering path needs {n} nodes, got {len(nodes)}")
    seen = set()
    for v in nodes:
        if not 1 <= v <= 2 * n:
            raise InvariantViolationError(f"node id {v} outside 1..{2 * n}")
        k = observation_of(v, n)
        if k in seen:
            raise InvariantViolationError(f"observation {k} visited twice")
        seen.add(k)


@dataclass(frozen=True, eq=False)
class SignRankProfile:
    """String signs ``S`` (indexed by observation), anti-ranks ``Pi`` and ranks ``R``.

    ``Pi`` and ``R`` hold 1-based observation indices / positions.
    """

    S: np.ndarray
    Pi: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=np.int64)
        Pi = np.asarray(self.Pi, dtype=np.int64)
        R = np.asarray(self.R, dtype=np.int64)
        n = S.shape[0]
        if Pi.shape != (n,) or R.shape != (n,):
            raise InvariantViolationError("S, Pi and R must have equal length")
        if not np.isin(S, (0, 1)).all():
            raise InvariantViolationError("signs must be 0/1")
        if not np.array_equal(np.sort(Pi), np.arange(1, n + 1)):
            raise InvariantViolationError("Pi is not a permutation of 1..n")
        if not np.array_equal(R[Pi - 1], np.arange(1, n + 1)):
            raise InvariantViolationError("R is not the inverse of Pi")
        for name, arr in (("S", S), ("Pi", Pi), ("R", R)):
            object.__setattr__(self, name, _frozen_array(arr, np.int64))

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def signs_along_path(self) -> np.ndarray:
        return self.S[self.Pi - 1]

    @classmethod
    def from_nodes(cls, nodes, n) -> "SignRankProfile":
        """Build a profile from 1-based node ids in traversal order (any orientation)."""
        nodes = [int(v) for v in nodes]
        _check_covering(nodes, n)
        S = np.zeros(n, dtype=np.int64)
        Pi = np.empty(n, dtype=np.int64)
        for pos, v in enumerate(nodes):
            k = observation_of(v, n)
            Pi[pos] = k
            S[k - 1] = 1 if v <= n else 0
        R = np.empty(n, dtype=np.int64)
        R[Pi - 1] = np.arange(1, n + 1)
        return cls(S, Pi, R)


@dataclass(frozen=True, eq=False)
class ScoreFunction:
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("scores must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(a)):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "a", _frozen_array(a))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.a, self.a[::-1]))

    @property
    def is_integer(self) -> bool:
        return bool(np.array_equal(self.a, np.round(self.a)))

    @classmethod
    def constant(cls, n, value=1.0) -> "ScoreFunction":
        return cls(np.full(n, float(value)))


@dataclass(frozen=True)
class TestConfig:
    alpha: float = 0.05
    statistics: tuple = ("sign", "runs")
    calibration: str = "exact"
    path_method: str = "heuristic"
    center_mode: str = "known_origin"
    seed: int = 0
    scores: ScoreFunction | None = None
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    allow_asymmetric_scores: bool = False

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        stats = tuple(self.statistics)
        if not stats:
            raise ValueError("at least one statistic is required")
        unknown = [s for s in stats if s not in STATISTICS]
        if unknown:
            raise ValueError(f"unknown statistics: {unknown}")
        object.__setattr__(self, "statistics", stats)
        if self.calibration not in CALIBRATIONS:
            raise ValueError(f"unknown calibration {self.calibration!r}")
        if self.path_method not in PATH_METHODS:
            raise ValueError(f"unknown path method {self.path_method!r}")
        if self.center_mode not in CENTER_MODES:
            raise ValueError(f"unknown center mode {self.center_mode!r}")
        if "lr" in stats and self.scores is None:
            raise ValueError("the lr statistic needs a score function")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.enumeration_cap < 2:
            raise ValueError("enumeration cap must be at least 2")

    def check_sample_size(self, n: int) -> None:
        if self.path_method == "exact" and n > self.enumeration_cap:
            raise EnumerationCapError(n, self.enumeration_cap)

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "statistics": list(self.statistics),
            "calibration": self.calibration,
            "path_method": self.path_method,
            "center_mode": self.center_mode,
            "seed": int(self.seed),
            "enumeration_cap": self.enumeration_cap,
            "allow_asymmetric_scores": self.allow_asymmetric_scores,
            "scores": None if self.scores is None else [float(x) for x in self.scores.a],
        }
        return out

    def config_hash(self) -> str:
        return stable_hash(self.to_dict())


def stable_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class StatisticRecord:
    name: str
    value: float | None
    p_value: float | None
    cutoff: float | None
    reject: bool | None
    details: dict = field(default_factory=dict)
    error: str | None = None


@dataclass(frozen=True)
class TestReport:
    records: tuple
    metadata: dict

    __test__ = False

    def record(self, name: str) -> StatisticRecord:
        for rec in self.records:
            if rec.name == name:
                return rec
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "records": [asdict(r) for r in self.records],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False)


@dataclass(frozen=True)
class GeneratorSpec:
    """A named distribution family plus its parameters.

    Families: ``equicorr_normal`` (a, b, mean), ``diag_normal`` (recipe),
    ``elliptic_cauchy`` (a, b), ``hypercube_uniform``, ``iid_laplace``,
    ``angular2d``, ``spherical_normal``, ``spherical_t`` (nu).
    """

    family: str
    params: tuple = ()

    def __post_init__(self):
        params = dict(self.params)
        for key, val in params.items():
            if isinstance(val, float) and not math.isfinite(val):
                raise ValueError(f"parameter {key} is not finite")
        object.__setattr__(self, "params", tuple(sorted(params.items())))

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class PowerEstimate:
    test: str
    n: int
    d: int
    reps: int
    rejections: int
    label: str = ""

    @property
    def rate(self) -> float:
        return self.rejections / self.reps

    @property
    def mc_se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.reps)
