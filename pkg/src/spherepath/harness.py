"""End-to-end pipeline and Monte Carlo experiments.

Every random draw comes from an :class:`RngStream` keyed by what it is for
(dimension, sample size, replicate, purpose), never by execution order, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import ast
import csv
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import calibrate
from .augment import RngStream, augment, center, spatial_median, split_differences
from .cost import cost_matrix
from .errors import DataError, EnumerationCapError, SampleTooSmallError, SpherePathError
from .generators import gen_diag_normal, generate, spike
from .model import (
    CostKind,
    GeneratorSpec,
    ObservationMatrix,
    PowerEstimate,
    ScoreFunction,
    StatisticRecord,
    TestConfig,
    TestReport,
    stable_hash,
)
from .path import exact_path, extract_profile, heuristic_path
from .stats import (
    combined_runs,
    combined_sign,
    linear_rank_statistic,
    runs_statistic,
    sign_statistic,
)

# stream purposes
DATA, AUGMENT, SUBSAMPLE = 0, 1, 2

_DIAG_STATS = {"modified_sign", "modified_runs", "diag_sign", "diag_runs"}


def normalize_stat(name: str) -> str:
    return name.strip().replace("-", "_")


# -- single test -----------------------------------------------------------


def _solve(cost, config):
    if config.path_method == "exact":
        path = exact_path(cost, cap=config.enumeration_cap)
    else:
        path = heuristic_path(cost)
    return path, extract_profile(path)


def _sign_p(t, n, calibration):
    if calibration == "exact":
        return calibrate.sign_pvalue(t, n)
    return calibrate.sign_asymptotic_pvalue(t, n)


def _runs_p(t, n, calibration):
    if calibration == "exact":
        return calibrate.runs_pvalue(t, n)
    return calibrate.runs_asymptotic_pvalue(t, n)


@lru_cache(maxsize=1024)
def _cutoffs(n, alpha):
    return calibrate.sign_cutoff(n, alpha).cutoff, calibrate.runs_cutoff(n, alpha).cutoff


@lru_cache(maxsize=64)
def _lr_law(a_bytes, n):
    scores = np.frombuffer(a_bytes, dtype=float)
    return calibrate.lr_exact_law(ScoreFunction(scores))


def _lr_record(profile, config):
    scores = config.scores
    try:
        t = linear_rank_statistic(profile, scores, config.allow_asymmetric_scores)
        if config.calibration == "exact":
            law = _lr_law(scores.a.tobytes(), scores.n)
            p = law.upper_tail(t)
        else:
            p = calibrate.lr_asymptotic_pvalue(t, scores)
    except SpherePathError as exc:
        return StatisticRecord("lr", None, None, None, None, {}, f"{type(exc).__name__}: {exc}")
    details = {"score_condition_ratio": calibrate.score_condition_ratio(scores)}
    return StatisticRecord("lr", t, p, None, p <= config.alpha, details)


def _prepare(data, config):
    meta = {"n_input": data.n, "d": data.d}
    if config.center_mode == "sample_split":
        data = split_differences(data)
        meta["exactly_distribution_free"] = True
    elif config.center_mode == "spatial_median":
        med = spatial_median(data)
        data = center(data, med.location)
        meta["exactly_distribution_free"] = False
        meta["note"] = "spatial-median centering is not exactly distribution-free"
        meta["spatial_median_converged"] = med.converged
    else:
        meta["exactly_distribution_free"] = True
    if data.n < 2:
        raise SampleTooSmallError(f"need at least 2 observations after centering, got {data.n}")
    meta["n"] = data.n
    return data, meta


def run_test(data: ObservationMatrix, config: TestConfig, rng=None) -> TestReport:
    """Center or split, augment, solve covering paths, compute and calibrate statistics.

    ``rng`` defaults to ``RngStream(config.seed)``; it drives the spherical
    variants only.
    """
    stream = RngStream(int(config.seed)) if rng is None else rng
    data, meta = _prepare(data, config)
    n = data.n
    config.check_sample_size(n)
    alpha = config.alpha
    cal = config.calibration
    aug = augment(data, stream)

    path, prof = _solve(cost_matrix(aug, CostKind.INNER_PRODUCT), config)
    t_s = sign_statistic(prof)
    t_r = runs_statistic(prof)
    p_s = _sign_p(t_s, n, cal)
    p_r = _runs_p(t_r, n, cal)
    meta["path"] = list(path.nodes)

    wanted = config.statistics
    if _DIAG_STATS.intersection(wanted):
        dpath, dprof = _solve(cost_matrix(aug, CostKind.SQUARED_COORDINATE), config)
        dt_s = sign_statistic(dprof)
        dt_r = runs_statistic(dprof)
        dp_s = _sign_p(dt_s, n, cal)
        dp_r = _runs_p(dt_r, n, cal)
        meta["diag_path"] = list(dpath.nodes)

    exact_cut = cal == "exact"
    records = []
    for name in wanted:
        if name == "sign":
            cut = _cutoffs(n, alpha)[0] if exact_cut else None
            records.append(StatisticRecord("sign", t_s, p_s, cut, p_s <= alpha))
        elif name == "runs":
            cut = _cutoffs(n, alpha)[1] if exact_cut else None
            records.append(StatisticRecord("runs", t_r, p_r, cut, p_r <= alpha))
        elif name == "diag_sign":
            cut = _cutoffs(n, alpha)[0] if exact_cut else None
            records.append(StatisticRecord("diag_sign", dt_s, dp_s, cut, dp_s <= alpha))
        elif name == "diag_runs":
            cut = _cutoffs(n, alpha)[1] if exact_cut else None
            records.append(StatisticRecord("diag_runs", dt_r, dp_r, cut, dp_r <= alpha))
        elif name == "modified_sign":
            dec = calibrate.bonferroni_decide(p_s, dp_s, alpha)
            cut = _cutoffs(n, alpha / 2)[0] if exact_cut else None
            details = {"inner": t_s, "diag": dt_s, "p_inner": p_s, "p_diag": dp_s, "fired": dec.fired}
            records.append(
                StatisticRecord("modified_sign", combined_sign(t_s, dt_s), dec.p_adjusted, cut, dec.reject, details)
            )
        elif name == "modified_runs":
            dec = calibrate.bonferroni_decide(p_r, dp_r, alpha)
            cut = _cutoffs(n, alpha / 2)[1] if exact_cut else None
            details = {"inner": t_r, "diag": dt_r, "p_inner": p_r, "p_diag": dp_r, "fired": dec.fired}
            records.append(
                StatisticRecord("modified_runs", combined_runs(t_r, dt_r), dec.p_adjusted, cut, dec.reject, details)
            )
        elif name == "lr":
            records.append(_lr_record(prof, config))

    meta["config"] = config.to_dict()
    meta["config_hash"] = config.config_hash()
    meta["seed"] = int(config.seed)
    return TestReport(tuple(records), meta)


# -- experiment configuration ----------------------------------------------

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv,
    ast.Pow: operator.pow,
}


def parse_n_expression(expr):
    """Turn ``"50"``, ``"d+20"`` or ``"d^2+20"`` into a function of ``d``.

    Only integer literals, ``d`` and ``+ - * // ** ^`` are accepted.
    """
    if isinstance(expr, int):
        value = expr
        return lambda d: value
    text = str(expr).replace("^", "**").strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse sample-size expression {expr!r}") from exc

    def ev(node, d):
        if isinstance(node, ast.Expression):
            return ev(node.body, d)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name) and node.id == "d":
            return d
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left, d), ev(node.right, d))
        raise ValueError(f"unsupported sample-size expression {expr!r}")

    ev(tree, 2)  # validate eagerly
    return lambda d: int(ev(tree, int(d)))


@dataclass(frozen=True)
class ExperimentConfig:
    """A Monte Carlo power study.

    ``n`` is an integer or an expression in ``d`` such as ``"d+20"``.
    ``test`` supplies every :class:`TestConfig` field except ``statistics``,
    which comes from ``tests``.
    """

    generator: GeneratorSpec
    dims: tuple
    n: object = 50
    reps: int = 500
    tests: tuple = ("sign", "runs")
    test: TestConfig = field(default_factory=TestConfig)
    seed: int = 0
    label: str = ""
    workers: int = 1

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise ValueError("dimension schedule must be nonempty and positive")
        object.__setattr__(self, "dims", dims)
        if int(self.reps) < 1:
            raise ValueError("reps must be >= 1")
        tests = tuple(normalize_stat(t) for t in self.tests)
        object.__setattr__(self, "tests", tests)
        object.__setattr__(self, "test", replace(self.test, statistics=tests, seed=int(self.seed)))
        parse_n_expression(self.n)

    def n_for(self, d: int) -> int:
        n = parse_n_expression(self.n)(d)
        if n < 2:
            raise ValueError(f"sample size {n} for d = {d} is below 2")
        return n

    def to_dict(self) -> dict:
        return {
            "generator": {"family": self.generator.family, "params": [list(p) for p in self.generator.params]},
            "dims": list(self.dims),
            "n": str(self.n),
            "reps": int(self.reps),
            "test": self.test.to_dict(),
            "seed": int(self.seed),
            "label": self.label,
        }

    def config_hash(self) -> str:
        return stable_hash(self.to_dict())


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _replicate_rejections(cfg: ExperimentConfig, d, n, r):
    stream = RngStream(int(cfg.seed), (d, n, r))
    data = generate(cfg.generator, n, d, stream.child(DATA))
    report = run_test(data, cfg.test, rng=stream.child(AUGMENT))
    return tuple(bool(rec.reject) for rec in report.records)


def estimate_power(cfg: ExperimentConfig) -> list[PowerEstimate]:
    """One :class:`PowerEstimate` per (test, n, d), tests varying fastest."""
    out = []
    for d in cfg.dims:
        n = cfg.n_for(d)
        rows = _map(lambda r: _replicate_rejections(cfg, d, n, r), range(int(cfg.reps)), cfg.workers)
        counts = np.sum(np.array(rows, dtype=np.int64).reshape(len(rows), -1), axis=0)
        for test, k in zip(cfg.tests, counts):
            out.append(PowerEstimate(test, n, d, int(cfg.reps), int(k), cfg.label))
    return out


# -- heuristic vs exhaustive search ----------------------------------------


@dataclass(frozen=True)
class OracleDifference:
    d: int
    replicate: int
    sign_heuristic: int
    sign_exact: int
    runs_heuristic: int
    runs_exact: int

    @property
    def sign_diff(self) -> int:
        return self.sign_heuristic - self.sign_exact

    @property
    def runs_diff(self) -> int:
        return self.runs_heuristic - self.runs_exact


def _oracle_one(n, d, r, seed, cap):
    stream = RngStream(int(seed), (d, n, r))
    data = gen_diag_normal(n, d, spike(1.0), stream.child(DATA))
    aug = augment(data, stream.child(AUGMENT))
    cost = cost_matrix(aug, CostKind.INNER_PRODUCT)
    h = extract_profile(heuristic_path(cost))
    e = extract_profile(exact_path(cost, cap=cap))
    return OracleDifference(
        d, r, sign_statistic(h), sign_statistic(e), runs_statistic(h), runs_statistic(e)
    )


def oracle_compare(n: int, dims, reps: int, seed: int = 0, cap: int = 8, workers: int = 1):
    """Heuristic minus exact ``T_S`` and ``T_R`` under the spike model ``diag(d, 1, ..., 1)``."""
    n = int(n)
    if n > cap:
        raise EnumerationCapError(n, cap)
    if n < 2:
        raise SampleTooSmallError("need n >= 2")
    jobs = [(int(d), r) for d in dims for r in range(int(reps))]
    return _map(lambda job: _oracle_one(n, job[0], job[1], seed, cap), jobs, workers)


# -- subsampling -----------------------------------------------------------


def subsample_size(n: int, p: float) -> int:
    if not 0 < p <= 1:
        raise ValueError(f"proportion must lie in (0, 1], got {p}")
    return int(round(p * n))


def subsample_power(
    data: ObservationMatrix, proportions, reps: int, config: TestConfig, seed: int | None = None,
    workers: int = 1, label: str = "",
) -> list[PowerEstimate]:
    """Rejection rate of ``config`` over random subsamples without replacement.

    Replicates differ only in the rows drawn; the spherical variants come
    from ``config.seed``, so with ``p = 1`` every replicate gives the same
    decision.
    """
    seed = int(config.seed if seed is None else seed)
    out = []
    for pi, p in enumerate(proportions):
        m = subsample_size(data.n, float(p))
        if m < 4:
            raise SampleTooSmallError(f"a proportion of {p} leaves {m} < 4 observations")

        def one(r, m=m, pi=pi):
            g = RngStream(seed, (SUBSAMPLE, pi, r)).generator()
            rows = np.sort(g.choice(data.n, size=m, replace=False))
            report = run_test(ObservationMatrix(data.values[rows]), config)
            return tuple(bool(rec.reject) for rec in report.records)

        rows = _map(one, range(int(reps)), workers)
        counts = np.sum(np.array(rows, dtype=np.int64).reshape(len(rows), -1), axis=0)
        for test, k in zip(config.statistics, counts):
            out.append(PowerEstimate(test, m, data.d, int(reps), int(k), label or f"p={float(p)!r}"))
    return out


# -- CSV input -------------------------------------------------------------


def ingest_csv(path, has_header: bool = False) -> ObservationMatrix:
    """Read a rectangular numeric CSV with observations in rows."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not raw or all(not c.strip() for c in raw):
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise DataError(f"line {lineno}: expected {width} fields, got {len(raw)}")
            vals = []
            for col, cell in enumerate(raw, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"line {lineno}, column {col}: not a number: {cell!r}") from None
                if not np.isfinite(v):
                    raise DataError(f"line {lineno}, column {col}: non-finite value {cell!r}")
                vals.append(v)
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return ObservationMatrix(np.array(rows, dtype=float))
