"""Null laws, p-values, cutoffs and decisions.

Conventions: the sign and linear rank statistics reject in the upper tail,
the runs statistic in the lower tail. Cutoffs are non-randomized and
conservative (exact size never above the level). None of these functions
take a dimension argument: the null laws do not depend on it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DegenerateInputError, ResolutionError
from .model import ScoreFunction

GRID_BUDGET = 20_000_000
DEFAULT_RESOLUTION = 1e-6


def _check_range(name, value, lo, hi):
    if not lo <= value <= hi:
        raise ValueError(f"{name} = {value} outside [{lo}, {hi}]")


@lru_cache(maxsize=65536)
def _binom_tail_exact(n, t, upper):
    # exact rational sum; float() of a Fraction is correctly rounded
    if upper:
        ks = range(t, n + 1)
    else:
        ks = range(0, t + 1)
    total = sum(math.comb(n, k) for k in ks)
    return float(Fraction(total, 2**n))


def binom_tail(n: int, t: int, side: str = "upper") -> float:
    """``P[Bin(n, 1/2) >= t]`` (``side="upper"``) or ``P[Bin(n, 1/2) <= t]``."""
    n = int(n)
    t = int(t)
    if n < 0:
        raise ValueError("n must be non-negative")
    _check_range("t", t, 0, n)
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return _binom_tail_exact(n, t, side == "upper")


def sign_pvalue(t_s: int, n: int) -> float:
    _check_range("t_s", int(t_s), 0, int(n))
    return binom_tail(n, t_s, "upper")


def runs_pvalue(t_r: int, n: int) -> float:
    """``P[1 + Bin(n-1, 1/2) <= t_r]``."""
    _check_range("t_r", int(t_r), 1, int(n))
    return binom_tail(n - 1, t_r - 1, "lower")


def _norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _norm_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class NullLaw:
    """Discrete null distribution plus its normal approximation."""

    statistic: str
    support: np.ndarray
    pmf: np.ndarray
    mean: float
    variance: float
    resolution: float = 0.0

    def upper_tail(self, t: float) -> float:
        eps = max(self.resolution, 1e-9 * max(1.0, abs(t)))
        return float(min(1.0, self.pmf[self.support >= t - eps].sum()))

    def lower_tail(self, t: float) -> float:
        eps = max(self.resolution, 1e-9 * max(1.0, abs(t)))
        return float(min(1.0, self.pmf[self.support <= t + eps].sum()))

    def cdf(self, t: float) -> float:
        return self.lower_tail(t)

    def quantile(self, q: float) -> float:
        cum = np.cumsum(self.pmf)
        idx = int(np.searchsorted(cum, q - 1e-15, side="left"))
        return float(self.support[min(idx, self.support.size - 1)])


def sign_law(n: int) -> NullLaw:
    k = np.arange(n + 1)
    pmf = np.array([float(Fraction(math.comb(n, int(i)), 2**n)) for i in k])
    return NullLaw("sign", k.astype(float), pmf, n / 2.0, n / 4.0)


def runs_law(n: int) -> NullLaw:
    base = sign_law(n - 1)
    return NullLaw("runs", base.support + 1.0, base.pmf, (n + 1) / 2.0, (n - 1) / 4.0)


def lr_exact_law(scores: ScoreFunction, resolution: float = DEFAULT_RESOLUTION) -> NullLaw:
    """Law of ``sum_i a(i) B_i`` with ``B_i`` i.i.d. fair bits, by iterated convolution.

    Integer scores are handled exactly. Other scores are rounded to a grid
    of spacing ``resolution``; the law is then exact for the rounded scores.
    """
    a = scores.a
    n = a.size
    if n > 10_000:
        raise ResolutionError(f"exact law supports n <= 10000, got {n}")
    if scores.is_integer:
        step = 1.0
        units = np.round(a).astype(np.int64)
        used_resolution = 0.0
    else:
        step = float(resolution)
        units = np.round(a / step).astype(np.int64)
        used_resolution = step
    lo = int(units[units < 0].sum())
    width = int(np.abs(units).sum()) + 1
    if width > GRID_BUDGET:
        raise ResolutionError(
            f"convolution grid of {width} cells exceeds the budget of {GRID_BUDGET}; "
            "use a coarser resolution or asymptotic calibration"
        )
    pmf = np.zeros(width)
    pmf[-lo] = 1.0  # value 0
    for u in units:
        shifted = np.zeros_like(pmf)
        if u >= 0:
            shifted[u:] = pmf[: width - u]
        else:
            shifted[: width + u] = pmf[-u:]
        pmf = 0.5 * (pmf + shifted)
    keep = pmf > 0
    support = (np.arange(width)[keep] + lo) * step
    mean = 0.5 * float(a.sum())
    var = 0.25 * float((a * a).sum())
    return NullLaw("lr", support, pmf[keep], mean, var, used_resolution / 2.0)


def score_condition_ratio(scores: ScoreFunction) -> float:
    """``max a(i)^2 / sum a(i)^2``; small values justify the normal approximation."""
    sq = scores.a**2
    total = sq.sum()
    if total == 0:
        raise DegenerateInputError("all scores are zero")
    return float(sq.max() / total)


def lr_asymptotic_pvalue(t: float, scores: ScoreFunction) -> float:
    """Upper-tail p-value of ``(t - sum(a)/2) / sqrt(sum a^2)`` against ``N(0, 1/4)``."""
    ss = float((scores.a**2).sum())
    if ss == 0:
        raise DegenerateInputError("all scores are zero")
    z = (t - 0.5 * float(scores.a.sum())) / math.sqrt(ss)
    return _norm_sf(z / 0.5)


def sign_asymptotic_pvalue(t_s: int, n: int) -> float:
    _check_range("t_s", int(t_s), 0, int(n))
    return lr_asymptotic_pvalue(t_s, ScoreFunction.constant(n))


def runs_asymptotic_pvalue(t_r: int, n: int) -> float:
    """Lower-tail p-value of ``(t_r - (n+1)/2) / sqrt(n)`` against ``N(0, 1/4)``."""
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    _check_range("t_r", int(t_r), 1, n)
    z = (t_r - (n + 1) / 2.0) / math.sqrt(n)
    return _norm_cdf(z / 0.5)


@dataclass(frozen=True)
class BonferroniDecision:
    reject: bool
    fired: str | None  # "inner", "diag", "both" or None
    p_adjusted: float


def bonferroni_decide(p_inner: float, p_diag: float, alpha: float) -> BonferroniDecision:
    """Reject when either component p-value is at most ``alpha / 2`` (inclusive)."""
    for p in (p_inner, p_diag):
        _check_range("p-value", p, 0.0, 1.0)
    half = alpha / 2.0
    hit_inner = p_inner <= half
    hit_diag = p_diag <= half
    if hit_inner and hit_diag:
        fired = "both"
    elif hit_inner:
        fired = "inner"
    elif hit_diag:
        fired = "diag"
    else:
        fired = None
    p_adj = min(1.0, 2.0 * min(p_inner, p_diag))
    return BonferroniDecision(hit_inner or hit_diag, fired, p_adj)


@dataclass(frozen=True)
class NullCutoff:
    """Most extreme non-randomized cutoff with exact size at most ``alpha``.

    ``cutoff`` is ``None`` (and ``exact_size`` 0) when even the most extreme
    rejection region exceeds the level; ``smallest_size`` then reports the
    size of that region.
    """

    statistic: str
    n: int
    alpha: float
    cutoff: int | None
    exact_size: float
    attainable: bool
    smallest_size: float


def sign_cutoff(n: int, alpha: float) -> NullCutoff:
    n = int(n)
    best = None
    for c in range(n, -1, -1):
        size = binom_tail(n, c, "upper")
        if size <= alpha:
            best = (c, size)
        else:
            break
    smallest = binom_tail(n, n, "upper")
    if best is None:
        return NullCutoff("sign", n, alpha, None, 0.0, False, smallest)
    return NullCutoff("sign", n, alpha, best[0], best[1], True, smallest)


def runs_cutoff(n: int, alpha: float) -> NullCutoff:
    n = int(n)
    best = None
    for c in range(1, n + 1):
        size = runs_pvalue(c, n)
        if size <= alpha:
            best = (c, size)
        else:
            break
    smallest = runs_pvalue(1, n)
    if best is None:
        return NullCutoff("runs", n, alpha, None, 0.0, False, smallest)
    return NullCutoff("runs", n, alpha, best[0], best[1], True, smallest)


def null_table(n: int, alpha: float) -> list[NullCutoff]:
    n = int(n)
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return [sign_cutoff(n, alpha), runs_cutoff(n, alpha)]


def null_table_csv(rows: list[NullCutoff]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["statistic", "n", "alpha", "cutoff", "exact_size"])
    for row in rows:
        cutoff = "NA" if row.cutoff is None else row.cutoff
        writer.writerow([row.statistic, row.n, repr(float(row.alpha)), cutoff, repr(row.exact_size)])
    return buf.getvalue()
