"""End-to-end exit criteria.

Each test prints one PASS/FAIL line (collected again in the terminal
summary) and then asserts it.  Seeds are fixed; tolerances are the stated
ones.
"""

import contextlib
import io
import math

import numpy as np
import pytest
from scipy import stats as sps

from spherepath import calibrate, cli, harness
from spherepath.augment import RngStream, augment
from spherepath.cost import cost_matrix
from spherepath.generators import example, gen_equicorr_normal, gen_spherical_null
from spherepath.model import TestConfig
from spherepath.path import extract_profile, heuristic_path
from spherepath.stats import runs_statistic, sign_statistic

pytestmark = pytest.mark.acceptance

POW2 = tuple(2**i for i in range(1, 11))


def _null_stats(n, d, reps, seed, family="normal"):
    ts = np.empty(reps, dtype=np.int64)
    tr = np.empty(reps, dtype=np.int64)
    for r in range(reps):
        stream = RngStream(seed, (d, n, r))
        data = gen_spherical_null(n, d, stream.child(0), family=family, nu=1.0)
        prof = extract_profile(heuristic_path(cost_matrix(augment(data, stream.child(1)))))
        ts[r] = sign_statistic(prof)
        tr[r] = runs_statistic(prof)
    return ts, tr


def _pooled_bins(m, reps, min_expected=5.0):
    """Range [lo, hi] over 0..m whose end bins absorb Binomial(m, 1/2) tails with < 5 expected."""
    pmf = sps.binom.pmf(np.arange(m + 1), m, 0.5) * reps
    lo = 0
    while pmf[: lo + 1].sum() < min_expected:
        lo += 1
    hi = m
    while pmf[hi:].sum() < min_expected:
        hi -= 1
    expected = np.concatenate([[pmf[: lo + 1].sum()], pmf[lo + 1 : hi], [pmf[hi:].sum()]])
    return (lo, hi), expected


def _binned(values, edges):
    lo, hi = edges
    return np.bincount(np.clip(values, lo, hi) - lo, minlength=hi - lo + 1)


def _gof(values, m):
    edges, expected = _pooled_bins(m, len(values))
    observed = _binned(values, edges)
    return sps.chisquare(observed, expected).pvalue, observed


def _power(name, dims, tests, seed, reps=500, n=50, **test_kw):
    cfg = harness.ExperimentConfig(
        example(name), dims, n, reps, tests, test=TestConfig(**test_kw), seed=seed
    )
    return {(e.test, e.d): e.rate for e in harness.estimate_power(cfg)}


def _within(x, target, tol):
    return abs(x - target) <= tol


def test_criterion_01_exact_null_law(report_criterion):
    n, reps = 50, 2000
    normal = _null_stats(n, 5, reps, seed=1001)
    heavy = _null_stats(n, 512, reps, seed=1001, family="t")
    pvals = {}
    for label, (ts, tr) in (("normal d=5", normal), ("t1 d=512", heavy)):
        pvals[f"{label} sign"] = _gof(ts, n)[0]
        pvals[f"{label} runs"] = _gof(tr - 1, n - 1)[0]
    for stat, idx, m, shift in (("sign", 0, n, 0), ("runs", 1, n - 1, 1)):
        edges, _ = _pooled_bins(m, reps)
        table = np.vstack([_binned(normal[idx] - shift, edges), _binned(heavy[idx] - shift, edges)])
        table = table[:, table.sum(axis=0) > 0]
        pvals[f"two-sample {stat}"] = sps.chi2_contingency(table)[1]
    ok = min(pvals.values()) > 0.001
    detail = ", ".join(f"{k} p={v:.3g}" for k, v in pvals.items())
    report_criterion(1, ok, detail)
    assert ok


def test_criterion_02_type_one_control(report_criterion):
    n, reps, alpha = 50, 1000, 0.05
    sign_row, runs_row = calibrate.null_table(n, alpha)
    rates = _power("null-normal", (2, 64, 1024), ("sign", "runs"), seed=1002, reps=reps, n=n)
    checks = []
    for d in (2, 64, 1024):
        checks.append(_within(rates[("sign", d)], sign_row.exact_size, 0.015))
        checks.append(_within(rates[("runs", d)], runs_row.exact_size, 0.015))
    ok = all(checks)
    detail = (f"sizes sign={sign_row.exact_size:.4f} runs={runs_row.exact_size:.4f}; "
              + ", ".join(f"d={d} sign={rates[('sign', d)]:.3f} runs={rates[('runs', d)]:.3f}" for d in (2, 64, 1024)))
    report_criterion(2, ok, detail)
    assert ok


def test_criterion_03_power_sign_and_runs(report_criterion):
    big = tuple(d for d in POW2 if d >= 32)
    ex1 = _power("3.1", (2, 8) + big, ("sign",), seed=1003)
    ex3 = _power("3.3", (8,), ("runs",), seed=1003)
    parts = {
        "Ex3.1 sign d=2 (0.309)": (ex1[("sign", 2)], _within(ex1[("sign", 2)], 0.309, 0.06)),
        "Ex3.1 sign d=8 (0.955)": (ex1[("sign", 8)], _within(ex1[("sign", 8)], 0.955, 0.06)),
        "Ex3.1 sign min d>=32 (>=0.99)": (min(ex1[("sign", d)] for d in big),
                                          all(ex1[("sign", d)] >= 0.99 for d in big)),
        "Ex3.3 runs d=8 (0.805)": (ex3[("runs", 8)], _within(ex3[("runs", 8)], 0.805, 0.06)),
    }
    ok = all(v[1] for v in parts.values())
    detail = ", ".join(f"{k}={v[0]:.3f}{'' if v[1] else ' [out]'}" for k, v in parts.items())
    report_criterion(3, ok, detail)
    assert ok


def test_criterion_04_squared_coordinate_cost(report_criterion):
    ex2 = _power("3.2", (128,), ("sign", "diag_sign"), seed=1004)
    ex1 = _power("3.1", POW2, ("diag_sign",), seed=1004)
    worst = max(ex1[("diag_sign", d)] for d in POW2)
    parts = [
        _within(ex2[("diag_sign", 128)], 0.859, 0.06),
        ex2[("sign", 128)] <= 0.25,
        worst <= 0.08,
    ]
    ok = all(parts)
    detail = (f"Ex3.2 d=128 diag-sign={ex2[('diag_sign', 128)]:.3f} (0.859) sign={ex2[('sign', 128)]:.3f} (<=0.25); "
              f"Ex3.1 max diag-sign={worst:.3f} (<=0.08)")
    report_criterion(4, ok, detail)
    assert ok


def test_criterion_05_combined_tests(report_criterion):
    big = tuple(d for d in POW2 if d >= 16)
    ex1 = _power("3.1", (8,), ("modified_sign",), seed=1005)
    ex3 = _power("3.3", big, ("modified_runs",), seed=1005)
    low = min(ex3[("modified_runs", d)] for d in big)
    ok = _within(ex1[("modified_sign", 8)], 0.864, 0.06) and low >= 0.99
    detail = f"Ex3.1 d=8 modified-sign={ex1[('modified_sign', 8)]:.3f} (0.864); Ex3.3 min modified-runs d>=16={low:.3f} (>=0.99)"
    report_criterion(5, ok, detail)
    assert ok


def test_criterion_06_coordinatewise_examples(report_criterion):
    ex41 = _power("4.1", (64,), ("modified_runs", "modified_sign"), seed=1006)
    ex42 = _power("4.2", (64,), ("modified_sign",), seed=1006)
    a, b, c = ex41[("modified_runs", 64)], ex41[("modified_sign", 64)], ex42[("modified_sign", 64)]
    ok = _within(a, 0.848, 0.07) and b <= 0.06 and _within(c, 0.651, 0.07)
    detail = f"Ex4.1 modified-runs={a:.3f} (0.848), modified-sign={b:.3f} (<=0.06); Ex4.2 modified-sign={c:.3f} (0.651)"
    report_criterion(6, ok, detail)
    assert ok


def test_criterion_07_heuristic_concentrates_on_oracle(report_criterion):
    recs = harness.oracle_compare(5, [3, 3000], 100, seed=1007)
    frac = {}
    for d in (3, 3000):
        rows = [r for r in recs if r.d == d]
        frac[("sign", d)] = np.mean([r.sign_diff == 0 for r in rows])
        frac[("runs", d)] = np.mean([r.runs_diff == 0 for r in rows])
    ok = frac[("sign", 3000)] > frac[("sign", 3)] and frac[("runs", 3000)] > frac[("runs", 3)]
    detail = ", ".join(f"zero {s} diff d={d}: {frac[(s, d)]:.2f}" for s in ("sign", "runs") for d in (3, 3000))
    report_criterion(7, ok, detail)
    assert ok


def test_criterion_08_moment_identities(report_criterion):
    d, pairs, rho = 100, 20000, 0.6
    g = RngStream(1008)
    x1 = gen_equicorr_normal(pairs, d, 1 - rho, rho, g.child(0)).values
    x2 = gen_equicorr_normal(pairs, d, 1 - rho, rho, g.child(1)).values
    u = g.child(2).generator().standard_normal((pairs, d))
    x2s = np.linalg.norm(x2, axis=1, keepdims=True) * u / np.linalg.norm(u, axis=1, keepdims=True)
    same = np.einsum("ij,ij->i", x1, x2) ** 2 / d
    mixed = np.einsum("ij,ij->i", x1, x2s) ** 2 / d
    target_same = 1 + rho**2 * (d - 1)
    z_same = (same.mean() - target_same) / (same.std(ddof=1) / math.sqrt(pairs))
    z_mixed = (mixed.mean() - 1.0) / (mixed.std(ddof=1) / math.sqrt(pairs))
    ok = abs(z_same) <= 3 and abs(z_mixed) <= 3
    detail = (f"E(X1.X2)^2/d={same.mean():.3f} vs {target_same:.2f} (z={z_same:.2f}); "
              f"E(X1.X2')^2/d={mixed.mean():.4f} vs 1 (z={z_mixed:.2f})")
    report_criterion(8, ok, detail)
    assert ok


def _ks_lattice(values, loc, step):
    """Distance between the ECDF at lattice points and the continuity-corrected N(0, 1/4)."""
    support = np.arange(values.min(), values.max() + 1)
    ecdf = np.searchsorted(np.sort(values), support, side="right") / len(values)
    return np.max(np.abs(ecdf - sps.norm.cdf((support + 0.5 - loc) / step, scale=0.5)))


def test_criterion_09_asymptotic_normality(report_criterion):
    n, reps = 400, 2000
    ts, tr = _null_stats(n, 10, reps, seed=1009)
    ks_s = sps.kstest((ts - n / 2) / math.sqrt(n), "norm", args=(0, 0.5)).statistic
    ks_r = sps.kstest((tr - (n + 1) / 2) / math.sqrt(n), "norm", args=(0, 0.5)).statistic
    ok = ks_s <= 0.04 and ks_r <= 0.04
    detail = (f"KS sign={ks_s:.4f} runs={ks_r:.4f} (<=0.04); continuity-corrected "
              f"sign={_ks_lattice(ts, n / 2, math.sqrt(n)):.4f} runs={_ks_lattice(tr, (n + 1) / 2, math.sqrt(n)):.4f}")
    report_criterion(9, ok, detail)
    assert ok


def test_criterion_10_unknown_center(report_criterion):
    # n = 60 splits into 30 differences, where the exact sign size is 0.0494
    split = _power("null-normal", (4, 256), ("sign",), seed=1010, reps=1000, n=60, center_mode="sample_split")
    median = _power("6.1", (1024,), ("sign",), seed=1010, reps=500, n=50, center_mode="spatial_median")
    ok = all(_within(split[("sign", d)], 0.05, 0.02) for d in (4, 256)) and median[("sign", 1024)] >= 0.09
    detail = (f"split sign d=4 {split[('sign', 4)]:.3f}, d=256 {split[('sign', 256)]:.3f} (0.05+-0.02); "
              f"spatial-median sign d=1024 {median[('sign', 1024)]:.3f} (>=0.09)")
    report_criterion(10, ok, detail)
    assert ok


def _cli_bytes(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    assert code == 0, argv
    return buf.getvalue().encode()


def test_criterion_11_cli_determinism(report_criterion, tmp_path):
    data = gen_spherical_null(40, 6, RngStream(1011)).values
    path = tmp_path / "data.csv"
    np.savetxt(path, data, delimiter=",")
    commands = {
        "test": ["test", "--input", str(path), "--stat", "sign,runs,modified-sign,modified-runs", "--seed", "11"],
        "simulate": ["simulate", "--example", "3.1", "--dims", "2,64", "--n", "30", "--reps", "20",
                     "--tests", "sign,runs,modified-sign", "--seed", "11"],
        "oracle-compare": ["oracle-compare", "--n", "5", "--dims", "3,300", "--reps", "10", "--seed", "11"],
        "null-table": ["null-table", "--n", "50", "--alpha", "0.05"],
        "subsample": ["subsample", "--input", str(path), "--proportions", "0.5,0.75", "--reps", "10", "--seed", "11"],
    }
    threaded = {"simulate", "oracle-compare", "subsample"}
    same = {}
    for name, argv in commands.items():
        runs = [_cli_bytes(argv), _cli_bytes(argv)]
        if name in threaded:
            runs += [_cli_bytes(argv + ["--workers", "1"]), _cli_bytes(argv + ["--workers", "4"])]
        same[name] = len(set(runs)) == 1 and len(runs[0]) > 0
    ok = all(same.values())
    detail = ", ".join(f"{k}={'identical' if v else 'DIFFERENT'}" for k, v in same.items())
    report_criterion(11, ok, detail)
    assert ok
