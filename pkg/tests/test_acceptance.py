"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.  Heavy
fixtures (the d=5 sampled-Gaussian suite and its reference ground truth) are
shared across criteria.
"""
import time

import numpy as np
import pytest

from conftest import sphere_quadrature_sw2, transport_lp_cost
from swcv.bench import (
    TWO_ATOM_SW22,
    BenchmarkConfig,
    build_scenario,
    instance_truth,
    run_benchmark,
    summarize,
)
from swcv.estimators import mc_estimate, shcv
from swcv.harmonics import build_basis, count_even_cumulative, evaluate_basis
from swcv.kernel import gram_mc, gram_shcv
from swcv.measures import DiscreteMeasure, Projected1D
from swcv.sphere import sample_uniform
from swcv.wasserstein1d import IntegrandHandle, w1d_weighted


def report(criterion, ok, detail):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def mse_by_method(rows):
    out = {}
    for cell in summarize(rows):
        out[(cell["method"], cell["n"])] = cell["mse"]
    return out


@pytest.fixture(scope="module")
def d5_sampled_rows(tmp_path_factory):
    """Shared d=5 sampled-Gaussian suite (criteria 4 and 10)."""
    cfg = BenchmarkConfig(
        scenario="gaussian-sampled",
        d=5,
        n_grid=(500,),
        methods=("mc", "cvlow", "shcv", "rqmc"),
        replications=100,
        base_seed=2024,
        degree=6,
        m=1000,
    )
    cache = tmp_path_factory.mktemp("truth-cache")
    inst = build_scenario(cfg)
    truth, stderr = instance_truth(inst, n_ref=10**6, cache_dir=cache, with_stderr=True)
    rows = run_benchmark(cfg, truth=truth)
    return rows, truth, stderr


def test_criterion_01_exactness_proportional_gaussians():
    t0 = time.perf_counter()
    worst = {}
    for d in (3, 5):
        cfg = BenchmarkConfig(
            scenario="exactness-check",
            d=d,
            n_grid=(500,),
            methods=("shcv",),
            replications=100,
            base_seed=101,
            degree=2,
            gamma=2.0,
            timing_repeats=1,
        )
        rows = run_benchmark(cfg)
        worst[d] = max(r.abs_error for r in rows)
    elapsed = time.perf_counter() - t0
    ok = all(err <= 1e-8 for err in worst.values()) and elapsed < 10.0
    report(
        1,
        ok,
        f"max |error| over 100 reps: d=3 {worst[3]:.2e}, d=5 {worst[5]:.2e} "
        f"(tol 1e-8), runtime {elapsed:.1f}s < 10s",
    )


def test_criterion_02_exactness_affine_pair():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    atoms = rng.standard_normal((200, 3))
    shift = rng.standard_normal(3)
    mu = DiscreteMeasure.uniform(atoms)
    nu = DiscreteMeasure.uniform(1.5 * atoms + shift)
    truth = float(np.mean(np.sum((0.5 * atoms + shift) ** 2, axis=1))) / 3.0
    basis = build_basis(3, 2)
    worst = 0.0
    for rep in range(100):
        dirs = sample_uniform(500, 3, 20200 + rep)
        worst = max(worst, abs(shcv(mu, nu, 2.0, dirs, basis).estimate - truth))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    report(
        2,
        ok,
        f"max |error| over 100 reps: {worst:.2e} (tol 1e-8), "
        f"runtime {elapsed:.1f}s < 10s",
    )


def test_criterion_03_two_atom_closed_form():
    t0 = time.perf_counter()
    mu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 0.0]])
    nu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])
    handle = IntegrandHandle(mu, nu, 2.0)

    fvals = handle.evaluate_many(sample_uniform(10**6, 2, 303))
    mc_big = mc_estimate(fvals)
    stderr = float(fvals.std(ddof=1)) / 1000.0
    mc_gap = abs(mc_big.estimate - TWO_ATOM_SW22)

    basis = build_basis(2, 8)
    wins = 0
    for rep in range(100):
        dirs = sample_uniform(10**4, 2, 30300 + rep)
        mc_err = abs(float(handle.evaluate_many(dirs).mean()) - TWO_ATOM_SW22)
        shcv_err = abs(shcv(mu, nu, 2.0, dirs, basis).estimate - TWO_ATOM_SW22)
        wins += shcv_err < mc_err
    elapsed = time.perf_counter() - t0
    ok = mc_gap <= 3.0 * stderr and wins >= 90 and elapsed < 30.0
    report(
        3,
        ok,
        f"MC(n=1e6) gap {mc_gap:.2e} <= 3*SE {3.0 * stderr:.2e}; SHCV beats "
        f"paired MC in {wins}/100 reps (need >= 90); runtime {elapsed:.1f}s < 30s",
    )


def test_criterion_04_variance_reduction_ordering(d5_sampled_rows):
    t0 = time.perf_counter()
    rows, truth, stderr = d5_sampled_rows
    mses = mse_by_method(rows)
    mc = mses[("mc", 500)]
    shcv_mse = mses[("shcv", 500)]
    cvlow_mse = mses[("cvlow", 500)]
    elapsed = time.perf_counter() - t0
    ok = (
        shcv_mse <= mc / 10.0
        and cvlow_mse <= mc
        and stderr**2 <= shcv_mse / 10.0
    )
    report(
        4,
        ok,
        f"MSE: mc {mc:.2e}, cvlow {cvlow_mse:.2e}, shcv {shcv_mse:.2e}; "
        f"shcv/mc ratio {shcv_mse / mc:.1e} (need <= 0.1); truth stderr "
        f"{stderr:.1e} negligible; summary time {elapsed:.1f}s",
    )


def test_criterion_05_rate_slope():
    t0 = time.perf_counter()
    cfg = BenchmarkConfig(
        scenario="gaussian-exact",
        d=3,
        n_grid=(128, 256, 512, 1024, 2048, 4096),
        methods=("mc", "shcv"),
        replications=100,
        base_seed=505,
        degree=16,
        timing_repeats=1,
    )
    inst = build_scenario(cfg)
    truth = sphere_quadrature_sw2(inst.mu, inst.nu)
    refined = sphere_quadrature_sw2(inst.mu, inst.nu, n_polar=300, n_azim=600)
    assert abs(truth - refined) < 1e-12
    rows = run_benchmark(cfg, truth=refined)
    mses = mse_by_method(rows)
    log_n = np.log2(cfg.n_grid)
    slopes = {
        m: float(np.polyfit(log_n, np.log2([mses[(m, n)] for n in cfg.n_grid]), 1)[0])
        for m in ("mc", "shcv")
    }
    elapsed = time.perf_counter() - t0
    ok = -1.15 <= slopes["mc"] <= -0.85 and slopes["shcv"] <= -1.4 and elapsed < 300.0
    report(
        5,
        ok,
        f"fitted slopes: mc {slopes['mc']:.3f} (need [-1.15, -0.85]), "
        f"shcv {slopes['shcv']:.3f} (need <= -1.4); runtime {elapsed:.0f}s < 300s",
    )


def test_criterion_06_harmonics_identities():
    t0 = time.perf_counter()
    table = {
        (3, 16): 152,
        (5, 6): 209,
        (6, 4): 125,
        (10, 4): 714,
        (20, 4): 8854,
    }
    counts_ok = all(
        count_even_cumulative(d, deg) == s for (d, deg), s in table.items()
    )
    worst = 0.0
    for d in (3, 5, 10):
        basis = build_basis(d, 4, seed=606)
        phi = evaluate_basis(basis, sample_uniform(100, d, 607))
        col = 0
        for block in basis.blocks:
            sums = (phi[:, col : col + block.count] ** 2).sum(axis=1)
            worst = max(worst, float(np.abs(sums - block.full_count).max()) / block.full_count)
            col += block.count
    elapsed = time.perf_counter() - t0
    ok = counts_ok and worst <= 1e-8 and elapsed < 60.0
    report(
        6,
        ok,
        f"counting table exact: {counts_ok}; worst relative block-sum deviation "
        f"{worst:.2e} (tol 1e-8) for d in {{3,5,10}}, degrees {{2,4}}; "
        f"runtime {elapsed:.0f}s < 60s",
    )


def test_criterion_07_transport_lp_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(500):
        ma, mb = rng.integers(1, 7, size=2)
        xa = 4.0 * rng.standard_normal(ma)
        xb = 4.0 * rng.standard_normal(mb)
        wa = rng.random(ma) + 0.02
        wa /= wa.sum()
        wb = rng.random(mb) + 0.02
        wb /= wb.sum()
        p = float(rng.choice([1.0, 2.0, 3.0]))
        mine = w1d_weighted(Projected1D(xa, wa), Projected1D(xb, wb), p)
        worst = max(worst, abs(mine - transport_lp_cost(xa, wa, xb, wb, p)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 30.0
    report(
        7,
        ok,
        f"500 weighted instances (m <= 6, p in {{1,2,3}}): worst gap to LP "
        f"{worst:.2e} (tol 1e-9); runtime {elapsed:.0f}s < 30s",
    )


def test_criterion_08_mean_invariance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    mu = DiscreteMeasure.uniform(rng.standard_normal((50, 3)))
    nu = DiscreteMeasure.uniform(rng.standard_normal((60, 3)) + 0.5)
    dirs = sample_uniform(300, 3, 809)
    basis = build_basis(3, 4)
    base_est = shcv(mu, nu, 2.0, dirs, basis).estimate
    gap0 = mu.mean() - nu.mean()
    worst = 0.0
    for _ in range(20):
        shift_mu = rng.standard_normal(3)
        shift_nu = rng.standard_normal(3)
        moved = shcv(
            DiscreteMeasure.uniform(mu.atoms + shift_mu),
            DiscreteMeasure.uniform(nu.atoms + shift_nu),
            2.0,
            dirs,
            basis,
        ).estimate
        gap1 = gap0 + shift_mu - shift_nu
        closed_form = (float(gap1 @ gap1) - float(gap0 @ gap0)) / 3.0
        worst = max(worst, abs((moved - base_est) - closed_form))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10.0
    report(
        8,
        ok,
        f"20 random shifts: worst deviation of the estimate change from the "
        f"closed-form mean term {worst:.2e} (tol 1e-10); runtime {elapsed:.1f}s < 10s",
    )


def test_criterion_09_kernel_amortization():
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    xs = [DiscreteMeasure.uniform(rng.standard_normal((24, 2))) for _ in range(10)]
    ys = [DiscreteMeasure.uniform(rng.standard_normal((24, 2)) + 0.3) for _ in range(10)]
    basis = build_basis(2, 8)
    gamma, n, seed = 1.0, 100, 910

    def median_time(fn):
        times = []
        result = None
        for _ in range(3):
            start = time.perf_counter()
            result = fn()
            times.append(time.perf_counter() - start)
        return result, sorted(times)[1]

    gram_plain, t_mc = median_time(lambda: gram_mc(xs, ys, gamma, n, seed))
    gram_rule, t_shcv = median_time(lambda: gram_shcv(xs, ys, gamma, n, basis, seed))
    ratio = t_shcv / t_mc

    dirs = sample_uniform(n, 2, seed)
    worst = 0.0
    for i in range(10):
        for j in range(10):
            rep = shcv(xs[i], ys[j], 2.0, dirs, basis)
            worst = max(worst, abs(gram_rule.matrix[i, j] - np.exp(-gamma * rep.estimate)))
    elapsed = time.perf_counter() - t0
    ok = ratio <= 1.3 and worst <= 1e-10 and elapsed < 60.0
    report(
        9,
        ok,
        f"100-pair Gram at n=100: shcv/mc wall-time ratio {ratio:.2f} (need <= 1.3, "
        f"median of 3); worst pairwise gap {worst:.2e} (tol 1e-10); "
        f"runtime {elapsed:.0f}s < 60s",
    )


def test_criterion_10_rqmc_beats_mc(d5_sampled_rows):
    rows, truth, stderr = d5_sampled_rows
    mses = mse_by_method(rows)
    ok = mses[("rqmc", 500)] < mses[("mc", 500)]
    report(
        10,
        ok,
        f"MSE over 100 reps: rqmc {mses[('rqmc', 500)]:.2e} < mc "
        f"{mses[('mc', 500)]:.2e}",
    )
