"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
report. Tolerances are fixed here, not calibrated at runtime.
"""

import os
import time

import numpy as np
import pytest

from rqmclab import cli, lds
from rqmclab import experiment as xp
from rqmclab import integrands as ig
from rqmclab.spectral import (count_boundary_cells, decay_fit, fourier_spectrum,
                              rslr_variance_spectral, sigma2_ell_beta, sigma2_walsh,
                              walsh_coefficients_fwht, cell_averages, sigma2_ell)

SEED = 20240817


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
    assert passed, f"criterion {criterion}: {detail}"


# ---------------------------------------------------------------------------
# 1. Net property preserved by 100 linear scrambles (s in {2,3,5}, m <= 10)
# ---------------------------------------------------------------------------

def test_criterion_1_net_property():
    t0 = time.time()
    params = lds.default_sobol_params()
    checked = 0
    for s in (2, 3, 5):
        for m in range(1, 11):
            base_t = lds.verify_net_property(lds.sobol_points(params, m, s), m, s)
            for stream in range(100):
                sc = lds.linear_scramble(SEED, stream, s)
                t = lds.verify_net_property(lds.sobol_points(params, m, s, sc), m, s)
                if t != base_t:
                    report(1, False, f"s={s} m={m} stream={stream}: t={t} != {base_t}")
                checked += 1
    elapsed = time.time() - t0
    report(1, elapsed < 60.0,
           f"{checked} scrambled nets, t invariant across s in (2,3,5), "
           f"m <= 10 ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 2. Dual-lattice variance identity (shifted lattice)
# ---------------------------------------------------------------------------

def test_criterion_2_dual_lattice_variance():
    t0 = time.time()
    # 6-term trigonometric polynomial: three cosine modes, two in the dual
    gen = lds.GeneratingVector((1, 7), 16)
    modes = [((9, 1), 0.8), ((2, 2), 0.5), ((1, 1), 1.1)]

    def f(pts):
        out = np.ones(len(pts))
        for n, a in modes:
            out += a * np.cos(2 * np.pi * (pts @ np.array(n, dtype=float)))
        return out

    table = fourier_spectrum(f, q=8, n_max=12, s=2)
    spectral = rslr_variance_spectral(table, gen).value
    base = lds.lattice_points(gen, np.zeros(2))
    reps = 10 ** 5
    estimates = np.empty(reps)
    for k in range(reps):
        shift = lds.random_shift(SEED, k, 2)
        estimates[k] = np.mean(f(np.mod(base + shift, 1.0)))
    sample_var = float(np.var(estimates, ddof=1))
    centered = estimates - estimates.mean()
    se_var = float(np.sqrt((np.mean(centered ** 4) - sample_var ** 2) / reps))
    ok = abs(sample_var - spectral) <= 3 * se_var

    # exact-zero configuration: modes outside the dual lattice of z=(1,2), N=4
    gen0 = lds.GeneratingVector((1, 2), 4, require_coprime=False)
    base0 = lds.lattice_points(gen0, np.zeros(2))
    f0 = lambda pts: 1.0 + np.cos(2 * np.pi * (pts[:, 0] + pts[:, 1]))
    est0 = np.empty(reps)
    for k in range(reps):
        est0[k] = np.mean(f0(np.mod(base0 + lds.random_shift(SEED + 1, k, 2), 1.0)))
    zero_var = float(np.var(est0, ddof=1))
    elapsed = time.time() - t0
    report(2, ok and zero_var < 1e-25 and elapsed < 30.0,
           f"var {sample_var:.6f} vs spectral {spectral:.6f} "
           f"(3se={3 * se_var:.2e}); zero-config var {zero_var:.1e} ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 3. One-dimensional Fourier decay under the boundary growth condition
# ---------------------------------------------------------------------------

def test_criterion_3_fourier_decay():
    t0 = time.time()
    A = 0.25
    f = lambda p: p[:, 0] ** -A * (1.0 - p[:, 0]) ** -A
    table = fourier_spectrum(f, q=22, n_max=1 << 12)
    pairs = [(n, np.sqrt(table.entries[(n,)])) for n in range(1, (1 << 12) + 1)]
    fit = decay_fit(pairs, window=(2 ** 4, 2 ** 12))
    ok_slope = abs(fit.exponent - (-(1.0 - A))) <= 0.05

    f0 = lambda p: -np.log(p[:, 0])  # A = 0 representative with one singular face
    table0 = fourier_spectrum(f0, q=22, n_max=1 << 12)
    pairs0 = [(n, np.sqrt(table0.entries[(n,)])) for n in range(1, (1 << 12) + 1)]
    fit0 = decay_fit(pairs0, window=(2 ** 4, 2 ** 12))
    elapsed = time.time() - t0
    report(3, ok_slope and fit0.log_factor and elapsed < 120.0,
           f"A=0.25 slope {fit.exponent:.4f} (want -0.75 +- 0.05); "
           f"A=0 log-factor flagged={fit0.log_factor} ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 4. Walsh shell decay sigma2_ell ~ 2^((2A-1) ell) on both routes
# ---------------------------------------------------------------------------

def test_criterion_4_walsh_shell_decay():
    t0 = time.time()
    A = 0.25
    f = lambda p: p[:, 0] ** -A * (1.0 - p[:, 0]) ** -A
    pairs = []
    max_route_gap = 0.0
    for ell in range(4, 15):
        fwht_route = sigma2_walsh(f, ell)
        beta_route = sigma2_ell_beta(f, ell)
        max_route_gap = max(max_route_gap, abs(fwht_route - beta_route))
        pairs.append((2.0 ** ell, fwht_route))
    fit = decay_fit(pairs, window=(2.0 ** 4, 2.0 ** 14))
    ok_slope = abs(fit.exponent - (2 * A - 1.0)) <= 0.1
    elapsed = time.time() - t0
    report(4, ok_slope and max_route_gap <= 1e-8 and elapsed < 120.0,
           f"slope {fit.exponent:.4f} (want -0.5 +- 0.1); route gap "
           f"{max_route_gap:.2e} <= 1e-8 ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 5. sigma2_ell oracle exactness for the ramp
# ---------------------------------------------------------------------------

def test_criterion_5_sigma2_exactness():
    t0 = time.time()
    f = lambda p: p[:, 0]
    table = walsh_coefficients_fwht(cell_averages(f, 8))
    values = {
        "fwht_1": sigma2_ell(table, 1), "beta_1": sigma2_ell_beta(f, 1),
        "fwht_2": sigma2_ell(table, 2), "beta_2": sigma2_ell_beta(f, 2),
    }
    ok = (abs(values["fwht_1"] - 1 / 16) <= 1e-12 and abs(values["beta_1"] - 1 / 16) <= 1e-12
          and abs(values["fwht_2"] - 1 / 64) <= 1e-12 and abs(values["beta_2"] - 1 / 64) <= 1e-12)
    elapsed = time.time() - t0
    report(5, ok and elapsed < 1.0,
           f"sigma2_1 = {values['fwht_1']:.15f}, sigma2_2 = {values['fwht_2']:.15f} "
           f"on both routes to 1e-12 ({elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 6-8. Variance convergence rates at desk scale (R = 256)
# ---------------------------------------------------------------------------

def _fitted_slope(example, dim, sequence, n_min_log2=7, n_max_log2=14, replicates=256):
    spec = ig.example_spec(example, dim, 0.1)
    config = xp.ExperimentConfig(sequence=sequence,
                                 n_grid=tuple(1 << m for m in range(n_min_log2, n_max_log2 + 1)),
                                 replicates=replicates, integrand=spec, seed=SEED)
    result = xp.run_experiment(config)
    stats = xp.summarize(result.records)
    # monotone-budget sanity: more points must not cost accuracy end to end
    assert stats.rows[-1].mse < stats.rows[0].mse, \
        f"{example} s={dim} {sequence}: MSE not reduced from N={stats.rows[0].n} " \
        f"to N={stats.rows[-1].n}"
    return stats, result


def test_criterion_6_smooth_unbounded_rate():
    t0 = time.time()
    stats, _ = _fitted_slope("smooth", 2, "sobol")
    ok = abs(stats.slope - (-1.6)) <= 0.2
    elapsed = time.time() - t0
    report(6, ok and elapsed < 180.0,
           f"smooth s=2 M=0.1 Sobol slope {stats.slope:.3f} (want -1.6 +- 0.2) "
           f"({elapsed:.0f}s)")


def test_criterion_7_sphere_and_hyperplane_rates():
    t0 = time.time()
    stats1, _ = _fitted_slope("ex1", 2, "sobol")
    ok1 = abs(stats1.slope - (-1.5)) <= 0.2
    e1 = time.time() - t0
    t1 = time.time()
    stats2, _ = _fitted_slope("ex2", 3, "rslr")
    ok2 = abs(stats2.slope - (-1.5)) <= 0.25
    e2 = time.time() - t1
    report(7, ok1 and ok2 and e1 < 300.0 and e2 < 300.0,
           f"ex1 s=2 Sobol slope {stats1.slope:.3f} (want -1.5 +- 0.2, {e1:.0f}s); "
           f"ex2 s=3 RSLR slope {stats2.slope:.3f} (want -1.5 +- 0.25, {e2:.0f}s)")


def test_criterion_8_axis_parallel_rates():
    t0 = time.time()
    details = []
    ok = True
    for dim in (2, 3):
        ref = ig.reference_integral(ig.example_spec("ex3", dim, 0.1))
        if ref.method != "analytic" or ref.value != 2.0 ** -dim:
            ok = False
        stats, _ = _fitted_slope("ex3", dim, "sobol")
        ok = ok and abs(stats.slope - (-1.6)) <= 0.2
        details.append(f"s={dim} slope {stats.slope:.3f}")
    elapsed = time.time() - t0
    report(8, ok and elapsed < 300.0,
           f"ex3 Sobol slopes (want -1.6 +- 0.2): {'; '.join(details)}; "
           f"references exact 2^-s ({elapsed:.0f}s)")


# ---------------------------------------------------------------------------
# 9. Boundary-cell scaling and the axis-parallel decomposition
# ---------------------------------------------------------------------------

def test_criterion_9_boundary_cells():
    t0 = time.time()
    region = ig.Hypersphere(1.0)
    ok = True
    details = []
    for r in (8, 16, 32, 64, 128, 256, 512, 1024):
        counts = count_boundary_cells(region, r, dim=2)
        ratio = counts.t_bdy / r
        if not 1.0 <= ratio <= 8.0:
            ok = False
        if len(counts.boxes) > 4 * counts.t_bdy:
            ok = False
        if r <= 128:
            paint = np.zeros_like(counts.tot_mask, dtype=int)
            for lo, hi in counts.boxes:
                paint[lo[0]:hi[0], lo[1]:hi[1]] += 1
            if not np.array_equal(paint, counts.tot_mask.astype(int)):
                ok = False
        details.append(f"r={r}:{ratio:.2f}")
    elapsed = time.time() - t0
    report(9, ok and elapsed < 30.0,
           f"|T_bdy|/r in [1,8]: {' '.join(details)}; decomposition exact at "
           f"r <= 128 ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 10. Unbiasedness at N = 2^6 and bitwise determinism across thread counts
# ---------------------------------------------------------------------------

def test_criterion_10_unbiasedness_and_determinism(tmp_path):
    t0 = time.time()
    ok = True
    details = []
    for example in ("ex1", "ex2", "ex3", "ex4"):
        spec = ig.example_spec(example, 2, 0.1)
        ref = ig.reference_integral(spec)
        for sequence in ("sobol", "rslr"):
            config = xp.ExperimentConfig(sequence=sequence, n_grid=(64,),
                                         replicates=10 ** 4, integrand=spec, seed=SEED)
            result = xp.run_experiment(config, reference=ref)
            est = np.array([rec.estimate for rec in result.records])
            stderr = float(est.std(ddof=1) / np.sqrt(len(est)))
            gap = abs(float(est.mean()) - ref.value)
            if gap > 4 * stderr:
                ok = False
            details.append(f"{example}/{sequence}:{gap / max(stderr, 1e-300):.1f}se")

    outs = {}
    for threads in (1, 4, 16):
        out = str(tmp_path / f"t{threads}")
        code = cli.main(["experiment", "--out", out,
                         "--set", "example=ex3", "--set", "dim=2", "--set", "M=0.1",
                         "--set", "n_log2_min=6", "--set", "n_log2_max=8",
                         "--set", "replicates=16", "--set", f"threads={threads}"])
        if code != 0:
            ok = False
        outs[threads] = {name: open(os.path.join(out, name), "rb").read()
                         for name in ("results.csv", "summary.csv", "summary.svg")}
    for threads in (4, 16):
        if outs[threads] != outs[1]:
            ok = False
            details.append(f"threads={threads} output differs")
    elapsed = time.time() - t0
    report(10, ok and elapsed < 180.0,
           f"mean-vs-reference gaps (in stderr units): {' '.join(details)}; "
           f"thread counts 1/4/16 byte-identical ({elapsed:.0f}s)")
