"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible with -s or in the terminal
summary) before asserting.
"""
import itertools
import math
import time

import numpy as np
import pytest

from pngdet import airy, circle, determinantal as det, montecarlo as mc, toeplitz as tp, verify

pytestmark = pytest.mark.acceptance

Q = 0.25
RESULTS = {}


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def point_runs():
    out = {}
    for N in (16, 128):
        t0 = time.perf_counter()
        cfg = mc.ExperimentConfig(N=N, q=Q, sample_count=20000, seed=8, grid=tuple(np.linspace(-3, 3, 13)))
        out[N] = (cfg, mc.run_ensemble(cfg), time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def big_run():
    cfg = mc.ExperimentConfig(N=256, q=Q, sample_count=100_000, seed=10, observable="two_time")
    u, _ = mc.two_time_offset(cfg, 1.0)
    cfg = mc.ExperimentConfig(N=256, q=Q, sample_count=100_000, seed=10, observable="two_time", offsets=(0, u))
    return cfg, mc.run_ensemble(cfg)


def test_c01_structural_equivalence():
    t0 = time.perf_counter()
    fails = verify.lattice_identities(n_fields=500, max_N=6, max_w=4, seed=1)
    dt = time.perf_counter() - t0
    report(1, fails == 0 and dt < 10, f"{fails} failures over 500 fields, {dt:.1f}s")


def test_c02_determinantal_measure():
    t0 = time.perf_counter()
    w = verify.determinantal_errors(n_systems=50, seed=2)
    dt = time.perf_counter() - t0
    ok = max(w.values()) < 1e-10 and dt < 60
    report(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in w.items()) + f", {dt:.1f}s")


def test_c03_partition_function():
    e = verify.partition_errors()
    report(3, e < 1e-8, f"max relative error {e:.1e}")


def test_c04_toeplitz_limit_bound():
    table = verify.limit_bound_table(alpha=0.5, N=2, ns=(8, 16, 32, 64), n_points=20, seed=4)
    ratios = [t["max_ratio"] for t in table]
    devs = [float(t["deviation"].max()) for t in table]
    below = all(r < 1 for r in ratios)
    decreasing = all(a > b for a, b in zip(devs, devs[1:]))
    detail = "max deviation/bound " + " ".join(f"n={t['n']}:{r:.3g}" for t, r in zip(table, ratios))
    report(4, below and decreasing, detail + f"; deviation decreasing={decreasing}")


def test_c05_extended_airy_forms():
    taus = (-0.5, 0.0, 0.7)
    xi_pairs = ((-1.0, 0.3), (0.3, 1.5), (1.5, -1.0))
    form, phi = 0.0, 0.0
    for (t1, t2), (x1, x2) in itertools.product(itertools.product(taus, taus), xi_pairs):
        lam = airy.extended_airy_kernel(t1, x1, t2, x2)
        dbl = airy.extended_airy_double_integral(t1, x1, t2, x2, *airy.contour_heights(t1, t2))
        form = max(form, abs(lam - dbl))
        mod = airy.modified_airy_kernel(t1, x1, t2, x2)
        phi = max(phi, abs(mod - lam - airy.phi_gaussian(t1, t2, x1, x2)))
    report(5, form < 1e-8 and phi < 1e-8, f"27 tuples: forms {form:.1e}, Atilde-A-phi {phi:.1e}")


def test_c06_tracy_widom_routes():
    t0 = time.perf_counter()
    tab = airy.tw_tables()
    diff = max(abs(float(tab.F2(x)) - airy.tw2_nystrom(x)) for x in (-4.0, -2.0, 0.0, 2.0))
    xs = np.linspace(tab.x_min, tab.x_max, 2201)
    viol = float(np.max(tab.F1(xs) ** 2 - tab.F2(xs)))
    dt = time.perf_counter() - t0
    report(6, diff < 1e-6 and viol <= 1e-15 and dt < 30,
           f"Nystrom vs Painleve {diff:.1e}, max(F1^2-F2) {viol:.1e}, {dt:.1f}s")


def test_c07_kernel_asymptotics():
    F = airy.tw2(0.0)
    gaps = []
    for N in (25, 100, 400):
        p = tp.PNGKernelParams.from_q(Q, N)
        g = float(tp.png_height_cdf(p, [math.floor(p.a_star * N)])[0])
        gaps.append(abs(g - F))
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.02
    report(7, ok, "|gap-F2(0)| " + " ".join(f"N={N}:{g:.5f}" for N, g in zip((25, 100, 400), gaps)))


def test_c08_point_vs_tw2(point_runs):
    ks = {}
    for N, (cfg, st, _) in point_runs.items():
        ks[N] = mc.g_point_vs_tw2(cfg, st)["ks"]
    dt = point_runs[128][2]
    ok = ks[128] < 0.05 and ks[128] < ks[16] and dt < 300
    report(8, ok, f"KS N=16 {ks[16]:.4f}, N=128 {ks[128]:.4f}, N=128 run {dt:.1f}s")


def test_c09_point_to_line_vs_tw1(point_runs):
    cfg, st, _ = point_runs[128]
    rep = mc.gpl_vs_tw1(cfg, st)
    ok = rep["ks"] < 0.05 and rep["ks"] < rep["ks_tw2"]
    report(9, ok, f"KS vs F1 {rep['ks']:.4f}, vs F2 {rep['ks_tw2']:.4f}, dominance {rep['dominance_ok']}")


def test_c10_two_time_joint(big_run):
    cfg, st = big_run
    rep = mc.two_time_vs_airy(cfg, 1.0, 0.0, 0.0, stats=st, exact=False)
    small = mc.ExperimentConfig(N=8, q=Q, sample_count=1_000_000, seed=11, observable="two_time", chunk=50_000)
    rs = mc.two_time_vs_airy(small, 1.0, 0.0, 0.0)
    ok = abs(rep["gap_sigma"]) <= 3 and abs(rs["exact_gap_sigma"]) <= 4
    report(10, ok, f"N=256 u={rep['u']}: emp {rep['empirical']:.4f} vs Airy {rep['reference']:.4f} "
                   f"({rep['gap_sigma']:+.2f} sigma); N=8 exact vs MC {rs['exact_gap_sigma']:+.2f} sigma")


def test_c11_transversal_tightness(big_run):
    cfg256, st256 = big_run
    r256 = mc.transversal_histogram(cfg256, st256)
    cfg64 = mc.ExperimentConfig(N=64, q=Q, sample_count=100_000, seed=12, observable="transversal")
    r64 = mc.transversal_histogram(cfg64)
    stab = mc.tail_stability(r64, r256, 3.0)
    ok = mc.tails_monotone(r64) and mc.tails_monotone(r256) and all(v["ok"] for v in stab.values())
    ok = ok and sum(r256["histogram"]["count"]) == st256.n
    zs = " ".join(f"T={T}:{v['z']:+.2f}" for T, v in stab.items())
    report(11, ok, f"monotone tails, z(N=64 vs 256) {zs}")


def test_c12_circle_walks():
    p = circle.CircleWalkParams(5, 3, 0.5)
    cue = max(circle.cue_residual(p, xs) for xs in itertools.combinations(range(5), 3))
    p2 = circle.CircleWalkParams(4, 1, 0.3, M=2)
    E = det.Enumeration(circle.circle_transition_system(p2))
    sites_all = [(r, x) for r in (-1, 0, 1) for x in range(4)]
    enum = 0.0
    for k in (1, 2, 3):
        for sites in itertools.combinations(sites_all, k):
            K = circle.cylinder_kernel_matrix(p2, list(sites))
            enum = max(enum, abs(np.linalg.det(K) - E.correlation(list(sites))))
    p3 = circle.CircleWalkParams(201, 101, 0.3)
    lim = 0.0
    for r, s in itertools.product((-1, 0, 1), repeat=2):
        for d in range(-5, 6):
            lim = max(lim, abs(circle.cylinder_kernel(p3, r, d, s, 0) - circle.limit_kernel(p3.rho, 0.3, r, d, s, 0)))
    ok = cue < 1e-10 and enum < 1e-10 and lim < 0.01
    report(12, ok, f"CUE {cue:.1e}, enumeration {enum:.1e}, N=201 vs limit {lim:.1e}")
