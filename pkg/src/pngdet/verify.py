"""Small-instance oracle suites: every check compares two independent routes."""
from __future__ import annotations

import itertools
import time

import numpy as np

from . import airy, circle, determinantal as det, lattice, toeplitz


def _result(name, ok, detail, t0):
    return {"name": name, "ok": bool(ok), "detail": detail, "seconds": round(time.perf_counter() - t0, 3)}


def lattice_identities(n_fields=500, max_N=6, max_w=4, seed=0):
    """Growth vs last passage, RSK vs multilayer, exponent ledger, inverse map.

    Returns the number of failed fields.
    """
    rng = np.random.default_rng(seed)
    fails = 0
    for _ in range(n_fields):
        N = int(rng.integers(1, max_N + 1))
        n = 2 * N - 1
        f = lattice.WeightField(rng.integers(0, max_w + 1, (n, n)))
        try:
            G = lattice.lpp_table(f)
            evo = lattice.evolve_png(f, n)
            if any(G[N + K, N - K] != evo.at(2 * K, n) for K in range(-N + 1, N)):
                raise AssertionError("growth vs last passage")
            cfg = lattice.multilayer(f, N)
            ea, eb = cfg.ledger()
            ea2, eb2 = lattice.label_exponents(f, N)
            if not (np.array_equal(ea, ea2) and np.array_equal(eb, eb2)):
                raise AssertionError("exponent ledger")
            back = lattice.reconstruct_weights(cfg)
            m = np.add.outer(np.arange(1, n + 1), np.arange(1, n + 1)) <= 2 * N
            if not (np.array_equal(back.w[m], f.w[m]) and not back.w[~m].any()):
                raise AssertionError("round trip")
            # shapes of rectangles touching the anti-diagonal need weights in the N x N corner
            g = np.zeros((n, n), dtype=np.int64)
            g[:N, :N] = f.w[:N, :N]
            fg = lattice.WeightField(g)
            cg = lattice.multilayer(fg, N)
            for K in range(N):
                l1 = lattice.rsk_shape(fg, N - K, N)
                l2 = lattice.rsk_shape(fg, N, N - K)
                for j in range(1, N + 1):
                    if l1.part(j) != cg.value(j - 1, -2 * K) + j - 1 or l2.part(j) != cg.value(j - 1, 2 * K) + j - 1:
                        raise AssertionError("shape vs layers")
        except (AssertionError, lattice.CorruptConfigurationError):
            fails += 1
    return fails


def random_transition_system(rng, max_n=3, max_M=2, max_grid=8):
    n = int(rng.integers(1, max_n + 1))
    M = int(rng.integers(1, max_M + 1))
    G = int(rng.integers(n + 1, max_grid + 1))
    grid = det.GridMeasure(np.arange(G), rng.uniform(0.5, 1.5, G))
    phis = [rng.uniform(0, 1, (G, G)) for _ in range(2 * M)]
    xs = sorted(rng.choice(G, n, replace=False))
    xe = sorted(rng.choice(G, n, replace=False))
    return det.TransitionSystem.from_boundary(grid, phis, xs, xe)


def determinantal_errors(n_systems=50, seed=0):
    """Worst errors (correlation, gap, product rule) of kernel formulas against enumeration."""
    rng = np.random.default_rng(seed)
    worst = {"correlation": 0.0, "gap": 0.0, "product_rule": 0.0}
    done = 0
    while done < n_systems:
        S = random_transition_system(rng)
        try:
            K = det.BlockKernel(S)
        except det.DegenerateSystemError:
            continue
        E = det.Enumeration(S)
        M, G = S.M, len(S.grid)
        for _ in range(5):
            k = int(rng.integers(1, 4))
            sites = list({(int(rng.integers(-M + 1, M)), int(rng.integers(G))) for _ in range(k)})
            b = E.correlation(sites)
            worst["correlation"] = max(worst["correlation"], abs(K.correlation(sites) - b) / max(1.0, abs(b)))
        g = -(rng.uniform(size=(2 * M - 1, G)) < 0.3).astype(float) * rng.uniform(0, 1, (2 * M - 1, G))
        worst["gap"] = max(worst["gap"], abs(det.gap_probability(S, g, K) - E.expectation(g)))
        z, w = rng.normal(size=2) + 1j * rng.normal(size=2)
        lhs, rhs = det.product_rule_check(S, g, z, w)
        worst["product_rule"] = max(worst["product_rule"], abs(lhs - rhs) / max(1.0, abs(rhs)))
        done += 1
    return worst


def partition_errors(seed=0):
    """Relative error of the walled PNG Gram determinant against the product formula."""
    rng = np.random.default_rng(seed)
    out = []
    for N in (2, 3):
        M = 2 * N - 1
        cases = [([0.5] * M, [0.5] * M), (list(rng.uniform(0.3, 0.6, M)), list(rng.uniform(0.3, 0.6, M)))]
        for a, b in cases:
            S = toeplitz.png_transition_system(a, b, N, n=N, top=80)
            Z = det.partition_function(S)
            ref = toeplitz.png_partition_closed_form(a, b, N, N)
            out.append(abs(Z / ref - 1))
    return max(out)


def limit_bound_table(alpha=0.5, N=2, ns=(8, 16, 32, 64), n_points=20, seed=4):
    """Finite-n deviation of the generating function against the explicit bound.

    Sample points are drawn once, before any evaluation: |z| in (1.05, 1.6),
    |w| in (0.6, 0.95), interior times r, s.  Returns one dict per n with the
    deviations, bounds and their worst ratio.
    """
    sys_ = toeplitz.png_symbol_system([alpha] * (2 * N - 1), [alpha] * (2 * N - 1), N)
    M = sys_.M
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n_points):
        rz, rw = rng.uniform(1.05, 1.6), rng.uniform(0.6, 0.95)
        z = rz * np.exp(1j * rng.uniform(0, 2 * np.pi))
        w = rw * np.exp(1j * rng.uniform(0, 2 * np.pi))
        pts.append((int(rng.integers(-M + 1, M)), int(rng.integers(-M + 1, M)), z, w))
    out = []
    for n in ns:
        dev = np.array([abs(toeplitz.finite_n_generating(sys_, r, s, z, w, n)
                            - toeplitz.limit_generating(sys_, r, s, z, w)) for r, s, z, w in pts])
        bnd = np.array([toeplitz.generating_bound(sys_, r, s, z, w, n) for r, s, z, w in pts])
        out.append({"n": n, "deviation": dev, "bound": bnd, "max_ratio": float((dev / bnd).max()),
                    "points": pts})
    return out


def png_kernel_errors(alpha=0.5, N=3):
    """Contour kernel against the finite walled system (two grid depths)."""
    p = toeplitz.PNGKernelParams(alpha, N)
    S = toeplitz.png_transition_system([alpha] * (2 * N - 1), [alpha] * (2 * N - 1), N, n=N + 2, top=70)
    K = det.BlockKernel(S)
    xs = np.arange(1 - N, 12)
    worst = 0.0
    for u, v in [(0, 0), (1, -1), (-1, 1), (0, 1), (2, -2)]:
        kb = toeplitz.png_kernel_block(p, u, v, xs, xs).values
        ref = np.array([[K(2 * u, x, 2 * v, y) for y in xs] for x in xs])
        worst = max(worst, float(np.abs(kb - ref).max()))
    return worst


def airy_errors():
    taus = (-0.5, 0.0, 0.7)
    pts = (-1.0, 0.3, 1.5)
    worst_form = 0.0
    worst_phi = 0.0
    rng = np.random.default_rng(1)
    for t1, t2 in itertools.product(taus, taus):
        x1, x2 = rng.choice(pts, 2)
        lam = airy.extended_airy_kernel(t1, x1, t2, x2)
        dbl = airy.extended_airy_double_integral(t1, x1, t2, x2, *airy.contour_heights(t1, t2))
        worst_form = max(worst_form, abs(lam - dbl))
        if t1 < t2:
            mod = airy.modified_airy_kernel(t1, x1, t2, x2)
            worst_phi = max(worst_phi, abs(mod - lam - airy.phi_gaussian(t1, t2, x1, x2)))
    worst_tw = max(abs(airy.tw2(x, check=False) - airy.tw2_nystrom(x)) for x in (-4.0, -2.0, 0.0, 2.0))
    return {"forms": worst_form, "phi": worst_phi, "tw2": worst_tw}


def circle_errors():
    p = circle.CircleWalkParams(5, 3, 0.5)
    cue = max(circle.cue_residual(p, xs) for xs in itertools.combinations(range(5), 3))
    p2 = circle.CircleWalkParams(4, 1, 0.3, M=2)
    enum = 0.0
    E = det.Enumeration(circle.circle_transition_system(p2))
    for sites in ([(-1, 0), (0, 1)], [(0, 2)], [(-1, 3), (1, 0)], [(1, 1), (-1, 1)], [(-1, 2), (0, 2), (1, 3)]):
        K = circle.cylinder_kernel_matrix(p2, sites)
        enum = max(enum, abs(np.linalg.det(K) - E.correlation(sites)))
    p3 = circle.CircleWalkParams(5, 3, 0.3, M=2)
    mix = 0.0
    for sites in ([(0, 0)], [(-1, 0), (0, 1)], [(-1, 1), (1, 3)]):
        mix = max(mix, abs(circle.periodic_correlation(p3, sites) - circle.mixture_correlation(p3, sites)))
    return {"cue": cue, "enumeration": enum, "periodic_mixture": mix}


def run(quick=True):
    """Run all suites; returns a list of result dicts."""
    res = []
    t0 = time.perf_counter()
    nf = 100 if quick else 500
    fails = lattice_identities(n_fields=nf)
    res.append(_result("lattice identities", fails == 0, f"{fails} failures over {nf} fields", t0))
    t0 = time.perf_counter()
    w = determinantal_errors(n_systems=10 if quick else 50)
    res.append(_result("determinantal vs enumeration", max(w.values()) < 1e-10, w, t0))
    t0 = time.perf_counter()
    e = partition_errors()
    res.append(_result("partition function closed form", e < 1e-8, {"relative": e}, t0))
    t0 = time.perf_counter()
    e = png_kernel_errors()
    res.append(_result("contour kernel vs finite system", e < 1e-8, {"max": e}, t0))
    t0 = time.perf_counter()
    w = airy_errors()
    res.append(_result("extended Airy and Tracy-Widom routes", w["forms"] < 1e-8 and w["phi"] < 1e-8 and w["tw2"] < 1e-6, w, t0))
    t0 = time.perf_counter()
    w = circle_errors()
    res.append(_result("circle walks", max(w.values()) < 1e-10, w, t0))
    return res
