import math

import numpy as np
import pytest

from pngdet import airy, determinantal as det, toeplitz as tp
from pngdet.verify import limit_bound_table, png_kernel_errors


def trivial_system(M=2):
    return tp.SymbolSystem([tp.ScalarSymbol() for _ in range(2 * M)])


def geometric_series(g, side, K):
    """Coefficients of (1-g)/(1-g z) (side='plus') or (1-g)/(1-g/z) on k in [-K, K]."""
    c = np.zeros(2 * K + 1)
    k = np.arange(K + 1)
    if side == "plus":
        c[K:] = (1 - g) * g ** k
    else:
        c[:K + 1] = ((1 - g) * g ** k)[::-1]
    return c


# ---------------------------------------------------------------- Toeplitz matrices

def test_toeplitz_identity_symbol():
    assert np.allclose(tp.toeplitz_matrix(tp.ScalarSymbol(), 5), np.eye(5))


def test_toeplitz_single_mode():
    g = 0.3
    T = tp.toeplitz_matrix(tp.ScalarSymbol((tp.Factor("plus", g, 1),)), 5)
    expected = np.eye(5) - g * np.eye(5, k=-1)
    assert np.allclose(T, expected, atol=1e-14)


def test_png_symbol_coefficients_match_convolution():
    al, N = 0.5, 2
    S = tp.png_symbol_system([al] * 3, [al] * 3, N)
    K = 120
    seq = np.zeros(2 * K + 1)
    seq[K] = 1.0
    for r in range(-S.M, S.M):
        side = S.f(r).factors[0].side
        seq = np.convolve(seq, geometric_series(al, side, K))[K:3 * K + 1]
    T = tp.toeplitz_matrix(S.total, 4)
    for j in range(4):
        for k in range(4):
            assert T[j, k] == pytest.approx(seq[K + j - k], abs=1e-13)


def test_symbol_split_and_epsilon():
    S = tp.png_symbol_system([0.4] * 3, [0.6] * 3, 2)
    a = S.total
    z = 1.1 * np.exp(0.3j)
    assert complex(a(z)) == pytest.approx(complex(a.plus(z) * a.minus(z)))
    assert complex((a * a.inverse())(z)) == pytest.approx(1.0)
    assert S.epsilon == pytest.approx(0.4)


def test_wiener_hopf_inverse_product_decay():
    S = tp.png_symbol_system([0.5] * 3, [0.5] * 3, 2)
    for n in (16, 32, 64):
        D = np.abs(np.linalg.inv(tp.toeplitz_matrix(S.total, n)) - tp.wiener_hopf_inverse_product(S, n))
        j = np.arange(1, n + 1)
        dist = np.minimum.outer(n + 1 - j, n + 1 - j)
        prof = np.array([D[dist >= k].max() for k in range(1, n + 1)])
        # fitted constant: the correction is supported near the corner (rational symbol)
        assert prof[0] < 1e3
        assert np.all(np.diff(prof) <= 1e-10)
        assert prof[4] < 1e-10


# ---------------------------------------------------------------- generating functions

def test_finite_n_identity_system():
    S = trivial_system()
    z, w = 1.2 * np.exp(0.5j), 0.7 * np.exp(-0.2j)
    n = 6
    expected = (z / w) * sum((w / z) ** i for i in range(1, n + 1))
    assert tp.finite_n_generating(S, 0, 1, z, w, n) == pytest.approx(expected, rel=1e-12)


def test_limit_G_trivial_and_closed_form():
    S = trivial_system()
    assert tp.limit_kernel_G(S, -1, 1, 1.3, 0.8) == pytest.approx(1.0)
    al, N = 0.5, 3
    p = tp.PNGKernelParams(al, N)
    S = tp.png_symbol_system([al] * 5, [al] * 5, N)
    rng = np.random.default_rng(0)
    for u, v in [(0, 0), (1, -1), (-1, 2), (2, 2)]:
        z = rng.uniform(1.05, 1.8) * np.exp(2j * np.pi * rng.uniform())
        w = rng.uniform(0.6, 0.95) * np.exp(2j * np.pi * rng.uniform())
        assert tp.limit_kernel_G(S, 2 * u, 2 * v, z, w) == pytest.approx(complex(tp.png_G(p, u, v, z, w)), rel=1e-12)


def test_limit_generating_pole():
    with pytest.raises(ZeroDivisionError):
        tp.limit_generating(trivial_system(), 0, 0, 1.1, 1.1)


def test_finite_n_deviation_shrinks():
    table = limit_bound_table(ns=(8, 32))
    assert np.all(table[1]["deviation"] < table[0]["deviation"])


def test_bound_holds_from_n16():
    for row in limit_bound_table(ns=(16, 32, 64)):
        assert row["max_ratio"] < 1


# ---------------------------------------------------------------- PNG kernel

def test_png_kernel_vs_finite_system():
    assert png_kernel_errors(alpha=0.5, N=3) < 1e-8
    assert png_kernel_errors(alpha=0.3, N=4) < 1e-8


@pytest.mark.parametrize("N,u", [(2, 0), (3, 1), (4, -2)])
def test_density_sums_to_layer_count(N, u):
    p = tp.PNGKernelParams(0.5, N)
    xs = np.arange(1 - N, 50)
    K = tp.png_kernel_block(p, u, u, xs, xs).values
    assert np.trace(K) == pytest.approx(N, abs=1e-10)
    # below 1 - N sit the frozen flat layers, one particle per site
    low = np.arange(1 - N - 5, 1 - N)
    assert np.allclose(np.diag(tp.png_kernel_block(p, u, u, low, low).values), 1.0, atol=1e-10)


def test_contour_radius_independence():
    p = tp.PNGKernelParams(0.5, 3)
    xs, ys = np.arange(-2, 8), np.arange(-1, 9)
    for u, v in [(0, 0), (1, -1), (-1, 1)]:
        a = tp.png_kernel_block(p, u, v, xs, ys, tp.ContourSpec(r1=0.8, r2=1.3)).values
        b = tp.png_kernel_block(p, u, v, xs, ys, tp.ContourSpec(r1=0.6, r2=1.7)).values
        c = tp.png_kernel_block(p, u, v, xs, ys).values
        assert np.max(np.abs(a - b)) < 1e-10 and np.max(np.abs(a - c)) < 1e-10


def test_contour_spec_validation():
    with pytest.raises(ValueError):
        tp.ContourSpec(min_nodes=32)
    p = tp.PNGKernelParams(0.5, 2)
    with pytest.raises(ValueError):
        tp.png_kernel_block(p, 0, 0, [0], [0], tp.ContourSpec(r1=1.3, r2=0.8))
    with pytest.raises(ValueError):
        tp.png_kernel(p, 2, 0, 0, 0)


def test_swapped_contours_differ_by_phi():
    p = tp.PNGKernelParams(0.5, 3)
    for u, v, x, y in [(-1, 1, 2, 4), (0, 2, 5, 3), (-2, 0, 0, 0)]:
        inner = tp.png_kernel_direct(p, u, x, v, y, r_z=1.3, r_w=0.8)
        swapped = tp.png_kernel_direct(p, u, x, v, y, r_z=0.8, r_w=1.3)
        assert inner - swapped == pytest.approx(tp.phi_uv(p, u, v, x, y), abs=1e-10)
        block = tp.png_kernel(p, u, x, v, y)
        assert block == pytest.approx(swapped, abs=1e-9)


def test_phi_zero_for_ordered_times():
    p = tp.PNGKernelParams(0.5, 3)
    assert tp.phi_uv(p, 1, 1, 0, 0) == 0.0
    assert tp.phi_uv(p, 2, -1, 0, 3) == 0.0


def test_phi_one_step_matches_direct_sum():
    al = 0.4
    p = tp.PNGKernelParams(al, 3)
    for x, y in [(0, 0), (0, 3), (2, -1)]:
        direct = sum((1 - al) * al ** (z - x) * (1 - al) * al ** (z - y) for z in range(max(x, y), 400))
        assert tp.phi_uv(p, 0, 1, x, y) == pytest.approx(direct, abs=1e-14)


def test_phi_is_stochastic():
    p = tp.PNGKernelParams(0.5, 4)
    ys = np.arange(-120, 121)
    for u, v in [(0, 1), (-2, 1)]:
        assert tp.phi_block(p, u, v, [0], ys).sum() == pytest.approx(1.0, abs=1e-12)


def test_phi_matches_theta_integral():
    al, u, v = 0.5, -1, 1
    p = tp.PNGKernelParams(al, 3)
    th = np.linspace(-np.pi, np.pi, 4001)[:-1]
    h = (1 - al) ** (2 * (v - u)) / (1 + al ** 2 - 2 * al * np.cos(th)) ** (v - u)
    for x, y in [(0, 0), (1, 4)]:
        ref = np.mean(np.exp(1j * (y - x) * th) * h).real
        assert tp.phi_uv(p, u, v, x, y) == pytest.approx(ref, abs=1e-12)


# ---------------------------------------------------------------- exact finite-N laws

def test_height_cdf_matches_enumerated_walled_system():
    al, N = 0.5, 2
    p = tp.PNGKernelParams(al, N)
    S = tp.png_transition_system([al] * 3, [al] * 3, N, n=N, top=70)
    for l in (1, 3, 5):
        g = np.zeros((S.n_times, len(S.grid)))
        g[S.time_index(0), S.grid.points > l] = -1
        ref = det.gap_probability(S, g)
        assert tp.png_height_cdf(p, [l])[0] == pytest.approx(ref, abs=1e-10)


def test_height_cdf_matches_lpp_enumeration():
    # N=1: G(1,1) is geometric, P[G <= l] = 1 - q^{l+1}
    q = 0.3
    p = tp.PNGKernelParams.from_q(q, 1)
    ls = np.arange(0, 6)
    assert np.allclose(tp.png_height_cdf(p, ls), 1 - q ** (ls + 1), atol=1e-12)


def test_joint_cdf_consistency():
    p = tp.PNGKernelParams.from_q(0.25, 4)
    single = tp.png_height_cdf(p, [8], u=1)[0]
    assert tp.png_joint_cdf(p, 0, 200, 1, 8) == pytest.approx(single, abs=1e-10)
    j = tp.png_joint_cdf(p, 0, 8, 1, 8)
    assert j <= single + 1e-12 and j <= tp.png_height_cdf(p, [8])[0] + 1e-12


# ---------------------------------------------------------------- scaling limit

def test_scaled_coordinates_roundtrip():
    p = tp.PNGKernelParams.from_q(0.25, 100)
    u, x = tp.scaled_coordinates(p, 0.5, -0.3)
    tau, xi = tp.lattice_scaled_point(p, u, x)
    assert abs(tau - 0.5) < p.d_prime / 100 ** (2 / 3)
    assert abs(xi - (-0.3)) < 0.1
    with pytest.raises(ValueError):
        tp.scaled_coordinates(tp.PNGKernelParams.from_q(0.25, 4), 10.0, 0.0)


def test_conjugation_cancels_on_principal_blocks():
    xs = [-0.5, 0.0, 0.7]
    tau = 0.4
    A = np.array([[airy.extended_airy_kernel(tau, a, tau, b) for b in xs] for a in xs])
    C = np.array([[tp.conjugated_airy_kernel(tau, a, tau, b) for b in xs] for a in xs])
    pre = np.exp(tau * (np.array(xs)[None, :] - np.array(xs)[:, None]))
    assert np.allclose(C, pre * A, atol=1e-14)
    assert np.linalg.det(np.eye(3) - C) == pytest.approx(np.linalg.det(np.eye(3) - A), abs=1e-13)


def test_scaled_kernel_converges_on_diagonal():
    gaps = []
    for N in (25, 100, 400):
        p = tp.PNGKernelParams.from_q(0.25, N)
        kn, lim, (u, x, v, y) = tp.scaled_kernel_limit(p, 0.0, 0.0, 0.0, 0.0)
        at_lattice = tp.conjugated_airy_kernel(*tp.lattice_scaled_point(p, u, x), *tp.lattice_scaled_point(p, v, y))
        gaps.append(abs(kn - at_lattice))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.02


def test_scaled_kernel_two_times_close():
    p = tp.PNGKernelParams.from_q(0.25, 400)
    kn, lim, (u, x, v, y) = tp.scaled_kernel_limit(p, 0.0, 0.2, 0.5, -0.1)
    at_lattice = tp.conjugated_airy_kernel(*tp.lattice_scaled_point(p, u, x), *tp.lattice_scaled_point(p, v, y))
    assert abs(kn - at_lattice) < 0.03
