import numpy as np
import pytest

from pngdet import _kernels as kn
from pngdet import lattice as lat


@pytest.mark.parametrize("q", [0.0, 0.01, 0.25, 0.81])
def test_backends_agree(q):
    if not kn.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    keys = kn.replica_keys(7, 0, 64)
    thr = kn.geometric_thresholds(q)
    a = kn.lpp_antidiagonal(keys, 12, thr, use_numba=True)
    b = kn.lpp_antidiagonal(keys, 12, thr, use_numba=False)
    assert np.array_equal(a, b)
    qi, qj = [3, 9, 12], [10, 4, 12]
    c = kn.lpp_cells(keys, 12, 12, thr, qi, qj, use_numba=True)
    d = kn.lpp_cells(keys, 12, 12, thr, qi, qj, use_numba=False)
    assert np.array_equal(c, d)


def test_kernels_match_sampled_field():
    q, N, seed = 0.36, 6, 3
    keys = kn.replica_keys(seed, 0, 5)
    thr = kn.geometric_thresholds(q)
    diag = kn.lpp_antidiagonal(keys, N, thr)
    for r in range(5):
        f = lat.sample_weight_field(lat.GeomParams.homogeneous(q), 2 * N - 1, 2 * N - 1, seed, replica=r)
        G = lat.lpp_table(f)
        assert list(diag[r]) == [G[i, 2 * N - i] for i in range(1, 2 * N)]


def test_replica_keys_are_positional():
    a = kn.replica_keys(1, 0, 10)
    b = kn.replica_keys(1, 4, 3)
    assert np.array_equal(a[4:7], b)
    assert len(set(a.tolist())) == 10


def test_uniforms_in_open_closed_unit_interval():
    u = kn.uniforms_np(kn.replica_keys(0, 0, 4), np.arange(1000), np.arange(1000))
    assert u.min() > 0 and u.max() <= 1


def test_thresholds_inverse_cdf():
    thr = kn.geometric_thresholds(0.5)
    u = np.array([1.0, 0.5, 0.49, 0.25, 0.2])
    assert list(kn.geometric_np(u, thr)) == [0, 1, 1, 2, 2]
    assert kn.geometric_thresholds(0.0).size == 0
    with pytest.raises(ValueError):
        kn.geometric_thresholds(1.0)


def test_integer_thresholds_exact():
    thr = kn.geometric_thresholds(0.3)
    T = kn.integer_thresholds(thr)
    k = np.array([1, 2 ** 20, 2 ** 52], dtype=np.uint64)
    u = k.astype(np.float64) * 2.0 ** -53
    for m, t in enumerate(thr):
        assert np.array_equal(u <= t, k <= T[m])


def test_query_cells_checked():
    with pytest.raises(ValueError):
        kn.lpp_cells(kn.replica_keys(0, 0, 1), 3, 3, kn.geometric_thresholds(0.2), [4], [1])
