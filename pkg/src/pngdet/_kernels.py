"""Hot loops for last-passage Monte Carlo.

Each loop exists twice: a numba @njit version and a vectorised numpy
version.  Both consume the same counter-based random stream, so for a given
seed they return bit-identical samples.  Set ``PNGDET_NO_NUMBA=1`` to force the
numpy path (numba is also skipped silently when it is not importable).

Random stream
-------------
Replica ``r`` of seed ``s`` gets a 64-bit key ``mix(mix(s) ^ mix(r + C))``.
The uniform attached to lattice cell ``(i, j)`` is the output of splitmix64 at
counter ``key + (i << 32 | j) * GOLDEN``, mapped to ``((z >> 11) + 1) * 2**-53``
which lies in (0, 1].  Geometric weights come from inverse-CDF thresholds
``thr[m-1] = p**m``: ``w = #{m >= 1 : u <= p**m}``.
"""
import os

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_REPLICA_SALT = 0x632BE59BD9B4E019
_MASK = (1 << 64) - 1
_U53 = 2.0 ** -53

_DISABLED = os.environ.get("PNGDET_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by PNGDET_NO_NUMBA")
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _mix_py(x: int) -> int:
    x = (x + GOLDEN) & _MASK
    x = ((x ^ (x >> 30)) * _M1) & _MASK
    x = ((x ^ (x >> 27)) * _M2) & _MASK
    return x ^ (x >> 31)


def replica_keys(seed: int, start: int, count: int) -> np.ndarray:
    """Keys for replicas ``start, ..., start+count-1`` (uint64)."""
    s = _mix_py(int(seed) & _MASK)
    keys = [_mix_py(s ^ _mix_py((r + _REPLICA_SALT) & _MASK)) for r in range(start, start + count)]
    return np.array(keys, dtype=np.uint64)


def geometric_thresholds(p: float) -> np.ndarray:
    """Descending thresholds p, p^2, ... down to the smallest representable uniform."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"geometric parameter must lie in [0, 1), got {p}")
    thr = []
    if p > 0.0:
        t = p
        while t >= _U53:
            thr.append(t)
            t *= p
    return np.array(thr, dtype=np.float64)


# ---------------------------------------------------------------- numpy path

def _mix_np(x):
    x = x + np.uint64(GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def uniforms_np(keys: np.ndarray, i, j) -> np.ndarray:
    """Uniforms for replicas ``keys`` (shape R) at cells (i, j) (broadcast shape C) -> (R, C)."""
    ctr = (np.asarray(i, dtype=np.uint64) << np.uint64(32)) | np.asarray(j, dtype=np.uint64)
    z = _mix_np(keys[:, None] + ctr[None, :] * np.uint64(GOLDEN))
    return ((z >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _U53


def geometric_np(u: np.ndarray, thr: np.ndarray) -> np.ndarray:
    if thr.size == 0:
        return np.zeros(u.shape, dtype=np.int64)
    return np.searchsorted(-thr, -u, side="right").astype(np.int64)


def weights_np(keys: np.ndarray, I: int, J: int, thr: np.ndarray) -> np.ndarray:
    """Full weight arrays, shape (R, I, J).  Used for canaries and small fields."""
    ii, jj = np.meshgrid(np.arange(1, I + 1), np.arange(1, J + 1), indexing="ij")
    u = uniforms_np(keys, ii.ravel(), jj.ravel())
    return geometric_np(u, thr).reshape(len(keys), I, J)


def _lpp_cells_np(keys, I, J, thr, qi, qj):
    R = len(keys)
    out = np.zeros((R, len(qi)), dtype=np.int64)
    by_diag = {}
    for k, (a, b) in enumerate(zip(qi, qj)):
        by_diag.setdefault(int(a + b), []).append(k)
    prev = np.zeros((R, I + 2), dtype=np.int64)
    for s in range(2, I + J + 1):
        lo, hi = max(1, s - J), min(I, s - 1)
        ii = np.arange(lo, hi + 1)
        w = geometric_np(uniforms_np(keys, ii, s - ii), thr)
        cur = np.zeros_like(prev)
        cur[:, lo:hi + 1] = np.maximum(prev[:, lo - 1:hi], prev[:, lo:hi + 1]) + w
        prev = cur
        for k in by_diag.get(s, ()):
            out[:, k] = cur[:, qi[k]]
    return out


def _lpp_antidiag_np(keys, N, thr):
    # G(i, 2N - i) for i = 1..2N-1; only cells with i + j <= 2N are touched
    R = len(keys)
    prev = np.zeros((R, 2 * N + 1), dtype=np.int64)
    for s in range(2, 2 * N + 1):
        ii = np.arange(1, s)
        w = geometric_np(uniforms_np(keys, ii, s - ii), thr)
        cur = np.zeros_like(prev)
        cur[:, 1:s] = np.maximum(prev[:, 0:s - 1], prev[:, 1:s]) + w
        prev = cur
    return prev[:, 1:2 * N].copy()


# ---------------------------------------------------------------- numba path

def integer_thresholds(thr: np.ndarray) -> np.ndarray:
    """floor(thr * 2**53) as uint64, zero padded to length >= 3.

    With k = (z >> 11) + 1 the test u <= thr[m] is exactly k <= T[m], and the
    padding never fires because k >= 1.
    """
    T = np.zeros(max(3, len(thr)), dtype=np.uint64)
    T[:len(thr)] = np.floor(thr * 2.0 ** 53).astype(np.uint64)
    return T


if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _weight_nb(x, T):
        # x is the splitmix counter; first three thresholds tested branch-free
        z = x + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
        k = (z >> np.uint64(11)) + np.uint64(1)
        w = np.int64(k <= T[0]) + np.int64(k <= T[1]) + np.int64(k <= T[2])
        if w == 3:
            n = T.shape[0]
            while w < n and k <= T[w]:
                w += 1
        return w

    @njit(cache=True)
    def _lpp_cells_nb(keys, I, J, T, qi, qj):
        R = keys.shape[0]
        nq = qi.shape[0]
        out = np.zeros((R, nq), dtype=np.int64)
        row = np.zeros(J + 1, dtype=np.int64)
        G = np.uint64(GOLDEN)
        for r in range(R):
            key = keys[r]
            for j in range(J + 1):
                row[j] = 0
            for i in range(1, I + 1):
                x = key + (np.uint64(i) << np.uint64(32)) * G
                for j in range(1, J + 1):
                    x = x + G
                    row[j] = max(row[j], row[j - 1]) + _weight_nb(x, T)
                for k in range(nq):
                    if qi[k] == i:
                        out[r, k] = row[qj[k]]
        return out

    @njit(cache=True)
    def _lpp_antidiag_nb(keys, N, T):
        R = keys.shape[0]
        out = np.zeros((R, 2 * N - 1), dtype=np.int64)
        row = np.zeros(2 * N + 1, dtype=np.int64)
        G = np.uint64(GOLDEN)
        for r in range(R):
            key = keys[r]
            for j in range(2 * N + 1):
                row[j] = 0
            for i in range(1, 2 * N):
                x = key + (np.uint64(i) << np.uint64(32)) * G
                for j in range(1, 2 * N - i + 1):
                    x = x + G
                    row[j] = max(row[j], row[j - 1]) + _weight_nb(x, T)
                out[r, i - 1] = row[2 * N - i]
        return out


def lpp_cells(keys, I, J, thr, qi, qj, use_numba=None) -> np.ndarray:
    """G at query cells (qi[k], qj[k]) inside the I x J rectangle, one row per replica."""
    qi = np.asarray(qi, dtype=np.int64)
    qj = np.asarray(qj, dtype=np.int64)
    if np.any(qi < 1) or np.any(qi > I) or np.any(qj < 1) or np.any(qj > J):
        raise ValueError("query cells must lie inside the rectangle")
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _lpp_cells_nb(keys, I, J, integer_thresholds(thr), qi, qj)
    return _lpp_cells_np(keys, I, J, thr, qi, qj)


def lpp_antidiagonal(keys, N, thr, use_numba=None) -> np.ndarray:
    """G(i, 2N-i), i = 1..2N-1, for every replica (shape R x (2N-1))."""
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _lpp_antidiag_nb(keys, N, integer_thresholds(thr))
    return _lpp_antidiag_np(keys, N, thr)
