"""Discrete polynuclear growth, last-passage percolation and the multilayer picture.

Coordinates: the weight w(i, j), 1 <= i <= I, 1 <= j <= J, is the nucleation
at space-time point (x, t) = (i - j, i + j - 1).  Heights obey

    h(x, t+1) = max(h(x-1, t), h(x, t), h(x+1, t)) + omega(x, t+1)

with h(x, 0) = 0, and G(i, j) = h(i - j, i + j - 1).
"""
from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels


class CorruptConfigurationError(ValueError):
    """A multilayer configuration that cannot come from any weight field."""


# --------------------------------------------------------------------- weights

@dataclass(frozen=True)
class GeomParams:
    """Parameters of the independent geometric weights.

    Either ``q`` (homogeneous, a_i = b_j = sqrt(q)) or explicit label
    sequences ``a`` and ``b`` (a[0] is a_1).  P[w(i,j) = m] = (1 - a_i b_j)(a_i b_j)^m.
    """
    a: tuple | None = None
    b: tuple | None = None
    q: float | None = None

    def __post_init__(self):
        if self.q is not None:
            if not 0.0 <= self.q < 1.0:
                raise ValueError(f"q must lie in [0, 1), got {self.q}")
        else:
            if self.a is None or self.b is None:
                raise ValueError("give either q or both label sequences a, b")
            a = tuple(float(v) for v in self.a)
            b = tuple(float(v) for v in self.b)
            if not all(0.0 <= v < 1.0 for v in a + b):
                raise ValueError("labels must lie in [0, 1)")
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    @classmethod
    def homogeneous(cls, q: float) -> "GeomParams":
        return cls(q=float(q))

    @property
    def is_homogeneous(self) -> bool:
        return self.q is not None

    def labels(self, I: int, J: int):
        if self.q is not None:
            al = math.sqrt(self.q)
            return np.full(I, al), np.full(J, al)
        if len(self.a) < I or len(self.b) < J:
            raise ValueError(f"need {I} a-labels and {J} b-labels")
        return np.array(self.a[:I]), np.array(self.b[:J])

    def rates(self, I: int, J: int) -> np.ndarray:
        """Matrix of a_i b_j."""
        a, b = self.labels(I, J)
        r = np.outer(a, b)
        if np.any(r >= 1.0):
            raise ValueError("a_i b_j must be < 1")
        return r


@dataclass
class WeightField:
    """Nonnegative integer weights w[i-1, j-1] = w(i, j)."""
    w: np.ndarray
    q: float | None = None
    seed: int | None = None

    def __post_init__(self):
        w = np.asarray(self.w)
        if w.ndim != 2:
            raise ValueError("weight field must be two-dimensional")
        if w.size and (not np.issubdtype(w.dtype, np.integer) and not np.all(w == np.round(w))):
            raise ValueError("weights must be integers")
        w = w.astype(np.int64)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        self.w = w

    @property
    def shape(self):
        return self.w.shape

    def omega(self, x, t):
        """Nucleation omega(x, t); zero off the lattice or outside the rectangle."""
        scalar = np.ndim(x) == 0 and np.ndim(t) == 0
        x, t = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(t))
        I, J = self.w.shape
        i = (t + x + 1) // 2
        j = (t - x + 1) // 2
        ok = ((t - x) % 2 == 1) & (i >= 1) & (i <= I) & (j >= 1) & (j <= J)
        out = np.zeros(x.shape, dtype=np.int64)
        out[ok] = self.w[i[ok] - 1, j[ok] - 1]
        return int(out[0]) if scalar else out

    def to_csv(self, path):
        I, J = self.w.shape
        with open(path, "w", newline="") as fh:
            fh.write(f"# I={I} J={J} q={'' if self.q is None else repr(self.q)} "
                     f"seed={'' if self.seed is None else self.seed}\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["i", "j", "w"])
            for i in range(I):
                for j in range(J):
                    wr.writerow([i + 1, j + 1, int(self.w[i, j])])

    @classmethod
    def from_csv(cls, path) -> "WeightField":
        with open(path) as fh:
            head = fh.readline()
            meta = dict(tok.split("=", 1) for tok in head.lstrip("#").split())
            I, J = int(meta["I"]), int(meta["J"])
            w = np.zeros((I, J), dtype=np.int64)
            rd = csv.DictReader(fh)
            for row in rd:
                w[int(row["i"]) - 1, int(row["j"]) - 1] = int(row["w"])
        q = float(meta["q"]) if meta.get("q") else None
        seed = int(meta["seed"]) if meta.get("seed") else None
        return cls(w, q=q, seed=seed)


def sample_weight_field(params: GeomParams, I: int, J: int, seed: int, replica: int = 0) -> WeightField:
    """Independent geometric weights from the counter-based stream of (seed, replica).

    The same (seed, replica) reproduces the field exactly and agrees cell by
    cell with the Monte Carlo kernels.
    """
    if I < 1 or J < 1:
        raise ValueError("field dimensions must be positive")
    keys = _kernels.replica_keys(seed, replica, 1)
    if params.is_homogeneous:
        w = _kernels.weights_np(keys, I, J, _kernels.geometric_thresholds(params.q))[0]
    else:
        rates = params.rates(I, J)
        ii, jj = np.meshgrid(np.arange(1, I + 1), np.arange(1, J + 1), indexing="ij")
        u = _kernels.uniforms_np(keys, ii.ravel(), jj.ravel())[0].reshape(I, J)
        # inverse CDF: w = floor(log u / log p), p = a_i b_j
        with np.errstate(divide="ignore"):
            lp = np.log(rates)
        w = np.where(rates > 0, np.floor(np.log(u) / np.where(rates > 0, lp, -1.0)), 0)
        w = w.astype(np.int64)
    return WeightField(w, q=params.q, seed=seed)


# --------------------------------------------------------------- growth / LPP

@dataclass
class HeightEvolution:
    """Heights h(x, t) for 0 <= t <= T and |x| <= T (stored as h[t, x + T])."""
    h: np.ndarray
    T: int

    def at(self, x, t):
        x = np.asarray(x)
        t = np.asarray(t)
        inside = (np.abs(x) <= self.T) & (t >= 0) & (t <= self.T)
        xi = np.clip(x + self.T, 0, 2 * self.T)
        ti = np.clip(t, 0, self.T)
        v = np.where(inside, self.h[ti, xi], 0)
        return int(v) if v.ndim == 0 else v

    def row(self, t: int) -> np.ndarray:
        return self.h[t]

    @property
    def xs(self) -> np.ndarray:
        return np.arange(-self.T, self.T + 1)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["t", "x", "h"])
            for t in range(self.T + 1):
                for x in range(-t, t + 1):
                    wr.writerow([t, x, int(self.h[t, x + self.T])])


def evolve_png(field: WeightField, T: int) -> HeightEvolution:
    """Run the growth rule up to time T starting from the flat interface."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    xs = np.arange(-T, T + 1)
    h = np.zeros((T + 1, 2 * T + 1), dtype=np.int64)
    cur = np.zeros(2 * T + 3, dtype=np.int64)  # padded by one zero on each side
    for t in range(1, T + 1):
        nxt = np.maximum(np.maximum(cur[:-2], cur[1:-1]), cur[2:])
        nxt = nxt + field.omega(xs, np.full_like(xs, t))
        cur[1:-1] = nxt
        h[t] = nxt
    return HeightEvolution(h, T)


def lpp_table(field: WeightField) -> np.ndarray:
    """Last-passage times; G[i, j] for 0 <= i <= I, 0 <= j <= J with zero boundary."""
    I, J = field.shape
    G = np.zeros((I + 1, J + 1), dtype=np.int64)
    w = field.w
    for i in range(1, I + 1):
        prev = G[i - 1]
        row = G[i]
        for j in range(1, J + 1):
            a = prev[j]
            b = row[j - 1]
            row[j] = (a if a > b else b) + w[i - 1, j - 1]
    return G


def point_to_line(table, N: int) -> int:
    """G_pl(N) = max over |K| < N of G(N + K, N - K).

    ``table`` is a last-passage table from ``lpp_table`` (row/column 0 are the
    zero boundary) or a WeightField, whose table is computed first.
    """
    G = lpp_table(table) if isinstance(table, WeightField) else np.asarray(table)
    if G.shape[0] < 2 * N or G.shape[1] < 2 * N:
        raise ValueError(f"table must cover the anti-diagonal i + j = {2 * N}")
    return int(max(G[N + K, N - K] for K in range(-N + 1, N)))


# --------------------------------------------------------------- jumps, T map

@dataclass
class JumpProfile:
    """Up and down jumps at the sites x with t - x odd."""
    t: int
    x: np.ndarray
    plus: np.ndarray
    minus: np.ndarray


def jumps(evo: HeightEvolution, t: int) -> JumpProfile:
    if not 0 <= t <= evo.T:
        raise ValueError("time outside the stored evolution")
    xs = np.arange(-t + 1, t, 2)
    hx = evo.at(xs, t)
    plus = hx - evo.at(xs - 1, t)
    minus = hx - evo.at(xs + 1, t)
    return JumpProfile(t, xs, np.asarray(plus), np.asarray(minus))


def t_operator(field: WeightField) -> WeightField:
    """Collision map: (T omega)(x, t) = min(eta+(x+1, t-1), eta-(x-1, t-1)).

    In cell coordinates Tw(i, j) = min(G(i, j-1), G(i-1, j)) - G(i-1, j-1).
    """
    G = lpp_table(field)
    tw = np.minimum(G[1:, :-1], G[:-1, 1:]) - G[:-1, :-1]
    return WeightField(tw, q=field.q, seed=field.seed)


def _triangle_mask(N: int) -> np.ndarray:
    i = np.arange(1, 2 * N)
    return (i[:, None] + i[None, :]) <= 2 * N


def _embed_triangle(field: WeightField, N: int) -> np.ndarray:
    n = 2 * N - 1
    w = np.zeros((n, n), dtype=np.int64)
    I, J = field.shape
    w[:min(I, n), :min(J, n)] = field.w[:n, :n]
    w[~_triangle_mask(N)] = 0
    return w


# ------------------------------------------------------------------ multilayer

@dataclass
class MultiLayerConfig:
    """Layers h_0 > h_1 > ... > h_{N-1} at time 2N-1 on |x| <= 2N-1.

    heights[k, x + 2N - 1] = h_k(x, 2N-1); layer k starts flat at -k.
    """
    N: int
    heights: np.ndarray

    @property
    def T(self) -> int:
        return 2 * self.N - 1

    def layer(self, k: int) -> np.ndarray:
        if k >= self.N:
            return np.full(2 * self.T + 1, -k, dtype=np.int64)
        return self.heights[k]

    def value(self, k: int, x: int) -> int:
        if abs(x) > self.T:
            return -k
        return int(self.layer(k)[x + self.T])

    def ledger(self):
        """Exponent vectors of (a_1..a_2N-1, b_1..b_2N-1) read off the final jumps.

        The up-jump of layer k at x = 2m carries label a_{N+m}, the down-jump
        carries b_{N-m}.  Index 0 of each returned array is unused.
        """
        N, T = self.N, self.T
        ea = np.zeros(2 * N, dtype=np.int64)
        eb = np.zeros(2 * N, dtype=np.int64)
        for k in range(N):
            h = self.heights[k]
            for m in range(-N + 1, N):
                x = 2 * m + T
                ea[N + m] += h[x] - h[x - 1]
                eb[N - m] += h[x] - h[x + 1]
        return ea, eb


def multilayer(field: WeightField, N: int) -> MultiLayerConfig:
    """Multilayer PNG: layer k grows from T^k omega and is shifted down by k.

    Only weights with i + j <= 2N influence time 2N-1; the field is restricted
    to that triangle.
    """
    if N < 1:
        raise ValueError("N must be positive")
    T = 2 * N - 1
    mask = _triangle_mask(N)
    w = _embed_triangle(field, N)
    heights = np.zeros((N, 2 * T + 1), dtype=np.int64)
    cur = WeightField(w)
    for k in range(N):
        heights[k] = evolve_png(cur, T).row(T) - k
        nxt = t_operator(cur).w
        nxt[~mask] = 0
        cur = WeightField(nxt)
    return MultiLayerConfig(N, heights)


def label_exponents(field: WeightField, N: int):
    """Exponents of a_i and b_j in prod_{i+j<=2N} (a_i b_j)^{w(i,j)}."""
    w = _embed_triangle(field, N)
    ea = np.zeros(2 * N, dtype=np.int64)
    eb = np.zeros(2 * N, dtype=np.int64)
    ea[1:] = w.sum(axis=1)
    eb[1:] = w.sum(axis=0)
    return ea, eb


def check_nonintersecting(cfg: MultiLayerConfig) -> None:
    """Raise if consecutive layers violate strict nonintersection at time 2N-1."""
    T = cfg.T
    for k in range(cfg.N):
        for x in range(-T, T + 1):
            if (T - x) % 2 == 1:
                if not cfg.value(k + 1, x) < cfg.value(k, x - 1):
                    raise CorruptConfigurationError(
                        f"layers {k},{k + 1} touch at x={x} (odd site)")
            else:
                if not cfg.value(k + 1, x - 1) < cfg.value(k, x):
                    raise CorruptConfigurationError(
                        f"layers {k},{k + 1} touch at x={x} (even site)")


def reconstruct_weights(cfg: MultiLayerConfig) -> WeightField:
    """Invert ``multilayer``: recover the weights on i + j <= 2N from the layers.

    Runs the growth backwards in time.  At each time the nucleation of layer k
    is min(eta+_k, eta-_k); removing it and restoring the collisions fed by
    layer k+1 gives the jumps one step earlier.
    """
    N, T = cfg.N, cfg.T
    check_nonintersecting(cfg)
    ep = {}
    em = {}
    for k in range(N):
        h = cfg.heights[k]
        xs = np.arange(-T + 1, T, 2)
        ep[k] = h[xs + T] - h[xs - 1 + T]
        em[k] = h[xs + T] - h[xs + 1 + T]
    w = np.zeros((T, T), dtype=np.int64)
    for t in range(T, 0, -1):
        xs = np.arange(-t + 1, t, 2)
        for k in range(N):
            if np.any(ep[k] < 0) or np.any(em[k] < 0):
                raise CorruptConfigurationError(f"negative jump in layer {k} at time {t}")
        om = [np.minimum(ep[k], em[k]) for k in range(N)] + [np.zeros(len(xs), dtype=np.int64)]
        i = (t + xs + 1) // 2
        j = (t - xs + 1) // 2
        w[i - 1, j - 1] = om[0]
        for k in range(N):
            # eta+(x, t-1) comes from the site x-1 at time t, eta-(x, t-1) from x+1
            new_p = ep[k] - om[k] + om[k + 1]
            new_m = em[k] - om[k] + om[k + 1]
            if new_m[0] != 0 or new_p[-1] != 0:
                raise CorruptConfigurationError(f"jumps of layer {k} leave the light cone at time {t}")
            ep[k] = new_p[:-1]
            em[k] = new_m[1:]
    return WeightField(w)


# ------------------------------------------------------------------------- RSK

@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        p = tuple(int(v) for v in self.parts if v != 0)
        if any(v < 0 for v in p) or any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ValueError("partition must be weakly decreasing and nonnegative")
        object.__setattr__(self, "parts", p)

    def part(self, j: int) -> int:
        """lambda_j, 1-based; zero beyond the length."""
        return self.parts[j - 1] if 1 <= j <= len(self.parts) else 0

    def __len__(self):
        return len(self.parts)

    @property
    def size(self) -> int:
        return sum(self.parts)


def rsk_shape(field: WeightField, M: int, N: int) -> Partition:
    """Shape of the RSK insertion tableau of the submatrix w(i, j), i <= M, j <= N."""
    I, J = field.shape
    if M > I or N > J or M < 0 or N < 0:
        raise ValueError("submatrix outside the field")
    rows: list[list[int]] = []
    for i in range(M):
        for j in range(N):
            for _ in range(int(field.w[i, j])):
                x = j + 1
                for row in rows:
                    pos = bisect_right(row, x)
                    if pos == len(row):
                        row.append(x)
                        x = None
                        break
                    row[pos], x = x, row[pos]
                if x is not None:
                    rows.append([x])
    return Partition(tuple(len(r) for r in rows))


# --------------------------------------------------------------------- scaling

def png_constants(q: float):
    """(a_star, d, d_prime) for the homogeneous model with a_i = b_j = sqrt(q)."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    al = math.sqrt(q)
    a_star = 2 * al / (1 - al)
    d = al ** (1 / 3) * (1 + al) ** (1 / 3) / (1 - al)
    d_prime = (1 - al) / (1 + al) * d
    return a_star, d, d_prime


@dataclass
class RescaledPath:
    """Rescaled top height H_N(t_j) at the grid times t_j = j d' / N^(2/3)."""
    times: np.ndarray
    values: np.ndarray
    N: int

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


def rescale_heights(h_top: np.ndarray, q: float, N: int) -> RescaledPath:
    """``h_top[j + N - 1] = h(2j, 2N-1)`` for |j| < N (equivalently G(N+j, N-j))."""
    a_star, d, dp = png_constants(q)
    j = np.arange(-N + 1, N)
    vals = (np.asarray(h_top, dtype=float) - a_star * N) / (d * N ** (1 / 3))
    return RescaledPath(j * dp / N ** (2 / 3), vals, N)


def rescale_height(evo: HeightEvolution, q: float, N: int) -> RescaledPath:
    """H_N from a stored evolution, which must reach time 2N-1."""
    T = 2 * N - 1
    if evo.T < T:
        raise ValueError(f"evolution must reach time {T}")
    xs = 2 * np.arange(-N + 1, N)
    return rescale_heights(evo.at(xs, T), q, N)


def transversal_argmax(path: RescaledPath) -> float:
    """First (leftmost) time at which the rescaled height is maximal."""
    return float(path.times[int(np.argmax(path.values))])
