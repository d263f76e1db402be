"""Seeded Monte Carlo ensembles of geometric last-passage percolation and their
comparison with the exact and limiting distributions.

One replica is one anti-diagonal profile G(N+u, N-u), |u| < N (equivalently
the PNG height at even sites at time 2N-1).  Every replica draws from its own
counter-based stream keyed by (seed, replica index), so chunking and the
number of worker processes never change the samples.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .airy import airy_fdd, tw1, tw2
from .lattice import (GeomParams, evolve_png, lpp_table, png_constants, rsk_shape,
                      sample_weight_field)
from .toeplitz import PNGKernelParams, png_height_cdf, png_joint_cdf

OBSERVABLES = ("point", "gpl", "two_time", "transversal")
TAIL_LEVELS = (0.5, 1.0, 1.5, 2.0)
# Point-to-line heights rescaled by d N^(1/3) converge to the GOE law at
# 2^(2/3) xi in the standard Tracy-Widom normalisation.
GOE_SCALE = 2.0 ** (2.0 / 3.0)


class CanaryError(RuntimeError):
    """A spot-checked replica violated a samplewise lattice identity."""


def code_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # pragma: no cover - not installed
        return "0.1.0"


@dataclass(frozen=True)
class ExperimentConfig:
    N: int
    q: float
    sample_count: int
    seed: int
    observable: str = "point"
    grid: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    workers: int = 1
    chunk: int = 2000
    canary_fraction: float = 0.01
    offsets: tuple = ()

    def __post_init__(self):
        if self.sample_count < 100:
            raise ValueError("sample_count must be at least 100")
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if not 0.0 <= self.q < 1.0:
            raise ValueError("q must lie in [0, 1)")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}")
        if len(self.grid) == 0:
            raise ValueError("evaluation grid must be nonempty")
        if self.workers < 1 or self.chunk < 1:
            raise ValueError("workers and chunk must be positive")
        if not 0.0 <= self.canary_fraction <= 1.0:
            raise ValueError("canary_fraction must lie in [0, 1]")
        if any(abs(u) >= self.N for u in self.offsets):
            raise ValueError("offsets must satisfy |u| < N")
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "offsets", tuple(int(u) for u in self.offsets))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = [list(g) if isinstance(g, (tuple, list)) else g for g in self.grid]
        d["offsets"] = list(self.offsets)
        return d

    def config_hash(self) -> str:
        # worker count and chunking do not affect results, so they stay out of the hash
        d = self.to_dict()
        d.pop("workers")
        d.pop("chunk")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def scale(self):
        """(center a N, spread d N^(1/3)) or (None, None) when q = 0."""
        if self.q == 0.0:
            return None, None
        a, d, _ = png_constants(self.q)
        return a * self.N, d * self.N ** (1 / 3)


def wilson_interval(k, n, z=1.96):
    """Wilson score interval for a binomial proportion."""
    k = np.asarray(k, dtype=float)
    p = k / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return mid - half, mid + half


@dataclass
class EmpiricalStats:
    """Per-replica statistics of one ensemble.

    ``values`` holds the selected raw integer observable (one per replica, or
    one row per replica for the two-time observable); ``columns`` holds every
    per-replica statistic that was collected.
    """
    values: np.ndarray
    center: float | None
    spread: float | None
    columns: dict
    manifest: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.values)

    def rescaled(self, values=None) -> np.ndarray:
        v = self.values if values is None else values
        if self.center is None:
            raise ValueError("rescaling is undefined for q = 0")
        return (np.asarray(v, dtype=float) - self.center) / self.spread

    def level(self, xi):
        """Largest integer l with (l - center)/spread <= xi."""
        return np.floor(self.center + self.spread * np.asarray(xi, dtype=float) + 1e-9).astype(np.int64)

    def ecdf(self, xi, values=None) -> np.ndarray:
        v = np.sort(self.values if values is None else values)
        return np.searchsorted(v, self.level(xi), side="right") / len(v)

    def stderr(self, xi, values=None) -> np.ndarray:
        F = self.ecdf(xi, values)
        return np.sqrt(F * (1 - F) / self.n)

    def ci(self, xi, values=None, z=1.96):
        k = self.ecdf(xi, values) * self.n
        return wilson_interval(k, self.n, z)

    def _support(self, values):
        v = np.sort(np.asarray(values))
        levels = np.arange(v[0] - 1, v[-1] + 1)
        return levels, np.searchsorted(v, levels, side="right") / len(v)

    def ks(self, ref_cdf, values=None) -> float:
        """KS distance on the lattice: sup over integer levels l of
        |F_emp(l) - F_ref((l - center)/spread)|.

        The samples live on a lattice of spacing 1/spread, so the empirical
        CDF is compared with the reference where the data can resolve it.
        """
        levels, F = self._support(self.values if values is None else values)
        R = ref_cdf(self.rescaled(levels))
        return float(min(1.0, np.max(np.abs(F - R))))

    def ks_continuous(self, ref_cdf, values=None) -> float:
        """Classical sup over all real xi, including the left limits at jumps."""
        levels, F = self._support(self.values if values is None else values)
        R = ref_cdf(self.rescaled(levels))
        left = np.concatenate([[0.0], F[:-1]])
        return float(min(1.0, max(np.max(np.abs(F - R)), np.max(np.abs(left - R)))))

    def histogram(self, values=None):
        vals, counts = np.unique(self.values if values is None else values, return_counts=True)
        return vals, counts

    @staticmethod
    def merge(parts):
        """Concatenate partial statistics in replica order."""
        first = parts[0]
        cols = {k: np.concatenate([p.columns[k] for p in parts]) for k in first.columns}
        vals = np.concatenate([p.values for p in parts])
        return EmpiricalStats(vals, first.center, first.spread, cols, dict(first.manifest))


# ------------------------------------------------------------------ ensemble

def profile_statistics(A: np.ndarray, offsets=()) -> dict:
    """Reduce anti-diagonal profiles (R x (2N-1)) to per-replica statistics."""
    R, L = A.shape
    N = (L + 1) // 2
    mx = A.max(axis=1)
    first = np.argmax(A, axis=1) - (N - 1)
    last = (L - 1 - np.argmax(A[:, ::-1], axis=1)) - (N - 1)
    cols = {
        "point": A[:, N - 1].copy(),
        "gpl": mx,
        "argmax_first": first.astype(np.int64),
        "argmax_last": last.astype(np.int64),
        "n_argmax": (A == mx[:, None]).sum(axis=1).astype(np.int64),
    }
    if offsets:
        cols["offsets"] = A[:, [N - 1 + u for u in offsets]].copy()
    return cols


def canary_check(seed: int, replica: int, N: int, q: float, profile: np.ndarray) -> None:
    """Recompute one replica through the lattice module and check the identities.

    The weight field is regenerated with the numpy sampler, the PNG heights at
    time 2N-1 must reproduce the whole anti-diagonal profile, and the first RSK
    row must equal the last-passage time on the two edge rectangles and on a
    small corner square.
    """
    M = 2 * N - 1
    f = sample_weight_field(GeomParams.homogeneous(q), M, M, seed, replica=replica)
    evo = evolve_png(f, M)
    h = evo.at(2 * np.arange(-N + 1, N), M)
    if not np.array_equal(h, profile):
        raise CanaryError(f"replica {replica}: PNG heights disagree with the sampled profile")
    w = f.w
    m = min(N, 16)
    checks = [((M, 1), int(w[:, 0].sum())), ((1, M), int(w[0, :].sum())),
              ((m, m), int(lpp_table(type(f)(w[:m, :m]))[m, m]))]
    for (a, b), g in checks:
        if rsk_shape(f, a, b).part(1) != g:
            raise CanaryError(f"replica {replica}: RSK first row differs from G({a},{b})")
    if profile[0] != w[0, :M].sum() or profile[-1] != w[:M, 0].sum():
        raise CanaryError(f"replica {replica}: edge passage times are wrong")


def _chunk(args):
    seed, start, count, N, q, offsets, stride = args
    keys = _kernels.replica_keys(seed, start, count)
    thr = _kernels.geometric_thresholds(q)
    A = _kernels.lpp_antidiagonal(keys, N, thr)
    ncan = 0
    if stride:
        for r in range(start, start + count):
            if r % stride == 0:
                canary_check(seed, r, N, q, A[r - start])
                ncan += 1
    cols = profile_statistics(A, offsets)
    return cols, ncan


def _select(cols, observable):
    if observable == "two_time":
        return cols["offsets"] if "offsets" in cols else cols["point"][:, None]
    if observable == "transversal":
        return cols["argmax_first"]
    return cols[observable]


def run_ensemble(cfg: ExperimentConfig) -> EmpiricalStats:
    stride = 0 if cfg.canary_fraction == 0 else max(1, round(1 / cfg.canary_fraction))
    offsets = cfg.offsets
    if cfg.observable == "two_time" and not offsets:
        offsets = (0,)
    tasks = [(cfg.seed, s, min(cfg.chunk, cfg.sample_count - s), cfg.N, cfg.q, offsets, stride)
             for s in range(0, cfg.sample_count, cfg.chunk)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_chunk, tasks))
    else:
        results = [_chunk(t) for t in tasks]
    cols = {k: np.concatenate([r[0][k] for r in results]) for k in results[0][0]}
    center, spread = cfg.scale()
    manifest = {
        "seed": cfg.seed,
        "code_version": code_version(),
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "canaries": int(sum(r[1] for r in results)),
    }
    return EmpiricalStats(_select(cols, cfg.observable), center, spread, cols, manifest)


# ------------------------------------------------------------------ reports

def f1_lattice(xi):
    """Limit law of the rescaled point-to-line time: F1(2^(2/3) xi)."""
    return tw1(GOE_SCALE * np.asarray(xi, dtype=float))


def _f2(xi):
    return tw2(np.asarray(xi, dtype=float), check=False)


def _cdf_report(stats: EmpiricalStats, values, grid, ref):
    grid = np.asarray(grid, dtype=float)
    lo, hi = stats.ci(grid, values)
    emp = stats.ecdf(grid, values)
    r = ref(grid)
    return {
        "grid": grid.tolist(),
        "empirical": emp.tolist(),
        "reference": np.atleast_1d(r).tolist(),
        "gap": (emp - r).tolist(),
        "stderr": stats.stderr(grid, values).tolist(),
        "ci": [lo.tolist(), hi.tolist()],
    }


def _base(stats: EmpiricalStats, cfg: ExperimentConfig) -> dict:
    return {"config": cfg.to_dict(), "seed": cfg.seed, "n_samples": stats.n, "manifest": stats.manifest}


def g_point_vs_tw2(cfg: ExperimentConfig, stats: EmpiricalStats | None = None) -> dict:
    """Rescaled G(N,N) against F2."""
    stats = run_ensemble(cfg) if stats is None else stats
    v = stats.columns["point"]
    rep = _base(stats, cfg)
    rep.update(_cdf_report(stats, v, cfg.grid, _f2))
    rep["ks"] = stats.ks(_f2, v)
    rep["ks_continuous"] = stats.ks_continuous(_f2, v)
    return rep


def gpl_vs_tw1(cfg: ExperimentConfig, stats: EmpiricalStats | None = None) -> dict:
    """Rescaled G_pl(N) against the GOE limit, with F2 on the same data for contrast."""
    stats = run_ensemble(cfg) if stats is None else stats
    v = stats.columns["gpl"]
    rep = _base(stats, cfg)
    rep.update(_cdf_report(stats, v, cfg.grid, f1_lattice))
    rep["ks"] = stats.ks(f1_lattice, v)
    rep["ks_continuous"] = stats.ks_continuous(f1_lattice, v)
    rep["ks_tw2"] = stats.ks(_f2, v)
    rep["ks_tw1_unscaled"] = stats.ks(tw1, v)
    # G_pl >= G(N,N) samplewise, so its CDF lies below the point CDF everywhere
    levels = np.arange(min(v.min(), stats.columns["point"].min()) - 1, v.max() + 1)
    Fp = np.searchsorted(np.sort(stats.columns["point"]), levels, side="right")
    Fl = np.searchsorted(np.sort(v), levels, side="right")
    rep["dominance_ok"] = bool(np.all(Fl <= Fp))
    return rep


def two_time_offset(cfg: ExperimentConfig, tau: float):
    """Rounded lattice offset u for rescaled time tau, and the time it actually represents."""
    _, _, dp = png_constants(cfg.q)
    u = int(round(tau * cfg.N ** (2 / 3) / dp))
    return u, u * dp / cfg.N ** (2 / 3)


def two_time_vs_airy(cfg: ExperimentConfig, tau: float, xi1: float, xi2: float,
                     stats: EmpiricalStats | None = None, exact: bool = True) -> dict:
    """P[H_N(0) <= xi1, H_N(tau) <= xi2] against the Airy process at (0, tau_u).

    The offset u is rounded to the lattice and the limit is evaluated at the
    time tau_u = u d' / N^(2/3) it represents.
    """
    u, tau_u = two_time_offset(cfg, tau)
    if stats is None:
        cfg2 = ExperimentConfig(**{**cfg.to_dict(), "grid": tuple(cfg.grid), "observable": "two_time",
                                   "offsets": (0, u)})
        stats = run_ensemble(cfg2)
    cols = stats.columns
    offs = list(stats.manifest["config"]["offsets"])
    if 0 not in offs or u not in offs:
        raise ValueError(f"ensemble lacks offsets 0 and {u}")
    g0 = cols["offsets"][:, offs.index(0)]
    gu = cols["offsets"][:, offs.index(u)]
    l1, l2 = int(stats.level(xi1)), int(stats.level(xi2))
    n = stats.n
    p = float(np.mean((g0 <= l1) & (gu <= l2)))
    sigma = math.sqrt(max(p * (1 - p), 1.0 / n) / n)
    if u == 0:
        lim = airy_fdd([0.0], [min(xi1, xi2)])
    else:
        lim = airy_fdd([0.0, tau_u], [xi1, xi2 + tau_u ** 2])
    rep = _base(stats, cfg)
    rep.update({
        "tau": tau, "tau_lattice": tau_u, "u": u, "levels": [l1, l2],
        "empirical": p, "sigma": sigma, "reference": lim,
        "gap_sigma": (p - lim) / sigma,
        "ci": list(wilson_interval(p * n, n)),
        "marginals": [float(np.mean(g0 <= l1)), float(np.mean(gu <= l2))],
    })
    rep["product_of_marginals"] = rep["marginals"][0] * rep["marginals"][1]
    if exact and cfg.q > 0:
        kp = PNGKernelParams.from_q(cfg.q, cfg.N)
        if u == 0:
            ex = float(png_height_cdf(kp, [min(l1, l2)])[0])
        else:
            ex = png_joint_cdf(kp, 0, l1, u, l2)
        rep["exact"] = ex
        rep["exact_gap_sigma"] = (p - ex) / sigma
    return rep


def transversal_histogram(cfg: ExperimentConfig, stats: EmpiricalStats | None = None) -> dict:
    """Law of the first maximiser K_N of the rescaled profile."""
    stats = run_ensemble(cfg) if stats is None else stats
    _, _, dp = png_constants(cfg.q)
    unit = dp / cfg.N ** (2 / 3)
    cols = stats.columns
    K = cols["argmax_first"] * unit
    mid = 0.5 * (cols["argmax_first"] + cols["argmax_last"]) * unit
    n = stats.n
    vals, counts = np.unique(cols["argmax_first"], return_counts=True)
    tails = {}
    for T in TAIL_LEVELS:
        f = float(np.mean(np.abs(K) > T))
        tails[str(T)] = {"fraction": f, "stderr": math.sqrt(max(f * (1 - f), 1.0 / n) / n)}
    rep = _base(stats, cfg)
    rep.update({
        "unit": unit,
        "histogram": {"u": vals.tolist(), "t": (vals * unit).tolist(), "count": counts.tolist()},
        "tails": tails,
        "mean_first": float(K.mean()), "stderr_first": float(K.std(ddof=1) / math.sqrt(n)),
        "mean_mid": float(mid.mean()), "stderr_mid": float(mid.std(ddof=1) / math.sqrt(n)),
        "duplicate_argmax_frequency": float(np.mean(cols["n_argmax"] > 1)),
    })
    return rep


def tail_stability(rep_a: dict, rep_b: dict, n_sigma: float = 3.0) -> dict:
    """Compare tail fractions of two transversal reports level by level."""
    out = {}
    for T in rep_a["tails"]:
        a, b = rep_a["tails"][T], rep_b["tails"][T]
        sd = math.hypot(a["stderr"], b["stderr"])
        z = (a["fraction"] - b["fraction"]) / sd
        out[T] = {"z": z, "ok": abs(z) <= n_sigma}
    return out


def tails_monotone(rep: dict) -> bool:
    f = [rep["tails"][str(T)]["fraction"] for T in TAIL_LEVELS]
    return all(x >= y for x, y in zip(f, f[1:]))
