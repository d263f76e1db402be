"""Nonintersecting walks on the discrete circle Z_N and on the cylinder Z x Z_N.

Each of n = 2*nu + 1 particles either stays (probability q_step) or moves one
site clockwise (probability p_step) at every time step.  With the densely packed
Fourier labels alpha = {0, ..., nu, N-nu, ..., N-1} the correlation kernel is a
finite Fourier sum over j = -nu..nu; letting n, N -> oo with n/N -> rho turns
the sum into an integral over a window of the circle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .determinantal import Enumeration, GridMeasure, TransitionSystem


class DegenerateCircleError(ValueError):
    """p_step = q_step on an even circle: some partition weights vanish."""


@dataclass(frozen=True)
class CircleWalkParams:
    N_sites: int
    n: int
    p_step: float
    q_step: float | None = None
    M: int = 2

    def __post_init__(self):
        q = 1.0 - self.p_step if self.q_step is None else self.q_step
        object.__setattr__(self, "q_step", float(q))
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError(f"number of particles must be odd, got {self.n}")
        if self.n >= self.N_sites:
            raise ValueError("need fewer particles than sites")
        if self.p_step < 0 or self.q_step < 0 or abs(self.p_step + self.q_step - 1.0) > 1e-12:
            raise ValueError("step probabilities must be nonnegative and sum to 1")
        if self.M < 2:
            raise ValueError("time half-width M must be at least 2")
        if is_degenerate(self.N_sites, self.p_step, self.q_step):
            raise DegenerateCircleError(
                f"p_step = q_step with N_sites = {self.N_sites} even gives vanishing weights")

    @property
    def nu(self) -> int:
        return (self.n - 1) // 2

    @property
    def rho(self) -> float:
        return self.n / self.N_sites

    def labels(self) -> np.ndarray:
        """The packed label set alpha, increasing in [0, N)."""
        nu, N = self.nu, self.N_sites
        return np.array(list(range(nu + 1)) + list(range(N - nu, N)))


def is_degenerate(N: int, p: float, q: float | None = None) -> bool:
    q = 1.0 - p if q is None else q
    return abs(p - q) < 1e-14 and N % 2 == 0


def _symbol(params: CircleWalkParams, j):
    # f evaluated at the j-th root of unity: q + p e^{2 pi i j / N}
    return params.q_step + params.p_step * np.exp(2j * np.pi * np.asarray(j) / params.N_sites)


def _fourier_sum(params, modes, m, d):
    f = _symbol(params, modes)
    return np.sum(f ** m * np.exp(2j * np.pi * np.asarray(modes) * d / params.N_sites)) / params.N_sites


def cylinder_kernel(params: CircleWalkParams, r: int, x: int, s: int, y: int) -> complex:
    """Correlation kernel of the n walks on the infinite cylinder."""
    nu, N = params.nu, params.N_sites
    m, d = s - r, x - y
    out = _fourier_sum(params, np.arange(-nu, nu + 1), m, d)
    if r < s:
        out -= _fourier_sum(params, np.arange(-nu, N - nu), m, d)
    return complex(out)


def cylinder_kernel_matrix(params: CircleWalkParams, sites) -> np.ndarray:
    sites = list(sites)
    return np.array([[cylinder_kernel(params, r, x, s, y) for (s, y) in sites] for (r, x) in sites])


def labelled_kernel(params: CircleWalkParams, k, r: int, x: int, s: int, y: int) -> complex:
    """Kernel of the (complex) measure with Fourier labels k at both ends.

    Equals ``cylinder_kernel`` when k is the packed label set.
    """
    N = params.N_sites
    k = np.asarray(k)
    m, d = s - r, y - x
    f = params.q_step + params.p_step * np.exp(-2j * np.pi * k / N)
    out = np.sum(f ** m * np.exp(2j * np.pi * k * d / N)) / N
    if r < s:
        out -= transition(params, m)[x % N, y % N]
    return complex(out)


def transition(params: CircleWalkParams, steps: int) -> np.ndarray:
    """steps-fold transition matrix of one walker on Z_N."""
    N = params.N_sites
    P = params.q_step * np.eye(N) + params.p_step * np.roll(np.eye(N), 1, axis=1)
    return np.linalg.matrix_power(P, steps)


def circle_transition_system(params: CircleWalkParams, k=None) -> TransitionSystem:
    """Walks between Fourier-mode boundaries, 2M-1 interior times on Z_N."""
    N, M = params.N_sites, params.M
    k = params.labels() if k is None else np.asarray(k)
    x = np.arange(N)
    zeta = np.exp(2j * np.pi / N)
    first = zeta ** np.outer(k, x)
    last = zeta ** (-np.outer(x, k))
    P = transition(params, 1).astype(complex)
    return TransitionSystem(GridMeasure(x), first, [P] * (2 * M - 2), last)


def label_partition_weights(params: CircleWalkParams, k) -> complex:
    """Z(k) = N^n prod_i (q + p e^{-2 pi i k_i / N})^{2M-2}."""
    N = params.N_sites
    f = params.q_step + params.p_step * np.exp(-2j * np.pi * np.asarray(k) / N)
    return N ** params.n * np.prod(f ** (2 * params.M - 2))


def _elementary_symmetric(c, n):
    e = np.zeros(n + 1, dtype=complex)
    e[0] = 1.0
    for v in c:
        e[1:] = e[1:] + v * e[:-1]
    return e[n]


def label_selection_ratio(params: CircleWalkParams, k) -> complex:
    """Z(k) / sum over all label sets of Z(k')."""
    N = params.N_sites
    c = (params.q_step + params.p_step * np.exp(-2j * np.pi * np.arange(N) / N)) ** (2 * params.M - 2)
    total = N ** params.n * _elementary_symmetric(c, params.n)
    return complex(label_partition_weights(params, k) / total)


def label_moduli(params: CircleWalkParams) -> np.ndarray:
    """|q + p e^{-2 pi i k / N}| for k = 0..N-1."""
    N = params.N_sites
    return np.abs(params.q_step + params.p_step * np.exp(-2j * np.pi * np.arange(N) / N))


def label_selection_profile(params: CircleWalkParams, Ms=(2, 4, 8)):
    """For each M: (Z(alpha)/sum Z, envelope B) with B = sum_{k != alpha} |Z(k)/Z(alpha)|."""
    alpha = params.labels()
    mod = label_moduli(params)
    out = []
    for M in Ms:
        pm = CircleWalkParams(params.N_sites, params.n, params.p_step, params.q_step, M)
        ra = label_selection_ratio(pm, alpha)
        rel = (mod / mod[alpha].min()) ** (2 * M - 2)
        # all label sets, by elementary symmetric sums of the moduli powers
        top = np.prod((mod[alpha] / mod[alpha].min()) ** (2 * M - 2))
        env = (_elementary_symmetric(rel, params.n).real - top) / top
        out.append((ra, float(env)))
    return out


def top_label_selection_check(params: CircleWalkParams, Ms=(2, 4, 8), tol=1e-12) -> bool:
    """Numerical check that the packed label set alone survives as M grows.

    The n largest moduli |q + p e^{-2 pi i k/N}| must sit exactly at the packed
    labels with a strict gap, so the envelope B(M) = sum_{k != alpha}
    |Z(k)/Z(alpha)| decreases strictly in M, and whenever B < 1 the ratio
    Z(alpha)/sum Z is real with |ratio - 1| <= B/(1 - B).  The ratio itself
    need not approach 1 monotonically: the other Z(k) are complex and their
    phases rotate with M.
    """
    if is_degenerate(params.N_sites, params.p_step, params.q_step):
        return False
    mod = label_moduli(params)
    alpha = params.labels()
    rest = np.setdiff1d(np.arange(params.N_sites), alpha)
    if not mod[alpha].min() > mod[rest].max() + tol:
        return False
    prof = label_selection_profile(params, Ms)
    env = np.array([b for _, b in prof])
    if not np.all(np.diff(env) < 0):
        return False
    for ra, b in prof:
        if abs(ra.imag) > 1e-10 * max(1.0, abs(ra)):
            return False
        if b < 1 and abs(ra.real - 1.0) > b / (1 - b) + tol:
            return False
    return True


# ----------------------------------------------------------- brute force

def walk_paths(params: CircleWalkParams):
    """Yield (configurations, weight, km_weight) for every periodic path system.

    Paths are tuples of per-step increments in {0,1}^n.  ``weight`` is the
    product of step probabilities with collisions on the circle excluded;
    ``km_weight`` is the product of one-step determinants over sorted
    configurations.  Both should agree.
    """
    N, n, M = params.N_sites, params.n, params.M
    P = transition(params, 1)
    nsteps = 2 * M - 2
    incs = list(itertools.product((0, 1), repeat=n))
    for start in itertools.combinations(range(N), n):
        for path in itertools.product(incs, repeat=nsteps):
            pos = np.array(start)
            configs = [tuple(start)]
            w = 1.0
            km = 1.0
            ok = True
            for inc in path:
                new = (pos + np.array(inc)) % N
                if len(set(new.tolist())) < n:
                    ok = False
                    break
                w *= np.prod(np.where(np.array(inc) == 1, params.p_step, params.q_step))
                a, b = sorted(pos.tolist()), sorted(new.tolist())
                km *= np.linalg.det(P[np.ix_(a, b)])
                pos = new
                configs.append(tuple(sorted(new.tolist())))
            if not ok or configs[-1] != configs[0]:
                continue
            yield configs, w, km


def periodic_correlation(params: CircleWalkParams, sites) -> float:
    """Exact correlation of the time-periodic walk measure by path enumeration.

    ``sites`` are (r, x) with interior times -M+1 <= r <= M-1.
    """
    M = params.M
    tot = 0.0
    hit = 0.0
    for configs, w, _ in walk_paths(params):
        tot += w
        if all(x % params.N_sites in configs[r + M - 1] for r, x in sites):
            hit += w
    return hit / tot


def mixture_correlation(params: CircleWalkParams, sites) -> complex:
    """Same quantity as ``periodic_correlation`` via the label-set mixture of kernels."""
    N, n = params.N_sites, params.n
    c = (params.q_step + params.p_step * np.exp(-2j * np.pi * np.arange(N) / N)) ** (2 * params.M - 2)
    total = _elementary_symmetric(c, n)
    out = 0.0
    for k in itertools.combinations(range(N), n):
        wk = np.prod(c[list(k)]) / total
        if abs(wk) < 1e-300:
            continue
        K = np.array([[labelled_kernel(params, k, r, x, s, y) for (s, y) in sites] for (r, x) in sites])
        out += wk * np.linalg.det(K)
    return complex(out)


def cue_density(params: CircleWalkParams, xs) -> float:
    """(1/N^n) prod_{mu<nu} |e^{2 pi i x_mu/N} - e^{2 pi i x_nu/N}|^2."""
    N = params.N_sites
    z = np.exp(2j * np.pi * np.asarray(xs) / N)
    prod = 1.0
    for a, b in itertools.combinations(range(len(z)), 2):
        prod *= abs(z[a] - z[b]) ** 2
    return prod / N ** len(z)


def cue_residual(params: CircleWalkParams, xs) -> float:
    """|det K(0, x_mu; 0, x_nu) - CUE density| for an n-point configuration."""
    K = cylinder_kernel_matrix(params, [(0, x) for x in xs])
    return float(abs(np.linalg.det(K) - cue_density(params, xs)))


# ----------------------------------------------------------- limit kernel

def _window_integral(m: int, d: int, lo: float, hi: float, p: float, q: float, tol=1e-13) -> complex:
    # int_lo^hi (q + p e^{2 pi i t})^m e^{2 pi i t d} dt by Gauss-Legendre, nodes doubled
    def rule(nodes):
        t, w = np.polynomial.legendre.leggauss(nodes)
        th = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        e = np.exp(2j * np.pi * th)
        return 0.5 * (hi - lo) * np.sum(w * (q + p * e) ** m * e ** d)

    nodes = 32
    prev = rule(nodes)
    while nodes < 8192:
        nodes *= 2
        cur = rule(nodes)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    raise ArithmeticError("window integral did not converge")


def limit_kernel(rho: float, p_step: float, r: int, x: int, s: int, y: int) -> complex:
    """Kernel of the n, N -> oo limit with n/N -> rho."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    p, q = p_step, 1.0 - p_step
    m, d = s - r, x - y
    if m < 0:
        return _window_integral(m, d, -rho / 2, rho / 2, p, q)
    # binomial expansion of (q + p e)^m, each Fourier mode integrated exactly
    out = 0.0
    for k in range(m + 1):
        c = math.comb(m, k) * q ** (m - k) * p ** k
        t = k + d
        if r >= s:
            out += c * (rho if t == 0 else math.sin(math.pi * rho * t) / (math.pi * t))
        else:
            out += c * (-(1.0 - rho) if t == 0 else math.sin(math.pi * rho * t) / (math.pi * t))
    return complex(out)


def discrete_sine_kernel(rho: float, d: int) -> float:
    return rho if d == 0 else math.sin(math.pi * rho * d) / (math.pi * d)


def enumeration_correlation(params: CircleWalkParams, sites, k=None) -> complex:
    """Correlation of the labelled measure by the generic subset enumeration."""
    return complex(Enumeration(circle_transition_system(params, k)).correlation(sites))
