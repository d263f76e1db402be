"""Measures given by products of determinants on a finite grid.

A transition system carries n nonintersecting paths from a fixed configuration
at time -M to a fixed configuration at time M.  The interior times are
r = -M+1, ..., M-1 and are indexed k = r + M - 1 in every array here.

Kernels are dense matrices over the grid; composing two kernels always
integrates against the grid measure: (phi * psi)(x, y) = sum_z phi(x,z) psi(z,y) mu(z).
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

MAX_CONDITION = 1e12
MAX_CONFIGURATIONS = 10 ** 7


class DegenerateSystemError(ValueError):
    pass


@dataclass
class GridMeasure:
    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points)
        if self.weights is None:
            self.weights = np.ones(len(self.points))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.ndim != 1 or self.weights.shape != self.points.shape:
            raise ValueError("points and weights must be matching 1-d arrays")
        if len(np.unique(self.points)) != len(self.points):
            raise ValueError("grid points must be distinct")
        if np.any(self.weights <= 0):
            raise ValueError("grid weights must be strictly positive")

    def __len__(self):
        return len(self.points)

    def index(self, x) -> int:
        hit = np.nonzero(self.points == x)[0]
        if hit.size == 0:
            raise KeyError(f"{x} is not a grid point")
        return int(hit[0])


def convolve(phi: np.ndarray, psi: np.ndarray, measure: GridMeasure) -> np.ndarray:
    """(phi * psi)(x, y) = sum_z phi(x, z) psi(z, y) mu(z)."""
    phi = np.asarray(phi)
    psi = np.asarray(psi)
    if phi.shape[-1] != len(measure) or psi.shape[0] != len(measure):
        raise ValueError("kernels do not live on the given grid")
    return (phi * measure.weights) @ psi


class TransitionSystem:
    """n paths with transition weights phi_{r,r+1} for -M <= r < M.

    Parameters
    ----------
    grid : GridMeasure
    first : (n, G) array, phi_{-M,-M+1}(x_i^{-M}, y)
    steps : list of 2M-2 (G, G) arrays, phi_{r,r+1} for -M+1 <= r <= M-2
    last : (G, n) array, phi_{M-1,M}(x, x_j^M)

    The boundary rows/columns may come from grid points (see
    ``from_boundary``) or from any other family of functions, e.g. Fourier
    modes.
    """

    def __init__(self, grid: GridMeasure, first, steps, last):
        self.grid = grid
        self.first = np.asarray(first)
        self.steps = [np.asarray(s) for s in steps]
        self.last = np.asarray(last)
        G = len(grid)
        self.n = self.first.shape[0]
        if self.first.shape != (self.n, G) or self.last.shape != (G, self.n):
            raise ValueError("boundary arrays have the wrong shape")
        if any(s.shape != (G, G) for s in self.steps) or len(self.steps) % 2:
            raise ValueError("need an even number of G x G interior steps")
        self.M = len(self.steps) // 2 + 1
        self._left = None
        self._right = None
        self._A = None
        self._lu = None

    @classmethod
    def from_boundary(cls, grid: GridMeasure, phis, x_start, x_end):
        """Build from 2M full grid kernels and boundary grid points."""
        i0 = [grid.index(x) for x in x_start]
        i1 = [grid.index(x) for x in x_end]
        phis = [np.asarray(p) for p in phis]
        return cls(grid, phis[0][i0, :], phis[1:-1], phis[-1][:, i1])

    @property
    def n_times(self) -> int:
        return 2 * self.M - 1

    @property
    def dtype(self):
        return np.result_type(self.first, self.last, *self.steps)

    def time_index(self, r: int) -> int:
        if not -self.M < r < self.M:
            raise ValueError(f"time {r} is not interior")
        return r + self.M - 1

    # partial products ------------------------------------------------------

    def left(self):
        """L[k] = phi_{-M,r}(x^{-M}, .) for interior r (k = r+M-1), shape (n, G)."""
        if self._left is None:
            mu = self.grid.weights
            L = [self.first]
            for s in self.steps:
                L.append((L[-1] * mu) @ s)
            self._left = L
        return self._left

    def right(self):
        """R[k] = phi_{r,M}(., x^M), shape (G, n)."""
        if self._right is None:
            mu = self.grid.weights
            R = [self.last]
            for s in reversed(self.steps):
                R.append(s @ (mu[:, None] * R[-1]))
            self._right = R[::-1]
        return self._right

    def phi(self, r: int, s: int) -> np.ndarray:
        """phi_{r,s} between interior times; zero for r >= s, identity never implied."""
        G = len(self.grid)
        if r >= s:
            return np.zeros((G, G), dtype=self.dtype)
        k0, k1 = self.time_index(r), self.time_index(s)
        out = self.steps[k0]
        mu = self.grid.weights
        for k in range(k0 + 1, k1):
            out = (out * mu) @ self.steps[k]
        return out


def gram_matrix(sys: TransitionSystem) -> np.ndarray:
    """A_ij = phi_{-M,M}(x_i^{-M}, x_j^M)."""
    if sys._A is None:
        sys._A = (sys.left()[-1] * sys.grid.weights) @ sys.last
    return sys._A


def _factor(sys: TransitionSystem):
    if sys._lu is None:
        A = gram_matrix(sys)
        with warnings.catch_warnings():
            # a singular A is reported below as DegenerateSystemError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A)
        diag = np.abs(np.diag(lu))
        if diag.min() == 0.0:
            raise DegenerateSystemError("Gram matrix is singular")
        cond = np.linalg.cond(A)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise DegenerateSystemError(f"Gram matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        sys._lu = (lu, piv, cond)
    return sys._lu


def partition_function(sys: TransitionSystem):
    """Z = det A (the sum of all path weights)."""
    lu, piv, _ = _factor(sys)
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    z = sign * np.prod(np.diag(lu))
    return z.real if np.isrealobj(lu) else z


def condition_number(sys: TransitionSystem) -> float:
    return float(_factor(sys)[2])


class BlockKernel:
    """K(r,x;s,y) = Ktilde(r,x;s,y) - phi_{r,s}(x,y) with Ktilde = phi_{r,M} A^{-1} phi_{-M,s}."""

    def __init__(self, sys: TransitionSystem):
        self.sys = sys
        lu, piv, _ = _factor(sys)
        # A^{-1} phi_{-M,s}(x^{-M}, .) for every interior s
        self._ainv_left = [scipy.linalg.lu_solve((lu, piv), L) for L in sys.left()]
        self._phi_cache = {}

    @property
    def grid(self):
        return self.sys.grid

    def tilde(self, r: int, s: int) -> np.ndarray:
        sys = self.sys
        return sys.right()[sys.time_index(r)] @ self._ainv_left[sys.time_index(s)]

    def phi(self, r: int, s: int) -> np.ndarray:
        key = (r, s)
        if key not in self._phi_cache:
            self._phi_cache[key] = self.sys.phi(r, s)
        return self._phi_cache[key]

    def block(self, r: int, s: int) -> np.ndarray:
        if r < s:
            return self.tilde(r, s) - self.phi(r, s)
        return self.tilde(r, s)

    def __call__(self, r: int, x, s: int, y):
        g = self.grid
        return self.block(r, s)[g.index(x), g.index(y)]

    def full(self, tilde_only: bool = False) -> np.ndarray:
        """Dense matrix over (time, grid) with time-major ordering."""
        T = self.sys.n_times
        M = self.sys.M
        rows = []
        for a in range(T):
            r = a - M + 1
            rows.append([self.tilde(r, b - M + 1) if tilde_only else self.block(r, b - M + 1)
                         for b in range(T)])
        return np.block(rows)

    def phi_full(self) -> np.ndarray:
        T = self.sys.n_times
        M = self.sys.M
        return np.block([[self.phi(a - M + 1, b - M + 1) for b in range(T)] for a in range(T)])

    def correlation(self, sites) -> float:
        """det(K(r_a, x_a; r_b, x_b)) for a list of (r, x) sites (Theorem-0.1 form)."""
        if not sites:
            return 1.0
        g = self.grid
        m = np.empty((len(sites), len(sites)), dtype=self.sys.dtype)
        for a, (r, x) in enumerate(sites):
            for b, (s, y) in enumerate(sites):
                m[a, b] = self.block(r, s)[g.index(x), g.index(y)]
        return np.linalg.det(m)


def correlation_kernel(sys: TransitionSystem) -> BlockKernel:
    return BlockKernel(sys)


# ------------------------------------------------------------------ Fredholm

def fredholm_det_expansion(K: np.ndarray, measure: GridMeasure, max_order: int | None = None):
    """Sum over m <= max_order of (1/m!) sum_{x in grid^m} det K(x_i, x_j) prod mu(x_i).

    Repeated points give vanishing determinants, so the inner sum runs over
    m-subsets without the 1/m! factor.  With max_order equal to the grid size
    this is det(I + K diag(mu)).
    """
    K = np.asarray(K)
    G = len(measure)
    if max_order is None:
        max_order = G
    Km = K * measure.weights[None, :]
    total = 1.0 + 0.0j if np.iscomplexobj(Km) else 1.0
    for m in range(1, min(max_order, G) + 1):
        for S in itertools.combinations(range(G), m):
            idx = list(S)
            total += np.linalg.det(Km[np.ix_(idx, idx)])
    return total


def _test_function_array(sys: TransitionSystem, g) -> np.ndarray:
    T, G = sys.n_times, len(sys.grid)
    if callable(g):
        M = sys.M
        arr = np.array([[g(k - M + 1, x) for x in sys.grid.points] for k in range(T)])
    else:
        arr = np.asarray(g)
    if arr.shape != (T, G):
        raise ValueError(f"test function must have shape {(T, G)}")
    return arr


def gap_probability(sys: TransitionSystem, g, kernel: BlockKernel | None = None):
    """det(I + g K) on the time x grid space; equals E[prod (1 + g(r, x_i^r))].

    ``g`` is an array of shape (2M-1, G) or a callable g(r, x).  Use
    g = -indicator of a region for the probability that the region is empty.
    """
    K = kernel or BlockKernel(sys)
    garr = _test_function_array(sys, g)
    flat_g = garr.ravel()
    supp = np.nonzero(flat_g)[0]
    if supp.size == 0:
        return 1.0
    mu = np.tile(sys.grid.weights, sys.n_times)
    full = K.full()
    sub = full[np.ix_(supp, supp)]
    m = np.eye(len(supp)) + flat_g[supp, None] * sub * mu[None, supp]
    d = np.linalg.det(m)
    return d.real if np.isrealobj(m) else d


def product_rule_check(sys: TransitionSystem, g, z: complex, w: complex):
    """Both sides of det(I + w sum_{j=1}^m z^j psi^{*(j-1)} * a) = det(I - z psi + z w a).

    psi = g phi (strictly causal in time), a = g Ktilde, m = 2M-1.
    """
    K = BlockKernel(sys)
    garr = _test_function_array(sys, g).ravel()
    mu = np.tile(sys.grid.weights, sys.n_times)
    psiD = garr[:, None] * K.phi_full() * mu[None, :]
    aD = garr[:, None] * K.full(tilde_only=True) * mu[None, :]
    n = len(garr)
    m = sys.n_times
    acc = np.zeros((n, n), dtype=complex)
    power = np.eye(n, dtype=complex)
    for j in range(1, m + 1):
        acc += z ** j * power @ aD
        power = power @ psiD
    lhs = np.linalg.det(np.eye(n) + w * acc)
    rhs = np.linalg.det(np.eye(n) - z * psiD + z * w * aD)
    return lhs, rhs


def causal_power(sys: TransitionSystem, g, ell: int) -> np.ndarray:
    """psi^{*ell} as a dense matrix (with measure weights folded in)."""
    K = BlockKernel(sys)
    garr = _test_function_array(sys, g).ravel()
    mu = np.tile(sys.grid.weights, sys.n_times)
    psiD = garr[:, None] * K.phi_full() * mu[None, :]
    return np.linalg.matrix_power(psiD, ell)


# -------------------------------------------------------------- enumeration

class Enumeration:
    """All configurations of a small transition system with their probabilities.

    Each interior time carries an n-subset of the grid, listed in increasing
    grid-index order; summing over ordered n-tuples would repeat every subset
    n! times with identical weight, so the subsets carry the (0.2)-style sum
    divided by n! per time.
    """

    def __init__(self, sys: TransitionSystem):
        G, n, T = len(sys.grid), sys.n, sys.n_times
        count = math.comb(G, n) ** T
        if count > MAX_CONFIGURATIONS:
            raise ValueError(f"{count} configurations exceed the enumeration guard {MAX_CONFIGURATIONS}")
        self.sys = sys
        self.subsets = [tuple(c) for c in itertools.combinations(range(G), n)]
        subs = np.array(self.subsets, dtype=int)
        mu = sys.grid.weights
        muprod = np.prod(mu[subs], axis=1)

        def dets(block_fn):
            return np.array([[np.linalg.det(block_fn(a, b)) for b in subs] for a in subs])

        first = np.array([np.linalg.det(sys.first[:, b]) for b in subs])
        last = np.array([np.linalg.det(sys.last[a, :]) for a in subs])
        mids = [dets(lambda a, b, S=S: S[np.ix_(a, b)]) for S in sys.steps]
        # weight tensor over (c_0, ..., c_{T-1})
        W = first * muprod
        for D in mids:
            W = W[..., None] * D.reshape((1,) * (W.ndim - 1) + D.shape) * muprod
        W = W * last.reshape((1,) * (W.ndim - 1) + (-1,))
        self.weights = W
        self.Z = W.sum()
        self.prob = W / self.Z
        self._member = np.zeros((len(subs), G), dtype=bool)
        for c, s in enumerate(subs):
            self._member[c, s] = True

    def _mask(self, k: int, x_idx: int) -> np.ndarray:
        shape = [1] * self.prob.ndim
        shape[k] = -1
        return self._member[:, x_idx].reshape(shape)

    def correlation(self, sites) -> float:
        """Probability that all sites are occupied, divided by prod mu(x)."""
        sys = self.sys
        mask = np.ones(self.prob.shape, dtype=bool)
        dens = 1.0
        for r, x in sites:
            k = sys.time_index(r)
            xi = sys.grid.index(x)
            mask = mask & self._mask(k, xi)
            dens *= sys.grid.weights[xi]
        return (self.prob * mask).sum() / dens

    def expectation(self, g) -> float:
        """E[prod over particles of (1 + g(r, x))]."""
        garr = _test_function_array(self.sys, g)
        subs = np.array(self.subsets, dtype=int)
        out = self.prob
        for k in range(self.sys.n_times):
            f = np.prod(1.0 + garr[k][subs], axis=1)
            shape = [1] * self.prob.ndim
            shape[k] = -1
            out = out * f.reshape(shape)
        return out.sum()


def brute_force_correlation(sys: TransitionSystem, sites) -> float:
    return Enumeration(sys).correlation(sites)
