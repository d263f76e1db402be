"""Symbols, Toeplitz matrices and contour-integral kernels for discrete PNG.

Transition weights of the form phi_{r,r+1}(x, y) = fhat_r(y - x) are encoded by
their symbols f_r(z).  For the PNG model the symbols are rational:

    f_{2j-1}(z) = (1 - a_{j+N}) / (1 - a_{j+N} z)      (up steps)
    f_{2j}(z)   = (1 - b_{N-j}) / (1 - b_{N-j} / z)    (down steps)

for |j| < N, so the Wiener-Hopf split is read off factor by factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .determinantal import GridMeasure, TransitionSystem
from .lattice import png_constants


class ContourConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True)
class Factor:
    """c * (1 - gamma z)^p ('plus') or c * (1 - gamma / z)^p ('minus'), |gamma| < 1."""
    side: str
    gamma: float
    power: int
    const: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        base = 1 - self.gamma * z if self.side == "plus" else 1 - self.gamma / z
        return self.const * base ** self.power


@dataclass(frozen=True)
class ScalarSymbol:
    """Finite product of elementary rational factors."""
    factors: tuple = ()

    def __call__(self, z):
        out = np.ones(np.shape(z), dtype=complex)
        for f in self.factors:
            out = out * f(z)
        return out

    def __mul__(self, other: "ScalarSymbol") -> "ScalarSymbol":
        return ScalarSymbol(self.factors + other.factors)

    @property
    def plus(self) -> "ScalarSymbol":
        return ScalarSymbol(tuple(f for f in self.factors if f.side == "plus"))

    @property
    def minus(self) -> "ScalarSymbol":
        return ScalarSymbol(tuple(f for f in self.factors if f.side == "minus"))

    def inverse(self) -> "ScalarSymbol":
        return ScalarSymbol(tuple(Factor(f.side, f.gamma, -f.power, 1.0 / f.const) for f in self.factors))

    @property
    def epsilon(self) -> float:
        """Half-width of the annulus around |z| = 1 free of zeros and poles."""
        g = max((abs(f.gamma) for f in self.factors if f.gamma != 0), default=0.0)
        return 1.0 - g

    def fourier(self, kmin: int, kmax: int, tol: float = 1e-14, max_nodes: int = 2 ** 16) -> np.ndarray:
        """Fourier coefficients fhat(k) for kmin <= k <= kmax by trapezoid sums on |z| = 1."""
        return laurent_coefficients(self, kmin, kmax, radius=1.0, tol=tol, max_nodes=max_nodes)[0]


def laurent_coefficients(fn, kmin: int, kmax: int, radius: float = 1.0, tol: float = 1e-14,
                         max_nodes: int = 2 ** 16, min_nodes: int = 128, log_fn=None):
    """Coefficients of z^k, kmin <= k <= kmax, of a function analytic near |z| = radius.

    Trapezoid rule with node doubling until two successive node counts agree to
    ``tol`` relative to max |f| on the circle.  Returns (coeffs, scale); the
    error of coefficient k is about scale * radius^(-k).
    ``log_fn`` may supply log f directly, which avoids overflow for high powers.
    """
    span = kmax - kmin + 1
    L = min_nodes
    while L < 2 * span + 16:
        L *= 2
    prev = None
    while True:
        theta = 2 * np.pi * np.arange(L) / L
        z = radius * np.exp(1j * theta)
        vals = np.exp(log_fn(z)) if log_fn is not None else fn(z)
        c = np.fft.fft(vals) / L  # c[m] ~ sum_j fhat(m + jL) radius^(m + jL)
        ks = np.arange(kmin, kmax + 1)
        coeffs = c[ks % L] * radius ** (-ks.astype(float))
        fmax = float(np.max(np.abs(vals)))
        raw = c[ks % L]
        if prev is not None:
            err = np.max(np.abs(raw - prev)) / fmax
            if err < tol:
                # coefficient k is accurate to scale * radius^(-k)
                return coeffs, (err + 1e-15) * fmax
        if 2 * L > max_nodes:
            if prev is None:
                raise ContourConvergenceError("node limit below the required bandwidth")
            raise ContourConvergenceError(f"trapezoid rule did not converge (rel. change {err:.2e})")
        prev = raw
        L *= 2


def toeplitz_matrix(symbol, n: int) -> np.ndarray:
    """(T_n)_{jk} = ahat(j - k)."""
    if n < 1:
        raise ValueError("n must be positive")
    c = laurent_coefficients(symbol, -(n - 1), n - 1)[0]
    if np.all(np.abs(c.imag) < 1e-13 * max(1.0, np.abs(c).max())):
        c = c.real
    col = c[n - 1:]          # ahat(0), ahat(1), ...
    row = c[n - 1::-1]       # ahat(0), ahat(-1), ...
    return scipy.linalg.toeplitz(col, row)


# ---------------------------------------------------------- symbol systems

@dataclass
class SymbolSystem:
    """Symbols f_r for -M <= r < M (``symbols[r + M]``)."""
    symbols: list
    M: int = field(init=False)

    def __post_init__(self):
        if len(self.symbols) % 2:
            raise ValueError("need 2M symbols")
        self.M = len(self.symbols) // 2

    def f(self, r: int) -> ScalarSymbol:
        return self.symbols[r + self.M]

    def product(self, r: int, s: int) -> ScalarSymbol:
        """f_{r,s} = prod_{r <= l < s} f_l."""
        out = ScalarSymbol()
        for l in range(r, s):
            out = out * self.f(l)
        return out

    @property
    def total(self) -> ScalarSymbol:
        return self.product(-self.M, self.M)

    @property
    def epsilon(self) -> float:
        return self.total.epsilon


def png_symbol_system(a, b, N: int) -> SymbolSystem:
    """Symbols of the PNG transition steps; a[0] = a_1, b[0] = b_1 (2N-1 of each)."""
    M = 2 * N - 1
    if len(a) < M or len(b) < M:
        raise ValueError(f"need {M} labels of each kind")
    syms = []
    for r in range(-M, M):
        if r % 2:  # r = 2j - 1
            j = (r + 1) // 2
            g = float(a[j + N - 1])
            syms.append(ScalarSymbol((Factor("plus", g, -1, 1 - g),)))
        else:      # r = 2j
            j = r // 2
            g = float(b[N - j - 1])
            syms.append(ScalarSymbol((Factor("minus", g, -1, 1 - g),)))
    return SymbolSystem(syms)


def finite_n_generating(sys: SymbolSystem, r: int, s: int, z: complex, w: complex, n: int) -> complex:
    """Generating function of Ktilde^{n,M} for the system on all of Z with packed ends:

        (z/w) f_{r,M}(1/z) f_{-M,s}(1/w) sum_{i,j=1}^n z^{-i} [T_n(a)^{-1}]_{ij} w^j.
    """
    T = toeplitz_matrix(sys.total, n)
    lu = scipy.linalg.lu_factor(T)
    i = np.arange(1, n + 1)
    zi = z ** (-i.astype(float))
    wj = w ** i.astype(float)
    quad = zi @ scipy.linalg.lu_solve(lu, wj.astype(complex))
    M = sys.M
    pre = (z / w) * complex(sys.product(r, M)(1 / z)) * complex(sys.product(-M, s)(1 / w))
    return pre * quad


def limit_kernel_G(sys: SymbolSystem, r: int, s: int, z: complex, w: complex) -> complex:
    """G(z, w) of the n -> infinity kernel, built from the Wiener-Hopf factors."""
    M = sys.M
    num = complex(sys.product(r, M).minus(1 / z)) * complex(sys.product(-M, s).plus(1 / w))
    den = complex(sys.product(-M, r).plus(1 / z)) * complex(sys.product(s, M).minus(1 / w))
    return num / den


def limit_generating(sys: SymbolSystem, r: int, s: int, z: complex, w: complex) -> complex:
    if z == w:
        raise ZeroDivisionError("pole at z = w")
    return z / (z - w) * limit_kernel_G(sys, r, s, z, w)


def generating_bound(sys: SymbolSystem, r: int, s: int, z: complex, w: complex, n: int,
                     alpha: float = 1.0) -> float:
    """Explicit right side of the n -> infinity error bound (constant taken as 1)."""
    M = sys.M
    az, aw = abs(z), abs(w)
    pre = abs(complex(sys.product(r, M)(1 / z))) * abs(complex(sys.product(-M, s)(1 / w)))
    return pre / ((az - 1) * (1 - aw)) * (n ** -alpha + aw ** (n / 2) + az ** (-n / 2))


def wiener_hopf_inverse_product(sys: SymbolSystem, n: int) -> np.ndarray:
    """Top-left n x n block of T(a_+^{-1}) T(a_-^{-1}) (triangular factors, so exact)."""
    a = sys.total
    bp = laurent_coefficients(a.plus.inverse(), 0, n - 1)[0]
    bm = laurent_coefficients(a.minus.inverse(), -(n - 1), 0)[0][::-1]  # bm[k] = coeff of z^{-k}
    Tp = scipy.linalg.toeplitz(bp, np.r_[bp[0], np.zeros(n - 1)])   # lower triangular
    Tm = scipy.linalg.toeplitz(np.r_[bm[0], np.zeros(n - 1)], bm)   # upper triangular
    return Tp @ Tm


# ------------------------------------------------------ PNG finite systems

def png_transition_system(a, b, N: int, n: int | None = None, top: int = 60) -> TransitionSystem:
    """PNG layers as n nonintersecting paths on the grid {1-n, ..., top}.

    Paths start and end packed at 1-i.  The grid is cut below at 1-n because
    the layers of the growth model never go below the flat layers under
    them; with that wall the total weight is the closed form
    prod(1-a_j)^n (1-b_j)^n / prod_{i+j<=2N} (1 - a_i b_j) for every n >= N.
    The cut above at ``top`` is a truncation with geometric error.
    """
    if n is None:
        n = N
    M = 2 * N - 1
    xs = np.arange(1 - n, top + 1)
    X = xs[:, None]
    Y = xs[None, :]
    phis = []
    for r in range(-M, M):
        if r % 2:
            g = a[(r + 1) // 2 + N - 1]
            phis.append(np.where(Y >= X, (1 - g) * g ** np.clip(Y - X, 0, None), 0.0))
        else:
            g = b[N - r // 2 - 1]
            phis.append(np.where(Y <= X, (1 - g) * g ** np.clip(X - Y, 0, None), 0.0))
    packed = [1 - i for i in range(1, n + 1)]
    return TransitionSystem.from_boundary(GridMeasure(xs), phis, packed, packed)


def png_partition_closed_form(a, b, N: int, n: int) -> float:
    M = 2 * N - 1
    a = np.asarray(a[:M], dtype=float)
    b = np.asarray(b[:M], dtype=float)
    num = np.prod(1 - a) ** n * np.prod(1 - b) ** n
    den = 1.0
    for i in range(1, M + 1):
        for j in range(1, M + 1):
            if i + j <= 2 * N:
                den *= 1 - a[i - 1] * b[j - 1]
    return num / den


def png_gram_from_symbols(a, b, N: int, n: int | None = None, top: int = 80) -> np.ndarray:
    """Gram matrix of the walled PNG system with steps built from symbol coefficients.

    Each step is the section of the Toeplitz operator of f_r to {1-n, ..., top};
    the coefficients come from contour quadrature of the symbols.
    """
    if n is None:
        n = N
    sys = png_symbol_system(a, b, N)
    size = top + n
    P = np.eye(size)
    for r in range(-sys.M, sys.M):
        c = sys.f(r).fourier(-(size - 1), size - 1).real
        # step matrix S[x, y] = fhat(y - x)
        S = scipy.linalg.toeplitz(c[size - 1::-1], c[size - 1:])
        P = P @ S
    return P[:n, :n]


# ----------------------------------------------------- homogeneous kernel

@dataclass(frozen=True)
class ContourSpec:
    r1: float | None = None
    r2: float | None = None
    min_nodes: int = 128
    max_nodes: int = 2 ** 16
    tol: float = 1e-13
    tol_kernel: float = 1e-8

    def __post_init__(self):
        if self.min_nodes < 64:
            raise ValueError("need at least 64 nodes per circle")


@dataclass(frozen=True)
class PNGKernelParams:
    alpha: float
    N: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.N < 1:
            raise ValueError("N must be positive")

    @classmethod
    def from_q(cls, q: float, N: int) -> "PNGKernelParams":
        return cls(math.sqrt(q), N)

    @property
    def q(self) -> float:
        return self.alpha ** 2

    @property
    def constants(self):
        return png_constants(self.q)

    @property
    def a_star(self) -> float:
        return self.constants[0]

    @property
    def d(self) -> float:
        return self.constants[1]

    @property
    def d_prime(self) -> float:
        return self.constants[2]

    @property
    def c(self) -> float:
        return 1.0 / self.d_prime


def _check_uv(p: PNGKernelParams, u: int, v: int):
    if abs(u) >= p.N or abs(v) >= p.N:
        raise ValueError("need |u|, |v| < N")


def png_G(p: PNGKernelParams, u: int, v: int, z, w):
    """G(z, w) of the homogeneous model at the even times 2u, 2v."""
    al, N = p.alpha, p.N
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return ((1 - al) ** (2 * (v - u)) * (1 - al / z) ** (N + u) / (1 - al * z) ** (N - u)
            * (1 - al * w) ** (N - v) / (1 - al / w) ** (N + v))


def _log_g1(p, u):
    al, N = p.alpha, p.N
    return lambda z: (N + u) * np.log(1 - al / z) - (N - u) * np.log(1 - al * z)


def _log_g2(p, v):
    al, N = p.alpha, p.N
    return lambda w: (N - v) * np.log(1 - al * w) - (N + v) * np.log(1 - al / w)


def _max_log_modulus(logf, radii, nodes: int = 256) -> np.ndarray:
    theta = 2 * np.pi * np.arange(nodes) / nodes
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    return np.max(np.real(logf(z)), axis=1)


def _choose_radii(lg1, lg2, x_c: float, y_c: float, al: float):
    """Radii (rho_z, rho_w), rho_w < rho_z, minimising the size of the integrand

        max|g1| rho_z^{-x} max|g2| rho_w^{y} / (1 - rho_w / rho_z),

    which controls both the roundoff of the coefficient sums and their tail.
    """
    rz = np.exp(np.linspace(np.log(1.02 * al), np.log(0.999 / al), 121))
    rw = np.exp(np.linspace(np.log(1.001 * al), np.log(0.98 / al), 121))
    a1 = _max_log_modulus(lg1, rz) - x_c * np.log(rz)
    a2 = _max_log_modulus(lg2, rw) + y_c * np.log(rw)
    ratio = rw[None, :] / rz[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        J = a1[:, None] + a2[None, :] - np.log1p(-np.minimum(ratio, 1.0))
    J[ratio >= 0.995] = np.inf
    i, j = np.unravel_index(np.argmin(J), J.shape)
    return float(rz[i]), float(rw[j])


@dataclass
class KernelBlock:
    values: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    error: float
    radii: tuple = ()


def png_kernel_block(p: PNGKernelParams, u: int, v: int, xs, ys, contour: ContourSpec | None = None,
                     tilde_only: bool = False) -> KernelBlock:
    """K_N(2u, x; 2v, y) for all x in xs, y in ys.

    With |w| < |z|, z/(z-w) = sum_k (w/z)^k splits the double contour integral
    into products of Laurent coefficients,

        Ktilde(x, y) = (1-alpha)^{2(v-u)} sum_{k>=0} g1hat(x+k) g2hat(-y-k),

    g1(z) = (1-alpha/z)^{N+u} / (1-alpha z)^{N-u}, g2(w) = (1-alpha w)^{N-v} / (1-alpha/w)^{N+v}.
    g1hat vanishes below -(N+u) and g2hat above N-v; both decay like alpha^|k|.
    The coefficients come from FFTs on |z| = rho_z and |w| = rho_w; the
    returned error bounds the quadrature and roundoff error of every entry.
    """
    contour = contour or ContourSpec()
    _check_uv(p, u, v)
    al, N = p.alpha, p.N
    xs = np.asarray(xs, dtype=int)
    ys = np.asarray(ys, dtype=int)
    C = (1 - al) ** (2 * (v - u))
    lg1, lg2 = _log_g1(p, u), _log_g2(p, v)
    if contour.r1 is not None and contour.r2 is not None:
        rz, rw = contour.r2, contour.r1
        if not al < rw < rz < 1 / al:
            raise ValueError("need alpha < r1 < r2 < 1/alpha")
    else:
        rz, rw = _choose_radii(lg1, lg2, 0.5 * (xs.min() + xs.max()), 0.5 * (ys.min() + ys.max()), al)
    # terms vanish for k below k0; beyond kmax the geometric tail (rw/rz)^k is negligible
    k0 = max(0, -(N + u) - int(xs.max()), -(N - v) - int(ys.max()))
    kmax = k0 + int(math.ceil(40 / -math.log(rw / rz))) + 2 * (int(xs.max() - xs.min()) + int(ys.max() - ys.min()))
    ks = np.arange(k0, kmax + 1)
    m1 = np.arange(xs.min() + k0, xs.max() + kmax + 1)
    m2 = np.arange(-ys.max() - kmax, -ys.min() - k0 + 1)
    g1, s1 = laurent_coefficients(None, int(m1[0]), int(m1[-1]), radius=rz, tol=contour.tol,
                                  max_nodes=contour.max_nodes, min_nodes=contour.min_nodes, log_fn=lg1)
    g2, s2 = laurent_coefficients(None, int(m2[0]), int(m2[-1]), radius=rw, tol=contour.tol,
                                  max_nodes=contour.max_nodes, min_nodes=contour.min_nodes, log_fn=lg2)
    g1 = g1.real
    g2 = g2.real
    # H1[x, k] = g1hat(x + k), H2[k, y] = g2hat(-y - k)
    i1 = (xs[:, None] + ks[None, :]) - m1[0]
    i2 = (-ys[None, :] - ks[:, None]) - m2[0]
    H1 = g1[i1]
    H2 = g2[i2]
    Kt = C * (H1 @ H2)
    # coefficient errors are s * rho^{-m}; propagate through the sum
    E1 = s1 * rz ** (-m1[i1].astype(float))
    E2 = s2 * rw ** (-m2[i2].astype(float))
    err = C * (E1 @ np.abs(H2) + np.abs(H1) @ E2 + E1 @ E2)
    # tail beyond kmax, bounded by the last term times a geometric factor
    last = C * np.abs(np.outer(H1[:, -1], H2[-1, :])) + C * np.outer(E1[:, -1], E2[-1, :])
    err = err + last / (1 - rw / rz)
    if not tilde_only and u < v:
        Kt = Kt - phi_block(p, u, v, xs, ys)
    e = float(err.max())
    if e > contour.tol_kernel:
        raise ContourConvergenceError(f"kernel error estimate {e:.2e} too large")
    return KernelBlock(Kt, xs, ys, e, (rz, rw))


def png_kernel(p: PNGKernelParams, u: int, x: int, v: int, y: int, contour: ContourSpec | None = None) -> float:
    return float(png_kernel_block(p, u, v, [x], [y], contour).values[0, 0])


def png_kernel_direct(p: PNGKernelParams, u: int, x: int, v: int, y: int, r_z: float, r_w: float,
                      nodes: int = 256, tol: float = 1e-11, max_nodes: int = 4096) -> float:
    """Plain double trapezoid rule for the contour integral with |z| = r_z, |w| = r_w.

    With r_w < r_z this is Ktilde; with r_w > r_z (contours swapped) it is
    Ktilde minus the residue at z = w.
    """
    _check_uv(p, u, v)
    prev = None
    L = nodes
    while L <= max_nodes:
        th = 2 * np.pi * np.arange(L) / L
        z = r_z * np.exp(1j * th)[:, None]
        w = r_w * np.exp(1j * th)[None, :]
        f = w ** y * z ** (-x) * z / (z - w) * png_G(p, u, v, z, w)
        val = f.mean().real
        if prev is not None and abs(val - prev) < tol * max(1.0, abs(val)):
            return val
        prev = val
        L *= 2
    raise ContourConvergenceError("double trapezoid rule did not converge")


def phi_block(p: PNGKernelParams, u: int, v: int, xs, ys) -> np.ndarray:
    """phi_{2u,2v}(x, y): Fourier coefficients of (1-alpha)^{2(v-u)} (1+alpha^2-2 alpha cos)^{-(v-u)}."""
    xs = np.asarray(xs, dtype=int)
    ys = np.asarray(ys, dtype=int)
    if u >= v:
        return np.zeros((len(xs), len(ys)))
    al = p.alpha
    D = ys[None, :] - xs[:, None]
    kmin, kmax = int(D.min()), int(D.max())
    sym = ScalarSymbol((Factor("plus", al, -(v - u), (1 - al) ** (v - u)),
                        Factor("minus", al, -(v - u), (1 - al) ** (v - u))))
    c = laurent_coefficients(sym, -kmax, -kmin)[0].real
    # phi(x, y) = (1/2pi) int e^{i(y-x)theta} h = hhat(-(y-x))
    return c[(-D) - (-kmax)]


def phi_uv(p: PNGKernelParams, u: int, v: int, x: int, y: int) -> float:
    return float(phi_block(p, u, v, [x], [y])[0, 0])


# ---------------------------------------------------------------- scaling

def scaled_coordinates(p: PNGKernelParams, tau: float, xi: float):
    """Nearest lattice point (u, x) for the scaled time tau and height xi."""
    N = p.N
    u = int(round(tau * N ** (2 / 3) / p.d_prime))
    x = int(round(p.a_star * N + (xi - tau ** 2) * p.d * N ** (1 / 3)))
    if abs(u) >= N:
        raise ValueError("N too small for the requested time window")
    return u, x


def lattice_scaled_point(p: PNGKernelParams, u: int, x: int):
    """Scaled (tau, xi) that the lattice point (u, x) represents exactly."""
    N = p.N
    tau = u * p.d_prime / N ** (2 / 3)
    return tau, (x - p.a_star * N) / (p.d * N ** (1 / 3)) + tau ** 2


def conjugated_airy_kernel(tau: float, xi: float, tau2: float, xi2: float) -> float:
    """Extended Airy kernel times the gauge factor the PNG kernel converges to."""
    from .airy import extended_airy_kernel
    return math.exp((tau ** 3 - tau2 ** 3) / 3 + xi2 * tau2 - xi * tau) * extended_airy_kernel(tau, xi, tau2, xi2)


def scaled_kernel_limit(p: PNGKernelParams, tau: float, xi: float, tau2: float, xi2: float):
    """(d N^{1/3} K_N at the nearest lattice point, conjugated extended Airy kernel, lattice point).

    The lattice point (u, x, v, y) is returned so rounding is reproducible.
    """
    u, x = scaled_coordinates(p, tau, xi)
    v, y = scaled_coordinates(p, tau2, xi2)
    kn = p.d * p.N ** (1 / 3) * png_kernel(p, u, x, v, y)
    lim = conjugated_airy_kernel(tau, xi, tau2, xi2)
    return kn, lim, (u, x, v, y)


def png_height_cdf(p: PNGKernelParams, levels, u: int = 0, width: int | None = None):
    """Exact P[G(N+u, N-u) <= l] = det(I - K_N(2u, .; 2u, .)) on (l, infinity).

    The half-line is cut where the one-point density drops below 1e-16.
    """
    levels = np.atleast_1d(np.asarray(levels, dtype=int))
    N = p.N
    if width is None:
        width = int(6 * p.d * N ** (1 / 3) + 40 + 10 / -math.log(p.alpha))
    lo = int(levels.min()) + 1
    hi = max(int(levels.max()) + 1, int(p.a_star * N)) + width
    xs = np.arange(lo, hi + 1)
    K = png_kernel_block(p, u, u, xs, xs).values
    if abs(K[-1, -1]) > 1e-14:
        raise ContourConvergenceError("window too narrow for the one-point density")
    out = []
    for l in levels:
        s = int(l + 1 - lo)
        sub = K[s:, s:]
        out.append(float(np.linalg.det(np.eye(len(sub)) - sub)))
    return np.array(out)


def png_joint_cdf(p: PNGKernelParams, u1: int, l1: int, u2: int, l2: int, width: int | None = None) -> float:
    """P[G(N+u1, N-u1) <= l1, G(N+u2, N-u2) <= l2] as a 2x2 block determinant."""
    N = p.N
    if width is None:
        width = int(6 * p.d * N ** (1 / 3) + 40 + 10 / -math.log(p.alpha))
    hi = max(l1, l2, int(p.a_star * N)) + width
    x1 = np.arange(l1 + 1, hi + 1)
    x2 = np.arange(l2 + 1, hi + 1)
    B = [[png_kernel_block(p, a, b, xa, xb).values for (b, xb) in ((u1, x1), (u2, x2))]
         for (a, xa) in ((u1, x1), (u2, x2))]
    K = np.block(B)
    return float(np.linalg.det(np.eye(len(K)) - K))
