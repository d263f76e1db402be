"""Airy process: extended Airy kernel, its Fredholm determinants, Tracy-Widom laws.

    A(tau, xi; tau', xi') =  int_0^inf  e^{-lam (tau - tau')} Ai(xi + lam) Ai(xi' + lam) dlam,  tau >= tau'
                          = -int_-inf^0 e^{-lam (tau - tau')} Ai(xi + lam) Ai(xi' + lam) dlam,  tau <  tau'
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

AI_SUP = 0.5357  # sup_x |Ai(x)|, attained near x = -1.02


class QuadratureError(RuntimeError):
    pass


def airy_fn(x):
    """(Ai(x), Ai'(x)); vectorised."""
    ai, aip, _, _ = special.airy(x)
    return ai, aip


@lru_cache(maxsize=None)
def _gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


def panel_rule(a: float, b: float, width: float = 1.0, m: int = 24):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    if b <= a:
        return np.zeros(0), np.zeros(0)
    npan = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, npan + 1)
    t, w = _gauss_legendre(m)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


# ------------------------------------------------------------------ kernel

@dataclass(frozen=True)
class ExtendedAiryKernelSpec:
    """Quadrature controls for the lambda-integral form."""
    panel_width: float = 0.5
    nodes_per_panel: int = 24
    tol: float = 1e-13
    upper: float = 14.0        # integrate the decaying branch until xi + lam >= upper

    def __post_init__(self):
        if self.panel_width <= 0 or self.nodes_per_panel < 4:
            raise ValueError("bad quadrature controls")


def _lambda_rule(tau, tau2, xmin, spec: ExtendedAiryKernelSpec):
    """Nodes, weights (including the exponential and the sign) for the lambda integral."""
    dt = tau - tau2
    if dt >= 0:
        lam, w = panel_rule(0.0, max(spec.upper - xmin, 1.0), spec.panel_width, spec.nodes_per_panel)
        return lam, w * np.exp(-lam * dt)
    delta = -dt
    # e^{lam * delta} for lam < 0; truncation error <= sup|Ai|^2 e^{-Lam delta} / delta
    Lam = max(math.log(AI_SUP ** 2 / (delta * spec.tol)) / delta, 1.0)
    if Lam > 2000:
        raise QuadratureError(f"time gap {delta} too small for the lambda-integral form")
    # oscillation frequency of Ai grows like sqrt(|x|); shrink panels accordingly
    width = min(spec.panel_width, 3.0 / math.sqrt(1.0 + Lam + abs(xmin)))
    lam, w = panel_rule(-Lam, 0.0, width, spec.nodes_per_panel)
    return lam, -w * np.exp(lam * delta)


def extended_airy_matrix(tau: float, xs, tau2: float, ys, spec: ExtendedAiryKernelSpec | None = None) -> np.ndarray:
    """A(tau, x; tau2, y) for all x in xs and y in ys (lambda-integral form)."""
    spec = spec or ExtendedAiryKernelSpec()
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    xmin = min(xs.min(), ys.min())
    lam, w = _lambda_rule(tau, tau2, xmin, spec)
    ax = special.airy(xs[:, None] + lam[None, :])[0]
    ay = special.airy(ys[:, None] + lam[None, :])[0]
    return (ax * w[None, :]) @ ay.T


def extended_airy_kernel(tau: float, xi: float, tau2: float, xi2: float,
                         spec: ExtendedAiryKernelSpec | None = None) -> float:
    return float(extended_airy_matrix(tau, [xi], tau2, [xi2], spec)[0, 0])


def modified_airy_kernel(tau: float, xi: float, tau2: float, xi2: float,
                         spec: ExtendedAiryKernelSpec | None = None) -> float:
    """Atilde: the lambda > 0 integral for either time order."""
    spec = spec or ExtendedAiryKernelSpec()
    lam, w = panel_rule(0.0, max(spec.upper - min(xi, xi2), 1.0), spec.panel_width, spec.nodes_per_panel)
    w = w * np.exp(-lam * (tau - tau2))
    return float(np.sum(w * special.airy(xi + lam)[0] * special.airy(xi2 + lam)[0]))


def airy_kernel_matrix(xs, ys=None) -> np.ndarray:
    """Classical Airy kernel (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)."""
    xs = np.asarray(xs, dtype=float)
    ys = xs if ys is None else np.asarray(ys, dtype=float)
    ax, axp = airy_fn(xs)
    ay, ayp = airy_fn(ys)
    dx = xs[:, None] - ys[None, :]
    same = np.abs(dx) < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (ax[:, None] * ayp[None, :] - axp[:, None] * ay[None, :]) / dx
    diag = (axp ** 2 - xs * ax ** 2)[:, None] * np.ones_like(dx)
    return np.where(same, diag, K)


def extended_airy_double_integral(tau: float, xi: float, tau2: float, xi2: float,
                                  eta: float, eta2: float, tol: float = 1e-11,
                                  h0: float = 0.1, max_points: int = 6000) -> float:
    """-(1/4pi^2) int_{Im z = eta} int_{Im w = eta2} e^{i xi z + i xi2 w + i(z^3+w^3)/3} / (tau2 - tau + i(z+w)).

    Gives A when eta + eta2 + tau - tau2 has the sign that puts the pole on
    the right side (negative for tau < tau2) and Atilde otherwise.  Plain
    trapezoid sums in Re z, Re w with step halving; the integrand decays like
    exp(-eta s^2) along the contour.
    """
    if eta <= 0 or eta2 <= 0:
        raise ValueError("contour heights must be positive")
    gap = abs(eta + eta2 + tau - tau2)
    if gap == 0:
        raise ValueError("contours pass through the pole")
    emin = min(eta, eta2)
    S = math.sqrt((45.0 + max(0.0, -min(xi, xi2)) * 2) / emin) + 1.0
    h = min(h0, gap / 4)
    prev = None
    while True:
        n = int(2 * S / h) + 1
        if n > max_points:
            raise QuadratureError("double integral needs too many nodes")
        s = np.linspace(-S, S, n)
        hh = s[1] - s[0]
        z = s + 1j * eta
        w = s + 1j * eta2
        fz = np.exp(1j * xi * z + 1j * z ** 3 / 3)
        fw = np.exp(1j * xi2 * w + 1j * w ** 3 / 3)
        den = (tau2 - tau) + 1j * (z[:, None] + w[None, :])
        val = -(fz @ (1.0 / den) @ fw) * hh * hh / (4 * math.pi ** 2)
        if prev is not None and abs(val - prev) < tol:
            return float(val.real)
        prev = val
        h /= 2


def contour_heights(tau: float, tau2: float):
    """Contour heights (eta, eta2) for which the double integral gives A.

    For tau >= tau2 any positive heights work; for tau < tau2 the sum must stay
    below tau2 - tau.
    """
    if tau >= tau2:
        return 1.0, 1.0
    h = min(0.3, (tau2 - tau) / 4)
    return h, h


def phi_gaussian(tau: float, tau2: float, xi: float, xi2: float) -> float:
    """Transition density between the two times; zero unless tau < tau2."""
    if tau >= tau2:
        return 0.0
    d = tau2 - tau
    return math.exp(-(xi - xi2) ** 2 / (4 * d) - d * (xi + xi2) / 2 + d ** 3 / 12) / math.sqrt(4 * math.pi * d)


# --------------------------------------------------------- Fredholm dets

def airy_fdd(taus, xis, m_q: int = 48, L: float = 12.0, check: bool = True, tol: float = 1e-6) -> float:
    """P[A(tau_k) <= xi_k for all k] = det(I - A) on the union of (xi_k, infinity).

    Each half-line is cut at xi_k + L and discretised with m_q Gauss-Legendre
    nodes.  With ``check`` the computation is repeated with 2 m_q nodes and an
    error is raised if the two differ by more than ``tol``.
    """
    taus = np.asarray(taus, dtype=float)
    xis = np.asarray(xis, dtype=float)
    if taus.shape != xis.shape or taus.ndim != 1 or taus.size == 0:
        raise ValueError("taus and xis must be matching nonempty lists")
    if len(np.unique(taus)) != len(taus):
        raise ValueError("times must be distinct")
    order = np.argsort(taus)
    taus, xis = taus[order], xis[order]

    def det_at(m):
        t, w = _gauss_legendre(m)
        nodes, wts = [], []
        for xi in xis:
            nodes.append(xi + 0.5 * L * (t + 1))
            wts.append(0.5 * L * w)
        blocks = []
        for a in range(len(taus)):
            row = []
            for b in range(len(taus)):
                Kab = extended_airy_matrix(taus[a], nodes[a], taus[b], nodes[b])
                row.append(np.sqrt(wts[a])[:, None] * Kab * np.sqrt(wts[b])[None, :])
            blocks.append(row)
        Mat = np.block(blocks)
        return float(np.linalg.det(np.eye(len(Mat)) - Mat))

    p = det_at(m_q)
    if check:
        p2 = det_at(2 * m_q)
        if abs(p - p2) > tol:
            raise QuadratureError(f"airy_fdd not converged: {p} vs {p2}")
        p = p2
        # mass beyond the cut: int_{xi+L}^inf K(x, x) dx bounds the truncation
        tail = sum(_airy_diag_tail(xi + L) for xi in xis)
        if tail > tol:
            raise QuadratureError(f"cut-off L={L} too small (tail {tail:.1e})")
    return p


def _airy_diag_tail(s: float) -> float:
    """int_s^inf K_Ai(x, x) dx = (2 s^2 Ai(s)^2 - 2 s Ai'(s)^2 - Ai(s) Ai'(s)) / 3."""
    a, ap = airy_fn(s)
    return float(abs((2 * s * s * a * a - 2 * s * ap * ap - a * ap) / 3))


def tw2_nystrom(xi: float, m: int = 60, L: float = 14.0) -> float:
    """det(I - K_Ai) on (xi, xi + L) by Gauss-Legendre Nystrom discretisation."""
    t, w = _gauss_legendre(m)
    x = xi + 0.5 * L * (t + 1)
    ww = 0.5 * L * w
    K = airy_kernel_matrix(x)
    sw = np.sqrt(ww)
    return float(np.linalg.det(np.eye(m) - sw[:, None] * K * sw[None, :]))


# ------------------------------------------------------ Painleve II route

@dataclass(frozen=True)
class TWTables:
    """Dense solution of the Hastings-McLeod problem on [x_min, x_max].

    State y = (q, q', I, J, Q) with I = int_x^inf q^2, J = int_x^inf y q^2,
    Q = int_x^inf q.  Then F2 = exp(-(J - x I)) and F1 = sqrt(F2) exp(-Q/2).
    """
    x_min: float
    x_max: float
    sol: object

    def state(self, x):
        return self.sol.sol(np.asarray(x, dtype=float))

    def q(self, x):
        return self.state(x)[0]

    def F2(self, x):
        x = np.asarray(x, dtype=float)
        y = self.state(np.clip(x, self.x_min, self.x_max))
        val = np.exp(-(y[3] - np.clip(x, self.x_min, self.x_max) * y[2]))
        return np.where(x < self.x_min, 0.0, np.where(x > self.x_max, 1.0, val))

    def F1(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.x_min, self.x_max)
        y = self.state(xc)
        val = np.exp(-0.5 * (y[3] - xc * y[2]) - 0.5 * y[4])
        return np.where(x < self.x_min, 0.0, np.where(x > self.x_max, 1.0, val))


def painleve_hastings_mcleod(x_min: float = -10.0, x_max: float = 12.0) -> TWTables:
    """Integrate q'' = x q + 2 q^3 backwards from x_max with Airy data."""
    if x_max < 8:
        raise ValueError("x_max must be at least 8 so that q = Ai to double precision")
    a, ap = airy_fn(x_max)
    # tails beyond x_max: q = Ai there to O(Ai^3)
    I0 = ap * ap - x_max * a * a
    J0 = _int_y_ai2(x_max)
    Q0 = 1.0 / 3.0 - special.itairy(x_max)[0]

    def rhs(x, y):
        q, qp = y[0], y[1]
        return [qp, x * q + 2 * q ** 3, -q * q, -x * q * q, -q]

    sol = solve_ivp(rhs, (x_max, x_min), [a, ap, I0, J0, Q0], method="DOP853",
                    rtol=1e-13, atol=1e-300, dense_output=True)
    if not sol.success:
        raise QuadratureError(f"Painleve integration failed: {sol.message}")
    return TWTables(x_min, x_max, sol)


def _int_y_ai2(s: float) -> float:
    """int_s^inf y Ai(y)^2 dy by Gauss-Legendre panels (the integrand is tiny for s >= 8)."""
    x, w = panel_rule(s, s + 10.0, 0.5, 20)
    return float(np.sum(w * x * special.airy(x)[0] ** 2))


@lru_cache(maxsize=4)
def tw_tables(x_min: float = -10.0, x_max: float = 12.0) -> TWTables:
    return painleve_hastings_mcleod(x_min, x_max)


def tw2(xi, check: bool = True, tol: float = 1e-6):
    """GUE Tracy-Widom distribution F2 (Painleve route, cross-checked by Nystrom)."""
    tab = tw_tables()
    val = tab.F2(xi)
    if check:
        for x, v in zip(np.atleast_1d(xi), np.atleast_1d(val)):
            if tab.x_min <= x <= tab.x_max:
                ref = tw2_nystrom(float(x))
                if abs(ref - v) > tol:
                    raise QuadratureError(f"F2({x}): Painleve {v} vs Nystrom {ref}")
    return float(val) if np.ndim(xi) == 0 else val


def tw1(xi):
    """GOE Tracy-Widom distribution F1 via the Painleve II representation."""
    val = tw_tables().F1(xi)
    return float(val) if np.ndim(xi) == 0 else val
