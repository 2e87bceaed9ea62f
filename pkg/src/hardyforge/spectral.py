"""Spectral representation of the weighted operator on radial functions.

Functions of the level variable t = G/u carry all the spectral content:
the map v = u f(G/u) -> f is an isometry onto L^2((0,inf), dt/(4t^2)),
the conjugated operator acts there as -4 t^2 f'', and composing with
t -> 1/t and the Mellin transform diagonalizes it as multiplication by
1 + 4 xi^2.  The generalized modes are u (G/u)^(1/2) e^(i xi log(G/u)).

All transforms are computed in the logarithmic variable, where they are
ordinary Fourier integrals; the quadrature is the trapezoid rule with
endpoint decay enforced, plus a per-cell Gauss rule for level-set
(shell) integrals that need partial end cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .numgrid import (
    SampledFunction,
    trapezoid,
    derivative_log_fourth_order,
    fit_tail_exponent,
    gauss5_nodes_weights,
    second_derivative_log_fourth_order,
)
from .radial import (
    RadialOperator,
    RadialProfile,
    flux_normalized_green,
    ratio_log,
    ratio_slope,
    sphere_area,
)

__all__ = [
    "RadialSpectralMap",
    "ModeFunction",
    "spectral_map",
    "mellin_transform",
    "generalized_fourier",
    "inverse_generalized_fourier",
    "conjugation_check",
    "torus_orthonormality",
    "coarea_identity",
    "default_xi_grid",
]


def default_xi_grid(count: int = 512, span: float = 8.0) -> np.ndarray:
    return np.linspace(-span, span, count)


def mollifier_bump(center: float, width: float) -> Callable:
    """Smooth compactly supported bump of log t, exp(1 - 1/(1-z^2))."""

    def f(t):
        z = (np.log(np.asarray(t, dtype=float)) - center) / width
        out = np.zeros_like(z)
        m = np.abs(z) < 1.0
        out[m] = np.exp(1.0 - 1.0 / (1.0 - z[m] ** 2))
        return out

    f.support = (center - width, center + width)
    return f


def gaussian_bump(center: float, sigma: float, cut: float = 6.0) -> Callable:
    """Gaussian of log t truncated at cut*sigma.

    The transform is e^(-sigma^2 xi^2 / 2) up to the truncation jump of
    e^(-cut^2/2) ~ 1.5e-8, so both Plancherel and pointwise inversion
    survive the default [-8, 8] window; a mollifier profile would need a
    far wider window for pointwise accuracy (its transform decays only
    like e^(-c sqrt(xi))).
    """

    def f(t):
        z = (np.log(np.asarray(t, dtype=float)) - center) / sigma
        return np.where(np.abs(z) < cut, np.exp(-0.5 * z * z), 0.0)

    f.support = (center - cut * sigma, center + cut * sigma)
    return f


def seeded_bump_family(seed: int, count: int,
                       center_range: tuple[float, float] = (-1.5, 1.5),
                       sigma_range: tuple[float, float] = (0.8, 1.2)) -> list:
    """Seeded truncated-Gaussian bumps in the level variable."""
    rng = np.random.default_rng(seed)
    return [gaussian_bump(rng.uniform(*center_range), rng.uniform(*sigma_range))
            for _ in range(count)]


@dataclass
class RadialSpectralMap:
    """Level map t = G/u for a radial pair, with flux normalization.

    ell = log t is strictly decreasing in s = log r, so functions of t
    pull back to radial fields and shells {a <= t <= b} are annuli.
    The weight keeps the unit-Wronskian normalization of the quadrature
    pair (it is scale invariant); only the level variable is rescaled.
    """

    op: RadialOperator
    psi: RadialProfile
    G: RadialProfile          # flux-normalized Green function
    g0: RadialProfile         # unit-Wronskian Green function
    ell: np.ndarray           # log(G/psi) at the grid nodes
    ell_slope: np.ndarray     # d ell / ds, exact

    @property
    def grid(self):
        return self.op.grid

    def t_of_r(self, r):
        s = np.log(np.asarray(r, dtype=float))
        return np.exp(CubicSpline(self.grid.log_nodes, self.ell)(s))

    def s_of_ell(self, ell_val):
        # ell decreases in s; reversed, it is an increasing interpolation table
        return np.interp(np.asarray(ell_val, dtype=float),
                         self.ell[::-1], self.grid.log_nodes[::-1])

    def pullback(self, f: Callable) -> Callable:
        """Radial field u f(G/u) as a function of r."""

        def field(r):
            return self.psi(r) * np.asarray(f(self.t_of_r(r)), dtype=float)

        return field

    def log_weight_nodes(self) -> np.ndarray:
        """log W at the grid nodes, W = r^(2-2n) / (4 (psi g0)^2)."""
        n = self.op.n
        s = self.grid.log_nodes
        return ((2.0 - 2.0 * n) * s - math.log(4.0)
                - 2.0 * (self.psi.log_values + self.g0.log_values))


def spectral_map(op: RadialOperator, psi: RadialProfile, g0: RadialProfile) -> RadialSpectralMap:
    """Build the level map from the quadrature-normalized pair (psi, g0)."""
    G = flux_normalized_green(psi, g0, op.n)
    ell = ratio_log(psi, g0) - math.log(sphere_area(op.n))
    slope = ratio_slope(psi, g0)
    if not np.all(np.diff(ell) < 0):
        raise ValueError("level variable log(G/u) is not strictly decreasing")
    return RadialSpectralMap(op=op, psi=psi, G=G, g0=g0, ell=ell, ell_slope=slope)


@dataclass
class ModeFunction:
    """Generalized eigenfunction u (G/u)^(1/2) e^(i xi log(G/u))."""

    xi: float
    map: RadialSpectralMap

    def amplitude(self, r):
        return self.map.psi(r) * np.sqrt(self.map.t_of_r(r))

    def phase(self, r):
        return self.xi * np.log(self.map.t_of_r(r))

    def __call__(self, r):
        return self.amplitude(r) * np.exp(1j * self.phase(r))

    @property
    def eigenvalue(self) -> float:
        return 1.0 + 4.0 * self.xi ** 2

    def residual(self) -> float:
        """Finite-difference residual of (P - (1+4 xi^2) W) phi_xi."""

        def f(t):
            return np.sqrt(t) * np.cos(self.xi * np.log(t))

        def d2f(t):
            # f = Re t^{1/2 + i xi}; t^2 f'' = -(1+4 xi^2)/4 * f
            return -(1.0 + 4.0 * self.xi ** 2) / 4.0 * f(t) / t ** 2

        return conjugation_check(self.map, f, d2f)


# ---------------------------------------------------------------------------
# Mellin transform
# ---------------------------------------------------------------------------

def mellin_transform(f: SampledFunction, xi_grid: Sequence[float],
                     tail_tol: float = 1e-8) -> np.ndarray:
    """M f(xi) = (2 pi)^(-1/2) int_0^inf f(r) r^(i xi - 1/2) dr.

    In s = log r the integrand is f(e^s) e^(s/2) e^(i xi s), a plain
    Fourier integral; with decaying endpoints the trapezoid rule is
    spectrally accurate.  The decay requirement is checked by fitting
    power-law tails to the envelope |f| e^(s/2): their estimated mass
    must stay below tail_tol of the total.
    """
    g = f.grid
    s = g.log_nodes
    env = np.abs(f.values) * np.exp(0.5 * s)
    total = trapezoid(env, s)
    if total == 0.0:
        return np.zeros(len(xi_grid), dtype=complex)

    peak = float(env.max())

    def end_mass(side):
        if side == "lower":
            edge, mask = env[0], g.nodes <= g.t_min * 10.0
        else:
            edge, mask = env[-1], g.nodes >= g.t_max / 10.0
        if edge <= 1e-250 * peak:
            return 0.0  # envelope already underflowed: nothing out there
        p = fit_tail_exponent(g.nodes[mask], env[mask])
        if side == "lower":
            return math.inf if p <= 1e-9 else edge / p
        return math.inf if p >= -1e-9 else edge / (-p)

    tail = end_mass("lower") + end_mass("upper")
    if not tail / total < tail_tol:
        raise ValueError(
            f"insufficient decay at the grid ends (tail mass {tail / total:.2e}); extend the grid")

    base = f.values * np.exp(0.5 * s)
    w = np.full(g.m, g.step)
    w[0] = w[-1] = 0.5 * g.step
    out = np.empty(len(xi_grid), dtype=complex)
    chunk = 64
    xi_grid = np.asarray(xi_grid, dtype=float)
    for k in range(0, len(xi_grid), chunk):
        xs = xi_grid[k:k + chunk]
        out[k:k + chunk] = (base * w) @ np.exp(1j * np.outer(s, xs))
    return out / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# shell quadrature in the level variable
# ---------------------------------------------------------------------------

def _shell_cells(map_: RadialSpectralMap, ell_lo: float, ell_hi: float):
    """Gauss nodes/weights in s covering the shell ell in [ell_lo, ell_hi]."""
    ell = map_.ell
    if ell_hi > ell[0] + 1e-9 or ell_lo < ell[-1] - 1e-9:
        raise ValueError(
            f"shell [{ell_lo:.3g}, {ell_hi:.3g}] in log(G/u) escapes the grid "
            f"range [{ell[-1]:.3g}, {ell[0]:.3g}]")
    s = map_.grid.log_nodes
    s_lo = float(map_.s_of_ell(ell_hi))   # ell decreasing: high level = small s
    s_hi = float(map_.s_of_ell(ell_lo))
    inside = s[(s > s_lo) & (s < s_hi)]
    edges = np.concatenate([[s_lo], inside, [s_hi]])
    all_nodes, all_weights = [], []
    for k in range(len(edges) - 1):
        nd, wt = gauss5_nodes_weights(edges[k], edges[k + 1])
        all_nodes.append(nd)
        all_weights.append(wt)
    return np.concatenate(all_nodes), np.concatenate(all_weights)


def _shell_integral(map_: RadialSpectralMap, integrand: Callable,
                    ell_lo: float, ell_hi: float):
    """omega * int integrand(s) e^{n s} ds over the shell, Gauss per cell."""
    nodes, weights = _shell_cells(map_, ell_lo, ell_hi)
    n = map_.op.n
    vals = integrand(nodes) * np.exp(n * nodes)
    return sphere_area(n) * np.sum(weights * vals)


def _log_pair_splines(map_: RadialSpectralMap):
    s = map_.grid.log_nodes
    return (CubicSpline(s, map_.psi.log_values),
            CubicSpline(s, map_.G.log_values),
            CubicSpline(s, map_.ell))


def shell_integral_uG(psi: RadialProfile, g0: RadialProfile, n: int,
                      a: float, b: float, F: Callable | None = None) -> float:
    """int_{a <= G/u <= b} u G F dnu in the flux normalization (F=W if None)."""
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    op = RadialOperator(n=n, V=None, grid=psi.grid)
    m = spectral_map(op, psi, g0)
    lpsi, lG, _ = _log_pair_splines(m)
    log_W = CubicSpline(m.grid.log_nodes, m.log_weight_nodes())

    if F is None:
        def integrand(sv):
            return np.exp(lpsi(sv) + lG(sv) + log_W(sv))
    else:
        def integrand(sv):
            return np.exp(lpsi(sv) + lG(sv)) * np.asarray(F(np.exp(sv)), dtype=float)

    return float(np.real(_shell_integral(m, integrand, math.log(a), math.log(b))))


def coarea_shell_mass(psi: RadialProfile, g0: RadialProfile, n: int,
                      a: float, b: float) -> float:
    return shell_integral_uG(psi, g0, n, a, b, None)


def coarea_identity(psi: RadialProfile, g0: RadialProfile, n: int,
                    a: float, b: float) -> tuple[float, float]:
    """Shell mass int_{a <= G/u <= b} u G W dnu against (1/4) log(b/a).

    Requires the flux normalization u(0) = 1, which spectral_map applies;
    the identity is then independent of the generating pair.
    """
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0, 0.0
    lhs = coarea_shell_mass(psi, g0, n, a, b)
    rhs = 0.25 * math.log(b / a)
    return lhs, rhs


def torus_orthonormality(map_: RadialSpectralMap, r: float, k: int, l: int) -> complex:
    """(2 / (pi r)) int_{|log(G/u)| < r pi} phi_k^r conj(phi_l^r) W dnu.

    phi_k^r is the mode at xi = k/r; the normalized pairing is the
    Kronecker delta.
    """
    if r <= 0:
        raise ValueError("window parameter r must be positive")
    lpsi, lG, lell = _log_pair_splines(map_)
    log_W = CubicSpline(map_.grid.log_nodes, map_.log_weight_nodes())
    dxi = (k - l) / r

    def integrand(sv):
        # phi_k conj(phi_l) W = psi G e^{i dxi ell} W
        return np.exp(lpsi(sv) + lG(sv) + log_W(sv)) * np.exp(1j * dxi * lell(sv))

    val = _shell_integral(map_, integrand, -r * math.pi, r * math.pi)
    return complex(val * 2.0 / (math.pi * r))


# ---------------------------------------------------------------------------
# generalized Fourier transform
# ---------------------------------------------------------------------------

def generalized_fourier(map_: RadialSpectralMap, f_of_t: Callable,
                        support: tuple[float, float],
                        xi_grid: Sequence[float]) -> np.ndarray:
    """F f(xi) = sqrt(2/pi) int f phi(xi, .) W dnu for f = u f_of_t(G/u).

    support is the (ell_lo, ell_hi) window in ell = log(G/u) carrying f;
    it must sit inside the grid.
    """
    nodes, weights = _shell_cells(map_, support[0], support[1])
    lpsi, lG, lell = _log_pair_splines(map_)
    n = map_.op.n
    log_W = CubicSpline(map_.grid.log_nodes, map_.log_weight_nodes())
    ell_n = lell(nodes)
    t_n = np.exp(ell_n)
    # f * phi_xi * W * e^{n s} * omega; phi_xi = psi sqrt(t) e^{i xi ell}
    base = (np.exp(2.0 * lpsi(nodes)) * f_of_t(t_n) * np.sqrt(t_n)
            * np.exp(log_W(nodes) + n * nodes) * weights * sphere_area(n))
    xi_grid = np.asarray(xi_grid, dtype=float)
    out = np.empty(len(xi_grid), dtype=complex)
    chunk = 64
    for k in range(0, len(xi_grid), chunk):
        xs = xi_grid[k:k + chunk]
        out[k:k + chunk] = base @ np.exp(1j * np.outer(ell_n, xs))
    return out * math.sqrt(2.0 / math.pi)


def inverse_generalized_fourier(map_: RadialSpectralMap, transform: np.ndarray,
                                xi_grid: np.ndarray, r_points: np.ndarray) -> np.ndarray:
    """f(x) = sqrt(2/pi) int F f(xi) phi(-xi, x) dxi at radial points."""
    ell_r = np.log(map_.t_of_r(r_points))
    amp = map_.psi(r_points) * np.exp(0.5 * ell_r)
    phases = np.exp(-1j * np.outer(xi_grid, ell_r))
    vals = trapezoid(transform[:, None] * phases, xi_grid, axis=0)
    return math.sqrt(2.0 / math.pi) * amp * vals.real


def weighted_norm2(map_: RadialSpectralMap, f_of_t: Callable,
                   support: tuple[float, float]) -> float:
    """int |u f(G/u)|^2 W dnu over the support shell."""
    lpsi, _, lell = _log_pair_splines(map_)
    log_W = CubicSpline(map_.grid.log_nodes, map_.log_weight_nodes())

    def integrand(sv):
        return np.exp(2.0 * lpsi(sv) + log_W(sv)) * f_of_t(np.exp(lell(sv))) ** 2

    return float(np.real(_shell_integral(map_, integrand, support[0], support[1])))


def conjugation_check(map_: RadialSpectralMap, f: Callable, d2f: Callable,
                      trim: int = 4) -> float:
    """Max relative residual of (1/W) P (u f(G/u)) = -4 u f''(G/u) (G/u)^2.

    The left side applies the radial operator to the nodal field with
    4th-order stencils in s; f and its second derivative are supplied in
    closed form.
    """
    op = map_.op
    n = op.n
    s = map_.grid.log_nodes
    t = np.exp(map_.ell)
    with np.errstate(over="ignore"):
        psi_v = np.exp(map_.psi.log_values)
    w_field = psi_v * np.asarray(f(t), dtype=float)
    d1 = derivative_log_fourth_order(s, w_field)
    d2 = second_derivative_log_fourth_order(s, w_field)
    V = op.potential(map_.grid.nodes)
    Pw = -np.exp(-2.0 * s) * (d2 + (n - 2) * d1) + V * w_field
    lhs = Pw / np.exp(map_.log_weight_nodes())
    rhs = -4.0 * psi_v * np.asarray(d2f(t), dtype=float) * t * t
    inner = slice(trim, -trim)
    lhs, rhs, wf = lhs[inner], rhs[inner], w_field[inner]
    finite = np.isfinite(lhs) & np.isfinite(rhs)
    if finite.sum() < 8:
        raise ValueError("profile overflows float64 on almost all nodes; shrink the grid")
    # both sides are eigen-sized quantities, so the field magnitude is the
    # natural floor of the denominator (keeps f with f'' = 0 meaningful)
    scale = np.abs(lhs[finite]) + np.abs(rhs[finite]) + np.abs(wf[finite]) + 1e-300
    rel = np.abs(lhs[finite] - rhs[finite]) / scale
    return float(np.max(rel))
