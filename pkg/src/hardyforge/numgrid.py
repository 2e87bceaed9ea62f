"""Logarithmic grids, quadrature and finite differences.

Every radial quantity in this package (solutions, Green functions, weights)
is power-like in r, so the natural discretization is uniform in s = log t.
This module provides the grid type, a sampled-function container, trapezoid
quadrature in the log variable, centered log-derivatives, power-law tail
estimates for improper integrals, and a per-cell Gauss rule used where
trapezoid accuracy is not enough.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LogGrid",
    "SampledFunction",
    "make_log_grid",
    "integrate",
    "cumulative_integral",
    "differentiate",
    "fit_tail_exponent",
    "tail_integral_estimate",
    "gauss5_nodes_weights",
    "trapezoid",
]

trapezoid = getattr(np, "trapezoid", None) or np.trapz

# 5-point Gauss-Legendre rule on [-1, 1]
_GL5_X = np.array([
    -0.9061798459386640, -0.5384693101056831, 0.0,
    0.5384693101056831, 0.9061798459386640,
])
_GL5_W = np.array([
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891,
])


@dataclass(frozen=True)
class LogGrid:
    """Geometric point sequence on [t_min, t_max] with m nodes."""

    t_min: float
    t_max: float
    m: int
    nodes: np.ndarray = field(repr=False)
    log_nodes: np.ndarray = field(repr=False)

    @property
    def step(self) -> float:
        """Uniform spacing in s = log t."""
        return (self.log_nodes[-1] - self.log_nodes[0]) / (self.m - 1)

    def index_left(self, t: float) -> int:
        """Index of the cell containing t (clipped to valid cells)."""
        s = np.log(t)
        k = int(np.floor((s - self.log_nodes[0]) / self.step))
        return min(max(k, 0), self.m - 2)

    def covers(self, a: float, b: float) -> bool:
        return self.t_min * (1 - 1e-12) <= a and b <= self.t_max * (1 + 1e-12)


def make_log_grid(t_min: float, t_max: float, m: int) -> LogGrid:
    """Geometric grid with m nodes from t_min to t_max.

    Nodes are exact at both endpoints and the ratio between consecutive
    nodes is constant to relative 1e-12.
    """
    if not (np.isfinite(t_min) and np.isfinite(t_max)):
        raise ValueError("grid bounds must be finite")
    if t_min <= 0 or t_max <= 0:
        raise ValueError("grid bounds must be positive")
    if t_max <= t_min:
        raise ValueError(f"empty range: t_min={t_min} >= t_max={t_max}")
    if m < 3:
        raise ValueError(f"need at least 3 nodes, got m={m}")
    log_nodes = np.linspace(np.log(t_min), np.log(t_max), m)
    nodes = np.exp(log_nodes)
    nodes[0] = t_min
    nodes[-1] = t_max
    return LogGrid(t_min=float(t_min), t_max=float(t_max), m=int(m),
                   nodes=nodes, log_nodes=log_nodes)


@dataclass(frozen=True)
class SampledFunction:
    """Function samples on a LogGrid, optionally asserted positive."""

    grid: LogGrid
    values: np.ndarray
    positivity: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.m,):
            raise ValueError(f"values shape {v.shape} does not match grid m={self.grid.m}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite samples")
        if self.positivity and not np.all(v > 0):
            k = int(np.argmin(v))
            raise ValueError(f"positivity violated at node {k} (t={self.grid.nodes[k]:g})")
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        """Shape-preserving (monotone cubic) interpolation."""
        from scipy.interpolate import PchipInterpolator
        interp = PchipInterpolator(self.grid.log_nodes, self.values, extrapolate=False)
        out = interp(np.log(np.asarray(t, dtype=float)))
        if np.any(np.isnan(out)):
            raise ValueError("evaluation outside the grid range")
        return out

    def interp_linear(self, t):
        """Piecewise-linear interpolation in s = log t (used by integrate)."""
        return np.interp(np.log(np.asarray(t, dtype=float)),
                         self.grid.log_nodes, self.values)


def sample(grid: LogGrid, fn, positivity: bool = False) -> SampledFunction:
    """Sample a callable of t on the grid."""
    return SampledFunction(grid, np.asarray(fn(grid.nodes), dtype=float), positivity)


def integrate(f: SampledFunction, a: float, b: float) -> float:
    """Trapezoid rule for int_a^b f(t) dt in the log variable.

    Endpoint values inside a cell are interpolated linearly in s, which
    makes the rule exactly additive over adjacent subintervals.  Accuracy
    is O(h^2) in the log step h.
    """
    if b < a:
        raise ValueError(f"inverted range [{a}, {b}]")
    g = f.grid
    if not g.covers(a, b):
        raise ValueError(f"range [{a}, {b}] outside grid [{g.t_min}, {g.t_max}]")
    if a == b:
        return 0.0
    s = g.log_nodes
    # integrand in s: f(e^s) * e^s
    w = f.values * g.nodes
    sa, sb = np.log(a), np.log(b)
    wa = np.interp(sa, s, w)
    wb = np.interp(sb, s, w)
    ka = int(np.searchsorted(s, sa, side="right"))   # first node > sa
    kb = int(np.searchsorted(s, sb, side="left"))    # last node < sb is kb-1
    if ka >= kb:  # both ends in one cell
        return 0.5 * (wa + wb) * (sb - sa)
    total = 0.5 * (wa + w[ka]) * (s[ka] - sa)
    total += trapezoid(w[ka:kb], s[ka:kb]) if kb - ka >= 2 else 0.0
    total += 0.5 * (w[kb - 1] + wb) * (sb - s[kb - 1])
    return float(total)


def cumulative_integral(f: SampledFunction) -> SampledFunction:
    """Trapezoid antiderivative F(t) = int_{t_min}^t f, sampled on the grid."""
    g = f.grid
    w = f.values * g.nodes
    h = np.diff(g.log_nodes)
    acc = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * h)])
    return SampledFunction(g, acc)


def differentiate(f: SampledFunction) -> SampledFunction:
    """d/dt by centered differences in s = log t, one-sided at the ends.

    Both stencils are second order; the conversion to d/dt divides by t.
    """
    g = f.grid
    v = f.values
    h = g.step
    ds = np.empty_like(v)
    ds[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    ds[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
    ds[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return SampledFunction(g, ds / g.nodes)


def derivative_log_fourth_order(log_nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """d/ds by 4th-order stencils on a uniform s-grid (ends: one-sided)."""
    v = np.asarray(values, dtype=float)
    h = (log_nodes[-1] - log_nodes[0]) / (len(log_nodes) - 1)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # one-sided 4th order at the four boundary nodes
    c = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    d[0] = np.dot(c, v[:5]) / h
    d[1] = np.dot(c, v[1:6]) / h
    d[-1] = -np.dot(c, v[-5:][::-1]) / h
    d[-2] = -np.dot(c, v[-6:-1][::-1]) / h
    return d


def second_derivative_log_fourth_order(log_nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """d^2/ds^2 by 4th-order centered stencils (ends copied from neighbours)."""
    v = np.asarray(values, dtype=float)
    h = (log_nodes[-1] - log_nodes[0]) / (len(log_nodes) - 1)
    d2 = np.empty_like(v)
    d2[2:-2] = (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    d2[:2] = d2[2]
    d2[-2:] = d2[-3]
    return d2


def fit_tail_exponent(t: np.ndarray, f: np.ndarray) -> float:
    """Least-squares exponent p of f ~ C t^p from positive samples."""
    mask = f > 0
    if mask.sum() < 2:
        return -np.inf
    x = np.log(t[mask])
    y = np.log(f[mask])
    p = np.polyfit(x, y, 1)[0]
    return float(p)


def tail_integral_estimate(f: SampledFunction, side: str = "upper") -> tuple[float, float]:
    """Estimate int beyond the grid assuming an eventual power law.

    Fits the exponent over the last (or first) decade of samples and
    integrates the fitted power analytically.  Returns (tail, exponent);
    the tail is +inf when the fitted power is not integrable.
    """
    g = f.grid
    if side == "upper":
        lo = g.t_max / 10.0
        mask = g.nodes >= lo
        p = fit_tail_exponent(g.nodes[mask], np.abs(f.values[mask]))
        edge = f.values[-1]
        if p < -1.0:
            return float(edge * g.t_max / (-p - 1.0)), p
        return (np.inf if edge != 0 else 0.0), p
    elif side == "lower":
        hi = g.t_min * 10.0
        mask = g.nodes <= hi
        p = fit_tail_exponent(g.nodes[mask], np.abs(f.values[mask]))
        edge = f.values[0]
        if p > -1.0:
            return float(edge * g.t_min / (p + 1.0)), p
        return (np.inf if edge != 0 else 0.0), p
    raise ValueError(f"unknown side {side!r}")


def gauss5_nodes_weights(s_lo: float, s_hi: float) -> tuple[np.ndarray, np.ndarray]:
    """5-point Gauss-Legendre nodes/weights on [s_lo, s_hi]."""
    mid = 0.5 * (s_lo + s_hi)
    half = 0.5 * (s_hi - s_lo)
    return mid + half * _GL5_X, half * _GL5_W


def gauss5_cells(s_edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights for a chain of cells given by its edge array."""
    mid = 0.5 * (s_edges[1:] + s_edges[:-1])
    half = 0.5 * np.diff(s_edges)
    nodes = (mid[:, None] + half[:, None] * _GL5_X[None, :]).ravel()
    weights = (half[:, None] * _GL5_W[None, :]).ravel()
    return nodes, weights
