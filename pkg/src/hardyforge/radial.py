"""Radially symmetric Schrodinger operators -Delta + V(|x|) in R^n.

Pipeline: solve the regular radial solution psi (psi(0)=1, psi'(0)=0),
form the Green function g0(r) = psi(r) * int_r^inf t^(1-n) psi(t)^-2 dt
when that integral converges (the subcriticality test), and take the
weight W(r) = r^(2-2n) / (4 (psi g0)^2).  Everything is stored in log
space: for a positive potential psi grows like e^r and overflows float64
long before the default grid ends.

The integral convergence tests used here regress partial integrals
against the log of the cutoff; a slope bounded away from zero marks a
divergent (logarithmic-type) integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma

from .construct import HardyWeight
from .numgrid import (
    LogGrid,
    SampledFunction,
    derivative_log_fourth_order,
    differentiate,
    gauss5_cells,
    make_log_grid,
)

__all__ = [
    "RadialOperator",
    "RadialProfile",
    "CriticalityVerdict",
    "OscillationResult",
    "solve_radial_solution",
    "green_from_psi",
    "optimal_weight_radial",
    "criticality_integrals",
    "oscillation_count",
    "sphere_area",
    "flux_normalized_green",
    "ode_residual",
]

DEFAULT_GRID = (1e-6, 1e6, 8001)

# slope of partial integral vs log(cutoff) above which the integral is
# declared divergent (all divergences here are logarithmic or worse)
DIVERGENCE_SLOPE = 0.05


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / _gamma(n / 2.0)


@dataclass
class RadialOperator:
    """Dimension, radial potential and the working grid."""

    n: int
    V: Callable | SampledFunction | None = None
    grid: LogGrid = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got n={self.n}")
        if self.grid is None:
            self.grid = make_log_grid(*DEFAULT_GRID)

    def potential(self, r):
        if self.V is None:
            return np.zeros_like(np.asarray(r, dtype=float))
        if isinstance(self.V, SampledFunction):
            return self.V(r)
        return np.asarray(self.V(np.asarray(r, dtype=float)), dtype=float)


@dataclass
class RadialProfile:
    """Positive radial function held as log samples on a LogGrid.

    log_slope holds d(log f)/ds on the grid (s = log r); when it comes
    from the ODE solver or from an algebraic identity it is exact to the
    solver tolerance, which the weight formulas rely on.
    """

    grid: LogGrid
    log_values: np.ndarray
    log_slope: np.ndarray | None = None
    note: str = ""
    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.log_values = np.asarray(self.log_values, dtype=float)
        if not np.all(np.isfinite(self.log_values)):
            raise ValueError(f"profile {self.note!r} has non-finite log samples")

    def _interp(self) -> CubicSpline:
        if self._spline is None:
            self._spline = CubicSpline(self.grid.log_nodes, self.log_values)
        return self._spline

    def log_at(self, r):
        s = np.log(np.asarray(r, dtype=float))
        lo, hi = self.grid.log_nodes[0], self.grid.log_nodes[-1]
        if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
            raise ValueError("evaluation outside the profile grid")
        return self._interp()(np.clip(s, lo, hi))

    def __call__(self, r):
        return np.exp(self.log_at(r))

    @property
    def values(self) -> np.ndarray:
        """Raw samples; may overflow to inf for fast-growing profiles."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def samples(self) -> SampledFunction:
        v = self.values
        if not np.all(np.isfinite(v)):
            raise OverflowError(
                f"profile {self.note!r} exceeds float64 range; use log_values")
        return SampledFunction(self.grid, v, positivity=True)

    @property
    def log_derivative(self) -> SampledFunction:
        """d(log f)/dr from centered differences of the log samples."""
        return differentiate(SampledFunction(self.grid, self.log_values))


@dataclass
class CriticalityVerdict:
    """Outcome of the integral criticality tests."""

    murata_integral: float = math.nan
    subcritical: bool = False
    I_zero: float = math.nan
    I_infinity: float = math.nan
    divergent_at_zero: bool | None = None
    divergent_at_infinity: bool | None = None


@dataclass
class OscillationResult:
    count: int
    gu_quotient: float
    lam: float


def solve_radial_solution(op: RadialOperator) -> RadialProfile:
    """Global positive radial solution of -psi'' - ((n-1)/r) psi' + V psi = 0.

    Integrates the Riccati equation for chi = d(log psi)/ds,

        chi' = r^2 V(r) - (n-2) chi - chi^2,      s = log r,

    with a two-term series start at r_min standing in for the regular
    point r = 0.  A stiff adaptive integrator is used: chi grows like
    r sqrt(V) for positive potentials and a fixed-step explicit scheme
    is unstable once chi * step exceeds order one.

    Raises if the solution would cross zero inside the grid, which is
    the signature of an operator that is not nonnegative.
    """
    g = op.grid
    n = op.n
    if not np.all(np.isfinite(op.potential(g.nodes))):
        raise ValueError("potential not finite on the grid")
    r0 = g.t_min
    V0 = float(op.potential(np.array([r0]))[0])
    psi0 = 1.0 + V0 * r0 * r0 / (2 * n)
    if psi0 <= 0:
        raise ValueError("operator not nonnegative on grid (series start <= 0)")
    phi0 = math.log(psi0)
    chi0 = (V0 * r0 * r0 / n) / psi0

    def rhs(s, y):
        r = math.exp(s)
        v = float(op.potential(np.array([r]))[0])
        chi = y[1]
        return [chi, r * r * v - (n - 2) * chi - chi * chi]

    def blowdown(s, y):
        # chi -> -inf in finite s when psi crosses zero
        return y[1] + 1e8

    blowdown.terminal = True
    blowdown.direction = -1

    sol = solve_ivp(
        rhs, (g.log_nodes[0], g.log_nodes[-1]), [phi0, chi0],
        method="LSODA", t_eval=g.log_nodes, rtol=1e-11, atol=1e-13,
        events=blowdown, dense_output=False, max_step=1.0,
    )
    if sol.status == 1 or sol.t.size < g.m:
        raise ValueError("operator not nonnegative on grid (radial solution hits 0)")
    if not sol.success:
        raise RuntimeError(f"radial ODE solve failed: {sol.message}")
    return RadialProfile(grid=g, log_values=sol.y[0], log_slope=sol.y[1],
                         note=f"psi(n={n})")


def ode_residual(psi: RadialProfile, op: RadialOperator) -> float:
    """Max relative residual of the radial equation at interior nodes.

    Checked in log form: phi'' + (n-2) phi' + phi'^2 = r^2 V with
    4th-order stencils, normalized by the size of the participating
    terms.
    """
    s = psi.grid.log_nodes
    phi = psi.log_values
    d1 = derivative_log_fourth_order(s, phi)
    from .numgrid import second_derivative_log_fourth_order
    d2 = second_derivative_log_fourth_order(s, phi)
    rv = psi.grid.nodes ** 2 * op.potential(psi.grid.nodes)
    res = d2 + (op.n - 2) * d1 + d1 * d1 - rv
    scale = np.abs(d2) + np.abs(d1) + d1 * d1 + np.abs(rv) + 1.0
    inner = slice(3, -3)
    return float(np.max(np.abs(res[inner]) / scale[inner]))


def _log_tail_integral(s: np.ndarray, log_integrand: np.ndarray) -> tuple[float, float]:
    """log of int beyond s[-1], fitting an exponent over the last decade.

    Returns (log_tail, slope); log_tail = +inf marks a non-integrable fit.
    """
    mask = s >= s[-1] - math.log(10.0)
    if mask.sum() < 2:
        mask = np.zeros_like(s, dtype=bool)
        mask[-2:] = True
    slope = np.polyfit(s[mask], log_integrand[mask], 1)[0]
    # integrand ~ C e^{slope*s} in s; integrable iff slope < 0
    if slope < -1e-6:
        return log_integrand[-1] - math.log(-slope), float(slope)
    return math.inf, float(slope)


def _cell_log_integrals(s: np.ndarray, log_f: Callable) -> np.ndarray:
    """log of per-cell integrals of e^{log_f(s)} ds.

    Cells use a 5-point Gauss rule (exact to roundoff for power-law
    integrands).  Where the log-integrand moves by more than 2 across a
    cell the grid does not resolve the decay and Gauss values are
    meaningless; those cells fall back to the two-point exponential fit
    C e^{gamma s}, which matches single-scale exponential decay to the
    within-cell variation of the rate.
    """
    nodes, weights = gauss5_cells(s)
    lf = log_f(nodes).reshape(-1, 5)
    w = weights.reshape(-1, 5)
    m = lf.max(axis=1)
    out = m + np.log(np.sum(w * np.exp(lf - m[:, None]), axis=1))

    lf_lo = log_f(s[:-1])
    lf_hi = log_f(s[1:])
    dlf = lf_hi - lf_lo
    h = np.diff(s)
    rough = np.abs(dlf) > 2.0
    if np.any(rough):
        top = np.maximum(lf_lo, lf_hi)
        # int C e^{gamma s} ds over the cell = (F_hi - F_lo) / gamma
        expfit = top + np.log1p(-np.exp(-np.abs(dlf))) + np.log(h / np.abs(dlf))
        out[rough] = expfit[rough]
    return out


def _reverse_logcumsum(log_cells: np.ndarray, log_seed: float) -> np.ndarray:
    """log of (seed + suffix sums of cells), computed stably."""
    m = len(log_cells) + 1
    out = np.empty(m)
    acc = log_seed
    out[-1] = acc
    for k in range(m - 2, -1, -1):
        a, b = log_cells[k], acc
        hi = max(a, b)
        if hi == -math.inf:
            acc = -math.inf
        else:
            acc = hi + math.log(math.exp(a - hi) + math.exp(b - hi))
        out[k] = acc
    return out


def green_from_psi(psi: RadialProfile, op: RadialOperator,
                   ) -> tuple[RadialProfile | None, CriticalityVerdict]:
    """Green function g0 = psi * int_r^inf t^(1-n) psi^-2 dt, plus verdict.

    The integrand is evaluated between nodes through a cubic spline of
    log psi and integrated cell by cell with a 5-point Gauss rule, which
    is exact to roundoff for power-law integrands; the part beyond the
    grid uses the fitted-exponent tail estimate.  A non-integrable tail
    means the operator is not subcritical and no Green function exists.
    """
    g = psi.grid
    n = op.n
    s = g.log_nodes
    spline = CubicSpline(s, psi.log_values)

    def log_integrand(sv):
        # t^{1-n} psi^{-2} dt = e^{(2-n)s - 2 log psi} ds
        return (2.0 - n) * sv - 2.0 * spline(sv)

    log_J = log_integrand(s)
    log_tail, slope = _log_tail_integral(s, log_J)
    verdict = CriticalityVerdict()
    if math.isinf(log_tail):
        verdict.subcritical = False
        verdict.murata_integral = math.inf
        return None, verdict

    log_cells = _cell_log_integrals(s, log_integrand)
    log_T = _reverse_logcumsum(log_cells, log_tail)

    # Murata integral from r = 1 (or the closest covered radius)
    r_ref = min(max(1.0, g.t_min), g.t_max)
    tspl = CubicSpline(s, log_T)
    verdict.murata_integral = float(math.exp(tspl(math.log(r_ref))))
    verdict.subcritical = True

    # exact log-slope of T: dT/ds = -J(s), so d(log T)/ds = -e^{log_J - log_T}
    slope_T = -np.exp(log_J - log_T)
    g0 = RadialProfile(
        grid=g,
        log_values=psi.log_values + log_T,
        log_slope=(psi.log_slope + slope_T) if psi.log_slope is not None else None,
        note=f"g0(n={n})",
    )
    g0._ratio_log = log_T          # log(g0/psi), used by the weight and map
    g0._ratio_slope = slope_T      # d log(g0/psi) / ds, exact
    return g0, verdict


def ratio_log(psi: RadialProfile, g0: RadialProfile) -> np.ndarray:
    """log(g0/psi) on the grid."""
    lt = getattr(g0, "_ratio_log", None)
    if lt is not None:
        return lt
    return g0.log_values - psi.log_values


def ratio_slope(psi: RadialProfile, g0: RadialProfile) -> np.ndarray:
    """d log(g0/psi) / ds on the grid (algebraic where available)."""
    st = getattr(g0, "_ratio_slope", None)
    if st is not None:
        return st
    return derivative_log_fourth_order(psi.grid.log_nodes, ratio_log(psi, g0))


def optimal_weight_radial(psi: RadialProfile, g0: RadialProfile,
                          op: RadialOperator, gate: float = 1e-6) -> HardyWeight:
    """W(r) = (1/4) |[log(g0/psi)]'|^2 = r^(2-2n) / (4 (psi g0)^2).

    Both expressions are computed; the first differentiates the sampled
    log ratio (4th-order stencils), the second is algebraic in the
    quadrature output.  Disagreement beyond the gate signals a failed
    quadrature and raises.  The returned weight evaluates the algebraic
    form.
    """
    g = psi.grid
    n = op.n
    s = g.log_nodes

    log_psig0 = psi.log_values + g0.log_values
    # algebraic form, in logs: log W = (2-2n)s - log4 - 2 log(psi g0)
    log_W = (2.0 - 2.0 * n) * s - math.log(4.0) - 2.0 * log_psig0

    rl = ratio_log(psi, g0)
    d_ratio = derivative_log_fourth_order(s, rl)
    with np.errstate(divide="ignore"):
        log_W_diff = 2.0 * np.log(np.abs(d_ratio)) - 2.0 * s - math.log(4.0)

    # the differentiated form is only meaningful where the grid resolves
    # the log ratio; exclude nodes whose 5-wide stencil sees jumps > 1/2
    bad_cell = np.abs(np.diff(rl)) > 0.5
    near_bad = np.convolve(bad_cell.astype(int), np.ones(4, dtype=int), mode="full")
    resolved = near_bad[1:g.m + 1] == 0    # cells k-2..k+1 all fine
    resolved[:3] = False
    resolved[-3:] = False
    if resolved.sum() < 8:
        raise RuntimeError("grid resolves too little of the log ratio to gate the weight")
    disagree = float(np.max(np.abs(np.expm1(log_W_diff[resolved] - log_W[resolved]))))
    if disagree > gate:
        raise RuntimeError(
            f"weight expressions disagree by {disagree:.3g} (> {gate:g}): quadrature failure")
    r_resolved = g.nodes[resolved]

    spline = CubicSpline(s, log_W)
    lo, hi = s[0], s[-1]

    def radial(r):
        sv = np.log(np.asarray(r, dtype=float))
        if np.any(sv < lo - 1e-12) or np.any(sv > hi + 1e-12):
            raise ValueError("weight evaluated outside the grid")
        return np.exp(spline(np.clip(sv, lo, hi)))

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return float(radial(np.linalg.norm(x)))

    return HardyWeight(
        n=n, evaluate=evaluate, radial=radial,
        provenance={
            "kind": "radial-optimal",
            "psi": psi, "g0": g0, "op": op,
            "omega": sphere_area(n),
            "flux_factor": 1.0 / sphere_area(n),
            "consistency_gate": disagree,
            "resolved_range": (float(r_resolved[0]), float(r_resolved[-1])),
            "log_W": log_W,
        },
    )


def flux_normalized_green(psi: RadialProfile, g0: RadialProfile, n: int) -> RadialProfile:
    """Green function rescaled so the pair carries unit flux.

    The quadrature normalization has Wronskian r^(n-1)(psi g0' - g0 psi')
    = -1; dividing by the unit-sphere area makes the flux through small
    spheres equal psi(0) = 1, which the coarea identities assume.  For
    V = 0 this equals r^(2-n) / ((n-2) * sphere_area(n)).
    """
    G = RadialProfile(grid=g0.grid,
                      log_values=g0.log_values - math.log(sphere_area(n)),
                      log_slope=g0.log_slope,
                      note=g0.note + "/omega")
    lt = getattr(g0, "_ratio_log", None)
    if lt is not None:
        G._ratio_log = lt - math.log(sphere_area(n))
        G._ratio_slope = g0._ratio_slope
    return G


def criticality_integrals(psi: RadialProfile, g0: RadialProfile,
                          op: RadialOperator) -> CriticalityVerdict:
    """Partial integrals of r^(1-n) / (psi g0) toward 0 and infinity.

    This integrand equals -[log(g0/psi)]', so the two integrals diverge
    logarithmically exactly when the weighted operator is critical.  The
    verdict records the fitted slopes of the partial integrals against
    the log of the cutoff over the outermost decade of each end.
    """
    g = psi.grid
    n = op.n
    s = g.log_nodes
    log_pg = CubicSpline(s, psi.log_values + g0.log_values)

    def log_integrand(sv):
        # r^{1-n}/(psi g0) dr = e^{(2-n)s - log(psi g0)} ds
        return (2.0 - n) * sv - log_pg(sv)

    cells = np.exp(_cell_log_integrals(s, log_integrand))
    s_mid = 0.0 if (s[0] < 0.0 < s[-1]) else 0.5 * (s[0] + s[-1])
    k_mid = int(np.searchsorted(s, s_mid))

    partial_up = np.concatenate([[0.0], np.cumsum(cells[k_mid:])])
    su = s[k_mid:]
    partial_down = np.concatenate([[0.0], np.cumsum(cells[:k_mid][::-1])])
    sd = s[:k_mid + 1][::-1]

    def decade_slope(x_log_cutoff, y_partial):
        mask = x_log_cutoff >= x_log_cutoff[-1] - math.log(10.0)
        if mask.sum() < 3:
            mask[:] = True
        return float(np.polyfit(x_log_cutoff[mask], y_partial[mask], 1)[0])

    out = CriticalityVerdict()
    out.I_infinity = decade_slope(su, partial_up)
    out.I_zero = decade_slope(-sd, partial_down)
    out.divergent_at_infinity = out.I_infinity > DIVERGENCE_SLOPE
    out.divergent_at_zero = out.I_zero > DIVERGENCE_SLOPE
    out.subcritical = True
    return out


def partial_integral_slope(grid: LogGrid, log_integrand_nodes: np.ndarray,
                           toward: str) -> float:
    """Slope of the partial integral of a sampled positive integrand.

    Used for Murata-type convergence probes on generalized solution
    pairs; integrand given by its log at the nodes, direction 'zero' or
    'infinity'.
    """
    s = grid.log_nodes
    spline = CubicSpline(s, log_integrand_nodes)
    cells = np.exp(_cell_log_integrals(s, spline))
    if toward == "infinity":
        partial = np.concatenate([[0.0], np.cumsum(cells)])
        x = s
    elif toward == "zero":
        partial = np.concatenate([[0.0], np.cumsum(cells[::-1])])
        x = -s[::-1]
    else:
        raise ValueError(f"unknown direction {toward!r}")
    mask = x >= x[-1] - math.log(10.0)
    return float(np.polyfit(x[mask], partial[mask], 1)[0])


def oscillation_count(op: RadialOperator, W: HardyWeight, lam: float,
                      r_lo: float, r_hi: float) -> OscillationResult:
    """Sign changes of the shooting solution of the lam-weighted equation.

    Integrates -u'' - ((n-1)/r) u' + (V - lam W) u = 0 from r_lo with
    u = 0, u' = 1 (Sturm theory makes the count independent of this
    choice up to +-1) and counts sign changes at the sample nodes.  Also
    reports the oscillation quotient -lam W / (4 W_opt) over the last
    decade, whose limsup below -1/4 is the classical oscillation test.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    g = op.grid
    if not g.covers(r_lo, r_hi):
        raise ValueError(f"window [{r_lo}, {r_hi}] outside grid")
    n = op.n
    s_lo, s_hi = math.log(r_lo), math.log(r_hi)
    h = g.step

    Wr = W.radial if W.radial is not None else (lambda r: np.array([W(np.array([float(r), *([0.0] * (n - 1))]))]))

    def coeff(sv):
        r = math.exp(sv)
        w = float(np.asarray(Wr(np.array([r])))[0])
        v = float(op.potential(np.array([r]))[0])
        return math.exp(2 * sv) * (lam * w - v)

    def step_rk4(sv, y, dy, hh):
        def f(sv_, y_, dy_):
            return dy_, -(n - 2) * dy_ - coeff(sv_) * y_

        k1y, k1d = f(sv, y, dy)
        k2y, k2d = f(sv + hh / 2, y + hh / 2 * k1y, dy + hh / 2 * k1d)
        k3y, k3d = f(sv + hh / 2, y + hh / 2 * k2y, dy + hh / 2 * k2d)
        k4y, k4d = f(sv + hh, y + hh * k3y, dy + hh * k3d)
        return (y + hh / 6 * (k1y + 2 * k2y + 2 * k3y + k4y),
                dy + hh / 6 * (k1d + 2 * k2d + 2 * k3d + k4d))

    n_cells = max(2, int(math.ceil((s_hi - s_lo) / h)))
    sv = s_lo
    y, dy = 0.0, 1.0
    count = 0
    prev_sign = 0
    for k in range(n_cells):
        s_next = s_lo + (k + 1) * (s_hi - s_lo) / n_cells
        hh = s_next - sv
        freq = math.sqrt(max(coeff(sv), 0.0)) + abs(n - 2)
        sub = max(1, int(math.ceil(freq * hh / 0.5)))
        for _ in range(sub):
            y, dy = step_rk4(sv, y, dy, hh / sub)
            sv += hh / sub
        scale = max(abs(y), abs(dy))
        if scale > 1e100:  # renormalize, zeros are unaffected
            y, dy = y / scale, dy / scale
        sign = 0 if y == 0.0 else (1 if y > 0 else -1)
        if sign != 0:
            if prev_sign != 0 and sign != prev_sign:
                count += 1
            prev_sign = sign

    # oscillation quotient over the last decade of the window
    rs = np.geomspace(r_hi / 10.0, r_hi, 64)
    rs = rs[(rs >= g.t_min) & (rs <= g.t_max)]
    try:
        _, g0, _, wopt = optimal_pair(op)
        gu = float(np.max(-lam * np.asarray(Wr(rs)) / (4.0 * wopt.radial(rs))))
    except ValueError:
        gu = math.nan
    return OscillationResult(count=count, gu_quotient=gu, lam=lam)


def optimal_pair(op: RadialOperator):
    """(psi, g0, verdict, W) for op, cached on the operator instance."""
    cached = getattr(op, "_pair_cache", None)
    if cached is not None:
        return cached
    psi = solve_radial_solution(op)
    g0, verdict = green_from_psi(psi, op)
    if g0 is None:
        raise ValueError("operator is not subcritical: no Green function")
    W = optimal_weight_radial(psi, g0, op)
    op._pair_cache = (psi, g0, verdict, W)
    return op._pair_cache
