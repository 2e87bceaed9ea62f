"""Variational verification on radial reductions.

The weighted eigenvalue problem for -div(grad) + V against the measure
W r^(n-1) dr is discretized in s = log r, where the quadratic form is

    q(y) = int ( e^((n-2)s) y'^2 + V(e^s) e^(ns) y^2 ) ds,

with mass int W(e^s) e^(ns) y^2 ds.  Linear (hat) elements give a
symmetric tridiagonal stiffness and a lumped diagonal mass, second-order
accurate; Dirichlet conditions at the annulus ends approach the
principal eigenvalue over test functions supported in the annulus from
above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .construct import HardyWeight
from .numgrid import trapezoid
from .radial import RadialProfile, flux_normalized_green, ratio_log, ratio_slope, sphere_area

__all__ = [
    "AnnulusProblem",
    "SpectrumEstimate",
    "assemble_annulus",
    "principal_eigenvalue",
    "lambda_infinity_sweep",
    "rayleigh_quotient",
    "null_sequence_probe",
    "null_criticality_probe",
    "average_domination_check",
    "apply_form",
    "form_identity_defect",
]


@dataclass
class AnnulusProblem:
    """Assembled Dirichlet eigenproblem on an annulus (r_lo, r_hi)."""

    n: int
    V: Callable | None
    W: Callable
    r_lo: float
    r_hi: float
    m: int                      # interior node count
    s_nodes: np.ndarray         # all nodes incl. Dirichlet ends, m+2 of them
    diag: np.ndarray            # stiffness diagonal (interior)
    off: np.ndarray             # stiffness off-diagonal, len m-1
    mass: np.ndarray            # lumped mass diagonal (interior)
    edge_coeff: np.ndarray      # per-cell int a(s) ds / h^2, len m+1

    @property
    def h(self) -> float:
        return self.s_nodes[1] - self.s_nodes[0]


@dataclass
class SpectrumEstimate:
    lambda0: float
    lambda_infinity: float = math.nan
    residual: float = math.nan
    iterations: int = 0
    degenerate: bool = False
    values: list = field(default_factory=list)


def _edge_a_integrals(s_edges_lo: np.ndarray, s_edges_hi: np.ndarray, n: int) -> np.ndarray:
    """Exact int_cell e^{(n-2)s} ds per cell."""
    p = n - 2
    if p == 0:
        return s_edges_hi - s_edges_lo
    return (np.exp(p * s_edges_hi) - np.exp(p * s_edges_lo)) / p


def assemble_annulus(n: int, V: Callable | None, W: Callable,
                     r_lo: float, r_hi: float, m: int) -> AnnulusProblem:
    """Hat-element stiffness/mass pair for the annulus problem."""
    if not (0 < r_lo < r_hi):
        raise ValueError(f"bad annulus ({r_lo}, {r_hi})")
    if m < 3:
        raise ValueError("need at least 3 interior nodes")
    s = np.linspace(math.log(r_lo), math.log(r_hi), m + 2)
    h = s[1] - s[0]
    r = np.exp(s)
    a_cell = _edge_a_integrals(s[:-1], s[1:], n) / (h * h)   # len m+1
    Vv = np.zeros(m) if V is None else np.asarray(V(r[1:-1]), dtype=float)
    Wv = np.asarray(W(r[1:-1]), dtype=float)
    if np.any(Wv < 0):
        raise ValueError("weight must be nonnegative on the annulus")
    c = Vv * np.exp(n * s[1:-1]) * h
    mass = Wv * np.exp(n * s[1:-1]) * h
    diag = a_cell[:-1] + a_cell[1:] + c
    off = -a_cell[1:-1]
    return AnnulusProblem(n=n, V=V, W=W, r_lo=r_lo, r_hi=r_hi, m=m,
                          s_nodes=s, diag=diag, off=off, mass=mass,
                          edge_coeff=a_cell)


def apply_form(prob: AnnulusProblem, x: np.ndarray, y: np.ndarray) -> float:
    """x^T K y for interior nodal vectors."""
    Kx = prob.diag * y
    Kx[:-1] += prob.off * y[1:]
    Kx[1:] += prob.off * y[:-1]
    return float(np.dot(x, Kx))


def _tridiag_solve(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    ab = np.zeros((3, len(diag)))
    ab[0, 1:] = off
    ab[1, :] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def principal_eigenvalue(prob: AnnulusProblem, tol: float = 1e-10,
                         max_iter: int = 60) -> SpectrumEstimate:
    """Smallest generalized eigenvalue of (K, M).

    Works on the symmetrized tridiagonal T = M^(-1/2) K M^(-1/2); the
    smallest eigenvalue comes from bisection (which cannot lock onto an
    excited state, unlike a free-running Rayleigh iteration when the
    ground state is concentrated far from the starting vector), and the
    eigenvector from shifted inverse iteration at that value.
    """
    if np.any(prob.mass <= 0):
        raise ValueError("weight vanishes on the annulus interior")
    d = 1.0 / np.sqrt(prob.mass)
    Td = prob.diag * d * d
    To = prob.off * d[:-1] * d[1:]

    from scipy.linalg import eigh_tridiagonal
    lam = float(eigh_tridiagonal(Td, To, select="i", select_range=(0, 0),
                                 eigvals_only=True)[0])

    m = prob.m
    x = np.sin(np.pi * (np.arange(1, m + 1)) / (m + 1))
    x /= np.linalg.norm(x)
    # roundoff floor of the T-space residual: applying T loses eps * scale
    t_scale = float(np.max(np.abs(Td)) + 2 * np.max(np.abs(To)))
    floor = 8.0 * np.finfo(float).eps * t_scale
    sigma = lam * (1.0 - 1e-9) - 1e-12 * t_scale
    it = 0
    res = math.inf
    for it in range(1, max_iter + 1):
        try:
            y = _tridiag_solve(Td - sigma, To, x)
        except np.linalg.LinAlgError:
            sigma -= 1e-11 * t_scale
            continue
        x = y / np.linalg.norm(y)
        rq = float(x @ _apply_tridiag(Td, To, x))
        res = np.linalg.norm(_apply_tridiag(Td, To, x) - rq * x)
        if res <= max(tol * max(1.0, abs(rq)), floor):
            lam = rq
            break
    else:
        raise RuntimeError(f"inverse iteration failed to converge, residual {res:.3g}")

    # second eigenvalue probe for the degeneracy flag
    z = np.cos(np.pi * np.arange(1, m + 1) / (m + 1))
    z -= (z @ x) * x
    z /= np.linalg.norm(z)
    for _ in range(15):
        z = _tridiag_solve(Td - 0.999 * lam, To, z)
        z -= (z @ x) * x
        z /= np.linalg.norm(z)
    lam2 = float(z @ _apply_tridiag(Td, To, z))
    degenerate = abs(lam2 - lam) <= 1e-8 * max(1.0, abs(lam))

    v = d * x
    Kv = prob.diag * v
    Kv[:-1] += prob.off * v[1:]
    Kv[1:] += prob.off * v[:-1]
    residual = float(np.linalg.norm(Kv - lam * prob.mass * v) / np.linalg.norm(prob.mass * v))
    return SpectrumEstimate(lambda0=min(lam, lam2) if degenerate else lam,
                            residual=residual, iterations=it, degenerate=degenerate)


def _apply_tridiag(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = diag * x
    y[:-1] += off * x[1:]
    y[1:] += off * x[:-1]
    return y


def lambda_infinity_sweep(n: int, V: Callable | None, W: Callable,
                          R_list: Sequence[float], window: float,
                          m: int = 2000) -> SpectrumEstimate:
    """Principal eigenvalues on exterior annuli (R, R*window).

    The reported lambda_infinity is the value at the largest R; the
    residual field carries the relative drift across the sweep, which is
    near zero exactly when the exterior best constant has plateaued.
    """
    R_list = list(R_list)
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be increasing")
    vals = []
    for R in R_list:
        est = principal_eigenvalue(assemble_annulus(n, V, W, R, R * window, m))
        vals.append(est.lambda0)
    drift = (max(vals) - min(vals)) / abs(vals[-1])
    return SpectrumEstimate(lambda0=min(vals), lambda_infinity=vals[-1],
                            residual=drift, iterations=len(vals), values=vals)


def rayleigh_quotient(phi: Callable, dphi: Callable, n: int,
                      V: Callable | None, W: Callable,
                      support: tuple[float, float], m: int = 4001) -> float:
    """q(phi) / int W phi^2 over a compactly supported radial function."""
    r_lo, r_hi = support
    s = np.linspace(math.log(r_lo), math.log(r_hi), m)
    r = np.exp(s)
    p = np.asarray(phi(r), dtype=float)
    dp = np.asarray(dphi(r), dtype=float)
    Vv = np.zeros_like(r) if V is None else np.asarray(V(r), dtype=float)
    num = trapezoid((dp * dp + Vv * p * p) * np.exp(n * s), s)
    den = trapezoid(np.asarray(W(r), dtype=float) * p * p * np.exp(n * s), s)
    if den <= 0:
        raise ValueError("weighted mass of the test function vanishes")
    return float(num / den)


# ---------------------------------------------------------------------------
# probes built on an optimal radial pair
# ---------------------------------------------------------------------------

def _pair_from_weight(W: HardyWeight):
    prov = W.provenance
    if prov.get("kind") != "radial-optimal":
        raise ValueError("probe requires a weight with radial optimal-pair provenance")
    return prov["psi"], prov["g0"], prov["op"]


def _ground_state_data(psi: RadialProfile, g0: RadialProfile, n: int):
    """Nodal data for the candidate sqrt(u G) in the flux normalization."""
    G = flux_normalized_green(psi, g0, n)
    s = psi.grid.log_nodes
    ell = ratio_log(psi, g0) - math.log(sphere_area(n))
    ell_slope = ratio_slope(psi, g0)
    log_phi0 = 0.5 * (psi.log_values + G.log_values)
    if psi.log_slope is not None and g0.log_slope is not None:
        phi0_slope = 0.5 * (psi.log_slope + g0.log_slope)
    else:
        from .numgrid import derivative_log_fourth_order
        phi0_slope = derivative_log_fourth_order(s, log_phi0)
    log_W = ((2.0 - 2.0 * n) * s - math.log(4.0)
             - 2.0 * (psi.log_values + g0.log_values))
    return s, ell, ell_slope, log_phi0, phi0_slope, log_W


def null_sequence_probe(n: int, V: Callable | None, W: HardyWeight,
                        k_list: Sequence[float]) -> list[tuple[float, float]]:
    """Rayleigh quotients and window masses of the ground-state candidate.

    For each half-width k the quotient uses sqrt(uG) cut off by a tent
    of half-width k in ell = log(G/u) (closed form 1 + 12/k^2 in the
    reduced variable), while the mass is the plain shell mass
    int_{|ell|<=k} uG W dnu = k/2.  Quotients creeping down to 1 while
    masses grow without bound is the non-attainment signature.
    """
    psi, g0, op = _pair_from_weight(W)
    s, ell, ell_slope, log_phi0, phi0_slope, log_W = _ground_state_data(psi, g0, n)
    out = []
    for k in k_list:
        if k <= 0:
            raise ValueError("window half-widths must be positive")
        inside = np.abs(ell) < k
        if inside.sum() < 16 or inside[0] or inside[-1]:
            raise ValueError(f"window k={k} escapes the grid")
        ref = float(np.max(log_phi0[inside]))  # scale guard against overflow
        chi = np.zeros_like(ell)
        dchi = np.zeros_like(ell)
        chi[inside] = 1.0 - np.abs(ell[inside]) / k
        dchi[inside] = -np.sign(ell[inside]) / k
        amp = np.zeros_like(ell)
        amp[inside] = np.exp(log_phi0[inside] - ref)
        phi_v = amp * chi
        dphi_v = amp * (phi0_slope * chi + dchi * ell_slope)
        Vv = np.zeros_like(s) if V is None else np.asarray(V(np.exp(s)), dtype=float)
        num = trapezoid((dphi_v ** 2 * np.exp(-2 * s) + Vv * phi_v ** 2) * np.exp(n * s), s)
        den = trapezoid(np.exp(log_W) * phi_v ** 2 * np.exp(n * s), s)
        quotient = float(num / den)
        from .spectral import coarea_shell_mass
        mass = coarea_shell_mass(psi, g0, n, math.exp(-k), math.exp(k))
        out.append((quotient, float(mass)))
    return out


def null_criticality_probe(psi: RadialProfile, g0: RadialProfile, n: int,
                           a_list: Sequence[float]) -> float:
    """Slope of the partial masses int_{a <= G/u <= 1} uG W dnu vs log(1/a)."""
    from .spectral import coarea_shell_mass
    masses = []
    logs = []
    for a in a_list:
        if not (0 < a < 1):
            raise ValueError("levels must sit in (0, 1)")
        masses.append(coarea_shell_mass(psi, g0, n, a, 1.0))
        logs.append(math.log(1.0 / a))
    slope = float(np.polyfit(logs, masses, 1)[0])
    return slope


def average_domination_check(V: Callable, psi: RadialProfile, g0: RadialProfile,
                             n: int, a: float, b: float,
                             tol: float = 1e-9) -> tuple[float, float, bool]:
    """Average comparison of a Hardy potential V against the optimal weight.

    lhs integrates uGV over the log-level shell {a <= log(G/u) <= b};
    the bound widens the window by one unit on each side, where the
    shell mass of the optimal weight is (1/4)((b+1) - (a-1)), giving
    rhs = (5/4)(b - a + 2).  Requires 1 < a < b.
    """
    if not a > 1:
        raise ValueError("the comparison needs a > 1")
    if not b > a:
        raise ValueError("need b > a")
    from .spectral import shell_integral_uG
    lhs = shell_integral_uG(psi, g0, n, math.exp(a), math.exp(b), V)
    rhs = 1.25 * ((b + 1.0) - (a - 1.0))
    return float(lhs), float(rhs), bool(lhs <= rhs + tol)


def form_identity_defect(prob: AnnulusProblem, u: np.ndarray, v: np.ndarray,
                         ) -> tuple[float, float]:
    """Integration-by-parts identity of the assembled form, with its
    exact discrete correction.

    For the potential-free form q the continuum identity
    q(u, u v^2) = q(uv, uv) + (1/2) q(u^2, v^2) - q(v, u^2 v) holds
    pointwise; on the edge-sum discretization the two sides differ by
    exactly (1/2) sum_e c_e (du)^2 (dv)^2, a quartic edge term the
    continuum limit drops.  Returns (defect, correction); their
    agreement to roundoff certifies the stiffness assembly.
    """
    if prob.V is not None:
        raise ValueError("identity check requires the potential-free form")
    q = lambda x, y: apply_form(prob, x, y)
    defect = (q(u, u * v * v) - q(u * v, u * v)
              - 0.5 * q(u * u, v * v) + q(v, u * u * v))
    du = np.diff(u)
    dv = np.diff(v)
    # boundary edges see the zero extension of the Dirichlet vectors
    correction = 0.5 * float(
        np.sum(prob.edge_coeff[1:-1] * du * du * dv * dv)
        + prob.edge_coeff[0] * u[0] ** 2 * v[0] ** 2
        + prob.edge_coeff[-1] * u[-1] ** 2 * v[-1] ** 2)
    return float(defect), correction
