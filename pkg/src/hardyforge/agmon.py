"""Agmon-metric lengths, Rellich-type inequalities, decay bounds.

A Hardy weight W and diffusion A induce the Riemannian line element
sqrt(W(x)) |dx|_{A^{-1}}.  Curves escaping to the singular ends have
infinite length: along any curve the length dominates half the
oscillation of log(v0/v1), which diverges at both ends for an optimal
pair.  The same pair gives the weighted Rellich inequality

    lam (1 - mu^2)^2 int u^2 W (v0/v1)^mu <= int (Pu)^2 W^{-1} (v0/v1)^mu

for 0 <= mu < 1 and lam up to the best constant 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .construct import HardyWeight, MetricSpec, ScalarField
from .numgrid import gauss5_nodes_weights, trapezoid

__all__ = [
    "AgmonMetric",
    "RellichConfig",
    "LengthResult",
    "RellichResult",
    "agmon_length",
    "rellich_check",
    "decay_bound",
    "make_bump_family",
    "classical_rellich_constant",
    "classical_rellich_reduced",
]


@dataclass
class AgmonMetric:
    weight: HardyWeight
    metric: MetricSpec | None = None

    def line_element(self, x, direction) -> float:
        """sqrt(W(x)) |direction|_{A^{-1}}; 1-homogeneous in direction."""
        m = self.metric or MetricSpec(self.weight.n)
        return math.sqrt(max(self.weight(x), 0.0)) * math.sqrt(m.dual_norm2(x, direction))


@dataclass
class LengthResult:
    length: float
    log_osc_bound: float | None = None   # (1/2)|delta log(v0/v1)| when available

    def __float__(self):
        return self.length


def agmon_length(metric: AgmonMetric, curve: np.ndarray) -> LengthResult:
    """Length of a piecewise-linear curve in the Agmon metric.

    Each segment is integrated with a 5-point Gauss rule along the
    straight chord.  For weights with pair provenance the closed-form
    lower bound (half the oscillation of the log ratio along the curve)
    is returned alongside.
    """
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("curve must be a list of at least two points")
    total = 0.0
    for k in range(pts.shape[0] - 1):
        a, b = pts[k], pts[k + 1]
        d = b - a
        nodes, weights = gauss5_nodes_weights(0.0, 1.0)
        for t, w in zip(nodes, weights):
            total += w * metric.line_element(a + t * d, d)

    bound = None
    prov = metric.weight.provenance
    if prov.get("kind") == "pair":
        v0, v1 = prov["v0"], prov["v1"]
        lr = lambda x: math.log(v0.value_checked(x)) - math.log(v1.value_checked(x))
        bound = 0.5 * abs(lr(pts[-1]) - lr(pts[0]))
    elif prov.get("kind") == "radial-optimal":
        psi, g0 = prov["psi"], prov["g0"]
        r0, r1 = np.linalg.norm(pts[0]), np.linalg.norm(pts[-1])
        lr = lambda r: float(g0.log_at(r) - psi.log_at(r))
        bound = 0.5 * abs(lr(r1) - lr(r0))
    return LengthResult(length=float(total), log_osc_bound=bound)


@dataclass
class RellichConfig:
    """Data for the weighted Rellich inequality of a solution pair."""

    mu: float
    v0: ScalarField
    v1: ScalarField
    weight: HardyWeight
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"mu must lie in [0, 1), got {self.mu}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")


@dataclass
class RellichResult:
    constant: float             # lam (1 - mu^2)^2
    worst_ratio: float          # max over test functions of lhs / rhs
    holds: bool
    b_variant_worst: dict = field(default_factory=dict)   # alpha -> worst ratio


def rellich_check(cfg: RellichConfig, test_functions: Sequence, n: int,
                  V: Callable | None = None, m: int = 4001,
                  tol: float = 1e-9) -> RellichResult:
    """Evaluate the mu-weighted Rellich inequality on radial test functions.

    Each test function is a triple (u, du, d2u) of callables of r with
    compact support inside (r_lo, r_hi) implied by u's vanishing; the
    operator is the radial Schrodinger operator with potential V.  Also
    reports the convex-combination variant
    lam int u^2 W <= alpha int u Pu + (1-alpha) int (Pu)^2 / W
    at alpha in {0, 1/2, 1}.
    """
    lam, mu = cfg.lam, cfg.mu
    constant = lam * (1.0 - mu * mu) ** 2
    worst = 0.0
    holds = True
    b_worst = {0.0: 0.0, 0.5: 0.0, 1.0: 0.0}
    for u, du, d2u, support in test_functions:
        r_lo, r_hi = support
        s = np.linspace(math.log(r_lo), math.log(r_hi), m)
        r = np.exp(s)
        uv = np.asarray(u(r), dtype=float)
        Vv = np.zeros_like(r) if V is None else np.asarray(V(r), dtype=float)
        Pu = -np.asarray(d2u(r), dtype=float) - (n - 1) / r * np.asarray(du(r), dtype=float) + Vv * uv
        Wv = np.array([cfg.weight(np.array([ri] + [0.0] * (cfg.weight.n - 1))) for ri in r])
        if np.any(Wv <= 0):
            raise ValueError("weight vanishes on the support of a test function")
        ratio_mu = np.array([
            (cfg.v0(np.array([ri] + [0.0] * (cfg.v0.n - 1)))
             / cfg.v1(np.array([ri] + [0.0] * (cfg.v1.n - 1)))) ** mu
            for ri in r])
        meas = np.exp(n * s)
        lhs = constant * trapezoid(uv * uv * Wv * ratio_mu * meas, s)
        rhs = trapezoid(Pu * Pu / Wv * ratio_mu * meas, s)
        if rhs > 0:
            worst = max(worst, float(lhs / rhs))
        holds = holds and bool(lhs <= rhs + tol)
        # (b)-variant at mu = 0
        l0 = lam * trapezoid(uv * uv * Wv * meas, s)
        q_term = trapezoid(uv * Pu * meas, s)
        r_term = trapezoid(Pu * Pu / Wv * meas, s)
        for alpha in b_worst:
            rb = alpha * q_term + (1 - alpha) * r_term
            if rb > 0:
                b_worst[alpha] = max(b_worst[alpha], float(l0 / rb))
            holds = holds and bool(l0 <= rb + tol)
    return RellichResult(constant=constant, worst_ratio=worst, holds=holds,
                         b_variant_worst=b_worst)


def make_bump_family(seed: int, count: int, n: int,
                     center_range: tuple[float, float] = (-2.0, 2.0),
                     width_range: tuple[float, float] = (0.5, 2.0)):
    """Seeded cosine-squared radial bumps (u, du, d2u, support) in log r."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(*center_range)
        w = rng.uniform(*width_range)

        def u(r, c=c, w=w):
            z = (np.log(r) - c) / w
            inside = np.abs(z) < 1.0
            return np.where(inside, np.cos(0.5 * np.pi * z) ** 2, 0.0)

        def du(r, c=c, w=w):
            z = (np.log(r) - c) / w
            inside = np.abs(z) < 1.0
            return np.where(
                inside,
                -np.pi / (2 * w) * np.cos(0.5 * np.pi * z) * np.sin(0.5 * np.pi * z) * 2 / r,
                0.0)

        def d2u(r, c=c, w=w):
            # d2/dr2 of B(log r): (B'' - B') / r^2
            z = (np.log(r) - c) / w
            inside = np.abs(z) < 1.0
            B1 = -np.pi / w * np.cos(0.5 * np.pi * z) * np.sin(0.5 * np.pi * z)
            B2 = -np.pi ** 2 / (2 * w * w) * np.cos(np.pi * z)
            return np.where(inside, (B2 - B1) / (r * r), 0.0)

        support = (math.exp(c - w), math.exp(c + w))
        out.append((u, du, d2u, support))
    return out


def classical_rellich_constant(n: int, mu: float, lam: float = 1.0) -> float:
    """lam ((n-2)/2)^4 (1 - mu^2)^2, the constant of the classical pair."""
    return lam * ((n - 2) / 2.0) ** 4 * (1.0 - mu * mu) ** 2


def classical_rellich_reduced(n: int) -> float:
    """n^2 (n-4)^2 / 16, the mu = 2/(n-2) specialization."""
    return n * n * (n - 4) ** 2 / 16.0


def decay_bound(v: Callable, v1: Callable, v2: Callable, beta: float,
                probe_sets: Sequence[np.ndarray]) -> tuple[float, list[float]]:
    """sup of v / (v1^(1-beta) v2^beta) over expanding probe sets.

    Returns the overall sup and the per-set sups; a bounded sequence is
    the numerical form of the comparison bound for solutions of minimal
    growth.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    sups = []
    overall = 0.0
    for pts in probe_sets:
        vals = []
        for x in np.atleast_2d(np.asarray(pts, dtype=float)):
            denom = v1(x) ** (1.0 - beta) * v2(x) ** beta
            vals.append(v(x) / denom)
        sup = float(np.max(vals))
        sups.append(sup)
        overall = max(overall, sup)
    return overall, sups
