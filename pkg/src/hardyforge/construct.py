"""Supersolution construction of Hardy weights.

Two positive (super)solutions v0, v1 of Pu = 0 generate the weight

    W = (1/4) |grad log(v0/v1)|_A^2,

and v1^a v0^(1-a) solves (P - 4a(1-a)W)u = 0.  For a target spectral
parameter lam the exponent a is real (lam < 1), degenerate (lam = 1,
where a log-companion solution appears), or complex (lam > 1, giving an
oscillatory amplitude/phase pair).  N solutions with convex weights
generate the pairwise-sum weight in the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ScalarField",
    "MetricSpec",
    "OperatorSpec",
    "HardyWeight",
    "SolutionBasis",
    "hardy_weight_pair",
    "hardy_weight_multi",
    "associated_solutions",
    "fd_gradient",
    "fd_laplacian",
]


def fd_gradient(fn: Callable, x: np.ndarray, h_rel: float = 1e-5) -> np.ndarray:
    """Central-difference gradient with step h = h_rel * (1 + |x|)."""
    x = np.asarray(x, dtype=float)
    h = h_rel * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def fd_laplacian(fn: Callable, x: np.ndarray, h: float | None = None) -> float:
    """Laplacian by 4th-order 5-point second differences per axis.

    The default step 1e-2 * (1 + |x|) balances truncation against
    roundoff for the power-like fields this package works with; pass h
    explicitly near boundaries where the field varies on a finer scale.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-2 * (1.0 + np.linalg.norm(x))
    total = 0.0
    f0 = fn(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp1, fm1 = fn(x + e), fn(x - e)
        fp2, fm2 = fn(x + 2 * e), fn(x - 2 * e)
        total += (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    return float(total)


@dataclass
class ScalarField:
    """A positive function on a Euclidean domain with gradient access.

    A closed-form gradient may be supplied; otherwise central finite
    differences with step 1e-5 * (1 + |x|) are used.
    """

    n: int
    fn: Callable
    grad: Callable | None = None
    name: str = ""

    def __call__(self, x) -> float:
        return float(self.fn(np.asarray(x, dtype=float)))

    def value_checked(self, x) -> float:
        v = self(x)
        if not v > 0:
            raise ValueError(f"field {self.name or '<anonymous>'} not positive at {np.asarray(x)}: value {v}")
        return v

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        return fd_gradient(self.fn, x)

    def grad_log(self, x) -> np.ndarray:
        return self.gradient(x) / self.value_checked(x)

    def check_gradient(self, points, rtol: float = 1e-5) -> None:
        """Verify a closed-form gradient against finite differences."""
        if self.grad is None:
            return
        for x in points:
            ga = self.gradient(x)
            gn = fd_gradient(self.fn, np.asarray(x, dtype=float))
            scale = np.linalg.norm(ga) + np.linalg.norm(gn) + 1e-300
            if np.linalg.norm(ga - gn) / scale > rtol:
                raise ValueError(f"gradient of {self.name or '<anonymous>'} inconsistent with finite differences at {x}")


def constant_field(n: int, c: float = 1.0) -> ScalarField:
    return ScalarField(n, lambda x: c, grad=lambda x: np.zeros(n), name=f"const{c:g}")


def power_field(n: int, exponent: float, name: str = "") -> ScalarField:
    """|x|^exponent with its closed-form gradient."""

    def fn(x):
        return float(np.linalg.norm(x) ** exponent)

    def grad(x):
        r2 = float(np.dot(x, x))
        return exponent * (r2 ** (exponent / 2 - 1)) * np.asarray(x, dtype=float)

    return ScalarField(n, fn, grad=grad, name=name or f"|x|^{exponent:g}")


@dataclass
class MetricSpec:
    """Diffusion matrix A(x) (default identity) and measure density."""

    n: int
    A: Callable | None = None
    density: Callable | None = None

    def matrix(self, x) -> np.ndarray:
        if self.A is None:
            return np.eye(self.n)
        M = np.asarray(self.A(np.asarray(x, dtype=float)), dtype=float)
        if not np.allclose(M, M.T, rtol=0, atol=1e-12 * (1 + np.abs(M).max())):
            raise ValueError(f"A(x) not symmetric at {x}")
        return M

    def norm2(self, x, xi) -> float:
        """|xi|_A^2 = xi . A(x) xi."""
        xi = np.asarray(xi, dtype=float)
        if self.A is None:
            return float(np.dot(xi, xi))
        return float(xi @ self.matrix(x) @ xi)

    def dual_norm2(self, x, xi) -> float:
        """|xi|_{A^{-1}}^2, the line-element norm of the induced metric."""
        xi = np.asarray(xi, dtype=float)
        if self.A is None:
            return float(np.dot(xi, xi))
        return float(xi @ np.linalg.solve(self.matrix(x), xi))

    def measure(self, x) -> float:
        return 1.0 if self.density is None else float(self.density(np.asarray(x, dtype=float)))

    def check_positive_definite(self, points) -> None:
        for x in points:
            M = self.matrix(x)
            if np.linalg.eigvalsh(M)[0] <= 0:
                raise ValueError(f"A(x) not positive definite at {np.asarray(x)}")
            if self.measure(x) <= 0:
                raise ValueError(f"measure density not positive at {np.asarray(x)}")


@dataclass
class OperatorSpec:
    """Elliptic operator data: dimension, diffusion, potential, measure."""

    n: int
    a: Callable | None = None          # isotropic diffusion coefficient
    V: Callable | None = None
    density: Callable | None = None
    note: str = ""

    def potential(self, x) -> float:
        return 0.0 if self.V is None else float(self.V(np.asarray(x, dtype=float)))


@dataclass
class HardyWeight:
    """Nonnegative weight with a record of how it was produced."""

    n: int
    evaluate: Callable
    provenance: dict = field(default_factory=dict)
    radial: Callable | None = None     # W as a function of r, when meaningful

    def __call__(self, x) -> float:
        w = float(self.evaluate(np.asarray(x, dtype=float)))
        if w < -1e-12:
            raise ValueError(f"weight negative at {x}: {w}")
        return max(w, 0.0)


@dataclass
class SolutionBasis:
    """Solution pair of (P - lam*W)u = 0 built from the generating fields.

    kind is 'subcritical-pair' for lam < 1 (two positive power members),
    'critical-log' at lam = 1 (v_half and its log companion), and
    'oscillatory-pair' for lam > 1, stored as amplitude sqrt(v0*v1) and
    phase xi*log(v1/v0) so that no complex power is ever materialized.
    """

    lam: float
    kind: str
    members: tuple
    amplitude: ScalarField | None = None
    phase: Callable | None = None
    xi: float = 0.0


def _pair_weight_value(v0: ScalarField, v1: ScalarField, metric: MetricSpec, x) -> float:
    d = v0.grad_log(x) - v1.grad_log(x)
    return 0.25 * metric.norm2(x, d)


def hardy_weight_pair(v0: ScalarField, v1: ScalarField,
                      metric: MetricSpec | None = None) -> HardyWeight:
    """W = (1/4)|grad log(v0/v1)|_A^2 from two positive (super)solutions.

    The weight depends only on the ratio v0/v1, so it is invariant under
    separately rescaling either field, and symmetric in its arguments.
    Proportional inputs give W identically zero (flagged in provenance).
    """
    if v0.n != v1.n:
        raise ValueError("fields live in different dimensions")
    metric = metric or MetricSpec(v0.n)

    def evaluate(x):
        return _pair_weight_value(v0, v1, metric, x)

    degenerate = _looks_proportional(v0, v1)
    return HardyWeight(
        n=v0.n, evaluate=evaluate,
        provenance={
            "kind": "pair", "v0": v0, "v1": v1, "metric": metric,
            "formula": "quarter |grad log(v0/v1)|_A^2",
            "degenerate": degenerate,
        },
    )


def _looks_proportional(v0: ScalarField, v1: ScalarField, probes: int = 8) -> bool:
    rng = np.random.default_rng(0)
    for _ in range(probes):
        x = rng.normal(size=v0.n)
        x = x / np.linalg.norm(x) * (0.3 + rng.random())
        try:
            d = v0.grad_log(x) - v1.grad_log(x)
        except ValueError:
            return False
        if np.linalg.norm(d) > 1e-10 * (np.linalg.norm(v0.grad_log(x)) + np.linalg.norm(v1.grad_log(x)) + 1):
            return False
    return True


def hardy_weight_multi(fields: Sequence[ScalarField], alpha: Sequence[float],
                       metric: MetricSpec | None = None) -> HardyWeight:
    """Pairwise-sum weight sum_{i<j} a_i a_j |grad log(u_i/u_j)|_A^2.

    The convex weights must sum to one; with two fields and a = (1/2, 1/2)
    this reduces exactly to hardy_weight_pair.
    """
    fields = list(fields)
    alpha = np.asarray(alpha, dtype=float)
    if len(fields) < 2:
        raise ValueError(f"need at least two solutions, got {len(fields)}")
    if len(alpha) != len(fields):
        raise ValueError("one weight per solution required")
    if np.any(alpha < 0):
        raise ValueError("weights must be nonnegative")
    if abs(alpha.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {alpha.sum():.17g}")
    n = fields[0].n
    metric = metric or MetricSpec(n)

    def evaluate(x):
        grads = [f.grad_log(x) for f in fields]
        total = 0.0
        for i in range(len(fields)):
            if alpha[i] == 0.0:
                continue
            for j in range(i + 1, len(fields)):
                if alpha[j] == 0.0:
                    continue
                total += alpha[i] * alpha[j] * metric.norm2(x, grads[i] - grads[j])
        return total

    return HardyWeight(
        n=n, evaluate=evaluate,
        provenance={"kind": "multi", "fields": fields, "alpha": alpha, "metric": metric},
    )


def _log_combination(v0: ScalarField, v1: ScalarField, a0: float, a1: float,
                     name: str) -> ScalarField:
    """v0^a0 * v1^a1 assembled in log space, with the chained gradient."""

    def fn(x):
        return math.exp(a0 * math.log(v0.value_checked(x)) + a1 * math.log(v1.value_checked(x)))

    def grad(x):
        return fn(x) * (a0 * v0.grad_log(x) + a1 * v1.grad_log(x))

    return ScalarField(v0.n, fn, grad=grad, name=name)


def associated_solutions(v0: ScalarField, v1: ScalarField, lam: float) -> SolutionBasis:
    """Solution pair of (P - lam*W)u = 0 for the pair weight W of (v0, v1).

    lam < 1: the two positive members v1^{a+-} v0^{1-a+-} with
    a+- = (1 +- sqrt(1-lam))/2.  lam = 1: sqrt(v0 v1) and
    sqrt(v0 v1) log(v0/v1).  lam > 1: real and imaginary parts of the
    complex power, i.e. amplitude sqrt(v0 v1) times cos/sin of
    xi log(v1/v0) with xi = sqrt(lam-1)/2.
    """
    if not np.isfinite(lam):
        raise ValueError("lam must be finite")

    if lam < 1.0 - 1e-12:
        root = math.sqrt(1.0 - lam)
        out = []
        for sign, tag in ((+1.0, "plus"), (-1.0, "minus")):
            a = 0.5 * (1.0 + sign * root)
            out.append(_log_combination(v1, v0, a, 1.0 - a, name=f"v_alpha_{tag}(lam={lam:g})"))
        return SolutionBasis(lam=lam, kind="subcritical-pair", members=tuple(out))

    half = _log_combination(v0, v1, 0.5, 0.5, name="sqrt(v0*v1)")

    if abs(lam - 1.0) <= 1e-12:
        def log_ratio(x):
            return math.log(v0.value_checked(x)) - math.log(v1.value_checked(x))

        def fn(x):
            return half(x) * log_ratio(x)

        def grad(x):
            return half.gradient(x) * log_ratio(x) + half(x) * (v0.grad_log(x) - v1.grad_log(x))

        log_member = ScalarField(v0.n, fn, grad=grad, name="sqrt(v0*v1)*log(v0/v1)")
        return SolutionBasis(lam=1.0, kind="critical-log", members=(half, log_member))

    xi = 0.5 * math.sqrt(lam - 1.0)

    def phase(x):
        return xi * (math.log(v1.value_checked(x)) - math.log(v0.value_checked(x)))

    def re_fn(x):
        return half(x) * math.cos(phase(x))

    def im_fn(x):
        return half(x) * math.sin(phase(x))

    def dphase(x):
        return xi * (v1.grad_log(x) - v0.grad_log(x))

    def re_grad(x):
        return half.gradient(x) * math.cos(phase(x)) - half(x) * math.sin(phase(x)) * dphase(x)

    def im_grad(x):
        return half.gradient(x) * math.sin(phase(x)) + half(x) * math.cos(phase(x)) * dphase(x)

    re = ScalarField(v0.n, re_fn, grad=re_grad, name=f"oscillatory-re(lam={lam:g})")
    im = ScalarField(v0.n, im_fn, grad=im_grad, name=f"oscillatory-im(lam={lam:g})")
    return SolutionBasis(lam=lam, kind="oscillatory-pair", members=(re, im),
                         amplitude=half, phase=phase, xi=xi)
