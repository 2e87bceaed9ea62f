"""Spectral representation on the level variable t = G/u.

Radial fields u f(G/u) form an invariant subspace on which the weighted
operator acts as -4 t^2 d^2/dt^2; the generalized Fourier transform
diagonalizes it as multiplication by 1 + 4 xi^2, with spectrum [1, inf).
"""

import math

import numpy as np

from hardyforge import radial, spectral
from hardyforge.numgrid import trapezoid

op = radial.RadialOperator(n=3)
psi, g0, _, _ = radial.optimal_pair(op)
m = spectral.spectral_map(op, psi, g0)

print("level variable for the classical pair: t(r) = 1 / (4 pi r)")
for r in (0.1, 1.0, 10.0):
    print(f"  t({r:4.1f}) = {m.t_of_r(np.array([r]))[0]:.8f}"
          f"   [1/(4 pi r) = {1/(4*math.pi*r):.8f}]")

print("\nconjugation identity (1/W) P (u f(t)) = -4 u t^2 f'':")
for name, f, d2f in [
    ("f = t^(1/4)", lambda t: t ** 0.25, lambda t: -0.1875 * np.asarray(t) ** -1.75),
    ("f = t      ", lambda t: t, lambda t: np.zeros_like(np.asarray(t))),
]:
    print(f"  {name}: residual {spectral.conjugation_check(m, f, d2f):.2e}")

xi = spectral.default_xi_grid()
print("\ngeneralized Fourier transform on a seeded bump family")
for f in spectral.seeded_bump_family(42, 3):
    F = spectral.generalized_fourier(m, f, f.support, xi)
    n2 = spectral.weighted_norm2(m, f, f.support)
    print(f"  bump on ({f.support[0]:+.2f}, {f.support[1]:+.2f}):"
          f" |Ff|^2 integral = {trapezoid(np.abs(F)**2, xi):.10f},"
          f" |f|^2 W mass = {n2:.10f}")

print("\npointwise inversion at three radii")
f = spectral.seeded_bump_family(42, 1)[0]
F = spectral.generalized_fourier(m, f, f.support, xi)
rpts = np.exp(m.s_of_ell(np.array([-1.0, 0.0, 1.0])))
rec = spectral.inverse_generalized_fourier(m, F, xi, rpts)
truth = m.psi(rpts) * f(m.t_of_r(rpts))
for r, a, b in zip(rpts, rec, truth):
    print(f"  r = {r:10.6f}: reconstructed {a:.8f} vs {b:.8f}")

print("\nmode orthonormality on log-level windows (delta_kl):")
for (k, l) in [(0, 0), (1, 1), (1, 2), (2, -2)]:
    val = spectral.torus_orthonormality(m, 1.0, k, l)
    print(f"  <phi_{k}, phi_{l}> = {val.real:+.2e}{val.imag:+.2e}i")

print("\ncoarea identity: shell masses of uGW are (1/4) log(b/a)")
for a, b in [(1.0, math.e), (math.e, math.e ** 3)]:
    lhs, rhs = spectral.coarea_identity(psi, g0, 3, a, b)
    print(f"  shell ({a:.3f}, {b:.3f}): {lhs:.10f} vs {rhs:.10f}")

print("\nclassical Mellin transform sanity (f = e^-r):")
from hardyforge.numgrid import SampledFunction, make_log_grid
g = make_log_grid(1e-18, 1e4, 20001)
M0 = spectral.mellin_transform(SampledFunction(g, np.exp(-g.nodes)), [0.0])[0]
print(f"  M f(0) = {M0.real:.10f}   [Gamma(1/2)/sqrt(2 pi) = {1/math.sqrt(2):.10f}]")
