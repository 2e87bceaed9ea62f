"""Radial engine walkthrough: from a potential to its optimal Hardy weight.

Solves the regular radial solution, builds the Green function by
quadrature, and prints the weight against closed forms for the free
Laplacian and for the massive (Yukawa-type) operator.
"""

import math

import numpy as np

from hardyforge import radial

# --- the free Laplacian in R^3 --------------------------------------------
op = radial.RadialOperator(n=3)
psi, g0, verdict, W = radial.optimal_pair(op)

print("free Laplacian, n = 3")
print(f"  psi == 1 everywhere: max |log psi| = {np.abs(psi.log_values).max():.2e}")
print(f"  convergence integral from r = 1: {verdict.murata_integral:.12f} (exact 1)")
r = np.array([0.01, 1.0, 100.0])
print("  r^2 W(r) at r = 0.01, 1, 100:", W.radial(r) * r ** 2, "(exact 1/4)")

# --- the massive operator -Delta + 1 --------------------------------------
opy = radial.RadialOperator(n=3, V=lambda r: np.ones_like(np.asarray(r, dtype=float)))
psi_y, g0_y, verdict_y, W_y = radial.optimal_pair(opy)

print("\nmassive operator, n = 3 (psi = sinh r / r, g0 = e^-r / r)")
print(f"  g0(1) = {g0_y(1.0):.12f}   vs e^-1 = {math.exp(-1.0):.12f}")
w1 = float(W_y.radial(np.array([1.0]))[0])
print(f"  W(1)  = {w1:.12f}   vs (1 + coth 1)^2 / 4 = {(1 + 1/math.tanh(1))**2/4:.12f}")
w20 = float(W_y.radial(np.array([20.0]))[0])
print(f"  W(20) = {w20:.12f}  -> the weight tends to 1 at infinity")

# near the pole every optimal weight looks classical
r0 = 1e-5
print(f"\n  near-pole limit r^2 W at r = {r0:g}:",
      float(W_y.radial(np.array([r0]))[0]) * r0 ** 2, "(classical value 0.25)")

# the criticality integrals diverge logarithmically at both ends
cv = radial.criticality_integrals(psi, g0, op)
print("\ncriticality integrals (free case): partial-integral slopes vs log cutoff")
print(f"  toward zero: {cv.I_zero:.6f}, toward infinity: {cv.I_infinity:.6f} (both 1)")

# oscillation above the best constant: ten sign changes per 20 pi decades
g_wide = radial.make_log_grid(1e-2, math.exp(21 * math.pi), 8001)
op_wide = radial.RadialOperator(n=3, grid=g_wide)
W_wide = radial.optimal_pair(op_wide)[3]
for lam in (1.0, 2.0):
    res = radial.oscillation_count(op_wide, W_wide, lam, 1.0, math.exp(20 * math.pi))
    print(f"  lam = {lam:g}: {res.count} sign changes on (1, e^(20 pi)),"
          f" oscillation quotient {res.gu_quotient:+.3f}")
