"""Agmon metric completeness and Rellich-type inequalities."""

import math

import numpy as np

from hardyforge import agmon, catalog
from hardyforge.construct import constant_field, hardy_weight_pair, power_field

# build the classical weight through the pair construction so the length
# report carries the closed-form lower bound (half the log oscillation)
W_pair = hardy_weight_pair(power_field(3, -1.0), constant_field(3))
metric = agmon.AgmonMetric(weight=W_pair)


def radial_curve(r_lo, r_hi, m=2001):
    pts = np.zeros((m, 3))
    pts[:, 0] = np.geomspace(r_lo, r_hi, m)
    return pts


print("Agmon lengths in the classical metric sqrt(W) |dx|")
res = agmon.agmon_length(metric, radial_curve(1.0, math.exp(4.0)))
print(f"  radial segment 1 -> e^4: length {res.length:.10f}"
      f" (closed form 2), log-oscillation bound {res.log_osc_bound}")
print("  lengths 1 -> R grow like (1/2) log R: completeness at infinity")
for R in (10.0, 100.0, 1000.0):
    L = agmon.agmon_length(metric, radial_curve(1.0, R)).length
    print(f"    R = {R:6.0f}: length = {L:.8f},  (1/2) log R = {0.5*math.log(R):.8f}")

print("\nweighted Rellich inequality for the classical pair (n = 5, mu = 2/3)")
n, mu = 5, 2.0 / 3.0
cfg = agmon.RellichConfig(mu=mu, v0=power_field(n, 2 - n), v1=constant_field(n),
                          weight=catalog.classical("hardy_punctured", n=n).weight)
res = agmon.rellich_check(cfg, agmon.make_bump_family(7, 100, n), n)
print(f"  constant lam (1-mu^2)^2 C_H^2 = "
      f"{agmon.classical_rellich_constant(n, mu):.6f}  [n^2 (n-4)^2/16 = "
      f"{agmon.classical_rellich_reduced(n):.6f}]")
print(f"  holds on 100 seeded bumps: {res.holds}, worst lhs/rhs ratio {res.worst_ratio:.4f}")
print(f"  convex-combination variant worst ratios: "
      + ", ".join(f"alpha={a:g}: {v:.4f}" for a, v in res.b_variant_worst.items()))

print("\ndecay bounds from the supersolution comparison")
G = lambda x: 1.0 / np.linalg.norm(x)
v = lambda x: G(x) ** 0.75
sets = [np.stack([np.geomspace(1.0, 10.0 ** k, 64), np.zeros(64), np.zeros(64)], axis=1)
        for k in (2, 4, 6)]
for beta in (0.75, 0.5):
    sup, sups = agmon.decay_bound(v, lambda x: 1.0, G, beta, sets)
    print(f"  v = G^(3/4) against v1^(1-b) v2^b at b = {beta}: sup ratio {sup:.6f},"
          f" per-decade sups {[f'{s:.4f}' for s in sups]}")
