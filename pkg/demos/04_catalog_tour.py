"""Catalog tour: closed-form weights and their reference constants."""

import math

import numpy as np

from hardyforge import catalog
from hardyforge.catalog import HalfspaceConfig, MultipoleConfig
from hardyforge.numgrid import make_log_grid
from hardyforge.radial import RadialProfile

print("classical single-singularity examples")
for name, kw in [("hardy_punctured", {"n": 3}), ("leray_disk", {}),
                 ("ball", {"n": 3}), ("cone", {"n": 3, "cap_angle": math.pi / 2}),
                 ("convex_distance", {"n": 3}), ("one_dim_halfline", {}),
                 ("one_dim_massive", {})]:
    ex = catalog.classical(name, **kw)
    print(f"  {ex.name:18s} constant {ex.reference_constant:8.4f}   {ex.domain_note}")

print("\nmultipolar weights, two unit poles on the x-axis (n = 3)")
poles = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
for variant in ("uniform_background", "pole_average", "pairwise_only"):
    W, c = catalog.multipolar_weight(MultipoleConfig(n=3, poles=poles, variant=variant))
    inf_c = c["infinity"]
    print(f"  {variant:20s} near-pole constant {c['near_pole'][0]:.6f},"
          f" at infinity {inf_c if inf_c is not None else 'n/a'}")
W, _ = catalog.multipolar_weight(MultipoleConfig(n=3, poles=poles))
print(f"  value at the origin (uniform with background): {W(np.zeros(3)):.6f} (exact 2/3)")

print("\nhalf-space weights: boundary strength mu plus point improvement")
for mu in (0.0, 0.125, 0.25):
    cfg = HalfspaceConfig(mu=mu, n=3)
    W, psi = catalog.halfspace_weight(cfg)
    x = np.array([0.0, 0.0, 1.0])
    print(f"  mu = {mu:5.3f}: alpha+ = {cfg.alpha_plus:.4f}, beta = {cfg.beta:+.4f},"
          f" W(0,0,1) = {W(x):.4f}, ground state there = {psi(x):.4f}")
print("  mu = 0 reduces to the cone constant n^2/4 over the hemisphere")

print("\nquasilinear (p-form) radial weights")
print(f"  log-gradient bound constant at p = 3: {catalog.caccioppoli_constant(3.0):.10f}"
      f"  (exact 8/27 = {8/27:.10f})")
g = make_log_grid(1e-2, 1e2, 1001)
for n, p in [(3, 2.0), (4, 3.0)]:
    v = RadialProfile(grid=g, log_values=((p - n) / (p - 1.0)) * g.log_nodes)
    Wg = catalog.caccioppoli_weight(v, p)
    print(f"  p-power profile, n = {n}, p = {p:g}: r^p W = "
          f"{float(Wg.radial(np.array([1.0]))[0]):.6f}  [((n-p)/p)^p = {((n-p)/p)**p:.6f}]")

print("\nshipped constants table")
for row in catalog.constants_table()[:8]:
    print(f"  {row['name']:32s} n={row['n']} N={row['N']}"
          f" constant={row['constant']:.10g}  [{row['anchor']}]")
print("  ...")
