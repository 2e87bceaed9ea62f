"""Acceptance criteria, one test per criterion at its stated tolerance.

Every test prints a single PASS/FAIL line (run with -s or read the -v
listing).  Tolerances are pinned here, not configurable.
"""

import math

import numpy as np
import pytest

from hardyforge import agmon, catalog, cli, radial, spectral, varify
from hardyforge.construct import constant_field, fd_laplacian, power_field
from hardyforge.numgrid import make_log_grid, trapezoid


def _verdict(tag: str, ok: bool, detail: str = ""):
    print(f"{tag}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{tag} failed: {detail}"


def test_criterion_01_classical_weight_recovery(classical_engine):
    op, psi, g0, verdict, W = classical_engine
    r = op.grid.nodes
    dev = float(np.max(np.abs(W.radial(r) * r ** 2 - 0.25)))
    r_near = op.grid.t_min * 10.0
    near = float(W.radial(np.array([r_near]))[0]) * r_near ** 2
    ok = dev <= 1e-10 and abs(near - 0.25) <= 1e-6
    _verdict("criterion-01 classical-weight-recovery", ok,
             f"max|W r^2 - 1/4| = {dev:.2e}, near-pole dev = {abs(near - 0.25):.2e}")


def test_criterion_02_yukawa_closed_forms(yukawa_engine):
    op, psi, g0, verdict, W = yukawa_engine
    g1 = float(g0(1.0))
    w1 = float(W.radial(np.array([1.0]))[0])
    w20 = float(W.radial(np.array([20.0]))[0])
    w1_exact = (1.0 + 1.0 / math.tanh(1.0)) ** 2 / 4.0
    ok = (abs(g1 - math.exp(-1.0)) <= 1e-6
          and abs(w1 - w1_exact) <= 1e-6
          and abs(w20 - 1.0) <= 1e-6)
    _verdict("criterion-02 yukawa-closed-forms", ok,
             f"g0(1) dev = {abs(g1 - math.exp(-1)):.2e}, W(1) dev = {abs(w1 - w1_exact):.2e}, "
             f"W(20) dev = {abs(w20 - 1):.2e}")


def test_criterion_03_lambda0_certification():
    W = lambda r: 0.25 / np.asarray(r, dtype=float) ** 2
    est = varify.principal_eigenvalue(
        varify.assemble_annulus(3, None, W, 1e-4, 1e4, 4000))
    pred = 1.0 + 4.0 * math.pi ** 2 / (8.0 * math.log(10.0)) ** 2
    ctrl = varify.principal_eigenvalue(
        varify.assemble_annulus(3, None,
                                lambda r: np.ones_like(np.asarray(r, dtype=float)),
                                1.0, 2.0, 4000))
    ok = (abs(est.lambda0 - pred) <= 0.01 * pred
          and abs(ctrl.lambda0 - math.pi ** 2) <= 1e-3 * math.pi ** 2)
    _verdict("criterion-03 lambda0-certification", ok,
             f"lambda0 = {est.lambda0:.6f} vs {pred:.6f}; control = {ctrl.lambda0:.6f} vs pi^2")


def test_criterion_04_lambda_infinity_signature(wide_classical_engine):
    op, _, _, _, W = wide_classical_engine
    hi = math.exp(20 * math.pi)
    c2 = radial.oscillation_count(op, W, 2.0, 1.0, hi).count
    c1 = radial.oscillation_count(op, W, 1.0, 1.0, hi).count
    c1b = radial.oscillation_count(op, W, 1.0, 100.0, 1e8).count
    sweep = varify.lambda_infinity_sweep(
        3, None, lambda r: 0.25 / np.asarray(r, dtype=float) ** 2,
        [1.0, 10.0, 100.0], 100.0)
    ok = abs(c2 - 10) <= 1 and c1 == 0 and c1b == 0 and sweep.residual <= 5e-3
    _verdict("criterion-04 lambda-infinity-signature", ok,
             f"counts: lam2 = {c2}, lam1 = {c1}/{c1b}; plateau drift = {sweep.residual:.2e}")


def test_criterion_05_null_criticality_slope(classical_engine, yukawa_engine):
    a_list = np.exp(-np.arange(1.0, 9.0))
    devs = []
    for _, psi, g0, _, _ in (classical_engine, yukawa_engine):
        slope = varify.null_criticality_probe(psi, g0, 3, a_list)
        devs.append(abs(slope - 0.25))
    ok = max(devs) <= 1e-3
    _verdict("criterion-05 null-criticality-slope", ok,
             f"slope deviations = {devs[0]:.2e} (classical), {devs[1]:.2e} (massive)")


def test_criterion_06_spectral_unitarity(classical_engine):
    op, psi, g0, _, _ = classical_engine
    m = spectral.spectral_map(op, psi, g0)
    xi = spectral.default_xi_grid()
    rng = np.random.default_rng(99)
    worst_p = worst_i = 0.0
    for f in spectral.seeded_bump_family(42, 5):
        F = spectral.generalized_fourier(m, f, f.support, xi)
        n2 = spectral.weighted_norm2(m, f, f.support)
        worst_p = max(worst_p, abs(trapezoid(np.abs(F) ** 2, xi) - n2) / n2)
        ells = rng.uniform(0.5 * f.support[0], 0.5 * f.support[1], 100)
        rpts = np.exp(m.s_of_ell(ells))
        rec = spectral.inverse_generalized_fourier(m, F, xi, rpts)
        truth = m.psi(rpts) * f(m.t_of_r(rpts))
        worst_i = max(worst_i, float(np.max(np.abs(rec - truth) / (np.abs(truth) + 1e-12))))
    conj = spectral.conjugation_check(m, lambda t: t ** 0.25,
                                      lambda t: -0.1875 * np.asarray(t, dtype=float) ** -1.75)
    worst_t = 0.0
    for rr in (0.5, 1.0):
        for k in range(-2, 3):
            for l in range(-2, 3):
                val = spectral.torus_orthonormality(m, rr, k, l)
                worst_t = max(worst_t, abs(val - (1.0 if k == l else 0.0)))
    ok = worst_p <= 1e-4 and worst_i <= 1e-4 and conj <= 1e-8 and worst_t <= 1e-6
    _verdict("criterion-06 spectral-unitarity", ok,
             f"plancherel {worst_p:.2e}, inversion {worst_i:.2e}, "
             f"conjugation {conj:.2e}, torus {worst_t:.2e}")


def test_criterion_07_multipolar_consistency():
    from hardyforge.catalog import MultipoleConfig, _pole_field, multipolar_weight
    from hardyforge.construct import hardy_weight_multi
    rng = np.random.default_rng(2024)
    worst = 0.0
    pole_sets = {
        2: np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]),
        3: np.array([[1.0, 0.0, 0.0], [-0.4, 0.8, 0.0], [0.1, -0.6, 0.9]]),
    }
    for N, poles in pole_sets.items():
        W, _ = multipolar_weight(MultipoleConfig(n=3, poles=poles))
        fields = [_pole_field(3, p) for p in poles] + [constant_field(3)]
        Wb = hardy_weight_multi(fields, np.full(N + 1, 1.0 / (N + 1)))
        checked = 0
        while checked < 1000:
            x = rng.uniform(-3.0, 3.0, size=3)
            if min(np.linalg.norm(x - p) for p in poles) < 0.1:
                continue
            checked += 1
            worst = max(worst, abs(W(x) - Wb(x)) / Wb(x))

    poles2 = pole_sets[2]
    d = np.ones(3) / math.sqrt(3.0)
    rr = np.array([1e-3, 5e-4, 2.5e-4])
    limits, exact = {}, {}
    for variant in ("uniform_background", "pole_average", "pairwise_only"):
        Wv, consts = multipolar_weight(MultipoleConfig(n=3, poles=poles2, variant=variant))
        vals = np.array([Wv(poles2[0] + r * d) * r ** 2 for r in rr])
        limits[variant] = float(np.polyfit(rr, vals, 2)[-1])
        exact[variant] = consts["near_pole"][0]
    C, C1, C2 = (limits["uniform_background"], limits["pole_average"],
                 limits["pairwise_only"])
    CH = 0.25
    const_ok = (abs(C - 2.0 / 9.0) <= 1e-3 and abs(C1 - 0.1875) <= 1e-3
                and abs(C2 - 0.25) <= 1e-3)
    order_ok = (exact["pole_average"] <= exact["uniform_background"]
                < exact["pairwise_only"] <= CH)
    ok = worst <= 1e-10 and const_ok and order_ok
    _verdict("criterion-07 multipolar-consistency", ok,
             f"closed-vs-sum {worst:.2e}; C = {C:.5f}, C1 = {C1:.5f}, C2 = {C2:.5f}")


def test_criterion_08_halfspace_ground_state():
    worst = 0.0
    for mu in (0.0, 0.125, 0.25):
        W, psi = catalog.halfspace_weight(catalog.HalfspaceConfig(mu=mu, n=3))
        rng = np.random.default_rng(31415)
        checked = 0
        while checked < 1000:
            x = rng.uniform(-3.0, 3.0, size=3)
            x[2] = rng.uniform(0.25, 3.0)
            if np.linalg.norm(x) < 0.3:
                continue
            checked += 1
            h = 1e-2 * min(x[2], float(np.linalg.norm(x)))
            lap = fd_laplacian(psi.fn, x, h=h)
            resid = abs(-lap - W(x) * psi(x))
            scale = abs(lap) + abs(W(x) * psi(x)) + abs(psi(x))
            worst = max(worst, resid / scale)
    Wq, _ = catalog.halfspace_weight(catalog.HalfspaceConfig(mu=0.25, n=3))
    probe = Wq(np.array([0.0, 0.0, 1.0]))
    ok = worst <= 1e-6 and abs(probe - 1.25) <= 1e-12
    _verdict("criterion-08 halfspace-ground-state", ok,
             f"worst residual {worst:.2e}; W(0,0,1) = {probe}")


def test_criterion_09_rellich_identity():
    c = agmon.classical_rellich_constant(5, 2.0 / 3.0)
    reduced = agmon.classical_rellich_reduced(5)
    exact_ok = abs(c - 25.0 / 16.0) <= 1e-12 and reduced == 25.0 / 16.0
    ex = catalog.classical("hardy_punctured", n=5)
    cfg = agmon.RellichConfig(mu=2.0 / 3.0, v0=power_field(5, -3.0),
                              v1=constant_field(5), weight=ex.weight, lam=1.0)
    res = agmon.rellich_check(cfg, agmon.make_bump_family(7, 100, 5), 5)
    ok = exact_ok and res.holds and res.worst_ratio <= 1.0
    _verdict("criterion-09 rellich-identity", ok,
             f"constant = {c:.10f}, holds = {res.holds}, worst ratio = {res.worst_ratio:.4f}")


def test_criterion_10_agmon_length():
    ex = catalog.classical("hardy_punctured", n=3)
    metric = agmon.AgmonMetric(weight=ex.weight)

    def radial_curve(r_hi, m=2001):
        pts = np.zeros((m, 3))
        pts[:, 0] = np.geomspace(1.0, r_hi, m)
        return pts

    seg = agmon.agmon_length(metric, radial_curve(math.exp(4.0))).length
    lengths = [agmon.agmon_length(metric, radial_curve(R)).length
               for R in (10.0, 100.0, 1000.0)]
    slope = float(np.polyfit(np.log([10.0, 100.0, 1000.0]), lengths, 1)[0])
    ok = abs(seg - 2.0) <= 1e-8 and abs(slope - 0.5) <= 1e-6
    _verdict("criterion-10 agmon-length", ok,
             f"segment = {seg:.10f}, divergence slope = {slope:.8f}")


def test_criterion_11_coarea_identity(classical_engine, yukawa_engine):
    worst = 0.0
    for _, psi, g0, _, _ in (classical_engine, yukawa_engine):
        for a, b in ((1.0, math.e), (math.e, math.e ** 3)):
            lhs, rhs = spectral.coarea_identity(psi, g0, 3, a, b)
            assert rhs == pytest.approx(0.25 * math.log(b / a))
            worst = max(worst, abs(lhs - rhs))
    ok = worst <= 1e-6
    _verdict("criterion-11 coarea-identity", ok, f"worst shell deviation = {worst:.2e}")


def test_criterion_12_caccioppoli_constants():
    c3 = catalog.caccioppoli_constant(3.0)
    g = make_log_grid(1e-2, 1e2, 1001)
    from hardyforge.radial import RadialProfile
    n, p = 3, 2.0
    v = RadialProfile(grid=g, log_values=((p - n) / (p - 1.0)) * g.log_nodes)
    Wg = catalog.caccioppoli_weight(v, p)
    val = float(Wg.radial(np.array([1.0]))[0])
    ok = abs(c3 - 8.0 / 27.0) <= 1e-15 and abs(val - 0.25) <= 1e-12
    _verdict("criterion-12 caccioppoli-constants", ok,
             f"(2/3)^3 = {c3:.17g}, p-green constant = {val:.17g}")


def test_criterion_13_determinism(tmp_path):
    cfg_text = ('subcommand = "multipolar"\nn = 3\n'
                'poles = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]\npoints = 100\n')
    cfg_file = tmp_path / "cfg.toml"
    cfg_file.write_text(cfg_text)
    blobs = []
    for d in ("r1", "r2"):
        out = tmp_path / d
        rc = cli.main(["multipolar", "--config", str(cfg_file), "--out", str(out),
                       "--seed", "42", "--no-timestamp"])
        assert rc == 0
        blobs.append((out / "report.json").read_bytes())
    ok = blobs[0] == blobs[1]
    _verdict("criterion-13 determinism", ok,
             f"reports differ at {sum(a != b for a, b in zip(*blobs))} bytes" if not ok
             else "byte-identical reports")
