import math

import numpy as np
import pytest

from hardyforge import catalog
from hardyforge.catalog import (
    HalfspaceConfig,
    MultipoleConfig,
    PLaplaceConfig,
    caccioppoli_constant,
    caccioppoli_weight,
    cap_principal_eigenvalue,
    classical,
    classical_hardy_constant,
    constants_table,
    halfspace_poisson,
    halfspace_weight,
    multipolar_weight,
    p_hardy_radial,
)
from hardyforge.construct import fd_laplacian, hardy_weight_multi, power_field, constant_field
from hardyforge.numgrid import make_log_grid
from hardyforge.radial import RadialProfile


class TestClassical:
    def test_hardy_punctured(self):
        ex = classical("hardy_punctured", n=3)
        assert ex.reference_constant == 0.25
        x = np.array([0.3, 0.4, 0.0])
        assert ex.weight(x) == pytest.approx(0.25 / 0.25, rel=1e-12)

    def test_ball_midpoint(self):
        ex = classical("ball", n=3)
        x = np.array([0.5, 0.0, 0.0])
        assert ex.weight(x) == pytest.approx(4.0, rel=1e-12)
        assert ex.reference_constant == 0.25

    def test_leray_disk(self):
        ex = classical("leray_disk")
        r = 0.5
        assert ex.weight(np.array([r, 0.0])) == pytest.approx(
            0.25 / (r * math.log(r)) ** 2, rel=1e-12)

    def test_cone_hemisphere(self):
        lam0 = cap_principal_eigenvalue(3, math.pi / 2)
        assert lam0 == pytest.approx(2.0, abs=1e-7)
        ex = classical("cone", n=3, lambda0=lam0)
        assert ex.reference_constant == pytest.approx(2.25, abs=1e-7)
        ex2 = classical("cone", n=3, cap_angle=math.pi / 2)
        assert ex2.reference_constant == pytest.approx(9.0 / 4.0, abs=1e-7)

    def test_cap_eigenvalue_other_dims(self):
        # hemisphere eigenfunction cos(theta) gives n - 1 in any dimension
        for n in (3, 4, 5):
            assert cap_principal_eigenvalue(n, math.pi / 2) == pytest.approx(n - 1.0, abs=1e-6)

    def test_cap_monotone_in_angle(self):
        vals = [cap_principal_eigenvalue(3, th) for th in (math.pi / 3, math.pi / 2, 2.1)]
        assert vals[0] > vals[1] > vals[2]

    def test_convex_distance(self):
        ex = classical("convex_distance", n=3)
        assert ex.weight(np.array([5.0, -2.0, 0.5])) == pytest.approx(1.0, rel=1e-12)

    def test_one_dim(self):
        half = classical("one_dim_halfline")
        assert half.weight(np.array([2.0])) == pytest.approx(1.0 / 16.0)
        assert half.weight.provenance["transform"] == "mellin"
        massive = classical("one_dim_massive")
        assert massive.weight(np.array([17.0])) == 1.0
        assert massive.weight.provenance["transform"] == "fourier"

    def test_unknown_name_lists_catalog(self):
        with pytest.raises(ValueError, match="hardy_punctured"):
            classical("no_such_example")


class TestMultipolar:
    poles2 = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    poles3 = np.array([[1.0, 0.0, 0.0], [-0.5, 0.9, 0.0], [0.0, -0.7, 0.8]])

    def test_near_pole_constants_n3_N2(self):
        _, c = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2))
        assert c["near_pole"][0] == pytest.approx(8.0 / 9.0 * 0.25)
        _, c1 = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2,
                                                  variant="pole_average"))
        assert c1["near_pole"][0] == pytest.approx(0.1875)
        _, c2 = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2,
                                                  variant="pairwise_only"))
        assert c2["near_pole"][0] == pytest.approx(0.25)

    def test_origin_value(self):
        W, _ = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2))
        assert W(np.zeros(3)) == pytest.approx(2.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("N", [2, 3])
    def test_closed_form_vs_brute_force(self, N):
        poles = self.poles2 if N == 2 else self.poles3
        W, _ = multipolar_weight(MultipoleConfig(n=3, poles=poles))
        fields = [power_field(3, -1.0)] * 0
        from hardyforge.catalog import _pole_field
        fields = [_pole_field(3, p) for p in poles] + [constant_field(3)]
        Wb = hardy_weight_multi(fields, np.full(N + 1, 1.0 / (N + 1)))
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 1000:
            x = rng.uniform(-3.0, 3.0, size=3)
            if min(np.linalg.norm(x - p) for p in poles) < 0.1:
                continue
            checked += 1
            assert W(x) == pytest.approx(Wb(x), rel=1e-10)

    def test_near_pole_extrapolation(self):
        for variant, target in [("uniform_background", 2.0 / 9.0),
                                ("pole_average", 0.1875),
                                ("pairwise_only", 0.25)]:
            W, c = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2,
                                                     variant=variant))
            d = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
            rr = np.array([1e-3, 5e-4, 2.5e-4])
            vals = np.array([W(self.poles2[0] + r * d) * r ** 2 for r in rr])
            limit = np.polyfit(rr, vals, 2)[-1]
            assert limit == pytest.approx(target, abs=1e-3)
            assert limit == pytest.approx(c["near_pole"][0], abs=1e-3)

    def test_infinity_constants(self):
        for variant, target in [("uniform_background", 2.0 / 9.0),
                                ("pole_average", 0.25)]:
            W, c = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2,
                                                     variant=variant))
            d = np.array([0.3, -0.5, 0.81])
            d /= np.linalg.norm(d)
            rr = np.array([1e3, 2e3, 4e3])
            vals = np.array([W(r * d) * r ** 2 for r in rr])
            limit = np.polyfit(1.0 / rr, vals, 2)[-1]
            assert limit == pytest.approx(target, abs=1e-3)
            assert limit == pytest.approx(c["infinity"], abs=1e-3)

    @pytest.mark.parametrize("n,N", [(3, 2), (3, 3), (4, 2), (5, 4)])
    def test_constant_ordering(self, n, N):
        CH = classical_hardy_constant(n)
        C = 4.0 * N / (N + 1) ** 2 * CH
        C1 = (2.0 * N - 1) / N ** 2 * CH
        C2 = (4.0 * N - 4) / N ** 2 * CH
        assert C1 <= C < C2 <= CH

    def test_coincident_poles_rejected(self):
        with pytest.raises(ValueError, match="coincident"):
            MultipoleConfig(n=3, poles=np.array([[1.0, 0, 0], [1.0, 0, 0]]))

    def test_generic_weights(self):
        alpha = np.array([0.4, 0.25, 0.35])
        W, c = multipolar_weight(MultipoleConfig(n=3, poles=self.poles2,
                                                 alpha=alpha, variant="generic"))
        assert c["near_pole"][0] == pytest.approx(4 * 0.4 * 0.6 * 0.25)
        assert W(np.array([0.0, 1.0, 0.0])) > 0

    def test_alpha_sum_enforced(self):
        with pytest.raises(ValueError, match="sum to 1"):
            MultipoleConfig(n=3, poles=self.poles2, alpha=np.array([0.6, 0.6]))


class TestHalfspace:
    def test_weight_at_unit_normal(self):
        W, _ = halfspace_weight(HalfspaceConfig(mu=0.25, n=3))
        val = W(np.array([0.0, 0.0, 1.0]))
        assert val == pytest.approx(1.25, rel=1e-12)

    def test_roots(self):
        cfg = HalfspaceConfig(mu=0.125, n=3)
        ap, beta = cfg.alpha_plus, cfg.beta
        assert ap * (1 - ap) == pytest.approx(0.125, abs=1e-14)
        assert beta * (beta + cfg.n - 1 + math.sqrt(1 - 4 * cfg.mu)) == pytest.approx(0.0, abs=1e-12)
        assert beta != 0.0

    def test_mu_range(self):
        with pytest.raises(ValueError):
            HalfspaceConfig(mu=0.3, n=3)
        with pytest.raises(ValueError):
            HalfspaceConfig(mu=-0.01, n=3)

    @pytest.mark.parametrize("mu", [0.0, 0.125, 0.25])
    def test_ground_state_residual(self, mu):
        W, psi = halfspace_weight(HalfspaceConfig(mu=mu, n=3))
        rng = np.random.default_rng(1234)
        count = 0
        while count < 1000:
            x = rng.uniform(-3.0, 3.0, size=3)
            x[2] = rng.uniform(0.25, 3.0)
            if np.linalg.norm(x) < 0.3:
                continue
            count += 1
            h = 1e-2 * min(x[2], float(np.linalg.norm(x)))
            lap = fd_laplacian(psi.fn, x, h=h)
            resid = -lap - W(x) * psi(x)
            scale = abs(lap) + abs(W(x) * psi(x)) + abs(psi(x))
            assert abs(resid) / scale < 1e-6

    def test_mu_zero_matches_cone(self):
        W, _ = halfspace_weight(HalfspaceConfig(mu=0.0, n=3))
        cone = classical("cone", n=3, lambda0=2.0)  # hemisphere cross-section
        for x in [np.array([0.4, -0.2, 0.9]), np.array([1.0, 1.0, 2.0])]:
            assert W(x) == pytest.approx(cone.weight(x), rel=1e-9)

    def test_ground_state_gradient(self):
        _, psi = halfspace_weight(HalfspaceConfig(mu=0.2, n=4))
        pts = [np.array([0.3, -0.5, 0.2, 0.8]), np.array([1.0, 0.0, 0.0, 0.5])]
        psi.check_gradient(pts)

    def test_poisson_variant(self):
        ex = halfspace_poisson(3)
        x = np.array([0.0, 0.0, 2.0])
        assert ex.weight(x) == pytest.approx(0.25 * (1.0 / 4.0 + 3.0 / 4.0), rel=1e-12)

    def test_outside_halfspace(self):
        W, _ = halfspace_weight(HalfspaceConfig(mu=0.25, n=3))
        with pytest.raises(ValueError, match="half space"):
            W(np.array([0.0, 0.0, -1.0]))


class TestPLaplace:
    @staticmethod
    def power_profile(exponent, grid=None):
        g = grid or make_log_grid(1e-3, 1e3, 2001)
        return RadialProfile(grid=g, log_values=exponent * g.log_nodes,
                             note=f"r^{exponent:g}")

    def test_caccioppoli_constants(self):
        assert caccioppoli_constant(3.0) == pytest.approx(8.0 / 27.0, abs=1e-15)
        assert caccioppoli_constant(2.0) == pytest.approx(0.25, abs=1e-15)

    def test_p_green_power(self):
        # v = r^((p-n)/(p-1)): weight ((n-p)/p)^p r^-p
        for n, p in [(3, 2.0), (4, 3.0), (5, 2.5)]:
            v = self.power_profile((p - n) / (p - 1.0))
            W = caccioppoli_weight(v, p)
            r = np.array([0.5, 1.0, 7.0])
            expect = ((n - p) / p) ** p * r ** (-p)
            assert np.allclose(W.radial(r), expect, rtol=1e-8)

    def test_p2_reduces_to_pair_construction(self):
        g = make_log_grid(1e-3, 1e3, 2001)
        v0 = self.power_profile(-1.0, g)
        v1 = self.power_profile(0.0, g)
        for alpha in (0.25, 0.5):
            cfg = PLaplaceConfig(p=2.0, n=3, alpha=alpha)
            W = p_hardy_radial(cfg, v0, v1)
            r = np.array([0.1, 1.0, 10.0])
            # pair weight is 1/(4 r^2); scaled by 4 a (1-a)
            expect = 4 * alpha * (1 - alpha) * 0.25 / r ** 2
            assert np.allclose(W.radial(r), expect, rtol=1e-8)

    def test_general_p_formula(self):
        g = make_log_grid(1e-2, 1e2, 1001)
        v0 = self.power_profile(-1.0, g)
        v1 = self.power_profile(0.0, g)
        p, a = 3.0, 0.5
        W = p_hardy_radial(PLaplaceConfig(p=p, n=3, alpha=a), v0, v1)
        r = np.array([0.5, 2.0])
        # |(log(v0/v1))'| = 1/r, |(log v_a)'| = (1-a)/r
        expect = a * (1 - a) * (p - 1) * r ** -2.0 * ((1 - a) / r) ** (p - 2)
        assert np.allclose(W.radial(r), expect, rtol=1e-8)

    def test_singular_flagging_small_p(self):
        g = make_log_grid(1e-2, 1e2, 1001)
        # v_a has vanishing log-derivative when a d1 + (1-a) d0 = 0
        v0 = self.power_profile(1.0, g)
        v1 = self.power_profile(-1.0, g)
        W = p_hardy_radial(PLaplaceConfig(p=1.5, n=3, alpha=0.5), v0, v1)
        assert W.provenance["singular_nodes"].all()
        W2 = p_hardy_radial(PLaplaceConfig(p=3.0, n=3, alpha=0.5), v0, v1)
        assert np.allclose(W2.provenance["nodes"], 0.0)

    def test_p_validation(self):
        with pytest.raises(ValueError):
            PLaplaceConfig(p=1.0, n=3)


class TestConstantsTable:
    def test_loadable_and_typed(self):
        rows = constants_table()
        assert len(rows) >= 15
        names = {r["name"] for r in rows}
        assert "hardy_punctured" in names and "multipole_pairwise_only" in names
        for r in rows:
            assert isinstance(r["constant"], float)
            assert r["anchor"]

    def test_values_match_formulas(self):
        rows = {(r["name"], r["n"], r["N"]): r["constant"] for r in constants_table()}
        assert rows[("hardy_punctured", 5, None)] == classical_hardy_constant(5)
        assert rows[("multipole_uniform_background", 3, 2)] == pytest.approx(2.0 / 9.0 * 0.25 * 4)
        assert rows[("multipole_pole_average", 3, 2)] == pytest.approx(0.1875)
        assert rows[("caccioppoli_p3", None, None)] == pytest.approx(8.0 / 27.0)
        assert rows[("rellich_classical", 5, None)] == pytest.approx(25.0 / 16.0)

    def test_write_copy(self, tmp_path):
        out = tmp_path / "constants.csv"
        catalog.write_constants_csv(out)
        assert out.read_text().startswith("#")
