import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyforge.numgrid import (
    SampledFunction,
    cumulative_integral,
    differentiate,
    integrate,
    make_log_grid,
    tail_integral_estimate,
)


class TestMakeLogGrid:
    def test_geometric_midpoint(self):
        g = make_log_grid(1.0, math.e ** 2, 3)
        assert np.allclose(g.nodes, [1.0, math.e, math.e ** 2], rtol=1e-14)

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            make_log_grid(1.0, 1.0, 5)

    def test_symmetry_about_one(self):
        g = make_log_grid(1e-4, 1e4, 9)
        assert g.nodes[4] == pytest.approx(1.0, abs=1e-14)

    def test_endpoints_exact_and_ratio_constant(self):
        g = make_log_grid(1e-6, 1e6, 8001)
        assert g.nodes[0] == 1e-6 and g.nodes[-1] == 1e6
        ratios = g.nodes[1:] / g.nodes[:-1]
        assert np.all(np.abs(ratios / ratios[0] - 1.0) < 1e-12)
        assert np.all(np.diff(g.nodes) > 0)

    @pytest.mark.parametrize("bad", [(0.0, 1.0, 5), (-1.0, 1.0, 5),
                                     (1.0, math.inf, 5), (1.0, 2.0, 2)])
    def test_bad_inputs(self, bad):
        with pytest.raises(ValueError):
            make_log_grid(*bad)


class TestSampledFunction:
    def test_nonfinite_rejected(self):
        g = make_log_grid(1.0, 10.0, 5)
        with pytest.raises(ValueError):
            SampledFunction(g, np.array([1.0, 2.0, np.nan, 1.0, 1.0]))

    def test_positivity_flag(self):
        g = make_log_grid(1.0, 10.0, 5)
        with pytest.raises(ValueError, match="positivity"):
            SampledFunction(g, np.array([1.0, -2.0, 3.0, 1.0, 1.0]), positivity=True)

    def test_interp_positive_preserved(self):
        g = make_log_grid(0.1, 10.0, 41)
        f = SampledFunction(g, 1.0 / g.nodes, positivity=True)
        probes = np.geomspace(0.11, 9.9, 200)
        assert np.all(f(probes) > 0)

    def test_eval_outside_raises(self):
        g = make_log_grid(1.0, 10.0, 5)
        f = SampledFunction(g, np.ones(5))
        with pytest.raises(ValueError):
            f(0.5)


class TestIntegrate:
    def test_one_over_t_exact(self):
        g = make_log_grid(0.5, 10.0, 101)
        f = SampledFunction(g, 1.0 / g.nodes)
        assert integrate(f, 1.0, math.e) == pytest.approx(1.0, abs=1e-13)

    def test_inverse_square(self):
        g = make_log_grid(0.5, 200.0, 3001)
        f = SampledFunction(g, g.nodes ** -2.0)
        assert integrate(f, 1.0, 100.0) == pytest.approx(0.99, abs=1e-6)

    def test_zero_function(self):
        g = make_log_grid(1.0, 10.0, 21)
        f = SampledFunction(g, np.zeros(21))
        assert integrate(f, 2.0, 5.0) == 0.0

    def test_range_outside_grid(self):
        g = make_log_grid(1.0, 10.0, 21)
        f = SampledFunction(g, np.ones(21))
        with pytest.raises(ValueError):
            integrate(f, 0.5, 5.0)

    @given(st.floats(0.11, 9.0), st.floats(0.11, 9.0), st.floats(0.11, 9.0))
    @settings(max_examples=40, deadline=None)
    def test_additive_over_subintervals(self, a, b, c):
        lo, mid, hi = sorted((a, b, c))
        g = make_log_grid(0.1, 10.0, 97)
        f = SampledFunction(g, np.sin(g.log_nodes) + 2.0)
        whole = integrate(f, lo, hi)
        parts = integrate(f, lo, mid) + integrate(f, mid, hi)
        assert whole == pytest.approx(parts, abs=1e-12 * (1 + abs(whole)))

    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_linear(self, c1, c2):
        g = make_log_grid(0.5, 5.0, 64)
        f1 = np.cos(g.log_nodes)
        f2 = g.nodes ** 0.3
        combo = SampledFunction(g, c1 * f1 + c2 * f2)
        val = integrate(combo, 0.7, 4.0)
        split = (c1 * integrate(SampledFunction(g, f1), 0.7, 4.0)
                 + c2 * integrate(SampledFunction(g, f2), 0.7, 4.0))
        assert val == pytest.approx(split, abs=1e-12 * (1 + abs(val)))


class TestDifferentiate:
    def test_log(self):
        g = make_log_grid(0.5, 50.0, 4001)
        f = SampledFunction(g, np.log(g.nodes))
        d = differentiate(f)
        interior = slice(1, -1)
        rel = np.abs(d.values[interior] * g.nodes[interior] - 1.0)
        assert rel.max() < 1e-8

    def test_constant(self):
        g = make_log_grid(1.0, 100.0, 101)
        d = differentiate(SampledFunction(g, np.full(101, 3.7)))
        assert np.abs(d.values).max() < 1e-12

    def test_square(self):
        g = make_log_grid(1.0, math.exp(4.0), 4001)
        d = differentiate(SampledFunction(g, g.nodes ** 2))
        interior = slice(1, -1)
        rel = np.abs(d.values[interior] / (2.0 * g.nodes[interior]) - 1.0)
        assert rel.max() < 1e-6

    def test_roundtrip_with_cumulative_integral(self):
        g = make_log_grid(0.5, 20.0, 2001)
        f = SampledFunction(g, np.exp(np.sin(g.log_nodes)))
        F = cumulative_integral(f)
        rec = differentiate(F)
        interior = slice(2, -2)
        rel = np.abs(rec.values[interior] / f.values[interior] - 1.0)
        h = g.step
        assert rel.max() < 10 * h * h


class TestTailEstimate:
    def test_power_tail(self):
        g = make_log_grid(1.0, 1e4, 2001)
        f = SampledFunction(g, g.nodes ** -2.0)
        tail, p = tail_integral_estimate(f, "upper")
        assert p == pytest.approx(-2.0, abs=1e-9)
        assert tail == pytest.approx(1e-4, rel=1e-9)

    def test_divergent_tail(self):
        g = make_log_grid(1.0, 1e4, 2001)
        f = SampledFunction(g, 1.0 / g.nodes)
        tail, p = tail_integral_estimate(f, "upper")
        assert math.isinf(tail)
