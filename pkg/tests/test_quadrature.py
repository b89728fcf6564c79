import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandzeros.errors import QuadratureError
from bandzeros.quadrature import (
    band_integral,
    cos_rule,
    gap_integral,
    partial_integral,
    pv_gap_integral,
    segment_integral,
    tail_integral,
)


class TestCosRule:
    def test_weights_positive_nodes_interior(self):
        rule = cos_rule((0.0, 2.0), 64)
        assert np.all(rule.weights > 0)
        assert np.all((rule.nodes > 0.0) & (rule.nodes < 2.0))

    def test_absorbs_endpoint_singularity(self):
        # integral of 1/sqrt(1-x^2) over (-1,1) equals pi
        rule = cos_rule((-1.0, 1.0), 128)
        val = np.sum(rule.weights / np.sqrt(1.0 - rule.nodes**2))
        assert abs(val - np.pi) < 1e-12


class TestIntervalIntegrals:
    def test_polynomial_exact(self):
        val = band_integral(lambda x: 3.0 * x**2, (1.0, 2.0))
        assert abs(val - 7.0) < 1e-10
        val = gap_integral(lambda x: np.exp(x), (0.0, 1.0))
        assert abs(val - (np.e - 1.0)) < 1e-10

    def test_inverse_sqrt_blowup(self):
        val = band_integral(lambda x: 1.0 / np.sqrt(x * (1.0 - x)), (0.0, 1.0))
        assert abs(val - np.pi) < 1e-10

    def test_partial_matches_closed_form(self):
        # integral of 1/(2 sqrt(x)) from 0 to t is sqrt(t)
        for t in (0.25, 0.7, 1.0):
            val = partial_integral(
                lambda x: 0.5 / np.sqrt(np.abs(x)), (0.0, 1.0), t
            )
            assert abs(val - np.sqrt(t)) < 1e-9

    def test_partial_rejects_outside(self):
        with pytest.raises(ValueError):
            partial_integral(lambda x: x, (0.0, 1.0), 2.0)


class TestPrincipalValue:
    @given(st.floats(0.15, 0.85), st.floats(-3, 3))
    @settings(max_examples=40, deadline=None)
    def test_constant_closed_form(self, frac, c):
        lo, hi = 0.5, 2.5
        x0 = lo + frac * (hi - lo)
        val = pv_gap_integral(lambda x: np.full_like(x, c), (lo, hi), x0)
        exact = c * np.log((hi - x0) / (x0 - lo))
        assert abs(val - exact) < 1e-9 * max(1.0, abs(exact))

    def test_odd_symmetry_cancels(self):
        val = pv_gap_integral(lambda x: np.ones_like(x), (-1.0, 1.0), 0.0)
        assert abs(val) < 1e-12


class TestTails:
    def test_power_law(self):
        val = tail_integral(lambda x: x**-2.0, 1.0)
        assert abs(val - 1.0) < 1e-9

    def test_sqrt_endpoint(self):
        # integral over (1, inf) of dx / (sqrt(x-1) * x^2) equals pi/2
        val = tail_integral(
            lambda x: 1.0 / (np.sqrt(np.abs(x - 1.0)) * x**2), 1.0
        )
        assert abs(val - 0.5 * np.pi) < 1e-8

    def test_divergent_rejected(self):
        with pytest.raises(QuadratureError):
            tail_integral(lambda x: 1.0 / x, 1.0)


class TestSegments:
    def test_straight_segment(self):
        val = segment_integral(lambda z: np.ones_like(z), 0.0, 1.0 + 2.0j)
        assert abs(val - (1.0 + 2.0j)) < 1e-12

    def test_sqrt_at_start(self):
        val = segment_integral(lambda z: 1.0 / np.sqrt(z), 0.0, 1.0,
                               sqrt_at_start=True)
        assert abs(val - 2.0) < 1e-10
