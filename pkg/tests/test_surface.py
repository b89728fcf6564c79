import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandzeros.geometry import IntervalSystem, eval_H
from bandzeros.quadrature import band_integral
from bandzeros.surface import (
    GapPoint,
    abel_gap_integral,
    gap_point_from_theta,
    lattice_reduce,
    normalize_differentials,
    period_matrix,
    solve_inversion,
)


@pytest.fixture(scope="module")
def basis2(asym2):
    return normalize_differentials(asym2)


@pytest.fixture(scope="module")
def period2(asym2, basis2):
    return period_matrix(asym2, basis2)


@pytest.fixture(scope="module")
def basis3(tri3):
    return normalize_differentials(tri3)


@pytest.fixture(scope="module")
def period3(tri3, basis3):
    return period_matrix(tri3, basis3)


class TestNormalization:
    def test_alpha_periods(self, tri3, basis3):
        # the alpha period of phi_k over band j is 2*pi*i*delta_jk; on the
        # band the differential is i*(-1)^(l-j)*q_k/sqrt(-H) from above,
        # doubled for the full loop
        l = tri3.l
        for j, band in enumerate(tri3.bands[: basis3.genus]):
            sign = (-1.0) ** (l - (j + 1))
            for k in range(basis3.genus):
                val = -2.0 * sign * band_integral(
                    lambda x, k=k: basis3.q(k, x)
                    / np.sqrt(np.abs(eval_H(tri3, x))),
                    band,
                )
                assert abs(val - 2.0 * np.pi * (j == k)) < 1e-8

    def test_genus_zero(self):
        sys = IntervalSystem([-1.0, 1.0])
        basis = normalize_differentials(sys)
        assert basis.genus == 0
        period = period_matrix(sys, basis)
        assert period.B.size == 0 and period.omega.shape == (1,)


class TestPeriods:
    def test_loop_rows_are_lattice_differences(self, period3):
        B = period3.B
        loops = period3.gap_loops
        g = B.shape[0]
        for j in range(g):
            nxt = B[j + 1] if j + 1 < g else np.zeros(g)
            assert np.allclose(loops[j], B[j] - nxt, atol=1e-12)

    def test_negative_definite(self, period2, period3):
        for p in (period2, period3):
            ev = np.linalg.eigvalsh(p.B_sym)
            assert np.all(ev < 0)


class TestGapPoints:
    @given(st.integers(0, 1), st.floats(0.01, 2 * np.pi - 0.01))
    @settings(max_examples=50, deadline=None)
    def test_theta_roundtrip(self, j, theta):
        sys = IntervalSystem([0.0, 1.0, 2.0, 3.5, 5.0, 6.0])
        p = gap_point_from_theta(sys, j, theta)
        assert abs(p.theta(sys) - theta) < 1e-10

    def test_canonical_clips(self, asym2):
        p = GapPoint(0, 0.9, -1).canonical(asym2)
        assert p.x == 1.0 and p.sheet == +1

    def test_abel_endpoints(self, tri3, basis3, period3):
        # the base point sits at theta=pi (left gap endpoint); the chart is
        # odd under sheet reflection and theta=0 covers half the loop
        for j in range(2):
            zero = abel_gap_integral(tri3, basis3, gap_point_from_theta(tri3, j, np.pi))
            assert np.max(np.abs(zero)) < 1e-10
            half = abel_gap_integral(tri3, basis3, gap_point_from_theta(tri3, j, 0.0))
            assert np.allclose(2.0 * half, period3.gap_loops[j], atol=1e-8)
            up = abel_gap_integral(
                tri3, basis3, gap_point_from_theta(tri3, j, np.pi / 2)
            )
            dn = abel_gap_integral(
                tri3, basis3, gap_point_from_theta(tri3, j, 3 * np.pi / 2)
            )
            assert np.allclose(up, -dn, atol=1e-10)


class TestLatticeReduce:
    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    @settings(max_examples=60, deadline=None)
    def test_idempotent_and_exact(self, vec):
        B = np.array([[-2.0, 0.3], [0.3, -1.5]])
        v = np.array(vec)
        lam, m = lattice_reduce(v, B)
        assert np.all(np.abs(lam) <= 0.5 + 1e-12)
        assert np.allclose(B.T @ (lam + m), v, atol=1e-9)
        lam2, m2 = lattice_reduce(B.T @ lam, B)
        assert np.allclose(lam2, lam, atol=1e-9)
        assert np.all(m2 == 0)


class TestInversion:
    def test_round_trip(self, asym2, basis2, period2):
        v = period2.B_sym.T @ np.array([0.3])
        sol = solve_inversion(asym2, basis2, period2, v)
        a = abel_gap_integral(asym2, basis2, sol.points[0])
        lam, _ = lattice_reduce(a - v, period2.B_sym)
        assert np.max(np.abs(lam)) < 1e-7
