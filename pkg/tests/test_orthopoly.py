import numpy as np
import pytest

from bandzeros.errors import InvariantError
from bandzeros.orthopoly import (
    count_zeros,
    discretize,
    interlacing_check,
    orthonormal_eval,
    orthonormal_eval_array,
    pell_data,
    polynomial_zeros,
    stieltjes_recurrence,
)
from conftest import make_spec


@pytest.fixture(scope="module")
def cheb_rec():
    spec = make_spec([-1.0, 1.0])
    return stieltjes_recurrence(discretize(spec, 512), 60)


@pytest.fixture(scope="module")
def asym_spec(asym2):
    return make_spec(asym2.endpoints, [1.0])


@pytest.fixture(scope="module")
def asym_rec(asym_spec):
    return stieltjes_recurrence(discretize(asym_spec, 512), 45)


class TestDiscretize:
    def test_nodes_and_weights(self, asym_spec):
        meas = discretize(asym_spec, 64)
        sys = asym_spec.system
        assert np.all(meas.weights > 0)
        assert all(sys.in_E(x, tol=1e-12) for x in meas.nodes)


class TestRecurrence:
    def test_chebyshev_coefficients(self, cheb_rec):
        # weight 1/(pi sqrt(1-x^2)): alpha = 0, beta_1 = 1/2, beta_k = 1/4
        assert np.max(np.abs(cheb_rec.alpha[:40])) < 1e-12
        assert abs(cheb_rec.beta[1] - 0.5) < 1e-12
        assert np.max(np.abs(cheb_rec.beta[2:40] - 0.25)) < 1e-12

    def test_zeros_real_sorted_interlacing(self, asym_rec):
        z10 = polynomial_zeros(asym_rec, 10)
        z11 = polynomial_zeros(asym_rec, 11)
        assert np.all(np.diff(z10) > 0)
        # classical interlacing of consecutive orthogonal polynomials
        assert np.all(z11[:-1] < z10) and np.all(z10 < z11[1:])

    def test_eval_consistency(self, asym_rec):
        xs = np.array([0.3, 1.5, 2.9])
        arr = orthonormal_eval_array(asym_rec, 8, xs)
        for x, v in zip(xs, arr):
            mant, expo = orthonormal_eval(asym_rec, 8, x)
            assert np.isclose(mant * 2.0**expo, v)

    def test_zero_hull(self, asym_rec, asym2):
        z = polynomial_zeros(asym_rec, 30)
        assert z[0] > asym2.endpoints[0] - 1e-9
        assert z[-1] < asym2.endpoints[-1] + 1e-9


class TestCountZeros:
    def test_classification(self, asym2):
        rep = count_zeros(asym2, [0.2, 0.8, 1.5, 2.5, 3.0, 4.2])
        assert rep.band_counts == (2, 2)
        assert rep.gap_occupancy == (1,)
        assert rep.gap_zero_locations == (1.5,)
        assert rep.exterior_count == 1

    def test_two_gap_zeros_rejected(self, asym2):
        with pytest.raises(InvariantError):
            count_zeros(asym2, [1.3, 1.7])

    def test_record_is_serializable(self, asym2):
        rep = count_zeros(asym2, [0.2, 2.5])
        rec = rep.to_record()
        assert rec["band_counts"] == [1, 1]
        assert rec["exterior_count"] == 0


class TestPell:
    def test_residual_and_ghat(self, asym_spec, asym2):
        pell = pell_data(asym_spec, 15)
        assert pell.residual <= 1e-6
        assert pell.m == 15 + 1 - 2
        roots = np.sort(np.roots(pell.g_hat[::-1]))
        lo, hi = asym2.gaps[0]
        # g-hat has degree l-1 with exactly one zero in each gap closure
        assert len(roots) == 1
        assert lo - 1e-9 <= roots[0].real <= hi + 1e-9
        assert abs(roots[0].imag) < 1e-9

    def test_gap_point_inside_closure(self, asym_spec, asym2):
        pell = pell_data(asym_spec, 21)
        lo, hi = asym2.gaps[0]
        assert lo - 1e-9 <= pell.gap_points[0] <= hi + 1e-9
        assert pell.gap_signs[0] in (-1, 1)

    def test_inadmissible_factorization_rejected(self, asym2):
        # R positive on both bands cannot absorb the sign flip of 1/h
        spec = make_spec(asym2.endpoints, [1.0, 2.0])
        with pytest.raises(InvariantError):
            pell_data(spec, 12)

    def test_interlacing(self, asym_spec):
        rep = interlacing_check(asym_spec, 14)
        assert rep.passed


class TestSingleInterval:
    def test_chebyshev_zeros(self, cheb_rec):
        n = 12
        z = polynomial_zeros(cheb_rec, n)
        exact = np.sort(np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)))
        assert np.max(np.abs(z - exact)) < 1e-10
