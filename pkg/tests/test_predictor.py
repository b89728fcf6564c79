import numpy as np
import pytest

from bandzeros import orthopoly
from bandzeros.geometry import PolynomialFactorization, SmoothWeight, WeightSpec
from bandzeros.predictor import (
    accumulation_experiment,
    compare,
    compute_V,
    forecast_gaps,
    rational_periodicity,
    verify_congruence,
    weight_transform,
)
from bandzeros.surface import GapPoint, normalize_differentials, period_matrix
from conftest import make_spec


@pytest.fixture(scope="module")
def asym_ctx(asym2):
    basis = normalize_differentials(asym2)
    return basis, period_matrix(asym2, basis)


class TestWeightTransform:
    def test_trivial_weight_vanishes(self, asym2, asym_ctx):
        basis, period = asym_ctx
        for spec in (
            make_spec(asym2.endpoints, [1.0]),
            WeightSpec(
                PolynomialFactorization(asym2, [1.0]),
                SmoothWeight(lambda x: np.ones_like(x)),
            ),
        ):
            phi = weight_transform(asym2, basis, spec, period)
            assert np.max(np.abs(phi.values)) < 1e-9

    def test_closed_form_matches_integral(self, asym2, asym_ctx):
        # for all-positive-sign weights the closed form and the boundary
        # integral must agree exactly, not only modulo the period lattice
        basis, period = asym_ctx
        spec = make_spec(asym2.endpoints, [1.0],
                         [(1.4 + 0.3j, 1, 1), (1.4 - 0.3j, 1, 1)])
        phi = weight_transform(asym2, basis, spec, period)
        assert phi.identity_defect < 1e-8

    def test_sign_flip_changes_transform(self, asym2, asym_ctx):
        basis, period = asym_ctx
        plus = weight_transform(
            asym2, basis, make_spec(asym2.endpoints, [], [(4.0, 1, 1)]), period
        )
        minus = weight_transform(
            asym2, basis, make_spec(asym2.endpoints, [], [(4.0, 1, -1)]), period
        )
        assert np.max(np.abs(plus.values - minus.values)) > 1e-3


class TestComputeV:
    def test_single_band_trivial(self):
        spec = make_spec([-1.0, 1.0])
        sys = spec.system
        basis = normalize_differentials(sys)
        period = period_matrix(sys, basis)
        pv = compute_V(sys, period, spec, 17)
        assert pv.predicted_counts == (17,)
        assert pv.interior_flag

    def test_conservation(self, asym2, asym_ctx):
        basis, period = asym_ctx
        spec = make_spec(asym2.endpoints, [1.0])
        for n in (12, 25, 33):
            pv = compute_V(asym2, period, spec, n, basis=basis)
            assert pv.total == n

    def test_exterior_attractor_counted(self, asym2, asym_ctx):
        basis, period = asym_ctx
        spec = make_spec(asym2.endpoints, [], [(4.0, 1, -1)])
        pv = compute_V(asym2, period, spec, 20, basis=basis)
        assert pv.predicted_exterior == 1
        assert pv.total == 20


class TestForecast:
    def test_matches_measured_gap_data(self, asym2, asym_ctx):
        basis, period = asym_ctx
        spec = make_spec(asym2.endpoints, [1.0])
        for n in (20, 27):
            fc = forecast_gaps(asym2, basis, period, spec, n)
            pell = orthopoly.pell_data(spec, n)
            p = GapPoint(0, pell.gap_points[0], pell.gap_signs[0]).canonical(asym2)
            assert abs(fc.points[0].x - p.x) < 1e-4 * asym2.span
            assert fc.deltas[0] == p.sheet
            assert fc.residual < 1e-8


class TestCongruence:
    def test_defect_small_and_flip_control(self, asym2, asym_ctx):
        basis, period = asym_ctx
        spec = make_spec(asym2.endpoints, [], [(1.4, 1, 1)])
        n = 16
        pell = orthopoly.pell_data(spec, n)
        rep = verify_congruence(asym2, basis, period, spec, n, pell)
        assert rep.defect <= 1e-6
        # negative control: flipping the measured sheet sign must break it
        import dataclasses
        flipped = dataclasses.replace(
            pell, gap_signs=tuple(-d for d in pell.gap_signs)
        )
        bad = verify_congruence(asym2, basis, period, spec, n, flipped)
        assert bad.defect > 1e-2


class TestCompare:
    def test_symmetric_two_band(self, sym2):
        spec = make_spec(sym2.endpoints, list(sym2.endpoints))
        table = compare(spec, range(2, 61))
        assert table.max_defect <= 1
        assert table.flagged_exact

    def test_gap_weight_zero(self, asym2):
        spec = make_spec(asym2.endpoints, [], [(1.4, 1, 1)])
        table = compare(spec, range(20, 41))
        assert table.max_defect <= 1
        assert table.flagged_exact
        assert table.occupancy_match_rate >= 0.9


class TestExperiments:
    def test_rational_increments(self, sym2):
        spec = make_spec(sym2.endpoints, list(sym2.endpoints))
        rep = rational_periodicity(spec, 2, 21, range(4), check_pell=False)
        assert rep.k_vec == (1, 1)
        assert rep.increments_exact

    def test_accumulation_targets(self, sym2):
        spec = make_spec(sym2.endpoints, list(sym2.endpoints))
        acc = accumulation_experiment(spec, 40, targets=[(0, 0.0)])
        # the symmetric rational case accumulates on the single point 0
        assert acc.distinct_points == (1,)
        assert acc.target_distances[0] < 1e-6
