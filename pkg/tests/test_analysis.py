"""
Unit tests for mask analysis: spectral condition, matching filters,
sum rules, linear-phase moments and the interpolatory test.
"""

from fractions import Fraction

import pytest

from services.analysis import (
    _FilterSolver,
    classify,
    coset_sum_rule_check,
    derive_theta,
    interpolatory_check,
    is_generalized_hermite,
    left_unit_eigenvector,
    lpm_order,
    matching_filter,
    spectral_condition,
    sum_rule_order,
)
from services.construct import symmetry_complete
from services.core import AnalysisError, HermiteType, Mask, indices_of_degree
from services.registry import (
    BIRKHOFF_TYPE,
    DUAL_TYPE,
    LAGRANGE_TYPE,
    birkhoff_mask,
    dual_mask_1,
    get_example,
    lagrange_mask,
)

SCALAR = HermiteType.univariate([0])


class TestSpectralCondition:
    """Test suite for the eigenvalue conditions on a^(0)."""

    def test_hermite_cubic_passes(self, hermite_cubic):
        verdict = spectral_condition(hermite_cubic, 1)
        assert verdict.ok and verdict.simple
        assert verdict.moduli == [pytest.approx(1 / 8)]

    def test_bound_depends_on_degree(self, hermite_cubic):
        """Test 1/8 is too large once the bound is 2^-3."""
        assert not spectral_condition(hermite_cubic, 3).ok

    def test_non_simple_unit_eigenvalue(self):
        mask = Mask.from_list(0, [[[Fraction(1, 2), 0], [0, Fraction(1, 2)]]])
        verdict = spectral_condition(mask, 0)
        assert not verdict.simple
        with pytest.raises(AnalysisError, match="not simple"):
            left_unit_eigenvector(mask)

    def test_left_eigenvector_is_normalized(self, hermite_cubic):
        assert left_unit_eigenvector(hermite_cubic) == (1, 0)


class TestSumRules:
    """Test suite for matching filters and sum-rule orders."""

    @pytest.mark.parametrize("n", range(1, 7))
    def test_bspline_sum_rule_order(self, bspline, n):
        """Test a^B_n satisfies sum rules of order exactly n."""
        assert sum_rule_order(bspline(n), 8).order == n

    def test_hat_matching_filter(self, bspline):
        """Test the filter of a^B_2 has jets (1, -1, 5/6)."""
        filt = matching_filter(bspline(2), 2)
        assert [filt.jet.scalar((j,)) for j in range(3)] == [1, -1, Fraction(5, 6)]
        assert filt.printed(0, (2,)) == Fraction(5, 12)

    def test_cap_plus_one_when_everything_holds(self, bspline):
        assert sum_rule_order(bspline(6), 3).order == 4

    def test_hermite_cubic(self, hermite_cubic, hermite_type):
        result = sum_rule_order(hermite_cubic, 6)
        assert result.order == 4
        assert result.matching_filter.order == 3
        assert coset_sum_rule_check(hermite_cubic, result.matching_filter, 3)
        assert is_generalized_hermite(hermite_cubic, hermite_type, 6).ok
        assert lpm_order(hermite_cubic, hermite_type, 6) == 4

    def test_bspline_is_not_hermite_of_type_01(self, bspline, hermite_type):
        verdict = is_generalized_hermite(bspline(4), hermite_type, 6)
        assert not verdict.ok
        assert "multiplicity" in verdict.reason

    def test_sum_rules_fail_at_zero(self):
        """Test a mask whose cosets do not share the filter has order 0."""
        mask = Mask.scalar({(0,): Fraction(1, 2), (2,): Fraction(1, 2)})
        assert sum_rule_order(mask, 4).order == 0

    def test_joint_solve_keeps_rows_on_failure(self, hermite_cubic):
        """Test a failed joint solve leaves the last consistent rows in place."""
        solver = _FilterSolver(hermite_cubic, 4)
        assert solver.solve_jointly(3)
        assert not solver.solve_jointly(4)
        for total in range(4):
            assert all(solver.residual_free(mu) for mu in indices_of_degree(1, total))

    def test_spline_masks_have_distinct_filters(self):
        """Test the two Lagrange spline masks differ in the quadratic term of component 1."""
        first = sum_rule_order(get_example("ex6.4c").mask(), 6)
        second = sum_rule_order(get_example("ex6.4d").mask(), 6)
        assert first.order == second.order == 5
        assert first.matching_filter.printed(0, (2,)) == Fraction(-1, 6)
        assert second.matching_filter.printed(0, (2,)) == Fraction(-1, 12)
        for filt in (first.matching_filter, second.matching_filter):
            assert filt.printed(1, (1,)) == Fraction(1, 2)
            assert filt.printed(1, (2,)) == Fraction(1, 12)


class TestLinearPhaseMoments:
    """Test suite for linear-phase moments of the univariate families."""

    def test_birkhoff_family_has_order_six(self, rng):
        """Test random parameter tuples of the Birkhoff family keep order 6."""
        for _ in range(5):
            params = {name: Fraction(rng.randint(-8, 8), 512) for name in ("t1", "t2", "t3", "t4")}
            assert lpm_order(birkhoff_mask(params), BIRKHOFF_TYPE, 12) >= 6

    def test_birkhoff_sr10_point_filter(self):
        params, _facts = get_example("ex6.2a").variant("sr10")
        result = sum_rule_order(birkhoff_mask(params), 12)
        assert result.order == 10
        filt = result.matching_filter
        assert filt.printed(0, (6,)) == Fraction(-17, 12096)
        assert filt.printed(0, (8,)) == Fraction(1, 4320)
        assert filt.printed(1, (2,)) == 1
        assert filt.printed(1, (8,)) == Fraction(1, 252)

    def test_dual_mask_has_order_four(self):
        assert lpm_order(dual_mask_1({}), DUAL_TYPE, 8) == 4

    def test_lagrange_family_defaults(self):
        record = get_example("ex6.4a")
        mask = lagrange_mask(record.defaults)
        sr = sum_rule_order(mask, 8)
        assert sr.order == 6
        assert lpm_order(mask, LAGRANGE_TYPE, 8, sr) == 4


class TestInterpolatory:
    """Test suite for theta derivation and the interpolatory test."""

    def test_theta_for_hermite_type(self, hermite_type):
        th = derive_theta(hermite_type)
        assert th.theta == (1, 2)
        assert th.betas == ((0,), (0,))

    def test_theta_for_lagrange_type(self):
        """Test the half-shifted channel refers back to channel 1 with beta = 1."""
        th = derive_theta(LAGRANGE_TYPE)
        assert th.theta == (1, 1)
        assert th.betas == ((0,), (1,))

    def test_dual_type_is_incompatible(self):
        with pytest.raises(AnalysisError, match="incompatible"):
            derive_theta(DUAL_TYPE)

    def test_hermite_cubic_is_interpolatory(self, hermite_cubic, hermite_type):
        assert interpolatory_check(hermite_cubic, hermite_type).ok

    def test_bspline_witness(self, bspline):
        verdict = interpolatory_check(bspline(3), SCALAR)
        assert not verdict.ok
        assert verdict.witness["k"] == [0]

    def test_interpolatory_lagrange_family(self):
        record = get_example("ex6.4b")
        assert interpolatory_check(lagrange_mask(record.defaults), LAGRANGE_TYPE).ok


class TestClassify:
    """Test suite for the aggregate classification report."""

    def test_report_for_hermite_cubic(self, hermite_cubic, hermite_type):
        messages = []
        report = classify(hermite_cubic, hermite_type, 6, log_callback=messages.append)
        assert report.sr_order == 4
        assert report.lpm_order == 4
        assert report.hermite_type_ok and report.interpolatory_ok and report.spectral_ok
        assert report.theta == (1, 2)
        assert any("sum rules of order 4" in m for m in messages)
        assert report.to_dict()["matching_filter"]["order"] == 3

    def test_incompatible_type_becomes_warning(self):
        report = classify(dual_mask_1({}), DUAL_TYPE, 6)
        assert not report.interpolatory_ok
        assert report.theta is None
        assert any("incompatible" in w for w in report.warnings)


@pytest.mark.slow
class TestResonantFamilies:
    """Test suite for bivariate families whose filters pass a resonant degree."""

    def test_dual_gradient_family_reaches_order_five(self):
        """Test the degree-3 free variables are fixed so that degree 4 still holds."""
        result = sum_rule_order(get_example("ex6.6b").mask(), 6)
        assert result.order == 5
        assert any("free variable" in w for w in result.warnings)

    def test_mixed_family_sign(self):
        """Test the corrected a(1,1) entry gives order 5 and the flipped sign only order 2."""
        record = get_example("ex6.7a")
        assert sum_rule_order(record.mask(), 6).order == 5
        reps = dict(record.representatives())
        top, bottom = reps[(1, 1)]
        reps[(1, 1)] = (top, (bottom[0], bottom[1] - Fraction(6, 256)))
        flipped = symmetry_complete(reps, record.descriptor(), 2)
        assert sum_rule_order(flipped, 6).order == 2
