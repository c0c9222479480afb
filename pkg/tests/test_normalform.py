"""
Unit tests for normalizers, mask transformation and generator sets.
"""

from fractions import Fraction

import pytest
from sympy import Symbol

from services.analysis import sum_rule_order
from services.construct import hermite_target
from services.core import ONE, AnalysisError
from services.jets import (
    dirac_jet,
    germ_product,
    jet_equal,
    phase_monomial_jet,
    row_from_components,
    sequence_jet,
)
from services.normalform import (
    LaurentMatrix,
    build_normalizer,
    generator_set,
    nabla,
    normalform_verify,
    normalizer_to_target,
    realize_from_jets,
    transform_mask,
)


@pytest.fixture
def cubic_filter(hermite_cubic):
    return sum_rule_order(hermite_cubic, 6).matching_filter.jet


class TestSequences:
    """Test suite for the scalar sequence helpers."""

    def test_nabla(self):
        assert nabla((2,)) == {(0,): ((1,),), (1,): ((-2,),), (2,): ((1,),)}

    def test_realize_recovers_bspline(self, bspline):
        """Test the principal-lattice realization of a^B_3 jets is a^B_3 itself."""
        assert realize_from_jets(sequence_jet(bspline(3), 3), 1, 3) == bspline(3).coeffs

    def test_realize_needs_enough_jets(self, bspline):
        with pytest.raises(AnalysisError, match="insufficient jet order"):
            realize_from_jets(sequence_jet(bspline(3), 2), 1, 3)

    def test_identity_is_strongly_invertible(self):
        unit = LaurentMatrix.identity(2, 3)
        assert unit.is_strongly_inverse()
        assert unit.to_dict()["inverse"]["coeffs"][0]["k"] == [0, 0]

    def test_symbol_and_failed_inverse(self):
        """Test 1 + z is not strongly inverted by the constant 1."""
        u = LaurentMatrix(dim=1, size=1, coeffs={(0,): ((ONE,),), (1,): ((ONE,),)}, inverse_coeffs={(0,): ((ONE,),)})
        z1 = Symbol("z1")
        assert u.symbol()[0, 0] == 1 + z1
        assert not u.is_strongly_inverse()

    def test_laurent_inverse_pair(self):
        """Test z and z^-1 invert each other."""
        shift = LaurentMatrix(dim=1, size=1, coeffs={(1,): ((ONE,),)}, inverse_coeffs={(-1,): ((ONE,),)})
        assert shift.is_strongly_inverse()
        assert shift.convolve(shift.inverse()).coeffs == {(0,): ((ONE,),)}


class TestNormalizer:
    """Test suite for normalizer construction."""

    def test_normalizer_for_hermite_cubic(self, cubic_filter):
        normalizer = build_normalizer(cubic_filter, 3)
        assert normalizer.is_strongly_inverse()
        got = germ_product(cubic_filter, normalizer.jet(3))
        assert jet_equal(got.component(0), dirac_jet(1, 3), 3)
        assert all(got.component(1).scalar(mu) == 0 for mu in got.indices())

    def test_pivot_when_first_component_vanishes(self):
        u = row_from_components([phase_monomial_jet((1,), (0,), 3), dirac_jet(1, 3)])
        normalizer = build_normalizer(u, 3)
        assert normalizer.is_strongly_inverse()

    def test_zero_row_is_rejected(self):
        u = row_from_components([phase_monomial_jet((1,), (0,), 3), phase_monomial_jet((2,), (0,), 3)])
        with pytest.raises(AnalysisError, match="N_0"):
            build_normalizer(u, 3)

    def test_scalar_normalizer_is_identity(self, bspline):
        assert build_normalizer(sequence_jet(bspline(3), 2), 2).coeffs == LaurentMatrix.identity(1, 1).coeffs

    def test_normalizer_to_hermite_target(self, cubic_filter, hermite_type):
        target = hermite_target(hermite_type, 3)
        normalizer = normalizer_to_target(cubic_filter, target, 3)
        assert normalizer.is_strongly_inverse()
        assert jet_equal(germ_product(cubic_filter, normalizer.jet(3)), target, 3)


class TestNormalForm:
    """Test suite for transformed masks and generator sets."""

    def test_transformed_mask_is_in_normal_form(self, hermite_cubic, cubic_filter):
        assert not normalform_verify(hermite_cubic, 3).ok
        normalized = transform_mask(hermite_cubic, build_normalizer(cubic_filter, 3))
        verdict = normalform_verify(normalized, 3)
        assert verdict.ok, verdict.failures

    def test_transformed_mask_keeps_sum_rules(self, hermite_cubic, cubic_filter):
        normalized = transform_mask(hermite_cubic, build_normalizer(cubic_filter, 3))
        assert sum_rule_order(normalized, 6).order == 4

    def test_size_mismatch(self, bspline, cubic_filter):
        with pytest.raises(AnalysisError, match="does not match"):
            transform_mask(bspline(3), build_normalizer(cubic_filter, 3))

    def test_generator_set(self, cubic_filter):
        normalizer = build_normalizer(cubic_filter, 3)
        generators = generator_set(normalizer, 3, 2, 1, cubic_filter)
        assert len(generators) == 2
        for gen in generators:
            annihilated = germ_product(cubic_filter, sequence_jet(gen, 3))
            assert all(x == 0 for mu in annihilated.indices() for x in annihilated.row(mu))

    def test_bivariate_generator_count(self):
        unit = LaurentMatrix.identity(2, 3)
        assert len(generator_set(unit, 1, 3, 2)) == 3 + 2

    def test_scalar_generators_are_differences(self):
        generators = generator_set(LaurentMatrix.identity(1, 1), 1, 1, 1)
        assert generators == [{(0,): ((Fraction(1),),), (1,): ((Fraction(-2),),), (2,): ((Fraction(1),),)}]
