"""
Unit tests for mask construction: vectorization, conversion to a
prescribed type, interpolatory masks from interpolants and symmetry.
"""

from fractions import Fraction

import pytest

from services.analysis import interpolatory_check, is_generalized_hermite, sum_rule_order
from services.construct import (
    coset_representatives,
    describe_symmetry,
    example12_mask,
    existence_pipeline,
    hermite_convert,
    interpolant_to_mask,
    restrict_to_representatives,
    symmetry_check,
    symmetry_complete,
    symmetry_descriptor,
    symmetry_matrix,
    tensor_mask,
    tensor_power,
    vectorize_mask,
    vectorized_type,
)
from services.core import AnalysisError, HermiteType, Mask, SymmetryError
from services.registry import GRADIENT_TYPE, LAGRANGE_TYPE, get_example
from services.splines import hermite_theta

HALF = Fraction(1, 2)


class TestTensorAndVectorize:
    """Test suite for tensor products and vectorization."""

    def test_tensor_mask_support(self, bspline):
        mask = tensor_mask(bspline(2), bspline(1))
        assert mask.dim == 2
        assert mask[(1, 0)] == ((Fraction(1, 4),),)
        assert tensor_power(bspline(2), 2).symbol_at_zero() == ((1,),)

    def test_coset_representatives(self):
        assert coset_representatives([[2]], 1) == [(0,), (1,)]
        assert len(coset_representatives([[2, 0], [0, 1]], 2)) == 2

    def test_vectorized_bspline_keeps_sum_rules(self, bspline):
        """Test the 2x2 vectorization of a^B_4 still has sum rules of order 4."""
        vector = vectorize_mask(bspline(4), [[2]])
        assert vector.multiplicity == 2
        assert sum_rule_order(vector, 6).order == 4

    def test_vectorized_type_is_lagrange(self):
        assert vectorized_type(HermiteType.scalar(1), [[2]]) == LAGRANGE_TYPE

    def test_vectorized_type_keeps_orders(self, hermite_type):
        htype = vectorized_type(hermite_type, [[2]])
        assert htype.nus == ((0,), (1,), (0,), (1,))
        assert htype.taus == ((0,), (0,), (HALF,), (HALF,))

    def test_singular_dilation(self, bspline):
        with pytest.raises(AnalysisError):
            vectorize_mask(bspline(2), [[0]])


class TestConversion:
    """Test suite for conversion to a generalized Hermite type."""

    def test_existence_pipeline_birkhoff(self):
        htype = HermiteType.univariate([0, 2])
        mask = existence_pipeline(htype)
        assert mask.multiplicity == 2
        assert is_generalized_hermite(mask, htype, 6).ok

    def test_existence_pipeline_hermite(self, hermite_type):
        mask = existence_pipeline(hermite_type)
        verdict = is_generalized_hermite(mask, hermite_type, 6)
        assert verdict.ok
        assert verdict.sr_order >= 3

    def test_convert_size_mismatch(self, bspline):
        with pytest.raises(AnalysisError, match="size mismatch"):
            hermite_convert(bspline(4), HermiteType.univariate([0, 1]))

    def test_convert_needs_sum_rules(self, bspline):
        vector = vectorize_mask(bspline(2), [[2]])
        with pytest.raises(AnalysisError, match="insufficient sum rules"):
            hermite_convert(vector, HermiteType.univariate([0, 2]))


class TestInterpolantMasks:
    """Test suite for masks read off from interpolants."""

    def test_hermite_interpolant_gives_hermite_cubic(self, hermite_cubic, hermite_type):
        assert interpolant_to_mask(hermite_theta(1), hermite_type) == hermite_cubic

    def test_single_copy_is_hermite_cubic(self, hermite_cubic):
        mask, htype = example12_mask(1, 1)
        assert mask == hermite_cubic
        assert htype == HermiteType.univariate([0, 1])

    def test_two_copies_are_interpolatory(self):
        mask, htype = example12_mask(1, 2)
        assert mask.multiplicity == 4
        assert interpolatory_check(mask, htype).ok

    def test_bivariate_interpolant_is_rejected(self, hermite_type):
        with pytest.raises(AnalysisError, match="d = 1"):
            interpolant_to_mask(hermite_theta(1), GRADIENT_TYPE)


class TestSymmetry:
    """Test suite for symmetry matrices, completion and checks."""

    def test_z2_matrix_flips_odd_orders(self, hermite_type):
        assert symmetry_matrix(((-1,),), hermite_type) == ((1, 0), (0, -1))

    def test_gradient_type_under_swap(self):
        s = symmetry_matrix(((0, 1), (1, 0)), GRADIENT_TYPE)
        assert s == ((1, 0, 0), (0, 0, 1), (0, 1, 0))

    def test_repeated_orders_are_ambiguous(self):
        with pytest.raises(SymmetryError, match="ambiguous"):
            symmetry_descriptor("Z2", LAGRANGE_TYPE)

    def test_unknown_group(self, hermite_type):
        with pytest.raises(SymmetryError, match="unknown symmetry group"):
            symmetry_descriptor("D5", hermite_type)

    def test_hermite_cubic_is_symmetric(self, hermite_cubic, hermite_type):
        descriptor = symmetry_descriptor("Z2", hermite_type)
        assert symmetry_check(hermite_cubic, hermite_type, descriptor).ok
        assert describe_symmetry(descriptor)["order"] == 2

    def test_restrict_then_complete(self, hermite_cubic, hermite_type):
        descriptor = symmetry_descriptor("Z2", hermite_type)
        reps = restrict_to_representatives(hermite_cubic, descriptor)
        assert sorted(reps) == [(-1,), (0,)]
        assert symmetry_complete(reps, descriptor, 2) == hermite_cubic

    def test_orbit_conflict(self, hermite_type):
        descriptor = symmetry_descriptor("Z2", hermite_type)
        with pytest.raises(SymmetryError, match="orbit conflict") as info:
            symmetry_complete({(0,): ((1, 1), (0, 1))}, descriptor, 2)
        assert info.value.witness["k"] == [0]

    def test_non_lattice_center(self, hermite_type):
        descriptor = symmetry_descriptor("Z2", hermite_type, [Fraction(1, 3)])
        with pytest.raises(SymmetryError, match="non-lattice"):
            symmetry_complete({(0,): ((1, 0), (0, 1))}, descriptor, 2)

    def test_registry_mask_is_symmetric(self):
        record = get_example("ex6.2a")
        descriptor = symmetry_descriptor("Z2", record.htype)
        assert symmetry_check(record.mask(), record.htype, descriptor).ok

    def test_broken_symmetry_has_witness(self, hermite_cubic, hermite_type):
        coeffs = dict(hermite_cubic.coeffs)
        coeffs[(1,)] = ((Fraction(1, 4), Fraction(-3, 8)), (Fraction(1, 16), Fraction(1, 16)))
        broken = Mask(dim=1, multiplicity=2, coeffs=coeffs)
        verdict = symmetry_check(broken, hermite_type, symmetry_descriptor("Z2", hermite_type))
        assert not verdict.ok
        assert verdict.witness["k"] in ([-1], [1])

    def test_shifted_type_is_unsupported(self, hermite_cubic):
        descriptor = symmetry_descriptor("Z2", HermiteType.univariate([0, 1]))
        with pytest.raises(SymmetryError, match="unsupported symmetry form"):
            symmetry_check(hermite_cubic, HermiteType.univariate([0, 1], [0, HALF]), descriptor)

