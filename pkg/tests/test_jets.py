"""
Unit tests for the jet algebra: sequence jets, Leibniz products,
reciprocals, dilation and linear substitution.
"""

from fractions import Fraction

import pytest

from services.core import AnalysisError, seq_convolve
from services.jets import (
    Jet,
    dirac_jet,
    first_mismatch,
    germ_dilate,
    germ_product,
    germ_reciprocal,
    germ_substitute,
    jet_equal,
    jet_from_expansion,
    linear_power,
    phase_monomial_jet,
    row_from_components,
    sequence_jet,
    upsample,
    vanishes_to,
)


def _random_sequence(random_fraction, rng, d: int, shape=(1, 1), size: int = 4):
    seq = {}
    for _ in range(size):
        k = tuple(rng.randint(-2, 2) for _ in range(d))
        seq[k] = tuple(tuple(random_fraction() for _ in range(shape[1])) for _ in range(shape[0]))
    return seq


class TestSequenceJet:
    """Test suite for jets of finitely supported sequences."""

    def test_bspline2_jets_at_zero_and_pi(self, bspline):
        """Test N_mu of a^B_2 at omega = 0 and omega = 1."""
        a = bspline(2)
        at_zero = sequence_jet(a, 2)
        at_pi = sequence_jet(a, 2, (1,))
        assert [at_zero.scalar((j,)) for j in range(3)] == [1, 1, Fraction(3, 2)]
        assert [at_pi.scalar((j,)) for j in range(3)] == [0, 0, Fraction(1, 2)]

    def test_empty_sequence_raises(self):
        with pytest.raises(AnalysisError):
            sequence_jet({}, 2)

    def test_phase_monomial_matches_shifted_delta(self):
        """Test e^{i xi} has the jets of delta(. + 1)."""
        assert jet_equal(phase_monomial_jet((0,), (1,), 5), sequence_jet({(-1,): ((1,),)}, 5))

    def test_printed_coefficients_convert_to_jets(self):
        """Test coefficient c of (i xi)^mu maps to N_mu = (-1)^|mu| mu! c."""
        jet = jet_from_expansion({(0,): 1, (2,): Fraction(-3, 49), (3,): Fraction(1, 6)}, 1, 4)
        assert jet.scalar((2,)) == Fraction(-6, 49)
        assert jet.scalar((3,)) == -1
        assert jet.printed((2,))[0][0] == Fraction(-3, 49)

    def test_monomial_jet_equals_printed_monomial(self):
        assert jet_equal(phase_monomial_jet((2,), (0,), 4), jet_from_expansion({(2,): 1}, 1, 4))


class TestJetAlgebra:
    """Test suite for products, reciprocals and substitutions."""

    @pytest.mark.parametrize("d", [1, 2])
    def test_convolution_is_jet_product(self, rng, random_fraction, d):
        """Test sequence_jet(u * v) equals the Leibniz product of jets on random cases."""
        for _ in range(100):
            u = _random_sequence(random_fraction, rng, d)
            v = _random_sequence(random_fraction, rng, d)
            order = 3
            lhs = sequence_jet(seq_convolve(u, v), order) if seq_convolve(u, v) else None
            rhs = germ_product(sequence_jet(u, order), sequence_jet(v, order))
            if lhs is None:
                assert vanishes_to(rhs, order)
            else:
                assert jet_equal(lhs, rhs)

    def test_matrix_convolution_is_jet_product(self, rng, random_fraction):
        """Test the homomorphism for 1x2 rows against 2x2 matrix sequences."""
        for _ in range(20):
            u = _random_sequence(random_fraction, rng, 1, (1, 2))
            a = _random_sequence(random_fraction, rng, 1, (2, 2))
            product = seq_convolve(u, a)
            if not product:
                continue
            assert jet_equal(sequence_jet(product, 3),
                             germ_product(sequence_jet(u, 3), sequence_jet(a, 3)))

    def test_product_shape_mismatch_raises(self):
        row = Jet(dim=1, order=2, shape=(1, 2), entries={})
        with pytest.raises(AnalysisError, match="shape mismatch"):
            germ_product(row, row)

    def test_reciprocal_inverts(self, bspline):
        f = sequence_jet(bspline(3), 5)
        assert jet_equal(germ_product(f, germ_reciprocal(f)), dirac_jet(1, 5))

    def test_reciprocal_of_vanishing_germ_raises(self, bspline):
        with pytest.raises(AnalysisError, match="non-invertible germ"):
            germ_reciprocal(sequence_jet(bspline(2), 3, (1,)))

    def test_upsample_dilates_jets(self, hermite_cubic):
        """Test N_mu(upsample(u, 2)) = 2^|mu| N_mu(u)."""
        assert jet_equal(sequence_jet(upsample(hermite_cubic.coeffs, 2), 4),
                         germ_dilate(sequence_jet(hermite_cubic, 4), 2))

    def test_linear_power_expands(self):
        """Test (M xi)^nu for a shear."""
        assert linear_power(((1, 1), (0, 1)), (2, 0)) == {(2, 0): 1, (1, 1): 2, (0, 2): 1}

    def test_substitute_swap_exchanges_indices(self, rng, random_fraction):
        u = _random_sequence(random_fraction, rng, 2)
        f = sequence_jet(u, 3)
        swapped = germ_substitute(f, ((0, 1), (1, 0)))
        for mu in f.indices():
            assert swapped.scalar(mu) == f.scalar((mu[1], mu[0]))

    def test_substitute_matches_dilation(self, bspline):
        f = sequence_jet(bspline(4), 4)
        assert jet_equal(germ_substitute(f, ((2,),)), germ_dilate(f, 2))

    def test_first_mismatch_and_row_components(self):
        one = phase_monomial_jet((0,), (0,), 3)
        shifted = phase_monomial_jet((0,), (Fraction(1, 2),), 3)
        row = row_from_components([one, shifted])
        assert row.shape == (1, 2)
        assert first_mismatch(row.component(0), row.component(1)) == (1,)
        assert first_mismatch(one, one) is None
