"""
Unit tests for exact piecewise polynomials and the closed-form basis
functions.
"""

import json
from fractions import Fraction

import pytest
from sympy import Rational

from services.core import AnalysisError, HermiteType, RegistryError
from services.registry import get_example
from services.splines import (
    PiecewisePoly,
    Polynomial,
    SPLINE_IDS,
    SplineVector,
    bspline as bspline_function,
    dump_spline,
    example12_interpolant,
    hermite_theta,
    interpolation_check,
    refinement_residual,
    registry_spline,
)


class TestPolynomial:
    """Test suite for exact polynomial arithmetic."""

    def test_arithmetic(self):
        p = Polynomial.linear(1, -1)           # x - 1
        q = p * p
        assert q(3) == 4
        assert q.derivative()(3) == 4
        assert (q - p)(0) == 2
        assert q.antiderivative()(1) == Fraction(1, 3)

    def test_compose_affine(self):
        p = Polynomial.x() ** 2
        assert p.compose_affine(-1, 1)(3) == 4

    def test_truncated_reciprocal(self):
        """Test 1/(1 - x) = 1 + x + x^2 + ... to order 3."""
        r = Polynomial.linear(-1, 1).truncated_reciprocal(3)
        assert r.to_list() == ["1", "1", "1", "1"]

    def test_sympy_round_trip(self):
        """Test the stored coefficients and the QQ polynomial agree."""
        p = Polynomial((Fraction(1, 2), 0, Fraction(-3, 4)))
        assert p.poly.all_coeffs() == [Rational(-3, 4), 0, Rational(1, 2)]
        assert Polynomial.from_poly(p.poly) == p
        assert p.derivative(0) == p
        assert (p ** 0).coeffs == (1,)

    def test_reciprocal_of_quadratic(self):
        """Test (1 + x + x^2) times its truncated reciprocal is 1 + O(x^5)."""
        p = Polynomial((1, 1, 1))
        assert (p * p.truncated_reciprocal(4)).truncate(4) == Polynomial.constant(1)

    def test_non_invertible_germ(self):
        with pytest.raises(AnalysisError, match="non-invertible"):
            Polynomial.x().truncated_reciprocal(2)


class TestPiecewise:
    """Test suite for piecewise polynomials and B-splines."""

    def test_pieces_are_left_open(self):
        f = PiecewisePoly.on_integers(0, [Polynomial.constant(1), Polynomial.constant(2)])
        assert f(0) == 0
        assert f(1) == 1
        assert f(Fraction(3, 2)) == 2
        assert f(3) == 0

    @pytest.mark.parametrize("n", range(1, 6))
    def test_bspline_refinement(self, bspline, n):
        """Test B_n satisfies the refinement equation with a^B_n."""
        phi = SplineVector([bspline_function(n)], HermiteType.scalar(1))
        assert refinement_residual(phi, bspline(n)).ok

    def test_bspline_values(self):
        hat = bspline_function(2)
        assert hat(1) == 1
        assert hat(Fraction(1, 2)) == Fraction(1, 2)
        cubic = bspline_function(4)
        assert cubic(2) == Fraction(2, 3)

    def test_wrong_mask_leaves_residual(self, bspline):
        phi = SplineVector([bspline_function(3)], HermiteType.scalar(1))
        result = refinement_residual(phi, bspline(2))
        assert not result.ok
        assert result.witness["component"] == 1


class TestHermiteInterpolants:
    """Test suite for Hermite interpolants and their masks."""

    def test_hermite_cubic_basis(self, hermite_cubic, hermite_type):
        phi = hermite_theta(1)
        assert phi(Fraction(1, 2)) == (Fraction(1, 2), Fraction(1, 8))
        assert interpolation_check(phi, hermite_type)
        assert refinement_residual(phi, hermite_cubic).ok

    @pytest.mark.parametrize("m, n_copies", [(0, 2), (1, 1), (1, 2), (2, 1)])
    def test_generalized_interpolants_interpolate(self, m, n_copies):
        phi = example12_interpolant(m, n_copies)
        assert phi.size == (m + 1) * n_copies
        assert interpolation_check(phi, phi.htype)

    def test_dump_spline(self, tmp_path):
        path = tmp_path / "theta.json"
        text = dump_spline(hermite_theta(1), str(path))
        data = json.loads(path.read_text())
        assert data == json.loads(text)
        assert len(data["components"]) == 2


class TestRegistrySplines:
    """Test suite for the closed-form basis functions of the registry."""

    @pytest.mark.parametrize("spline_id", SPLINE_IDS)
    def test_printed_spline_is_refinable(self, spline_id):
        record = get_example(spline_id)
        phi = registry_spline(spline_id, record.resolve())
        residual = refinement_residual(phi, record.mask())
        assert residual.ok, residual.witness

    def test_dual_spline_symmetry(self):
        """Test phi_1 is even and phi_2 odd about 1/2."""
        phi = registry_spline("ex6.3b")
        for s in (Fraction(1, 8), Fraction(1, 3), Fraction(3, 4), Fraction(5, 4)):
            left = phi(Fraction(1, 2) - s)
            right = phi(Fraction(1, 2) + s)
            assert left[0] == right[0]
            assert left[1] == -right[1]

    def test_bspline_ids(self):
        phi = registry_spline("bspline3")
        assert phi.size == 1
        assert phi.hull() == (0, 3)

    def test_unknown_id(self):
        with pytest.raises(RegistryError, match="unknown spline id"):
            registry_spline("ex9.9")
