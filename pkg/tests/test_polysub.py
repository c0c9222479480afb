"""
Unit tests for polynomial subdivision and the refinement engine.
"""

from fractions import Fraction

import pytest

from services.acceptance import eigenpolynomial_witness, lagrange_delta_mismatches, random_data, registry_masks
from services.analysis import matching_filter, sum_rule_order
from services.core import AnalysisError, LevelCapError, VectorData
from services.polysub import (
    VectorPolynomial,
    basis_samples,
    eigenpoly_check,
    export_refinement,
    interpolation_relation_check,
    level_cap,
    pmu,
    poly_interp_check,
    refine,
    subdivide_grid,
)
from services.registry import get_example


class TestVectorPolynomial:
    """Test suite for vector polynomial helpers."""

    def test_evaluate_derivative_and_shift(self):
        p = VectorPolynomial(1, 2, {(2,): (1, 0), (1,): (0, 3)})
        assert p.evaluate((2,)) == (4, 6)
        assert p.derivative((1,)).evaluate((5,)) == (10, 3)
        assert p.shift((1,)).evaluate((3,)) == p.evaluate((2,))

    def test_hat_pmu(self, bspline):
        """Test p_1 of a^B_2 is x + 1."""
        p = pmu((1,), matching_filter(bspline(2), 1))
        assert p.coeffs == {(1,): (1,), (0,): (1,)}


class TestEigenpolynomials:
    """Test suite for S_a p_mu = 2^-|mu| p_mu."""

    def test_hat_reproduces_linears(self, bspline):
        filt = matching_filter(bspline(2), 1)
        assert eigenpoly_check(bspline(2), filt, (0,)).ok
        assert eigenpoly_check(bspline(2), filt, (1,)).ok

    def test_hat_fails_for_quadratics(self, bspline):
        verdict = eigenpoly_check(bspline(2), matching_filter(bspline(2), 2), (2,))
        assert not verdict.ok
        assert "expected" in verdict.witness

    @pytest.mark.parametrize("degree", range(4))
    def test_hermite_cubic_eigenpolynomials(self, hermite_cubic, degree):
        filt = sum_rule_order(hermite_cubic, 6).matching_filter
        assert eigenpoly_check(hermite_cubic, filt, (degree,)).ok

    def test_polynomial_input_needs_window(self, bspline):
        p = VectorPolynomial(1, 1, {(0,): (1,)})
        with pytest.raises(AnalysisError, match="window"):
            subdivide_grid(bspline(2), p)


class TestRefinement:
    """Test suite for the level-by-level refinement engine."""

    def test_zero_levels_echo_input(self, hermite_cubic, hermite_type):
        w0 = VectorData.delta(1, 2, 0)
        assert refine(hermite_cubic, hermite_type, w0, 0) == [w0]

    def test_one_level_of_hermite_cubic(self, hermite_cubic, hermite_type):
        """Test value and slope of the Hermite basis at 1/2."""
        w1 = refine(hermite_cubic, hermite_type, VectorData.delta(1, 2, 0), 1)[-1]
        assert w1.get((0,)) == (1, 0)
        assert w1.get((1,)) == (Fraction(1, 2), Fraction(-3, 2))
        assert w1.level == 1

    def test_width_mismatch(self, hermite_cubic, hermite_type):
        with pytest.raises(AnalysisError, match="does not match multiplicity"):
            refine(hermite_cubic, hermite_type, VectorData.delta(1, 3, 0), 1)

    def test_level_cap(self, hermite_cubic, hermite_type):
        with pytest.raises(LevelCapError):
            refine(hermite_cubic, hermite_type, VectorData.delta(1, 2, 0), 5, cap=3)

    def test_default_caps(self):
        assert level_cap(1) >= level_cap(2)

    def test_log_callback_sees_every_level(self, hermite_cubic, hermite_type):
        messages = []
        refine(hermite_cubic, hermite_type, VectorData.delta(1, 2, 1), 3, log_callback=messages.append)
        assert len(messages) == 3

    def test_basis_samples(self, hermite_cubic, hermite_type):
        """Test phi_1 = (1 - x)^2 (1 + 2x) on [0, 1]."""
        samples = basis_samples(hermite_cubic, hermite_type, 3)
        assert samples.value(0, 0, (Fraction(1, 4),)) == Fraction(27, 32)
        assert samples.value(0, 1, (Fraction(1, 2),)) == Fraction(-3, 2)
        assert samples.value(0, 0, (2,)) == 0
        assert not samples.warnings

    def test_polynomials_are_interpolated(self, hermite_cubic, hermite_type):
        assert poly_interp_check(hermite_cubic, hermite_type, 3, 3).ok

    def test_interpolation_relation(self, hermite_cubic, hermite_type):
        w0 = VectorData(dim=1, width=2, values={(0,): (1, 2), (1,): (Fraction(-1, 3), 5)})
        assert interpolation_relation_check(hermite_cubic, hermite_type, w0, 3).ok

    def test_export_refinement(self, hermite_cubic, hermite_type, tmp_path):
        w1 = refine(hermite_cubic, hermite_type, VectorData.delta(1, 2, 0), 1)[-1]
        path = tmp_path / "level1.csv"
        table = export_refinement(w1, hermite_type, str(path))
        assert table[0] == ["component", "position_1", "value_exact", "value_float"]
        assert ["2", "1/2", "-3/2", "-1.5"] in table
        assert path.read_text().splitlines()[0] == "component,position_1,value_exact,value_float"


def _registry_params(predicate=lambda mask, facts: True):
    params = []
    for label, mask, htype, facts in registry_masks():
        if predicate(mask, facts):
            marks = [pytest.mark.slow] if mask.dim > 1 else []
            params.append(pytest.param(mask, htype, id=label, marks=marks))
    return params


class TestRegistryIdentities:
    """Test suite for the exact identities on every registry mask."""

    @pytest.mark.parametrize("mask,htype", _registry_params())
    def test_eigenpolynomials(self, mask, htype):
        """Test S_a p_mu = 2^-|mu| p_mu for every |mu| below the sum-rule order."""
        assert eigenpolynomial_witness(mask) is None

    @pytest.mark.parametrize("mask,htype", _registry_params(lambda mask, facts: bool(facts.interpolatory)))
    def test_interpolation_relation(self, rng, mask, htype):
        w0 = random_data(rng, mask.dim, mask.multiplicity)
        verdict = interpolation_relation_check(mask, htype, w0, 3)
        assert verdict.ok, verdict.witness

    @pytest.mark.parametrize("levels", range(1, 5))
    def test_lagrange_deltas(self, levels):
        """Test phi_1(k) = phi_2(k + 1/2) = delta(k) from the sampled basis."""
        assert lagrange_delta_mismatches(get_example("ex6.4b").mask(), levels) == []

    def test_lagrange_variant_deltas(self):
        record = get_example("ex6.4b")
        params, _facts = record.variant("t1=3/64")
        mask = record.mask(params)
        assert lagrange_delta_mismatches(mask, 3) == []
