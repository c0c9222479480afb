"""
Unit tests for the core types: rationals, masks, Hermite types, mask
files and the exact linear algebra underneath everything else.
"""

import json
from fractions import Fraction

import pytest
from sympy import Rational

from services.core import (
    AnalysisError,
    HermiteType,
    Mask,
    MaskFormatError,
    SymmetryBlock,
    VectorData,
    coset,
    from_sympy_rational,
    interleave,
    kron,
    load_mask_file,
    mat_inverse,
    matrix_rank,
    mat_mul,
    identity_matrix,
    multi_indices,
    nullspace,
    parse_mask,
    parse_rational,
    parse_vector_data,
    row_reduce,
    serialize_mask,
    solve_linear,
)


class TestRationals:
    """Test suite for the rational grammar of mask files."""

    def test_parses_integers_and_fractions(self):
        """Test that "p", "p/q" and JSON integers are accepted."""
        assert parse_rational("3") == 3
        assert parse_rational("-27/128") == Fraction(-27, 128)
        assert parse_rational(5) == 5

    @pytest.mark.parametrize("value", [0.5, "1.5", "1/0", "2+3j", "abc", True])
    def test_rejects_non_rational_input(self, value):
        """Test that floats, zero denominators and complex strings raise."""
        with pytest.raises(MaskFormatError, match="malformed rational"):
            parse_rational(value)


class TestMask:
    """Test suite for the Mask container."""

    def test_zero_coefficients_are_dropped(self):
        """Test that zero matrices never appear in the support."""
        mask = Mask.from_list(-1, [[[0]], [[Fraction(1, 2)]], [[Fraction(1, 2)]], [[0]]])
        assert mask.support() == [(0,), (1,)]

    def test_empty_support_is_rejected(self):
        with pytest.raises(MaskFormatError, match="empty"):
            Mask.from_list(0, [[[0]]])

    def test_symbol_at_zero_sums_coefficients(self, hermite_cubic):
        """Test a^(0) of the Hermite cubic is diag(1, 1/8)."""
        a0 = hermite_cubic.symbol_at_zero()
        assert a0 == ((1, 0), (0, Fraction(1, 8)))

    def test_to_array_places_offset(self, bspline):
        """Test the numpy view keeps the lower corner of the support."""
        arr, lo = bspline(3).to_array()
        assert lo == (0,)
        assert arr.shape == (4, 1, 1)
        assert arr[1, 0, 0] == pytest.approx(3 / 8)

    def test_coset_and_interleave_are_inverse(self, hermite_cubic):
        """Test splitting into cosets and interleaving gives the mask back."""
        parts = {(0,): coset(hermite_cubic, (0,)), (1,): coset(hermite_cubic, (1,))}
        assert interleave(parts, 1, 2) == hermite_cubic

    def test_coset_rejects_bad_gamma(self, hermite_cubic):
        with pytest.raises(AnalysisError):
            coset(hermite_cubic, (2,))


class TestHermiteType:
    """Test suite for generalized Hermite type declarations."""

    def test_univariate_defaults_translations_to_zero(self):
        htype = HermiteType.univariate([0, 2])
        assert htype.taus == ((0,), (0,))
        assert htype.max_degree == 2
        assert htype.is_uniform_translation()

    def test_first_entry_must_be_zero(self):
        """Test nu_1 = 0 is enforced."""
        with pytest.raises(MaskFormatError, match="nu_1 = 0"):
            HermiteType.univariate([1, 0])

    def test_translation_count_must_match(self):
        with pytest.raises(MaskFormatError):
            HermiteType(nus=((0,), (1,)), taus=((0,),))

    def test_lagrange_type_is_not_uniform(self):
        assert not HermiteType.univariate([0, 0], [0, Fraction(1, 2)]).is_uniform_translation()


class TestMaskFiles:
    """Test suite for mask-file parsing and serialization."""

    def test_loads_hermite_cubic_fixture(self, fixtures_dir):
        loaded = load_mask_file(fixtures_dir / "hermite_cubic.json")
        assert loaded.mask.multiplicity == 2
        assert loaded.htype.nus == ((0,), (1,))
        assert loaded.mask[(1,)] == ((Fraction(1, 4), Fraction(-3, 8)), (Fraction(1, 16), Fraction(-1, 16)))

    def test_scalar_file_defaults_type(self, fixtures_dir):
        loaded = load_mask_file(fixtures_dir / "bspline3.json")
        assert loaded.htype.nus == ((0,),)

    def test_float_entry_is_malformed(self, fixtures_dir):
        """Test a JSON float inside a coefficient is rejected."""
        with pytest.raises(MaskFormatError, match="malformed rational"):
            load_mask_file(fixtures_dir / "malformed_rational.json")

    def test_duplicate_key_is_rejected(self):
        text = json.dumps({
            "dim": 1, "multiplicity": 1,
            "coeffs": [{"k": [0], "rows": [["1/2"]]}, {"k": [0], "rows": [["1/2"]]}],
        })
        with pytest.raises(MaskFormatError, match="duplicate lattice key"):
            parse_mask(text)

    def test_dimension_mismatch_is_rejected(self):
        text = json.dumps({"dim": 2, "multiplicity": 1, "coeffs": [{"k": [0], "rows": [["1"]]}]})
        with pytest.raises(MaskFormatError, match="r/d mismatch"):
            parse_mask(text)

    def test_serialize_then_parse_preserves_mask_and_symmetry(self, hermite_cubic, hermite_type):
        """Test a written file reads back to the same mask, type and symmetry block."""
        block = SymmetryBlock(group="Z2", center=(Fraction(0),))
        parsed = parse_mask(serialize_mask(hermite_cubic, hermite_type, block))
        assert parsed.mask == hermite_cubic
        assert parsed.htype == hermite_type
        assert parsed.symmetry == block

    def test_theta_survives_round_trip(self, hermite_cubic):
        """Test a declared coset map is written and read back."""
        htype = HermiteType(nus=((0,), (0,)), taus=((0,), (Fraction(1, 2),)), theta=(1, 1))
        text = serialize_mask(hermite_cubic, htype)
        assert json.loads(text)["theta"] == [1, 1]
        assert parse_mask(text).htype == htype

    @pytest.mark.parametrize("field, value", [
        ("type", [[0], [True]]),
        ("theta", [1, 3]),
        ("theta", [True, 1]),
    ])
    def test_bad_type_fields_are_rejected(self, field, value):
        data = {"dim": 1, "multiplicity": 2, "type": [[0], [1]],
                "coeffs": [{"k": [0], "rows": [["1", "0"], ["0", "1/2"]]}]}
        data[field] = value
        with pytest.raises(MaskFormatError):
            parse_mask(json.dumps(data))

    def test_serialization_is_deterministic(self, hermite_cubic, hermite_type):
        assert serialize_mask(hermite_cubic, hermite_type) == serialize_mask(hermite_cubic, hermite_type)


class TestVectorData:
    """Test suite for refinement data containers and files."""

    def test_delta_data(self):
        w = VectorData.delta(2, 3, 1)
        assert w.values == {(0, 0): (0, 1, 0)}
        assert w.get((5, 5)) == (0, 0, 0)

    def test_parse_data_file(self, fixtures_dir):
        text = (fixtures_dir / "cubic_data.json").read_text()
        w = parse_vector_data(text, 1, 2)
        assert w.get((1,)) == (Fraction(1, 2), Fraction(-1, 4))
        assert w.level == 0

    def test_parse_data_rejects_wrong_width(self):
        with pytest.raises(MaskFormatError, match="width"):
            parse_vector_data(json.dumps({"values": [{"k": [0], "row": ["1"]}]}), 1, 2)


class TestExactLinearAlgebra:
    """Test suite for the Fraction linear algebra helpers."""

    def test_inverse(self):
        a = ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(1)))
        assert mat_mul(a, mat_inverse(a)) == identity_matrix(2)

    def test_singular_inverse_raises(self):
        with pytest.raises(AnalysisError, match="singular"):
            mat_inverse(((1, 2), (2, 4)))

    def test_nullspace_and_solve(self):
        basis = nullspace([[1, 1, 0], [0, 0, 1]])
        assert basis == [[-1, 1, 0]]
        x, free = solve_linear([[1, 1], [1, -1]], [3, 1])
        assert x == [2, 1] and free == []

    def test_inconsistent_system_raises(self):
        with pytest.raises(AnalysisError, match="inconsistent"):
            solve_linear([[1, 1], [1, 1]], [0, 1])

    def test_results_are_fractions(self):
        """Test values coming back from the QQ kernels are plain Fractions."""
        reduced, pivots = row_reduce([[2, 4], [1, 3]])
        assert reduced == [[1, 0], [0, 1]] and pivots == [0, 1]
        assert all(type(x) is Fraction for row in reduced for x in row)
        inverse = mat_inverse(((Fraction(1, 2), 0), (0, 4)))
        assert inverse == ((2, 0), (0, Fraction(1, 4)))
        assert type(inverse[1][1]) is Fraction
        assert matrix_rank([[1, 2], [2, 4]]) == 1
        assert from_sympy_rational(Rational(-3, 8)) == Fraction(-3, 8)

    def test_kron_shape(self):
        k = kron(((1, 2),), ((1,), (3,)))
        assert k == ((1, 2), (3, 6))

    def test_multi_indices_are_graded(self):
        assert multi_indices(2, 1) == ((0, 0), (1, 0), (0, 1))
