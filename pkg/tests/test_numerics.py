"""
Unit tests for monodromy_core/numerics.py.

Tests cover matrix construction, LU-based determinant / inverse / solve,
residual measures and the tolerance law, with property-based checks on
small integer matrices.
"""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from mpmath import mp

from monodromy_core.errors import DimensionMismatch, SingularMatrix
from monodromy_core.numerics import (
    CMatrix,
    block_bounds,
    char_poly_at,
    check_precision,
    default_tolerance,
    det,
    diagonal_blocks,
    diagonal_similarity,
    format_residual,
    mat_inv,
    mat_mul,
    mat_product,
    max_abs_diff,
    off_block_mass,
    rank_one_defect,
    residual_bound,
    row_times,
    solve,
    solve_pinned,
)

BITS = 128


def square(n):
    entries = st.integers(min_value=-5, max_value=5)
    return st.lists(st.lists(entries, min_size=n, max_size=n), min_size=n, max_size=n)


def as_matrix(rows):
    return CMatrix.from_rows(rows, BITS)


class TestConstruction:
    """Test suite for CMatrix constructors."""

    def test_identity_and_diagonal(self):
        """identity and diagonal constructors."""
        identity = CMatrix.identity(3, BITS)
        assert identity.is_diagonal()
        assert identity.trace() == 3

        d = CMatrix.diagonal([1, 2, 3], BITS)
        assert d.diagonal_entries() == [1, 2, 3]

    def test_non_square_rejected(self):
        """Ragged tables are rejected."""
        with pytest.raises(DimensionMismatch):
            CMatrix.from_rows([[1, 2], [3]], BITS)

    def test_precision_floor(self):
        """Precisions below the floor are rejected."""
        with pytest.raises(ValueError, match="precision_bits"):
            check_precision(32)
        with pytest.raises(ValueError):
            CMatrix.identity(2, 16)

    def test_with_entry_copies(self):
        """with_entry leaves the original untouched."""
        a = as_matrix([[1, 2], [3, 4]])
        b = a.with_entry(0, 0, 10)
        assert a[0, 0] == 1
        assert b[0, 0] == 10

    def test_accessors_keep_matrix_precision(self):
        """Entries read outside workprec keep the matrix precision."""
        bits = 256
        with mp.workprec(bits):
            third = mp.mpc(1) / 3
        matrix = CMatrix.from_rows([[third, 0], [0, third]], bits)
        # read outside any workprec block: the process default is 53 bits
        values = [matrix[0, 0], matrix.rows()[1][1], matrix.diagonal_entries()[0]]
        with mp.workprec(bits):
            for value in values:
                assert abs(3 * value - 1) < mp.mpf("1e-70")


class TestLinearAlgebra:
    """Test suite for LU-based operations."""

    def test_det_known_value(self):
        """Determinant of a fixed integer matrix."""
        assert abs(det(as_matrix([[1, 2], [3, 4]])) + 2) < 1e-30

    def test_inverse_of_singular_raises(self):
        """Inverting a singular matrix raises SingularMatrix."""
        with pytest.raises(SingularMatrix):
            mat_inv(as_matrix([[1, 2], [2, 4]]))

    def test_solve(self):
        """solve returns x with A x = b."""
        x = solve(as_matrix([[2, 0], [0, 4]]), [2, 8])
        assert abs(x[0] - 1) < 1e-30
        assert abs(x[1] - 2) < 1e-30

    def test_solve_pinned_null_vector(self):
        """The pinned solve finds the null vector of a rank-deficient matrix."""
        # rows are multiples of (1, -2): null vector (2, 1)
        x, residual = solve_pinned(as_matrix([[1, -2], [3, -6]]), pinned=1)
        assert x[1] == 1
        assert abs(x[0] - 2) < 1e-30
        assert residual < 1e-30

    def test_solve_pinned_index_checked(self):
        """The pinned coordinate must be in range."""
        with pytest.raises(ValueError, match="out of range"):
            solve_pinned(as_matrix([[1, 0], [0, 0]]), pinned=2)

    def test_char_poly_at_eigenvalues(self):
        """The characteristic polynomial vanishes at the eigenvalues."""
        m = as_matrix([[2, 1], [0, 5]])
        assert abs(char_poly_at(m, 2)) < 1e-30
        assert abs(char_poly_at(m, 5)) < 1e-30
        assert abs(char_poly_at(m, 0) - 10) < 1e-30

    def test_mat_product_matches_pairwise(self):
        """mat_product equals nested mat_mul."""
        a = as_matrix([[1, 2], [3, 4]])
        b = as_matrix([[0, 1], [1, 0]])
        assert max_abs_diff(mat_product([a, b, a]), mat_mul(mat_mul(a, b), a)) == 0

    def test_row_times(self):
        """Row vector times matrix."""
        assert row_times([1, 1], as_matrix([[1, 2], [3, 4]])) == [4, 6]

    @settings(max_examples=30, deadline=None)
    @given(square(3), square(3), square(3))
    def test_associativity(self, a, b, c):
        """Matrix products are associative."""
        a, b, c = as_matrix(a), as_matrix(b), as_matrix(c)
        left = mat_mul(mat_mul(a, b), c)
        right = mat_mul(a, mat_mul(b, c))
        assert max_abs_diff(left, right) <= residual_bound(BITS)

    @settings(max_examples=30, deadline=None)
    @given(square(3), square(3))
    def test_det_multiplicative(self, a, b):
        """det(ab) = det(a) det(b)."""
        a, b = as_matrix(a), as_matrix(b)
        assert abs(det(mat_mul(a, b)) - det(a) * det(b)) <= residual_bound(BITS, 48)

    @settings(max_examples=30, deadline=None)
    @given(square(3))
    def test_inverse_involution(self, rows):
        """Inverting twice gives the matrix back."""
        a = as_matrix(rows)
        assume(abs(det(a)) > 0.5)
        assert max_abs_diff(mat_inv(mat_inv(a)), a) <= residual_bound(BITS, 48)


class TestResidualMeasures:
    """Test suite for block structure and rank measures."""

    def test_block_bounds(self):
        """Blocks must divide the matrix size."""
        assert block_bounds(4, 2) == [(0, 2), (2, 4)]
        with pytest.raises(DimensionMismatch):
            block_bounds(4, 3)

    def test_off_block_mass_and_blocks(self):
        """Off-block mass and the diagonal blocks."""
        a = as_matrix([[1, 2, 0, 0], [3, 4, 0, 7], [0, 0, 5, 6], [0, 0, 7, 8]])
        assert off_block_mass(a, 2) == 7
        top, bottom = diagonal_blocks(a, 2)
        assert top.rows() == [[1, 2], [3, 4]]
        assert bottom.rows() == [[5, 6], [7, 8]]

    def test_rank_one_defect(self):
        """rank_one_defect separates an outer product from the identity."""
        outer = as_matrix([[1, 2, 3], [2, 4, 6], [-1, -2, -3]])
        assert rank_one_defect(outer) < 1e-30
        assert rank_one_defect(CMatrix.identity(2, BITS)) > 0.5

    def test_diagonal_similarity_matches_products(self):
        """D M D^-1 computed entrywise equals the products."""
        d = CMatrix.diagonal([1, 2, mp.mpc(0, 3)], BITS)
        a = as_matrix([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
        expected = mat_mul(mat_mul(d, a), mat_inv(d))
        assert max_abs_diff(diagonal_similarity(d, a), expected) < 1e-30

    def test_diagonal_similarity_rejects_full_matrix(self):
        """diagonal_similarity needs a diagonal D."""
        a = as_matrix([[1, 2], [3, 4]])
        with pytest.raises(ValueError, match="diagonal"):
            diagonal_similarity(a, a)


class TestTolerance:
    """Test suite for the tolerance law and residual formatting."""

    def test_reference_tolerance(self):
        """1e-40 at 256 bits."""
        with mp.workprec(256):
            assert abs(default_tolerance(256) - mp.mpf("1e-40")) < mp.mpf("1e-60")

    def test_tolerance_loosens_with_fewer_bits(self):
        """Fewer bits give a looser tolerance."""
        assert default_tolerance(128) > default_tolerance(256)
        assert default_tolerance(512) < default_tolerance(256)

    def test_rounding_floor(self):
        """The tolerance never drops below the rounding level."""
        # at 64 bits the scaled value would be below 2^(-0.55 * 64)
        with mp.workprec(64):
            assert default_tolerance(64) >= mp.power(2, -0.55 * 64) * (1 - mp.mpf("1e-10"))

    def test_format_residual(self):
        """Residuals are written in scientific notation."""
        assert format_residual(None) == "inf"
        assert format_residual(mp.inf) == "inf"
        assert format_residual(mp.mpf(0)) == "0"
        assert format_residual(mp.mpf("1.2345e-41")).startswith("1.23e-41")
