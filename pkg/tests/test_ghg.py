"""
Unit tests for monodromy_core/ghg.py.

Tests cover the invariant form, the reflection M1, the Riemann scheme and
the closed-form identities of the rank-p circuit set.
"""

from fractions import Fraction as F

import numpy as np
import pytest
from mpmath import mp

from monodromy_core.errors import DegenerateForm, InvalidParameters, SingularMatrix
from monodromy_core.ghg import (
    build_circuit_set,
    build_h,
    build_m0,
    build_reflection,
    closed_form_p2,
    det_m0m1_expected,
    distinct_exponent_indices,
    inf_spectrum_residual,
    lambda_ghg,
    riemann_scheme,
    solve_h_from_spectrum,
    trace_h_closed_form,
)
from monodromy_core.numerics import CMatrix, det, mat_mul, max_abs_diff, row_times
from monodromy_core.params import GHGParams, exponentiate, random_ghg_params, vee

BITS = 256


class TestInvariantForm:
    """Test suite for H and lambda."""

    def test_reference_h(self, ghg_p2):
        """h for the rank-2 reference set."""
        H = build_h(ghg_p2, BITS)
        assert H[0, 0] == 1
        with mp.workprec(BITS):
            expected = -mp.cot(mp.pi / 3) * mp.cot(mp.pi / 5)
            assert abs(H[1, 1] - expected) < mp.mpf("1e-60")
        assert abs(H[1, 1] + mp.mpf("0.79465")) < 1e-5
        assert abs(H[1, 1].imag) < 1e-60

    def test_reference_lambda(self, ghg_p2):
        """lambda for the rank-2 reference set."""
        with mp.workprec(BITS):
            expected = mp.expjpi(mp.mpf(-2) / 30)
            assert abs(lambda_ghg(ghg_p2, BITS) - expected) < mp.mpf("1e-70")

    def test_m0_diagonal(self, ghg_p2):
        """M0 is diagonal with M0[0, 0] = 1."""
        m0 = build_m0(ghg_p2, BITS)
        assert m0.is_diagonal()
        assert m0.diagonal_entries() == [1, -1]

    def test_resonant_rejected(self):
        """Resonant parameters are refused by the builder."""
        with pytest.raises(InvalidParameters):
            build_circuit_set(GHGParams((F(1, 2), F(1, 3)), (F(1, 2),)), BITS)


class TestReflection:
    """Test suite for M1."""

    def test_column_sums_equal_lambda(self, ghg_p3, tight):
        """The columns of M1 sum to lambda."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        sums = row_times([1, 1, 1], circuit_set.M1)
        assert all(abs(s - circuit_set.lam) < tight for s in sums)

    def test_determinant_is_lambda(self, ghg_p3, tight):
        """det M1 equals lambda."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        assert abs(det(circuit_set.M1) - circuit_set.lam) < tight

    def test_h_invariance(self, ghg_p3, tight):
        """M0 and M1 preserve H."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        for m in (circuit_set.M0, circuit_set.M1):
            image = mat_mul(mat_mul(m, circuit_set.H), vee(m).transpose())
            assert max_abs_diff(image, circuit_set.H) < tight

    def test_degenerate_form(self):
        """A numerically vanishing trace is refused."""
        H = CMatrix.diagonal([1, -1], BITS)
        with pytest.raises(DegenerateForm):
            build_reflection(H, mp.mpc(0, 1))

    def test_non_diagonal_form_rejected(self):
        """build_reflection needs a diagonal form."""
        with pytest.raises(ValueError, match="diagonal"):
            build_reflection(CMatrix.from_rows([[1, 1], [0, 1]], BITS), 2)

    def test_p2_closed_form(self, rng, tight):
        """The explicit 2x2 form matches the general builder."""
        for _ in range(10):
            circuit_set = build_circuit_set(random_ghg_params(rng, 2), BITS)
            h, m1 = closed_form_p2(circuit_set.exp_params)
            assert abs(h - circuit_set.H[1, 1]) < tight
            assert max_abs_diff(m1, circuit_set.M1) < tight

    def test_p2_closed_form_needs_p2(self, ghg_p3):
        """The explicit form is only defined for p = 2."""
        with pytest.raises(ValueError, match="p = 2"):
            closed_form_p2(exponentiate(ghg_p3, BITS))


class TestSpectrum:
    """Test suite for the local monodromy at infinity."""

    @pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
    def test_infinity_spectrum(self, p, tight):
        """M_inf has eigenvalues A_1..A_p."""
        params = random_ghg_params(np.random.default_rng([7, p]), p)
        circuit_set = build_circuit_set(params, BITS)
        assert inf_spectrum_residual(circuit_set) < tight

    def test_det_m0m1(self, ghg_p3, tight):
        """det(M0 M1) is the inverse product of the A_l."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        product = mat_mul(circuit_set.M0, circuit_set.M1)
        assert abs(det(product) - det_m0m1_expected(circuit_set.exp_params)) < tight

    def test_trace_h_closed_form(self, ghg_p3, tight):
        """Tr(H) matches its closed form."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        assert abs(circuit_set.H.trace() - trace_h_closed_form(circuit_set.exp_params)) < tight

    def test_h_from_spectrum(self, ghg_p3, tight):
        """h solved from the spectrum equals the closed form."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        solved, residual = solve_h_from_spectrum(circuit_set.exp_params)
        assert residual < tight
        for value, expected in zip(solved, circuit_set.H.diagonal_entries()[1:]):
            assert abs(value - expected) < tight

    def test_distinct_exponent_indices(self):
        """Exponents equal modulo 1 keep only their first index."""
        params = GHGParams((F(1, 2), F(-1, 2), F(3, 2), F(1, 3)), (F(1, 4), F(1, 5), F(1, 7)))
        assert distinct_exponent_indices(params) == [0, 3]

    def test_h_from_spectrum_with_repeated_exponent(self, tight):
        """With a1 - a2 in Z the solve either matches or reports singularity."""
        # a1 - a2 = 1 is allowed and gives A_1 = A_2
        params = GHGParams((F(1, 2), F(-1, 2), F(1, 3)), (F(1, 4), F(1, 5)))
        circuit_set = build_circuit_set(params, BITS)
        try:
            solved, residual = solve_h_from_spectrum(circuit_set.exp_params)
        except SingularMatrix:
            return
        assert residual == 0
        for value, expected in zip(solved, circuit_set.H.diagonal_entries()[1:]):
            assert abs(value - expected) < tight

    def test_h_from_spectrum_underdetermined(self):
        """Two distinct exponents cannot determine three entries of h."""
        params = GHGParams((F(1, 2), F(-1, 2), F(3, 2), F(1, 3)), (F(1, 4), F(1, 5), F(1, 7)))
        circuit_set = build_circuit_set(params, BITS)
        with pytest.raises(SingularMatrix, match="distinct exponents"):
            solve_h_from_spectrum(circuit_set.exp_params)

    def test_m_infinity_inverts_product(self, ghg_p2, tight):
        """M_inf inverts M0 M1."""
        circuit_set = build_circuit_set(ghg_p2, BITS)
        product = mat_mul(mat_mul(circuit_set.M0, circuit_set.M1), circuit_set.M_inf)
        assert max_abs_diff(product, CMatrix.identity(2, BITS)) < tight


class TestRiemannScheme:
    """Test suite for the exponent table."""

    def test_reference_scheme(self, ghg_p3):
        """Exponent table of the rank-3 reference set."""
        scheme = riemann_scheme(ghg_p3)
        assert scheme.exponents_at_0 == (0, F(1, 2), F(3, 4))
        assert scheme.exponents_at_1 == (0, 1, F(31, 420))
        assert scheme.exponents_at_inf == (F(1, 3), F(1, 5), F(1, 7))
        assert scheme.fuchs_defect() == 0

    def test_json(self, ghg_p3):
        """The scheme is written as rational strings."""
        document = riemann_scheme(ghg_p3).to_json()
        assert document["at_1"] == ["0", "1", "31/420"]
        assert document["fuchs_defect"] == "0"

    def test_circuit_set_json(self, ghg_p2):
        """The circuit set document carries every matrix."""
        document = build_circuit_set(ghg_p2, 128).to_json()
        assert document["kind"] == "ghg_circuit_set"
        assert document["p"] == 2
        assert document["M1"]["n"] == 2
        assert len(document["M1"]["entries"]) == 4
