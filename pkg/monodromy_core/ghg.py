"""
Monodromy of the generalized hypergeometric equation of rank p.

In the normalized gauge, where the lambda-eigenvector of the reflection is
the all-ones row vector, the circuit matrices around x = 0 and x = 1 are

    M0 = diag(1, 1/B_1, ..., 1/B_{p-1})
    M1 = id - (1 - lambda) / Tr(H) * H 1^T 1

with H = diag(1, h_1, ..., h_{p-1}) the invariant form and
lambda = prod(B) / prod(A).

Composition convention: continuation along rho then sigma maps to the
product M_rho @ M_sigma, so M_inf = (M0 @ M1)^-1.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

from mpmath import mp

from app_config.constants import NumericsConfig
from monodromy_utils.encoding import encode_matrix, encode_number, encode_rational

from .errors import DegenerateForm, SingularMatrix
from .numerics import (
    BigComplex,
    CMatrix,
    char_poly_at,
    mat_inv,
    mat_mul,
    max_abs_vector,
    singular_threshold,
    solve,
)
from .params import ExpParams, GHGParams, exponentiate, params_to_json, require_valid

logger = logging.getLogger(__name__)

ParamsLike = Union[GHGParams, ExpParams]


def _exp(params: ParamsLike, precision_bits: int) -> ExpParams:
    if isinstance(params, ExpParams):
        if not isinstance(params.source, GHGParams):
            raise ValueError("expected exponentiated rank-p parameters")
        return params
    return exponentiate(require_valid(params), precision_bits)


@dataclass(frozen=True)
class RiemannScheme:
    """Local exponents at 0, 1 and infinity."""

    exponents_at_0: Tuple[Fraction, ...]
    exponents_at_1: Tuple[Fraction, ...]
    exponents_at_inf: Tuple[Fraction, ...]

    @property
    def p(self) -> int:
        return len(self.exponents_at_0)

    def total(self) -> Fraction:
        return sum(self.exponents_at_0 + self.exponents_at_1 + self.exponents_at_inf, Fraction(0))

    def fuchs_defect(self) -> Fraction:
        """Sum of all exponents minus p(p-1)/2; zero for a Fuchsian equation with 3 singular points."""
        return self.total() - Fraction(self.p * (self.p - 1), 2)

    def to_json(self) -> dict:
        return {
            "kind": "riemann_scheme",
            "p": self.p,
            "at_0": [encode_rational(e) for e in self.exponents_at_0],
            "at_1": [encode_rational(e) for e in self.exponents_at_1],
            "at_inf": [encode_rational(e) for e in self.exponents_at_inf],
            "fuchs_defect": encode_rational(self.fuchs_defect()),
        }


def riemann_scheme(params: GHGParams) -> RiemannScheme:
    require_valid(params)
    p = params.p
    return RiemannScheme(
        exponents_at_0=(Fraction(0),) + tuple(1 - b for b in params.b),
        exponents_at_1=tuple(Fraction(k) for k in range(p - 1))
        + (sum(params.b, Fraction(0)) - sum(params.a, Fraction(0)),),
        exponents_at_inf=tuple(params.a),
    )


def build_m0(params: ParamsLike, precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
             ) -> CMatrix:
    """diag(1, 1/B_1, ..., 1/B_{p-1})."""
    exp = _exp(params, precision_bits)
    bits = exp.precision_bits
    with mp.workprec(bits):
        return CMatrix.diagonal([mp.mpc(1)] + [1 / b for b in exp.B], bits)


def h_entries(exp: ExpParams) -> List[BigComplex]:
    """h_1..h_{p-1} of the invariant form."""
    A, B = exp.A, exp.B
    values = []
    with mp.workprec(exp.precision_bits):
        a_minus_one = mp.fprod(a - 1 for a in A)
        for k, bk in enumerate(B):
            others = [bj for j, bj in enumerate(B) if j != k]
            numerator = -mp.fprod(bj - 1 for bj in others) * mp.fprod(a - bk for a in A)
            denominator = bk * mp.fprod(bj - bk for bj in others) * a_minus_one
            values.append(numerator / denominator)
    return values


def build_h(params: ParamsLike, precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
            ) -> CMatrix:
    """The invariant form diag(1, h_1, ..., h_{p-1})."""
    exp = _exp(params, precision_bits)
    with mp.workprec(exp.precision_bits):
        return CMatrix.diagonal([mp.mpc(1)] + h_entries(exp), exp.precision_bits)


def lambda_ghg(params: ParamsLike, precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
               ) -> BigComplex:
    """prod(B) / prod(A), the non-trivial eigenvalue of M1."""
    exp = _exp(params, precision_bits)
    with mp.workprec(exp.precision_bits):
        return mp.fprod(exp.B) / mp.fprod(exp.A)


def build_reflection(H: CMatrix, lam) -> CMatrix:
    """
    id - (1 - lam) / Tr(H) * H 1^T 1, entry (i, j) = delta_ij - (1 - lam) H_ii / Tr(H).

    Shared by the rank-p and the F_C builders. Raises DegenerateForm when
    |Tr(H)| is below 2^(-precision_bits/2).
    """
    if not H.is_diagonal():
        raise ValueError("build_reflection expects a diagonal invariant form")
    bits = H.precision_bits
    with mp.workprec(bits):
        trace = H.trace()
        if abs(trace) < singular_threshold(bits):
            raise DegenerateForm(f"Tr(H) = {mp.nstr(abs(trace), 5)} is numerically zero")
        coefficient = (1 - mp.mpc(lam)) / trace
        diagonal = H.diagonal_entries()
        n = H.n
        rows = [
            [(1 if i == j else 0) - coefficient * diagonal[i] for j in range(n)]
            for i in range(n)
        ]
    logger.debug(f"reflection of size {n} built, |Tr(H)| = {mp.nstr(abs(trace), 8)}")
    return CMatrix.from_rows(rows, bits)


@dataclass(frozen=True, eq=False)
class CircuitSetGHG:
    """Normalized-gauge circuit matrices of one rank-p parameter set."""

    p: int
    exp_params: ExpParams
    M0: CMatrix
    M1: CMatrix
    H: CMatrix
    lam: BigComplex

    @property
    def params(self) -> GHGParams:
        return self.exp_params.source

    @property
    def precision_bits(self) -> int:
        return self.exp_params.precision_bits

    @property
    def M_inf(self) -> CMatrix:
        """(M0 @ M1)^-1, derived on demand."""
        return m_infinity(self)

    def to_json(self) -> dict:
        bits = self.precision_bits
        return {
            "kind": "ghg_circuit_set",
            "p": self.p,
            "params": params_to_json(self.params),
            "lambda": encode_number(self.lam, bits),
            "H": encode_matrix(self.H),
            "M0": encode_matrix(self.M0),
            "M1": encode_matrix(self.M1),
        }


def build_circuit_set(params: ParamsLike,
                      precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
                      ) -> CircuitSetGHG:
    exp = _exp(params, precision_bits)
    H = build_h(exp)
    lam = lambda_ghg(exp)
    circuit_set = CircuitSetGHG(
        p=exp.source.p,
        exp_params=exp,
        M0=build_m0(exp),
        M1=build_reflection(H, lam),
        H=H,
        lam=lam,
    )
    logger.debug(f"built rank-{circuit_set.p} circuit set at {exp.precision_bits} bits")
    return circuit_set


def m_infinity(circuit_set: CircuitSetGHG) -> CMatrix:
    return mat_inv(mat_mul(circuit_set.M0, circuit_set.M1))


# --- Closed forms ---

def trace_h_closed_form(exp: ExpParams) -> BigComplex:
    """Tr(H) = (prod A - prod B) prod(B_j - 1) / (prod(A_i - 1) prod B_j)."""
    with mp.workprec(exp.precision_bits):
        return ((mp.fprod(exp.A) - mp.fprod(exp.B)) * mp.fprod(b - 1 for b in exp.B)
                / (mp.fprod(a - 1 for a in exp.A) * mp.fprod(exp.B)))


def reflection_coefficient_closed_form(exp: ExpParams) -> BigComplex:
    """(1 - lambda) / Tr(H) = prod(A_i - 1) prod B_j / (prod A_i prod(B_j - 1))."""
    with mp.workprec(exp.precision_bits):
        return (mp.fprod(a - 1 for a in exp.A) * mp.fprod(exp.B)
                / (mp.fprod(exp.A) * mp.fprod(b - 1 for b in exp.B)))


def closed_form_p2(exp: ExpParams) -> Tuple[BigComplex, CMatrix]:
    """
    The explicit rank-2 invariant-form entry h and reflection M1.

    Rows of M1 - id are -c and -c*h with c = B(A1-1)(A2-1) / (A1 A2 (B-1)),
    so the second row is +(B-A1)(B-A2) / (A1 A2 (B-1)). This is the sign
    that keeps the column sums equal to lambda.
    """
    if len(exp.A) != 2:
        raise ValueError(f"closed_form_p2 needs p = 2, got p = {len(exp.A)}")
    bits = exp.precision_bits
    (A1, A2), (B1,) = exp.A, exp.B
    with mp.workprec(bits):
        h = -(B1 - A1) * (B1 - A2) / (B1 * (A1 - 1) * (A2 - 1))
        first = B1 * (A1 - 1) * (A2 - 1) / (A1 * A2 * (B1 - 1))
        c_h = -(B1 - A1) * (B1 - A2) / (A1 * A2 * (B1 - 1))
        m1 = CMatrix.from_rows([[1 - first, -first], [-c_h, 1 - c_h]], bits)
    return h, m1


def _scaled_char_poly(exp: ExpParams, h_values: List, lam, t) -> BigComplex:
    # Tr(H) * det(t id - M0 M1(h)); affine in h
    bits = exp.precision_bits
    with mp.workprec(bits):
        H = CMatrix.diagonal([mp.mpc(1)] + list(h_values), bits)
        m0 = build_m0(exp)
        m1 = build_reflection(H, lam)
        return H.trace() * char_poly_at(mat_mul(m0, m1), t)


def distinct_exponent_indices(params: GHGParams) -> List[int]:
    """Indices of a_1..a_p keeping the first of every class modulo 1 (distinct A_l)."""
    seen = set()
    indices = []
    for index, a in enumerate(params.a):
        residue = Fraction(a) % 1
        if residue not in seen:
            seen.add(residue)
            indices.append(index)
    return indices


def solve_h_from_spectrum(exp: ExpParams) -> Tuple[List[BigComplex], BigComplex]:
    """
    Recover h_1..h_{p-1} from the spectrum of M0 M1 alone.

    Tr(H) * Q(1/A_l) vanishes for every l and is affine in h; the
    coefficients are read off at h = 0 and h = e_k. One equation is taken
    per distinct A_l: the first p-1 are solved and any further one is
    returned as a consistency residual (0 when none is left).

    Raises:
        SingularMatrix: fewer than p-1 distinct A_l, or the remaining
            equations do not determine h.

    Returns:
        (h_values, residual)
    """
    bits = exp.precision_bits
    p = len(exp.A)
    indices = distinct_exponent_indices(exp.source)
    if len(indices) < p - 1:
        raise SingularMatrix(
            f"only {len(indices)} distinct exponents at infinity for {p - 1} unknowns"
        )
    lam = lambda_ghg(exp)
    with mp.workprec(bits):
        zero = [mp.mpc(0)] * (p - 1)
        targets = [1 / exp.A[index] for index in indices]
        constants = [_scaled_char_poly(exp, zero, lam, t) for t in targets]
        slopes = []
        for t, base in zip(targets, constants):
            row = []
            for k in range(p - 1):
                unit = [mp.mpc(1) if j == k else mp.mpc(0) for j in range(p - 1)]
                row.append(_scaled_char_poly(exp, unit, lam, t) - base)
            slopes.append(row)
        system = CMatrix.from_rows(slopes[:p - 1], bits)
        h_values = solve(system, [-c for c in constants[:p - 1]])
        residual = max_abs_vector(
            c + mp.fdot(row, h_values) for c, row in zip(constants[p - 1:], slopes[p - 1:])
        )
    return h_values, residual


def det_m0m1_expected(exp: ExpParams) -> BigComplex:
    """det(M0 M1) = 1 / prod(A), the product of the eigenvalues at infinity inverted."""
    with mp.workprec(exp.precision_bits):
        return 1 / mp.fprod(exp.A)


def inf_spectrum_residual(circuit_set: CircuitSetGHG) -> BigComplex:
    """max_l |det(A_l id - M_inf)|: M_inf has eigenvalues A_1..A_p."""
    m_inf = circuit_set.M_inf
    with mp.workprec(circuit_set.precision_bits):
        return max(abs(char_poly_at(m_inf, a)) for a in circuit_set.exp_params.A)
