"""
Monodromy of Lauricella's F_C system in m variables.

The 2^m-dimensional solution space is indexed by subsets J of {1..m} in the
order given by the bitmask position 1 + sum_{i in J} 2^(i-1); that formula
is the only ordering used anywhere in the package. M_1..M_m are diagonal,
M_{m+1} is the reflection built by the shared ghg kernel.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union

import sympy
from mpmath import mp

from app_config.constants import FCConfig, NumericsConfig
from monodromy_utils.encoding import encode_matrix, encode_number

from .errors import BlockStructureViolation, MTooLarge
from .ghg import build_reflection
from .numerics import (
    BigComplex,
    CMatrix,
    default_tolerance,
    diagonal_blocks,
    diagonal_similarity,
    mat_inv,
    mat_mul,
    off_block_mass,
    row_times,
)
from .params import ExpParams, FCParams, exponentiate, params_to_json, require_valid

logger = logging.getLogger(__name__)

ParamsLike = Union[FCParams, ExpParams]


@dataclass(frozen=True)
class SubsetIndex:
    """A subset J of {1..m} stored as a bitmask (bit i-1 set iff i in J)."""

    m: int
    mask: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0 <= self.mask < (1 << self.m):
            raise ValueError(f"mask {self.mask} is not a subset of {{1..{self.m}}}")

    @classmethod
    def from_members(cls, m: int, members) -> 'SubsetIndex':
        mask = 0
        for i in members:
            if not 1 <= i <= m:
                raise ValueError(f"element {i} outside {{1..{m}}}")
            mask |= 1 << (i - 1)
        return cls(m, mask)

    def members(self) -> List[int]:
        return [i + 1 for i in range(self.m) if self.mask >> i & 1]

    def contains(self, i: int) -> bool:
        return bool(self.mask >> (i - 1) & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    @property
    def position(self) -> int:
        return subset_position(self)


def subset_position(J: SubsetIndex) -> int:
    """1-based position 1 + sum_{i in J} 2^(i-1)."""
    return 1 + J.mask


def subset_from_position(m: int, position: int) -> SubsetIndex:
    return SubsetIndex(m, position - 1)


def subsets_in_order(m: int) -> Iterator[SubsetIndex]:
    for mask in range(1 << m):
        yield SubsetIndex(m, mask)


def _check_dense(m: int) -> None:
    if m > FCConfig.MAX_DENSE_M:
        raise MTooLarge(f"dense 2^m construction refused for m={m} > {FCConfig.MAX_DENSE_M}")


def _exp(params: ParamsLike, precision_bits: int) -> ExpParams:
    if isinstance(params, ExpParams):
        if not isinstance(params.source, FCParams):
            raise ValueError("expected exponentiated F_C parameters")
        return params
    return exponentiate(require_valid(params), precision_bits)


def build_fc_mi(i: int, params: ParamsLike,
                precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> CMatrix:
    """Diagonal with B_i^(-1) at every J containing i and 1 elsewhere."""
    exp = _exp(params, precision_bits)
    m = exp.source.m
    if not 1 <= i <= m:
        raise ValueError(f"generator index {i} outside 1..{m}")
    _check_dense(m)
    bits = exp.precision_bits
    with mp.workprec(bits):
        inverse = 1 / exp.B[i - 1]
        entries = [inverse if J.contains(i) else mp.mpc(1) for J in subsets_in_order(m)]
    return CMatrix.diagonal(entries, bits)


def h_entry(exp: ExpParams, J: SubsetIndex) -> BigComplex:
    """h_J = (-1)^|J| (A1 - P)(A2 - P) / ((A1 - 1)(A2 - 1) P) with P = prod_{j in J} B_j."""
    A1, A2 = exp.A
    with mp.workprec(exp.precision_bits):
        P = mp.fprod(exp.B[j - 1] for j in J.members())
        sign = -1 if len(J) % 2 else 1
        return sign * (A1 - P) * (A2 - P) / ((A1 - 1) * (A2 - 1) * P)


def build_fc_h(params: ParamsLike,
               precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> CMatrix:
    exp = _exp(params, precision_bits)
    m = exp.source.m
    _check_dense(m)
    return CMatrix.diagonal([h_entry(exp, J) for J in subsets_in_order(m)], exp.precision_bits)


def lambda_fc(params: ParamsLike,
              precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> BigComplex:
    """(-1)^(m+1) prod(B) / (A1 A2)."""
    exp = _exp(params, precision_bits)
    m = exp.source.m
    A1, A2 = exp.A
    with mp.workprec(exp.precision_bits):
        sign = 1 if (m + 1) % 2 == 0 else -1
        return sign * mp.fprod(exp.B) / (A1 * A2)


def build_fc_mlast(params: ParamsLike,
                   precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> CMatrix:
    """M_{m+1}, the reflection with lambda-eigenvector (1, ..., 1)."""
    exp = _exp(params, precision_bits)
    return build_reflection(build_fc_h(exp), lambda_fc(exp))


@dataclass(frozen=True, eq=False)
class CircuitSetFC:
    m: int
    exp_params: ExpParams
    M: Tuple[CMatrix, ...]
    Mlast: CMatrix
    H: CMatrix
    lam: BigComplex

    @property
    def params(self) -> FCParams:
        return self.exp_params.source

    @property
    def precision_bits(self) -> int:
        return self.exp_params.precision_bits

    @property
    def generators(self) -> Tuple[CMatrix, ...]:
        """M_1, ..., M_m, M_{m+1}."""
        return self.M + (self.Mlast,)

    def to_json(self) -> dict:
        return {
            "kind": "fc_circuit_set",
            "m": self.m,
            "params": params_to_json(self.params),
            "lambda": encode_number(self.lam, self.precision_bits),
            "H": encode_matrix(self.H),
            "M": [encode_matrix(mi) for mi in self.M],
            "Mlast": encode_matrix(self.Mlast),
            "subsets": [J.members() for J in subsets_in_order(self.m)],
        }


def build_fc_circuit_set(params: ParamsLike,
                         precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
                         ) -> CircuitSetFC:
    exp = _exp(params, precision_bits)
    m = exp.source.m
    _check_dense(m)
    H = build_fc_h(exp)
    lam = lambda_fc(exp)
    circuit_set = CircuitSetFC(
        m=m,
        exp_params=exp,
        M=tuple(build_fc_mi(i, exp) for i in range(1, m + 1)),
        Mlast=build_reflection(H, lam),
        H=H,
        lam=lam,
    )
    logger.debug(f"built F_C circuit set m={m} (size {1 << m}) at {exp.precision_bits} bits")
    return circuit_set


# --- Reduction ---

def reduction_chain(circuit_set: CircuitSetFC) -> List[CMatrix]:
    """
    [N_m, N_{m-1}, ..., N_2] with N_m = M_{m+1} M_m M_{m+1} M_m^-1 and
    N_{m-k} = N_{m-k+1} M_{m-k} N_{m-k+1} M_{m-k}^-1.

    N_{m-k} is block diagonal with blocks of size 2^(m-k-1).
    """
    m = circuit_set.m
    if m < 2:
        raise ValueError("reduction needs m >= 2")
    chain = []
    current = circuit_set.Mlast
    for index in range(m, 1, -1):
        # M_i is diagonal: the conjugation is entrywise
        current = mat_mul(current, diagonal_similarity(circuit_set.M[index - 1], current))
        chain.append(current)
    return chain


def reduction_block_size(m: int, k: int) -> int:
    return 1 << (m - k - 1)


def reduction_matrices(circuit_set: CircuitSetFC, k: int, tolerance=None) -> List[CMatrix]:
    """
    Diagonal blocks (size 2^(m-k-1)) of N_{m-k}, 0 <= k <= m-2.

    Raises BlockStructureViolation carrying the largest off-block magnitude
    when it exceeds tolerance.
    """
    m = circuit_set.m
    if not 0 <= k <= m - 2:
        raise ValueError(f"k must lie in 0..{m - 2}, got {k}")
    if tolerance is None:
        tolerance = default_tolerance(circuit_set.precision_bits)
    n_matrix = reduction_chain(circuit_set)[k]
    block = reduction_block_size(m, k)
    mass = off_block_mass(n_matrix, block)
    if mass > tolerance:
        raise BlockStructureViolation(
            f"N_{m - k} has off-block mass {mp.nstr(mass, 5)} at block size {block}",
            max_off_block=mass,
        )
    return diagonal_blocks(n_matrix, block)


# --- Closed forms ---

def _signed_product(exp: ExpParams):
    m = exp.source.m
    sign = 1 if m % 2 == 0 else -1
    return sign * mp.fprod(exp.B)


def trace_h_fc_closed_form(exp: ExpParams) -> BigComplex:
    """(A1 A2 + (-1)^m prod B) prod(B_j - 1) / ((A1 - 1)(A2 - 1) prod B)."""
    A1, A2 = exp.A
    with mp.workprec(exp.precision_bits):
        return ((A1 * A2 + _signed_product(exp)) * mp.fprod(b - 1 for b in exp.B)
                / ((A1 - 1) * (A2 - 1) * mp.fprod(exp.B)))


def reflection_coefficient_fc_closed_form(exp: ExpParams) -> BigComplex:
    """(1 - lambda) / Tr(H) = (A1 - 1)(A2 - 1) prod B / (A1 A2 prod(B_j - 1))."""
    A1, A2 = exp.A
    with mp.workprec(exp.precision_bits):
        return ((A1 - 1) * (A2 - 1) * mp.fprod(exp.B)
                / (A1 * A2 * mp.fprod(b - 1 for b in exp.B)))


def lambda_quadratic_residual(circuit_set: CircuitSetFC) -> BigComplex:
    """
    |(1 + B_m)(1 - lambda) - (1 H w^vee^T / Tr H) B_m (1 - lambda)^2| with w = 1 M_m^-1.

    The relation comes from the reduction and only holds for m >= 2.
    """
    m = circuit_set.m
    if m < 2:
        raise ValueError("the lambda quadratic needs m >= 2")
    bits = circuit_set.precision_bits
    with mp.workprec(bits):
        ones = [mp.mpc(1)] * (1 << m)
        w = row_times(ones, mat_inv(circuit_set.M[m - 1]))
        h = circuit_set.H.diagonal_entries()
        ratio = mp.fsum(hj * mp.conj(wj) for hj, wj in zip(h, w)) / circuit_set.H.trace()
        bm = circuit_set.exp_params.B[m - 1]
        one_minus = 1 - circuit_set.lam
        return abs((1 + bm) * one_minus - ratio * bm * one_minus ** 2)


def block_determinants_expected(exp: ExpParams) -> Tuple[BigComplex, BigComplex]:
    """
    det of the top-left and bottom-right blocks of N_m:
    (-1)^m prod_{j<m} B_j / (A1 A2) and the same with (A1, A2) -> (A1/B_m, A2/B_m).
    """
    m = exp.source.m
    A1, A2 = exp.A
    with mp.workprec(exp.precision_bits):
        sign = 1 if m % 2 == 0 else -1
        head = sign * mp.fprod(exp.B[:-1])
        bm = exp.B[-1]
        return head / (A1 * A2), head / ((A1 / bm) * (A2 / bm))


# --- Singular locus ---

def fc_singular_poly(m: int, x: Sequence,
                     precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> BigComplex:
    """
    x_1 ... x_m R_m(x), R_m = prod over all sign vectors of (1 + sum s_i sqrt(x_i)).

    The product is even in every sqrt(x_i), so principal roots give the
    polynomial value regardless of branch.
    """
    if len(x) != m:
        raise ValueError(f"expected {m} coordinates, got {len(x)}")
    if m > FCConfig.MAX_DENSE_M:
        raise MTooLarge(f"2^m sign products refused for m={m}")
    with mp.workprec(precision_bits):
        roots = [mp.sqrt(mp.mpc(xi)) for xi in x]
        value = mp.mpc(1)
        for signs in range(1 << m):
            term = mp.mpc(1)
            for i, root in enumerate(roots):
                term += -root if signs >> i & 1 else root
            value *= term
        return mp.fprod(mp.mpc(xi) for xi in x) * value


def singular_polynomial_expanded(m: int) -> sympy.Expr:
    """
    R_m as an explicit polynomial in x1..xm, for m <= 4.

    Multiplying by the copy with s_i -> -s_i makes the product even in s_i;
    then s_i^2 -> x_i.
    """
    if not 1 <= m <= 4:
        raise MTooLarge(f"symbolic expansion only for 1 <= m <= 4, got {m}")
    xs = sympy.symbols(f"x1:{m + 1}")
    ss = sympy.symbols(f"s1:{m + 1}")
    expr = 1 + sum(ss)
    for s, x in zip(ss, xs):
        expr = sympy.expand(expr * expr.subs(s, -s))
        expr = sympy.expand(expr.subs(s, sympy.sqrt(x)))
    return expr


def singular_polynomial_value(m: int, point: Sequence) -> sympy.Expr:
    """Evaluate the expanded R_m at exact rational coordinates."""
    expr = singular_polynomial_expanded(m)
    xs = sympy.symbols(f"x1:{m + 1}")
    substitution = {x: sympy.Rational(v.numerator, v.denominator) if hasattr(v, 'denominator')
                    else v for x, v in zip(xs, point)}
    return expr.subs(substitution)
