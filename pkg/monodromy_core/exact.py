"""
Exact re-run of the closed-form identities over the cyclotomic field Q(zeta_N).

With rational parameters of common denominator N every A_i, B_j is a power
of zeta_N and every matrix entry lies in Q(zeta_N). Elements are sympy
polynomials in zeta reduced modulo the N-th cyclotomic polynomial, so an
identity holds iff the difference reduces to the zero polynomial.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Dict, List, Sequence

import sympy
from mpmath import mp
from sympy import QQ, Poly

from app_config.constants import ExactConfig

from .errors import MTooLarge
from .params import FCParams, GHGParams, Params, require_valid

logger = logging.getLogger(__name__)

_ZETA = sympy.Symbol('zeta')


class CyclotomicField:
    """Q(zeta_N) with zeta_N = exp(2 pi i / N)."""

    def __init__(self, conductor: int):
        if conductor < 1:
            raise ValueError(f"conductor must be >= 1, got {conductor}")
        if conductor > ExactConfig.MAX_CONDUCTOR:
            raise ValueError(
                f"conductor {conductor} exceeds the exact-mode limit {ExactConfig.MAX_CONDUCTOR}"
            )
        self.conductor = conductor
        self.modulus = Poly(sympy.cyclotomic_poly(conductor, _ZETA), _ZETA, domain=QQ)

    def element(self, poly: Poly) -> 'CyclotomicScalar':
        return CyclotomicScalar(self, poly.rem(self.modulus))

    def rational(self, value) -> 'CyclotomicScalar':
        value = Fraction(value)
        return self.element(Poly(sympy.Rational(value.numerator, value.denominator), _ZETA,
                                 domain=QQ))

    def zero(self) -> 'CyclotomicScalar':
        return self.rational(0)

    def one(self) -> 'CyclotomicScalar':
        return self.rational(1)

    def root(self, r: Fraction) -> 'CyclotomicScalar':
        """exp(2 pi i r) as zeta^(r N mod N)."""
        exponent = Fraction(r) * self.conductor
        if exponent.denominator != 1:
            raise ValueError(f"{r} is not a multiple of 1/{self.conductor}")
        power = int(exponent) % self.conductor
        return self.element(Poly(_ZETA ** power, _ZETA, domain=QQ))


@dataclass(frozen=True, eq=False)
class CyclotomicScalar:
    field: CyclotomicField
    poly: Poly

    def _coerce(self, other) -> 'CyclotomicScalar':
        if isinstance(other, CyclotomicScalar):
            return other
        return self.field.rational(other)

    def __add__(self, other):
        return self.field.element(self.poly + self._coerce(other).poly)

    __radd__ = __add__

    def __sub__(self, other):
        return self.field.element(self.poly - self._coerce(other).poly)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return self.field.element(self.poly * self._coerce(other).poly)

    __rmul__ = __mul__

    def __neg__(self):
        return self.field.element(-self.poly)

    def inverse(self) -> 'CyclotomicScalar':
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta)")
        return CyclotomicScalar(self.field, self.poly.invert(self.field.modulus))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def is_zero(self) -> bool:
        return self.poly.is_zero

    def __eq__(self, other):
        return (self - other).is_zero()

    __hash__ = None

    def vee(self) -> 'CyclotomicScalar':
        """zeta -> zeta^-1 = zeta^(N-1)."""
        n = self.field.conductor
        inverse_root = Poly(_ZETA ** (n - 1), _ZETA, domain=QQ)
        return self.field.element(self.poly.compose(inverse_root))

    def to_complex(self, precision_bits: int):
        """Numeric value at zeta = exp(2 pi i / N)."""
        with mp.workprec(precision_bits):
            zeta = mp.expjpi(mp.mpf(2) / self.field.conductor)
            coefficients = [mp.mpf(sympy.Rational(c).p) / sympy.Rational(c).q
                            for c in self.poly.all_coeffs()]
            return mp.polyval(coefficients, zeta)


ExactMatrix = List[List[CyclotomicScalar]]


def conductor_of(params: Params) -> int:
    return reduce(lcm, (Fraction(x).denominator for x in tuple(params.a) + tuple(params.b)), 1)


def mat_mul(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    n = len(a)
    return [[reduce(lambda acc, k: acc + a[i][k] * b[k][j], range(1, n), a[i][0] * b[0][j])
             for j in range(n)] for i in range(n)]


def transpose(a: ExactMatrix) -> ExactMatrix:
    return [list(row) for row in zip(*a)]


def vee_matrix(a: ExactMatrix) -> ExactMatrix:
    return [[x.vee() for x in row] for row in a]


def diagonal(values: Sequence[CyclotomicScalar]) -> ExactMatrix:
    field = values[0].field
    n = len(values)
    return [[values[i] if i == j else field.zero() for j in range(n)] for i in range(n)]


def is_equal(a: ExactMatrix, b: ExactMatrix) -> bool:
    return all(x == y for row_a, row_b in zip(a, b) for x, y in zip(row_a, row_b))


def det(a: ExactMatrix) -> CyclotomicScalar:
    """Gaussian elimination over the field."""
    rows = [list(r) for r in a]
    n = len(rows)
    field = rows[0][0].field
    result = field.one()
    for k in range(n):
        pivot_row = next((r for r in range(k, n) if not rows[r][k].is_zero()), None)
        if pivot_row is None:
            return field.zero()
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
            result = -result
        pivot = rows[k][k]
        result = result * pivot
        inverse = pivot.inverse()
        for r in range(k + 1, n):
            if rows[r][k].is_zero():
                continue
            factor = rows[r][k] * inverse
            for c in range(k, n):
                rows[r][c] = rows[r][c] - factor * rows[k][c]
    return result


def reflection(h: Sequence[CyclotomicScalar], lam: CyclotomicScalar) -> ExactMatrix:
    """id - (1 - lam) / Tr(H) * H 1^T 1."""
    field = lam.field
    trace = reduce(lambda acc, x: acc + x, h[1:], h[0])
    coefficient = (1 - lam) / trace
    n = len(h)
    return [[(field.one() if i == j else field.zero()) - coefficient * h[i] for j in range(n)]
            for i in range(n)]


def _invariance(m: ExactMatrix, H: ExactMatrix) -> bool:
    return is_equal(mat_mul(mat_mul(m, H), transpose(vee_matrix(m))), H)


def _column_sums(m: ExactMatrix, lam: CyclotomicScalar) -> bool:
    n = len(m)
    return all(
        reduce(lambda acc, i: acc + m[i][j], range(1, n), m[0][j]) == lam for j in range(n)
    )


def _fixed_vectors(m: ExactMatrix, h: Sequence[CyclotomicScalar]) -> bool:
    # (h_k e_0 - e_k) M = h_k e_0 - e_k
    n = len(m)
    for k in range(1, n):
        for j in range(n):
            expected = (h[k] if j == 0 else 0) - (1 if j == k else 0)
            if not (h[k] * m[0][j] - m[k][j]) == expected:
                return False
    return True


def _prod(values, field: CyclotomicField) -> CyclotomicScalar:
    return reduce(lambda acc, x: acc * x, values, field.one())


def exact_ghg_checks(params: GHGParams) -> Dict[str, bool]:
    """Closed-form identities of the rank-p set over Q(zeta_N), keyed by check name."""
    require_valid(params)
    if params.p > ExactConfig.MAX_P:
        raise MTooLarge(f"exact mode supports p <= {ExactConfig.MAX_P}, got {params.p}")
    field = CyclotomicField(conductor_of(params))
    A = [field.root(a) for a in params.a]
    B = [field.root(b) for b in params.b]
    h = [field.one()]
    for k, bk in enumerate(B):
        others = [bj for j, bj in enumerate(B) if j != k]
        numerator = -_prod([bj - 1 for bj in others], field) * _prod([a - bk for a in A], field)
        denominator = bk * _prod([bj - bk for bj in others], field) * _prod([a - 1 for a in A],
                                                                           field)
        h.append(numerator / denominator)
    lam = _prod(B, field) / _prod(A, field)
    H = diagonal(h)
    m0 = diagonal([field.one()] + [b.inverse() for b in B])
    m1 = reflection(h, lam)
    trace = reduce(lambda acc, x: acc + x, h[1:], h[0])
    trace_closed = ((_prod(A, field) - _prod(B, field)) * _prod([b - 1 for b in B], field)
                    / (_prod([a - 1 for a in A], field) * _prod(B, field)))
    logger.debug(f"exact rank-{params.p} checks over Q(zeta_{field.conductor})")
    return {
        "exact.h_invariance.M0": _invariance(m0, H),
        "exact.h_invariance.M1": _invariance(m1, H),
        "exact.column_sums": _column_sums(m1, lam),
        "exact.fixed_vectors": _fixed_vectors(m1, h),
        "exact.det_M1": det(m1) == lam,
        "exact.trace_h": trace == trace_closed,
    }


def exact_fc_checks(params: FCParams) -> Dict[str, bool]:
    """Closed-form identities of the F_C set over Q(zeta_N), keyed by check name."""
    require_valid(params)
    m = params.m
    if m > ExactConfig.MAX_M:
        raise MTooLarge(f"exact mode supports m <= {ExactConfig.MAX_M}, got {m}")
    field = CyclotomicField(conductor_of(params))
    A1, A2 = field.root(params.a1), field.root(params.a2)
    B = [field.root(b) for b in params.b]
    size = 1 << m
    h = []
    for mask in range(size):
        P = _prod([B[j] for j in range(m) if mask >> j & 1], field)
        sign = -1 if bin(mask).count("1") % 2 else 1
        h.append(sign * (A1 - P) * (A2 - P) / ((A1 - 1) * (A2 - 1) * P))
    lam = (1 if (m + 1) % 2 == 0 else -1) * _prod(B, field) / (A1 * A2)
    H = diagonal(h)
    mlast = reflection(h, lam)
    generators = [
        diagonal([B[i].inverse() if mask >> i & 1 else field.one() for mask in range(size)])
        for i in range(m)
    ]
    results = {
        f"exact.h_invariance.M{i + 1}": _invariance(g, H) for i, g in enumerate(generators)
    }
    results[f"exact.h_invariance.M{m + 1}"] = _invariance(mlast, H)
    if m >= 2:
        # one variable: free group, no relation to check
        results["exact.braid_relations"] = all(
            is_equal(mat_mul(mat_mul(g, mlast), mat_mul(g, mlast)),
                     mat_mul(mat_mul(mlast, g), mat_mul(mlast, g)))
            for g in generators
        )
    results["exact.column_sums"] = _column_sums(mlast, lam)
    results["exact.fixed_vectors"] = _fixed_vectors(mlast, h)
    results["exact.det_Mlast"] = det(mlast) == lam
    logger.debug(f"exact F_C checks m={m} over Q(zeta_{field.conductor})")
    return results
