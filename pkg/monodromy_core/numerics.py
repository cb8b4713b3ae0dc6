"""
Arbitrary-precision complex scalars and dense square matrices.

Scalars are plain ``mpmath.mpc`` values; ``CMatrix`` wraps an
``mpmath.matrix`` together with the precision it was computed at. Every
operation runs inside ``mp.workprec`` at the larger precision of its
operands, so results never silently drop bits.

Only product, LU-based inverse / determinant / solve and a few residual
measures are provided. Spectral questions are answered by evaluating
characteristic polynomials, never by an eigensolver.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp

from app_config.constants import NumericsConfig, SuiteConfig

from .errors import DimensionMismatch, SingularMatrix

logger = logging.getLogger(__name__)

# Scalars of every module are mpmath complex numbers
BigComplex = mpmath.mpc


def check_precision(precision_bits: int) -> int:
    """Return precision_bits if acceptable, raise ValueError otherwise."""
    if not isinstance(precision_bits, int) or isinstance(precision_bits, bool):
        raise ValueError(f"precision_bits must be an integer, got {type(precision_bits)}")
    if precision_bits < NumericsConfig.MIN_PRECISION_BITS:
        raise ValueError(
            f"precision_bits must be >= {NumericsConfig.MIN_PRECISION_BITS}, got {precision_bits}"
        )
    return precision_bits


def to_big(value, precision_bits: int) -> BigComplex:
    """Convert int, Fraction, str, float or mpmath number to mpc at precision_bits."""
    with mp.workprec(precision_bits):
        if hasattr(value, 'numerator') and hasattr(value, 'denominator') and not isinstance(
            value, (int, bool)
        ):
            return mp.mpc(mp.mpf(value.numerator) / value.denominator)
        return mp.mpc(value)


def singular_threshold(precision_bits: int):
    """Pivot magnitudes below 2^(-precision_bits/2) count as singular."""
    ratio = NumericsConfig.SINGULAR_PIVOT_EXPONENT_RATIO
    with mp.workprec(precision_bits):
        return mp.ldexp(mp.mpf(1), -int(precision_bits * ratio))


@dataclass(frozen=True, eq=False)
class CMatrix:
    """
    Dense n x n complex matrix at a fixed working precision.

    Instances are immutable: the wrapped mpmath matrix is copied on the way
    in and on the way out.
    """

    _data: mpmath.matrix = field(repr=False)
    precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS

    def __post_init__(self):
        check_precision(self.precision_bits)
        if not isinstance(self._data, mpmath.matrix):
            raise ValueError(f"CMatrix expects an mpmath.matrix, got {type(self._data)}")
        if self._data.rows != self._data.cols:
            raise DimensionMismatch(
                f"CMatrix must be square, got {self._data.rows}x{self._data.cols}"
            )
        if self._data.rows < 1:
            raise DimensionMismatch("CMatrix must have n >= 1")

    # --- Constructors ---

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], precision_bits: int) -> 'CMatrix':
        """Build from nested sequences of anything to_big understands."""
        check_precision(precision_bits)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch(f"rows must form a non-empty square table, got {n} rows")
        with mp.workprec(precision_bits):
            data = mpmath.matrix(n, n)
            for i, row in enumerate(rows):
                for j, value in enumerate(row):
                    data[i, j] = to_big(value, precision_bits)
        return cls(data, precision_bits)

    @classmethod
    def identity(cls, n: int, precision_bits: int) -> 'CMatrix':
        with mp.workprec(precision_bits):
            return cls(mpmath.eye(n) * mp.mpc(1), precision_bits)

    @classmethod
    def diagonal(cls, values: Sequence, precision_bits: int) -> 'CMatrix':
        n = len(values)
        if n == 0:
            raise DimensionMismatch("diagonal needs at least one entry")
        with mp.workprec(precision_bits):
            data = mpmath.matrix(n, n)
            for i in range(n):
                for j in range(n):
                    data[i, j] = mp.mpc(0)
            for i, value in enumerate(values):
                data[i, i] = to_big(value, precision_bits)
        return cls(data, precision_bits)

    @classmethod
    def _wrap(cls, data: mpmath.matrix, precision_bits: int) -> 'CMatrix':
        # internal: data is freshly computed and owned by the new instance
        return cls(data, precision_bits)

    # --- Accessors ---

    @property
    def n(self) -> int:
        return self._data.rows

    # entries are converted at the matrix precision, not the process default
    def __getitem__(self, key: Tuple[int, int]) -> BigComplex:
        with mp.workprec(self.precision_bits):
            return mp.mpc(self._data[key])

    def rows(self) -> List[List[BigComplex]]:
        with mp.workprec(self.precision_bits):
            return [[mp.mpc(self._data[i, j]) for j in range(self.n)] for i in range(self.n)]

    def diagonal_entries(self) -> List[BigComplex]:
        with mp.workprec(self.precision_bits):
            return [mp.mpc(self._data[i, i]) for i in range(self.n)]

    def to_mpmath(self) -> mpmath.matrix:
        return self._data.copy()

    # --- Arithmetic ---

    def __matmul__(self, other: 'CMatrix') -> 'CMatrix':
        return mat_mul(self, other)

    def __add__(self, other: 'CMatrix') -> 'CMatrix':
        bits = _joint_precision(self, other)
        with mp.workprec(bits):
            return CMatrix._wrap(self._data + other._data, bits)

    def __sub__(self, other: 'CMatrix') -> 'CMatrix':
        bits = _joint_precision(self, other)
        with mp.workprec(bits):
            return CMatrix._wrap(self._data - other._data, bits)

    def scale(self, factor) -> 'CMatrix':
        with mp.workprec(self.precision_bits):
            return CMatrix._wrap(self._data * mp.mpc(factor), self.precision_bits)

    def transpose(self) -> 'CMatrix':
        with mp.workprec(self.precision_bits):
            return CMatrix._wrap(self._data.T, self.precision_bits)

    def conjugate(self) -> 'CMatrix':
        with mp.workprec(self.precision_bits):
            return CMatrix._wrap(self._data.conjugate(), self.precision_bits)

    def trace(self) -> BigComplex:
        with mp.workprec(self.precision_bits):
            return mp.fsum(self._data[i, i] for i in range(self.n))

    def with_entry(self, i: int, j: int, value) -> 'CMatrix':
        """Copy with one entry replaced (used by negative controls)."""
        with mp.workprec(self.precision_bits):
            data = self._data.copy()
            data[i, j] = mp.mpc(value)
            return CMatrix._wrap(data, self.precision_bits)

    def is_diagonal(self) -> bool:
        return all(
            self._data[i, j] == 0 for i in range(self.n) for j in range(self.n) if i != j
        )


def _joint_precision(a: CMatrix, b: CMatrix) -> int:
    if a.n != b.n:
        raise DimensionMismatch(f"size mismatch: {a.n} vs {b.n}")
    return max(a.precision_bits, b.precision_bits)


def mat_mul(a: CMatrix, b: CMatrix) -> CMatrix:
    """Textbook product a @ b at the larger of the two precisions."""
    bits = _joint_precision(a, b)
    with mp.workprec(bits):
        return CMatrix._wrap(a._data * b._data, bits)


def mat_product(factors: Iterable[CMatrix]) -> CMatrix:
    """Left-to-right product of a non-empty sequence of matrices."""
    factors = list(factors)
    if not factors:
        raise ValueError("mat_product needs at least one factor")
    result = factors[0]
    for f in factors[1:]:
        result = mat_mul(result, f)
    return result


@dataclass(frozen=True)
class LUDecomposition:
    """Row-pivoted LU factors packed in one table (unit lower part implied)."""

    lu: Tuple[Tuple[BigComplex, ...], ...]
    perm: Tuple[int, ...]
    sign: int
    min_pivot: object
    precision_bits: int

    @property
    def n(self) -> int:
        return len(self.perm)

    def det(self) -> BigComplex:
        with mp.workprec(self.precision_bits):
            result = mp.mpc(self.sign)
            for i in range(self.n):
                result *= self.lu[i][i]
            return result

    def solve(self, rhs: Sequence) -> List[BigComplex]:
        n = self.n
        with mp.workprec(self.precision_bits):
            y = [mp.mpc(rhs[self.perm[i]]) for i in range(n)]
            for i in range(n):
                y[i] -= mp.fdot(self.lu[i][:i], y[:i])
            x = [mp.mpc(0)] * n
            for i in reversed(range(n)):
                x[i] = (y[i] - mp.fdot(self.lu[i][i + 1:], x[i + 1:])) / self.lu[i][i]
            return x


def lu_decompose(a: CMatrix) -> LUDecomposition:
    """
    LU with partial pivoting.

    Never raises: an all-zero pivot column leaves a zero on the diagonal and
    the decomposition reports min_pivot = 0 (det is then exactly 0).
    """
    n = a.n
    bits = a.precision_bits
    with mp.workprec(bits):
        rows = [[mp.mpc(a._data[i, j]) for j in range(n)] for i in range(n)]
        perm = list(range(n))
        sign = 1
        min_pivot = None
        for k in range(n):
            pivot_row = max(range(k, n), key=lambda r: abs(rows[r][k]))
            if pivot_row != k:
                rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
                perm[k], perm[pivot_row] = perm[pivot_row], perm[k]
                sign = -sign
            pivot = rows[k][k]
            magnitude = abs(pivot)
            min_pivot = magnitude if min_pivot is None else min(min_pivot, magnitude)
            if pivot == 0:
                continue
            for r in range(k + 1, n):
                factor = rows[r][k] / pivot
                rows[r][k] = factor
                if factor != 0:
                    for c in range(k + 1, n):
                        rows[r][c] -= factor * rows[k][c]
        return LUDecomposition(
            lu=tuple(tuple(r) for r in rows),
            perm=tuple(perm),
            sign=sign,
            min_pivot=min_pivot,
            precision_bits=bits,
        )


def _require_nonsingular(decomp: LUDecomposition, what: str) -> None:
    threshold = singular_threshold(decomp.precision_bits)
    if decomp.min_pivot < threshold:
        raise SingularMatrix(
            f"{what}: pivot magnitude {mpmath.nstr(decomp.min_pivot, 5)} "
            f"below 2^(-{decomp.precision_bits // 2})",
            pivot=decomp.min_pivot,
        )


def det(a: CMatrix) -> BigComplex:
    """Determinant via LU with partial pivoting (0 is a valid result)."""
    return lu_decompose(a).det()


def mat_inv(a: CMatrix) -> CMatrix:
    """Inverse via LU; SingularMatrix when a pivot is below 2^(-precision_bits/2)."""
    decomp = lu_decompose(a)
    _require_nonsingular(decomp, "mat_inv")
    n = a.n
    with mp.workprec(a.precision_bits):
        data = mpmath.matrix(n, n)
        for j in range(n):
            unit = [mp.mpc(1) if i == j else mp.mpc(0) for i in range(n)]
            column = decomp.solve(unit)
            for i in range(n):
                data[i, j] = column[i]
        return CMatrix._wrap(data, a.precision_bits)


def solve(a: CMatrix, rhs: Sequence) -> List[BigComplex]:
    """Solve a x = rhs for a column vector x."""
    if len(rhs) != a.n:
        raise DimensionMismatch(f"rhs has {len(rhs)} entries, matrix is {a.n}x{a.n}")
    decomp = lu_decompose(a)
    _require_nonsingular(decomp, "solve")
    return decomp.solve(rhs)


def solve_pinned(a: CMatrix, pinned: int) -> Tuple[List[BigComplex], BigComplex]:
    """
    Null vector of a rank n-1 matrix with coordinate ``pinned`` fixed to 1.

    The n x (n-1) system (columns other than ``pinned``, right-hand side
    minus the pinned column) is reduced by row-pivoted elimination; the row
    left over after n-1 pivots gives the consistency residual.

    Returns:
        (x, residual) with x[pinned] == 1 and a @ x ~ 0.
    """
    n = a.n
    if not 0 <= pinned < n:
        raise ValueError(f"pinned index {pinned} out of range for n={n}")
    bits = a.precision_bits
    cols = [c for c in range(n) if c != pinned]
    with mp.workprec(bits):
        table = [[mp.mpc(a._data[i, c]) for c in cols] + [-mp.mpc(a._data[i, pinned])]
                 for i in range(n)]
        width = n - 1
        threshold = singular_threshold(bits)
        for k in range(width):
            pivot_row = max(range(k, n), key=lambda r: abs(table[r][k]))
            table[k], table[pivot_row] = table[pivot_row], table[k]
            pivot = table[k][k]
            if abs(pivot) < threshold:
                raise SingularMatrix(
                    f"solve_pinned: pivot magnitude {mpmath.nstr(abs(pivot), 5)} too small",
                    pivot=abs(pivot),
                )
            for r in range(k + 1, n):
                factor = table[r][k] / pivot
                if factor != 0:
                    for c in range(k, width + 1):
                        table[r][c] -= factor * table[k][c]
        reduced = [mp.mpc(0)] * width
        for i in reversed(range(width)):
            acc = table[i][width] - mp.fdot(table[i][i + 1:width], reduced[i + 1:])
            reduced[i] = acc / table[i][i]
        x = list(reduced)
        x.insert(pinned, mp.mpc(1))
        residual = max(
            abs(mp.fdot([a._data[i, j] for j in range(n)], x)) for i in range(n)
        ) if n > 0 else mp.mpf(0)
        return x, residual


def char_poly_at(m: CMatrix, t) -> BigComplex:
    """Q(t) = det(t * id - m)."""
    with mp.workprec(m.precision_bits):
        shifted = CMatrix.identity(m.n, m.precision_bits).scale(t) - m
        return det(shifted)


def max_abs(a: CMatrix):
    """Largest entry magnitude."""
    with mp.workprec(a.precision_bits):
        return max(abs(a._data[i, j]) for i in range(a.n) for j in range(a.n))


def max_abs_diff(a: CMatrix, b: CMatrix):
    """Entrywise max |a - b|."""
    return max_abs(a - b)


def max_abs_vector(values: Iterable):
    """Largest magnitude of a sequence of scalars (0 for an empty one)."""
    best = mp.mpf(0)
    for v in values:
        best = max(best, abs(v))
    return best


def row_times(row: Sequence, a: CMatrix) -> List[BigComplex]:
    """Row vector times matrix."""
    if len(row) != a.n:
        raise DimensionMismatch(f"row has {len(row)} entries, matrix is {a.n}x{a.n}")
    with mp.workprec(a.precision_bits):
        return [mp.fdot(row, [a._data[i, j] for i in range(a.n)]) for j in range(a.n)]


def block_bounds(n: int, block: int) -> List[Tuple[int, int]]:
    """Half-open index ranges of consecutive diagonal blocks of size ``block``."""
    if block < 1 or n % block != 0:
        raise DimensionMismatch(f"block size {block} does not divide n={n}")
    return [(s, s + block) for s in range(0, n, block)]


def off_block_mass(a: CMatrix, block: int):
    """Largest magnitude outside the diagonal blocks of size ``block``."""
    owner = {}
    for index, (start, stop) in enumerate(block_bounds(a.n, block)):
        for i in range(start, stop):
            owner[i] = index
    with mp.workprec(a.precision_bits):
        best = mp.mpf(0)
        for i in range(a.n):
            for j in range(a.n):
                if owner[i] != owner[j]:
                    best = max(best, abs(a._data[i, j]))
        return best


def diagonal_blocks(a: CMatrix, block: int) -> List[CMatrix]:
    """The diagonal blocks of size ``block`` as CMatrix values."""
    blocks = []
    for start, stop in block_bounds(a.n, block):
        with mp.workprec(a.precision_bits):
            data = a._data[start:stop, start:stop]
            if not isinstance(data, mpmath.matrix):
                data = mpmath.matrix([[data]])
        blocks.append(CMatrix._wrap(data, a.precision_bits))
    return blocks


def rank_one_defect(a: CMatrix):
    """
    Distance of a from rank <= 1: with (r, s) the largest entry,
    max_ij |a_ij a_rs - a_is a_rj| / |a_rs|. Zero exactly when rank(a) <= 1.
    """
    n = a.n
    d = a._data
    with mp.workprec(a.precision_bits):
        r, s = max(((i, j) for i in range(n) for j in range(n)), key=lambda ij: abs(d[ij]))
        pivot = d[r, s]
        if pivot == 0:
            return mp.mpf(0)
        best = mp.mpf(0)
        for i in range(n):
            for j in range(n):
                minor = d[i, j] * pivot - d[i, s] * d[r, j]
                best = max(best, abs(minor))
        return best / abs(pivot)


def residual_bound(precision_bits: int, slack_bits: int = 32):
    """2^(-precision_bits + slack_bits), the rounding budget of property tests."""
    with mp.workprec(precision_bits):
        return mp.ldexp(mp.mpf(1), -precision_bits + slack_bits)


def format_residual(value: Optional[object]) -> str:
    """Short decimal string for reports ('inf' for structural failures)."""
    if value is None:
        return "inf"
    if mpmath.isinf(value):
        return "inf"
    if value == 0:
        return "0"
    return mpmath.nstr(value, NumericsConfig.RESIDUAL_DIGITS, min_fixed=0, max_fixed=0)


def default_tolerance(precision_bits: int):
    """
    Pass/fail threshold of the identity checks at a given precision.

    1e-40 at 256 bits, scaled by 2^((256 - bits)/4) away from it, and never
    tighter than the rounding floor 2^(-0.55 * bits).
    """
    check_precision(precision_bits)
    with mp.workprec(precision_bits):
        shift = mp.mpf(SuiteConfig.REFERENCE_PRECISION_BITS - precision_bits)
        scaled = mp.mpf(SuiteConfig.REFERENCE_TOLERANCE) * mp.power(
            2, shift / SuiteConfig.TOLERANCE_SCALING_DIVISOR
        )
        floor = mp.power(2, -SuiteConfig.TOLERANCE_FLOOR_EXPONENT_RATIO * mp.mpf(precision_bits))
        return max(scaled, floor)


def diagonal_similarity(d: CMatrix, a: CMatrix) -> CMatrix:
    """d @ a @ d^-1 for diagonal d, entrywise a_ij * d_i / d_j."""
    if not d.is_diagonal():
        raise ValueError("diagonal_similarity expects a diagonal first argument")
    bits = _joint_precision(d, a)
    n = a.n
    with mp.workprec(bits):
        diag = d.diagonal_entries()
        if min(abs(v) for v in diag) < singular_threshold(bits):
            raise SingularMatrix("diagonal_similarity: zero diagonal entry")
        data = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                data[i, j] = a._data[i, j] * diag[i] / diag[j]
        return CMatrix._wrap(data, bits)
