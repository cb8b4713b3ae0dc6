"""
Numerical analytic-continuation oracle for the rank-p equation.

The local series basis at a small positive base point is continued around
x = 0 and x = 1 by recentered Taylor expansion of the differential equation

    [theta prod_j (theta + b_j - 1) - x prod_i (theta + a_i)] f = 0,
    theta = x d/dx,

rewritten as sum_k q_k(x) f^(k) = 0 with polynomial q_k. The raw monodromy
matrices are then brought to the normalized gauge by a diagonal change of
basis and compared with the closed forms.

Jet matrices have one row per basis solution and one column per derivative
order, so continuation acts as W_end = M W_start.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import sympy
from mpmath import mp
from sympy.functions.combinatorial.numbers import stirling

from app_config.constants import NumericsConfig, OracleConfig
from monodromy_utils.encoding import dump_json, encode_number
from monodromy_utils.logger import log_exceptions, log_performance
from monodromy_utils.parallel import run_ordered
from monodromy_utils.validation import validate_base_point

from .errors import (
    EigenvectorDegenerate,
    NoConvergence,
    SingularMatrix,
    StepUnderflow,
    VanishingComponent,
)
from .fc import SubsetIndex, fc_singular_poly
from .ghg import build_circuit_set, build_m0
from .numerics import (
    BigComplex,
    CMatrix,
    char_poly_at,
    check_precision,
    mat_inv,
    mat_mul,
    max_abs_diff,
    max_abs_vector,
    singular_threshold,
    solve_pinned,
    to_big,
)
from .params import FCParams, GHGParams, require_valid
from .verify import Check, Report

logger = logging.getLogger(__name__)

LOOP_KINDS = ("rho0", "rho1", "trivial")


@dataclass(frozen=True)
class LoopSpec:
    """
    A positively oriented circle through the base point eps.

    rho0 has radius eps around 0, rho1 radius 1 - eps around 1; trivial is
    the constant path. discretization=None steps adaptively, an integer
    fixes that many equal arcs.
    """

    kind: str
    base_point: Fraction = OracleConfig.BASE_POINT
    discretization: Optional[int] = None

    def __post_init__(self):
        if self.kind not in LOOP_KINDS:
            raise ValueError(f"loop kind must be one of {LOOP_KINDS}, got {self.kind!r}")
        object.__setattr__(self, 'base_point', Fraction(self.base_point))
        valid, msg = validate_base_point(self.base_point)
        if not valid:
            raise ValueError(msg)
        if self.discretization is not None and self.discretization < 1:
            raise ValueError(f"discretization must be >= 1, got {self.discretization}")

    def center(self) -> Fraction:
        return Fraction(0) if self.kind == "rho0" else Fraction(1)

    def radius(self) -> Fraction:
        if self.kind == "rho0":
            return self.base_point
        if self.kind == "rho1":
            return 1 - self.base_point
        return Fraction(0)

    def point(self, turns, precision_bits: int) -> BigComplex:
        """Point after the given fraction of a turn (0 and 1 give the base point)."""
        with mp.workprec(precision_bits):
            rotation = mp.expjpi(2 * mp.mpf(turns))
            eps = to_big(self.base_point, precision_bits)
            if self.kind == "rho0":
                return eps * rotation
            if self.kind == "rho1":
                return 1 - (1 - eps) * rotation
            return eps


@dataclass(frozen=True)
class FCBasePoint:
    """Point eps_1 >> ... >> eps_m > 0 inside the F_C convergence domain, off the singular locus."""

    m: int
    eps: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'eps', tuple(Fraction(e) for e in self.eps))
        if len(self.eps) != self.m:
            raise ValueError(f"need {self.m} coordinates, got {len(self.eps)}")
        if any(e <= 0 for e in self.eps):
            raise ValueError("base point coordinates must be positive")
        for first, second in zip(self.eps, self.eps[1:]):
            if second * OracleConfig.FC_EPS_RATIO > first:
                raise ValueError(
                    f"consecutive coordinates must shrink by {OracleConfig.FC_EPS_RATIO}: "
                    f"{first} then {second}"
                )
        with mp.workprec(NumericsConfig.DEFAULT_PRECISION_BITS):
            if mp.fsum(mp.sqrt(mp.mpf(e.numerator) / e.denominator) for e in self.eps) >= 1:
                raise ValueError("sum of square roots must stay below 1")
            if fc_singular_poly(self.m, [to_big(e, 64) for e in self.eps]) == 0:
                raise ValueError("base point lies on the singular locus")

    @classmethod
    def default(cls, m: int) -> 'FCBasePoint':
        """eps_i = eps / ratio^(i-1) with eps = 1/10."""
        return cls(m, tuple(OracleConfig.BASE_POINT / OracleConfig.FC_EPS_RATIO ** i
                            for i in range(m)))


@dataclass(frozen=True, eq=False)
class GaugeResult:
    g: CMatrix
    raw_M0: Optional[CMatrix]
    raw_M1: CMatrix
    gauged_M0: Optional[CMatrix]
    gauged_M1: CMatrix
    fit_residual: object
    pinned: int = 0


# --- Series ---

def _as_big_list(values: Sequence, precision_bits: int) -> List[BigComplex]:
    return [to_big(v, precision_bits) for v in values]


def _check_lower(b: Sequence[BigComplex]) -> None:
    for value in b:
        if value.imag == 0 and value.real <= 0 and value.real == int(value.real):
            raise ValueError(f"lower parameter {value} is a non-positive integer")


def _pfq_terms(a: Sequence[BigComplex], b: Sequence[BigComplex], x: BigComplex
               ) -> Iterator[Tuple[int, BigComplex, object]]:
    """
    Yield (n, t_n, r_n): the n-th term and a bound on |t_{k+1}/t_k| for all
    k >= n, or None while no bound is available yet.
    """
    abs_a = [abs(v) for v in a]
    abs_b = [abs(v) for v in b]
    abs_x = abs(x)
    largest_b = max(abs_b, default=0)
    term = mp.mpc(1)
    n = 0
    while True:
        bound = None
        if n > largest_b:
            bound = abs_x
            for i in range(len(b)):
                bound *= (n + abs_a[i]) / (n - abs_b[i])
            bound *= max(1, (n + abs_a[-1]) / (n + 1))
        yield n, term, bound
        numerator = mp.fprod(v + n for v in a)
        denominator = mp.fprod(v + n for v in b) * (n + 1)
        term = term * numerator / denominator * x
        n += 1


def eval_pfq(a: Sequence, b: Sequence, x, precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
             ) -> BigComplex:
    """
    Generalized hypergeometric series with len(a) = len(b) + 1, |x| <= 9/10.

    Summation stops once the geometric tail bound |t_n| r_n / (1 - r_n)
    falls below 2^(-precision_bits - 16). NoConvergence after 10^6 terms.
    """
    check_precision(precision_bits)
    if len(a) != len(b) + 1:
        raise ValueError(f"need len(a) = len(b) + 1, got {len(a)} and {len(b)}")
    bits = precision_bits + OracleConfig.SERIES_GUARD_BITS
    with mp.workprec(bits):
        a = _as_big_list(a, bits)
        b = _as_big_list(b, bits)
        x = to_big(x, bits)
        if abs(x) > mp.mpf(OracleConfig.SERIES_MAX_RADIUS.numerator) / OracleConfig.SERIES_MAX_RADIUS.denominator:
            raise ValueError(f"|x| = {mp.nstr(abs(x), 5)} outside the series radius 9/10")
        _check_lower(b)
        threshold = mp.ldexp(mp.mpf(1), -precision_bits - OracleConfig.SERIES_GUARD_BITS)
        total = mp.mpc(0)
        for n, term, bound in _pfq_terms(a, b, x):
            total += term
            if term == 0:
                break
            if bound is not None and bound < 1 and abs(term) * bound / (1 - bound) < threshold:
                break
            if n >= OracleConfig.MAX_SERIES_TERMS:
                raise NoConvergence(f"pFq series not converged after {n} terms")
    with mp.workprec(precision_bits):
        return +total


def _basis_parameters(params: GHGParams) -> List[Tuple[Fraction, List[Fraction], List[Fraction]]]:
    """(exponent, upper, lower) of each local basis solution at 0."""
    entries = [(Fraction(0), list(params.a), list(params.b))]
    for k, beta in enumerate(params.b):
        upper = [a - beta + 1 for a in params.a]
        lower = [(2 - beta) if j == k else (b - beta + 1) for j, b in enumerate(params.b)]
        entries.append((1 - beta, upper, lower))
    return entries


def fundamental_system_ghg(params: GHGParams, x,
                           precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
                           ) -> List[BigComplex]:
    """
    The local basis at 0: the plain series, then x^(1-b_k) times the series
    with a_i - b_k + 1 and lower parameters b_j - b_k + 1 (2 - b_k in slot k).
    Principal branch of x^(1-b_k).
    """
    require_valid(params)
    with mp.workprec(precision_bits):
        x = to_big(x, precision_bits)
        if x == 0:
            raise ValueError("the local basis is evaluated away from x = 0")
        values = []
        for exponent, upper, lower in _basis_parameters(params):
            series = eval_pfq(upper, lower, x, precision_bits)
            if exponent == 0:
                values.append(series)
            else:
                values.append(mp.power(x, to_big(exponent, precision_bits)) * series)
        return values


def _series_jet(a: Sequence[Fraction], b: Sequence[Fraction], exponent: Fraction, x: BigComplex,
                order: int, precision_bits: int) -> List[BigComplex]:
    """Derivatives 0..order-1 of x^exponent * pFq(a; b; x)."""
    bits = precision_bits + OracleConfig.SERIES_GUARD_BITS
    with mp.workprec(bits):
        a = _as_big_list(a, bits)
        b = _as_big_list(b, bits)
        c = to_big(exponent, bits)
        x = to_big(x, bits)
        _check_lower(b)
        threshold = mp.ldexp(mp.mpf(1), -precision_bits - OracleConfig.SERIES_GUARD_BITS)
        sums = [mp.mpc(0)] * order
        for n, term, bound in _pfq_terms(a, b, x):
            # d^j/dx^j x^(n+c) = (n+c)(n+c-1)...(n+c-j+1) x^(n+c-j)
            factor = mp.mpc(1)
            for j in range(order):
                sums[j] += term * factor
                factor *= (n + c - j)
            if term == 0:
                break
            growth = (n + abs(c) + order) ** order
            if (n >= 2 * order and bound is not None and bound < 0.5
                    and 8 * abs(term) * growth < threshold):
                break
            if n >= OracleConfig.MAX_SERIES_TERMS:
                raise NoConvergence(f"jet series not converged after {n} terms")
        base = mp.power(x, c) if c != 0 else mp.mpc(1)
        jet = [sums[j] * base / mp.power(x, j) for j in range(order)]
    with mp.workprec(precision_bits):
        return [+v for v in jet]


def basis_jet(params: GHGParams, x,
              precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> CMatrix:
    """p x p matrix W[k][j] = (d/dx)^j of the k-th local basis solution at x."""
    require_valid(params)
    p = params.p
    with mp.workprec(precision_bits):
        x = to_big(x, precision_bits)
        rows = [_series_jet(upper, lower, exponent, x, p, precision_bits)
                for exponent, upper, lower in _basis_parameters(params)]
    return CMatrix.from_rows(rows, precision_bits)


def ode_coefficients(params: GHGParams) -> List[List[Fraction]]:
    """
    Exact q_k, k = 0..p, of sum_k q_k(x) f^(k) = 0, each as ascending
    coefficients in x. theta^k = sum_j S(k, j) x^j D^j with S the Stirling
    numbers of the second kind.
    """
    theta = sympy.Symbol('theta')
    p = params.p
    left = sympy.Poly(theta * sympy.prod([theta + sympy.Rational(b.numerator, b.denominator) - 1
                                          for b in params.b]), theta)
    right = sympy.Poly(sympy.prod([theta + sympy.Rational(a.numerator, a.denominator)
                                   for a in params.a]), theta)

    def in_d_basis(poly) -> List[Fraction]:
        # coefficient of x^j D^j
        coeffs = [Fraction(0)] * (p + 1)
        for (k,), value in poly.terms():
            for j in range(k + 1):
                weight = int(stirling(k, j))
                if weight:
                    coeffs[j] += Fraction(int(value.p), int(value.q)) * weight
        return coeffs

    left_d = in_d_basis(left)
    right_d = in_d_basis(right)
    q = []
    for j in range(p + 1):
        poly = [Fraction(0)] * (p + 2)
        poly[j] += left_d[j]
        poly[j + 1] -= right_d[j]
        q.append(poly)
    return q


def _shift_polynomial(coeffs: Sequence[BigComplex], c: BigComplex) -> List[BigComplex]:
    # q(c + t) in powers of t
    degree = len(coeffs) - 1
    shifted = []
    for r in range(degree + 1):
        shifted.append(mp.fsum(coeffs[k] * math.comb(k, r) * c ** (k - r)
                               for k in range(r, degree + 1)))
    return shifted


def _taylor_step(q: List[List[BigComplex]], center: BigComplex, jets: List[List[BigComplex]],
                 step: BigComplex, precision_bits: int) -> List[List[BigComplex]]:
    """
    Continue every jet from center to center + step.

    Coefficients f_n of each solution around the center follow from
    sum_{k,r} Q[k][r] f_{N-r+k} (N-r+k)!/(N-r)! = 0 (Q = q shifted to the
    center); terms are added until min order is reached and the last p
    contributions fall below 2^(-precision_bits - 8).
    """
    p = len(q) - 1
    shifted = [_shift_polynomial(qk, center) for qk in q]
    leading = shifted[p][0]
    others = [(k, r, shifted[k][r]) for k in range(p + 1) for r in range(len(shifted[k]))
              if (k, r) != (p, 0) and shifted[k][r] != 0]
    scale = max(max_abs_vector(row) for row in jets)
    threshold = mp.ldexp(max(scale, 1), -precision_bits - 8)
    abs_step = abs(step)

    results = []
    for jet in jets:
        coeffs = [jet[j] / math.factorial(j) for j in range(p)]
        new_jet = [mp.mpc(0)] * p
        power = mp.mpc(1)  # step^n
        small_run = 0
        n = 0
        while True:
            if n >= len(coeffs):
                N = n - p
                acc = mp.mpc(0)
                for k, r, value in others:
                    if r <= N:
                        index = N - r + k
                        acc += value * math.perm(index, k) * coeffs[index]
                coeffs.append(-acc / (leading * math.perm(N + p, p)))
            fn = coeffs[n]
            largest = mp.mpf(0)
            for j in range(min(p, n + 1)):
                # d^j/dt^j t^n at t = step
                contribution = fn * math.perm(n, j) * (power / step ** j if j else power)
                new_jet[j] += contribution
                largest = max(largest, abs(contribution))
            small_run = small_run + 1 if largest < threshold else 0
            if n >= OracleConfig.TAYLOR_MIN_ORDER and small_run >= p:
                break
            if n >= OracleConfig.TAYLOR_MAX_ORDER:
                raise NoConvergence(
                    f"Taylor expansion at {mp.nstr(center, 8)} not converged "
                    f"(step {mp.nstr(abs_step, 5)})"
                )
            power *= step
            n += 1
        results.append(new_jet)
    return results


def _singular_distance(z: BigComplex):
    return min(abs(z), abs(z - 1))


def loop_path(loop: LoopSpec, precision_bits: int = OracleConfig.WORKING_PRECISION_BITS
              ) -> List[BigComplex]:
    """
    Points from the base point back to it along the loop. Consecutive points
    are at most STEP_RADIUS_RATIO times the current distance to {0, 1} apart.
    """
    bits = precision_bits
    ratio = OracleConfig.STEP_RADIUS_RATIO
    with mp.workprec(bits):
        start = loop.point(0, bits)
        if loop.kind == "trivial":
            return [start, start]
        radius = to_big(loop.radius(), bits).real
        limit = singular_threshold(bits)
        if loop.discretization is not None:
            points = [loop.point(mp.mpf(i) / loop.discretization, bits)
                      for i in range(loop.discretization + 1)]
            for here, there in zip(points, points[1:]):
                if abs(there - here) > mp.mpf(ratio.numerator) / ratio.denominator * _singular_distance(here):
                    raise ValueError(
                        f"discretization {loop.discretization} too coarse near {mp.nstr(here, 5)}"
                    )
            points[-1] = start
            return points

        points = [start]
        turns = mp.mpf(0)
        while turns < 1:
            here = loop.point(turns, bits)
            allowed = mp.mpf(ratio.numerator) / ratio.denominator * _singular_distance(here)
            if allowed < limit:
                raise StepUnderflow(f"step {mp.nstr(allowed, 5)} below 2^(-{bits // 2})")
            # chord 2 r sin(pi * dturns) <= allowed
            dturns = mp.asin(min(mp.mpf(1), allowed / (2 * radius))) / mp.pi * mp.mpf('0.99')
            turns = min(mp.mpf(1), turns + dturns)
            points.append(start if turns == 1 else loop.point(turns, bits))
        return points


def path_dump(points: Sequence[BigComplex], precision_bits: int) -> dict:
    """{"centers": [[re, im], ...], "radii": [...]} of the expansion centers."""
    centers = points[:-1]
    return {
        "centers": [encode_number(c, precision_bits) for c in centers],
        "radii": [encode_number(_singular_distance(c), precision_bits)[0] for c in centers],
    }


def _continue_jets(params: GHGParams, points: Sequence[BigComplex], start: CMatrix,
                   precision_bits: int) -> CMatrix:
    bits = precision_bits + OracleConfig.SERIES_GUARD_BITS
    with mp.workprec(bits):
        q = [[to_big(c, bits) for c in qk] for qk in ode_coefficients(params)]
        jets = start.rows()
        for here, there in zip(points, points[1:]):
            if there == here:
                continue
            jets = _taylor_step(q, here, jets, there - here, precision_bits)
    with mp.workprec(precision_bits):
        return CMatrix.from_rows(jets, precision_bits)


@log_performance
def numeric_monodromy(params: GHGParams, loop: LoopSpec,
                      precision_bits: int = OracleConfig.WORKING_PRECISION_BITS,
                      dump_path: Optional[str] = None) -> CMatrix:
    """
    Raw-basis circuit matrix along the loop: W_end W_start^-1 with W the jet
    matrix of the local basis (normalizing constants g = id).
    """
    require_valid(params)
    check_precision(precision_bits)
    points = loop_path(loop, precision_bits)
    if dump_path:
        with open(dump_path, "w") as handle:
            handle.write(dump_json(path_dump(points, precision_bits)))
    start = basis_jet(params, to_big(loop.base_point, precision_bits), precision_bits)
    end = _continue_jets(params, points, start, precision_bits)
    logger.info(f"{loop.kind}: continued over {len(points) - 1} steps at {precision_bits} bits")
    return mat_mul(end, mat_inv(start))


def taylor_step_residual(params: GHGParams, x, dx,
                         precision_bits: int = OracleConfig.WORKING_PRECISION_BITS):
    """
    |series basis at x + dx - one Taylor step of its jet from x|: agreement
    of the local basis with the differential equation.
    """
    with mp.workprec(precision_bits):
        x = to_big(x, precision_bits)
        dx = to_big(dx, precision_bits)
        start = basis_jet(params, x, precision_bits)
        moved = _continue_jets(params, [x, x + dx], start, precision_bits)
        values = fundamental_system_ghg(params, x + dx, precision_bits)
        return max_abs_vector(moved[k, 0] - values[k] for k in range(params.p))


def gauge_normalize(raw_M1: CMatrix, lam, raw_M0: Optional[CMatrix] = None,
                    pinned: int = 0) -> GaugeResult:
    """
    Diagonal gauge g = diag(v) with v raw_M1 = lam v, v_0 = 1; the gauged
    matrices g raw g^-1 have (1, ..., 1) as lam-eigenvector.

    pinned selects the coordinate fixed to 1 during the solve; v is rescaled
    to v_0 = 1 afterwards either way.
    """
    bits = raw_M1.precision_bits
    with mp.workprec(bits):
        shifted = raw_M1.transpose() - CMatrix.identity(raw_M1.n, bits).scale(lam)
        try:
            v, residual = solve_pinned(shifted, pinned)
        except SingularMatrix as e:
            raise EigenvectorDegenerate(f"lambda-eigenvector solve is singular: {e}")
        vanishing = mp.ldexp(mp.mpf(1), -int(bits * OracleConfig.GAUGE_VANISHING_EXPONENT_RATIO))
        if abs(v[0]) < vanishing:
            raise VanishingComponent("component 0 of the lambda-eigenvector vanishes")
        v = [vi / v[0] for vi in v]
        for i, vi in enumerate(v):
            if abs(vi) < vanishing:
                raise VanishingComponent(f"component {i} of the lambda-eigenvector vanishes")
        g = CMatrix.diagonal(v, bits)
        g_inv = CMatrix.diagonal([1 / vi for vi in v], bits)
        gauged_M1 = mat_mul(mat_mul(g, raw_M1), g_inv)
        gauged_M0 = mat_mul(mat_mul(g, raw_M0), g_inv) if raw_M0 is not None else None
    return GaugeResult(g=g, raw_M0=raw_M0, raw_M1=raw_M1, gauged_M0=gauged_M0,
                       gauged_M1=gauged_M1, fit_residual=residual, pinned=pinned)


# --- F_C series ---

def _pochhammer_ratio_terms(upper, lower, x, m):
    # level-by-level multi-index terms; a level maps index tuples to terms
    level = {(0,) * m: mp.mpc(1)}
    total_degree = 0
    while True:
        yield total_degree, level
        following = {}
        for index in _indices_of_degree(m, total_degree + 1):
            i = next(k for k, n in enumerate(index) if n > 0)
            previous = index[:i] + (index[i] - 1,) + index[i + 1:]
            ni = previous[i]
            ratio = ((upper[0] + total_degree) * (upper[1] + total_degree)
                     / ((lower[i] + ni) * (ni + 1)) * x[i])
            following[index] = level[previous] * ratio
        level = following
        total_degree += 1


def _indices_of_degree(m: int, degree: int) -> Iterator[Tuple[int, ...]]:
    if m == 1:
        yield (degree,)
        return
    for first in range(degree + 1):
        for rest in _indices_of_degree(m - 1, degree - first):
            yield (first,) + rest


def eval_fc_series(params: FCParams, x: Sequence, J: SubsetIndex,
                   precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS) -> BigComplex:
    """
    J-th local solution at a point of the F_C polydisc:
    prod_{j in J} x_j^(1-b_j) times F_C with upper a_i + sum_{j in J}(1 - b_j)
    and lower b_j (j not in J) or 2 - b_j (j in J).
    """
    require_valid(params)
    m = params.m
    if len(x) != m or J.m != m:
        raise ValueError(f"point and subset must have {m} coordinates")
    bits = precision_bits + OracleConfig.SERIES_GUARD_BITS
    shift = sum((1 - params.b[j - 1] for j in J.members()), Fraction(0))
    upper_q = [params.a1 + shift, params.a2 + shift]
    lower_q = [2 - b if J.contains(j + 1) else b for j, b in enumerate(params.b)]
    with mp.workprec(bits):
        x = _as_big_list(x, bits)
        limit = mp.mpf(OracleConfig.SERIES_MAX_RADIUS.numerator) \
            / OracleConfig.SERIES_MAX_RADIUS.denominator
        if m == 1:
            # one variable is the Gauss series: |x| <= 9/10 as for eval_pfq
            radius = mp.sqrt(abs(x[0]))
            if abs(x[0]) > limit:
                raise ValueError(f"|x| = {mp.nstr(abs(x[0]), 5)} exceeds 9/10")
        else:
            radius = mp.fsum(mp.sqrt(abs(xi)) for xi in x)
            if radius > limit:
                raise ValueError(f"sum of sqrt|x_i| = {mp.nstr(radius, 5)} exceeds 9/10")
        upper = _as_big_list(upper_q, bits)
        lower = _as_big_list(lower_q, bits)
        _check_lower(lower)
        threshold = mp.ldexp(mp.mpf(1), -precision_bits - OracleConfig.SERIES_GUARD_BITS)
        rate = radius ** 2
        total = mp.mpc(0)
        counted = 0
        previous_mass = None
        for degree, level in _pochhammer_ratio_terms(upper, lower, x, m):
            mass = mp.fsum(abs(t) for t in level.values())
            total += mp.fsum(level.values())
            counted += len(level)
            if mass == 0:
                break
            observed = mass / previous_mass if previous_mass else mp.mpf(1)
            bound = max(rate, observed)
            if degree >= OracleConfig.TAYLOR_MIN_ORDER // 3 and bound < 1 \
                    and mass * bound / (1 - bound) < threshold:
                break
            if counted >= OracleConfig.MAX_SERIES_TERMS:
                raise NoConvergence(f"F_C series not converged after {counted} terms")
            previous_mass = mass
        prefactor = mp.fprod(mp.power(x[j - 1], to_big(1 - params.b[j - 1], bits))
                             for j in J.members())
        value = prefactor * total
    with mp.workprec(precision_bits):
        return +value


# --- End-to-end comparison ---

def _loop_matrix(payload: dict) -> CMatrix:
    return numeric_monodromy(payload["params"], payload["loop"], payload["precision_bits"],
                             payload.get("dump_path"))


@log_exceptions
@log_performance
def compare_to_closed_form(params: GHGParams,
                           precision_bits: int = OracleConfig.WORKING_PRECISION_BITS,
                           tol: Optional[str] = OracleConfig.DEFAULT_TOLERANCE,
                           eps: Fraction = OracleConfig.BASE_POINT,
                           dump_path: Optional[str] = None,
                           jobs: Optional[int] = 1,
                           circuit_set=None) -> Report:
    """
    Continue the local basis around both loops, fit the gauge and compare
    with the closed-form circuit set (or the one given, for negative controls).
    """
    require_valid(params)
    if params.p > OracleConfig.MAX_P:
        raise ValueError(f"the oracle handles p <= {OracleConfig.MAX_P}, got p = {params.p}")
    bits = precision_bits
    tolerance = mp.mpf(tol) if tol is not None else mp.mpf(OracleConfig.DEFAULT_TOLERANCE)
    closed = circuit_set if circuit_set is not None else build_circuit_set(params, bits)
    rho0, rho1 = LoopSpec("rho0", eps), LoopSpec("rho1", eps)

    payloads = [
        {"params": params, "loop": rho0, "precision_bits": bits},
        {"params": params, "loop": rho1, "precision_bits": bits,
         "dump_path": dump_path},
    ]
    outcomes = run_ordered(_loop_matrix, payloads, jobs)
    for outcome in outcomes:
        if outcome["status"] != "success":
            raise NoConvergence(f"continuation failed: {outcome['message']}")
    raw_m0, raw_m1 = outcomes[0]["result"], outcomes[1]["result"]

    report = Report(suite="oracle", seed=None, precision_bits=bits)
    context = {"system": "ghg", "a": [str(a) for a in params.a], "b": [str(b) for b in params.b],
               "eps": str(Fraction(eps))}

    def add(name, residual, check_tolerance=tolerance, detail=None):
        report.checks.append(Check(name, residual, check_tolerance, params=context, detail=detail))

    with mp.workprec(bits):
        lam = closed.lam
        add("oracle.raw_M0_diagonal", max_abs_diff(raw_m0, build_m0(params, bits)))
        add("oracle.raw_M1_spectrum",
            max(abs(char_poly_at(raw_m1, 1)), abs(char_poly_at(raw_m1, lam))))

        gauge = gauge_normalize(raw_m1, lam, raw_M0=raw_m0)
        add("oracle.gauged_M0", max_abs_diff(gauge.gauged_M0, closed.M0))
        add("oracle.gauged_M1", max_abs_diff(gauge.gauged_M1, closed.M1))

        alternate = gauge_normalize(raw_m1, lam, raw_M0=raw_m0, pinned=1)
        add("oracle.gauge_pin_invariance", max_abs_diff(alternate.gauged_M1, gauge.gauged_M1))

        product = mat_mul(gauge.gauged_M0, gauge.gauged_M1)
        add("oracle.loop_composition",
            max(abs(char_poly_at(product, 1 / a)) for a in closed.exp_params.A))

        trivial = numeric_monodromy(params, LoopSpec("trivial", eps), bits)
        add("oracle.trivial_loop",
            max_abs_diff(trivial, CMatrix.identity(params.p, bits)))

        consistency_tol = mp.ldexp(mp.mpf(1), -bits // 2 + 16)
        add("oracle.series_ode_consistency",
            taylor_step_residual(params, Fraction(eps), Fraction(eps) / 4, bits),
            consistency_tol)

    summary = report.summary()
    logger.info(f"oracle p={params.p}: {summary['passed']} passed, {summary['failed']} failed")
    return report
