"""
Rational exponent parameters, their non-integrality assumptions, the map to
unit-circle values A_i = exp(2 pi i a_i), B_j = exp(2 pi i b_j), and the
vee involution (negate every parameter).

Parameters are restricted to rationals: non-integrality is then decidable
and, for real parameters, vee on numeric values is complex conjugation.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Sequence, Tuple, Union

import mpmath
import numpy as np
from mpmath import mp

from app_config.constants import NumericsConfig, ParamsConfig
from monodromy_utils.encoding import encode_rational
from monodromy_utils.validation import validate_rational_list, validate_rational_token

from .errors import InvalidParameters, MTooLarge
from .numerics import BigComplex, CMatrix, check_precision

logger = logging.getLogger(__name__)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, str):
        return parse_rational(value)
    raise ValueError(f"parameters must be rationals (Fraction, int or 'u/d'), got {value!r}")


def parse_rational(token: str) -> Fraction:
    """Parse 'u/d' or 'u' into a Fraction."""
    valid, msg = validate_rational_token(token)
    if not valid:
        raise ValueError(msg)
    return Fraction(token.replace(" ", ""))


def parse_rational_list(text: str) -> Tuple[Fraction, ...]:
    """Parse '1/3,1/5' into a tuple of Fractions."""
    valid, msg = validate_rational_list(text)
    if not valid:
        raise ValueError(msg)
    return tuple(parse_rational(token) for token in text.split(","))


@dataclass(frozen=True)
class GHGParams:
    """Parameters a_1..a_p, b_1..b_{p-1} of the generalized hypergeometric equation."""

    a: Tuple[Fraction, ...]
    b: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'a', tuple(_as_fraction(x) for x in self.a))
        object.__setattr__(self, 'b', tuple(_as_fraction(x) for x in self.b))
        if len(self.a) < 2:
            raise ValueError(f"p must be >= 2, got {len(self.a)} upper parameters")
        if len(self.b) != len(self.a) - 1:
            raise ValueError(
                f"need p-1 = {len(self.a) - 1} lower parameters, got {len(self.b)}"
            )

    @property
    def p(self) -> int:
        return len(self.a)

    system = "ghg"


@dataclass(frozen=True)
class FCParams:
    """Parameters a_1, a_2, b_1..b_m of Lauricella's F_C system."""

    a1: Fraction
    a2: Fraction
    b: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'a1', _as_fraction(self.a1))
        object.__setattr__(self, 'a2', _as_fraction(self.a2))
        object.__setattr__(self, 'b', tuple(_as_fraction(x) for x in self.b))
        if len(self.b) < 1:
            raise ValueError("F_C needs m >= 1 lower parameters")

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def a(self) -> Tuple[Fraction, Fraction]:
        return (self.a1, self.a2)

    system = "fc"


Params = Union[GHGParams, FCParams]


@dataclass(frozen=True)
class Violation:
    """One failed non-integrality condition: the expression and its integer value."""

    expression: str
    value: Fraction

    def __str__(self):
        return f"{self.expression} = {encode_rational(self.value)} ∈ ℤ"


def _is_integer(x: Fraction) -> bool:
    return x.denominator == 1


def validate_ghg(params: GHGParams) -> List[Violation]:
    """
    Non-integrality conditions of the rank-p equation.

    a_i, b_j, a_i - b_j, b_j - b_j' (j != j') and sum(a) - sum(b) must all be
    non-integral. Returns every violation, empty when valid.
    """
    violations = []
    for i, a in enumerate(params.a, start=1):
        if _is_integer(a):
            violations.append(Violation(f"a{i}", a))
    for j, b in enumerate(params.b, start=1):
        if _is_integer(b):
            violations.append(Violation(f"b{j}", b))
    for i, a in enumerate(params.a, start=1):
        for j, b in enumerate(params.b, start=1):
            if _is_integer(a - b):
                violations.append(Violation(f"a{i}-b{j}", a - b))
    for (j, bj), (k, bk) in combinations(enumerate(params.b, start=1), 2):
        if _is_integer(bj - bk):
            violations.append(Violation(f"b{j}-b{k}", bj - bk))
    total = sum(params.a, Fraction(0)) - sum(params.b, Fraction(0))
    if _is_integer(total):
        violations.append(Violation("Σa-Σb", total))
    return violations


def _subset_label(members: Sequence[int]) -> str:
    return "(" + "+".join(f"b{j}" for j in members) + ")"


def validate_fc(params: FCParams) -> List[Violation]:
    """
    Non-integrality conditions of the F_C system.

    b_j, a_i - sum_{j in J} b_j for i = 1, 2 and every subset J (J empty
    gives a_i itself), and 2(a_1 + a_2 - sum b_j) must be non-integral.
    """
    m = params.m
    if m > ParamsConfig.FC_VALIDATION_MAX_M:
        raise MTooLarge(
            f"validate_fc enumerates 2^m subsets; m={m} exceeds {ParamsConfig.FC_VALIDATION_MAX_M}"
        )
    violations = []
    for j, b in enumerate(params.b, start=1):
        if _is_integer(b):
            violations.append(Violation(f"b{j}", b))
    for mask in range(1 << m):
        members = [j + 1 for j in range(m) if mask >> j & 1]
        shift = sum((params.b[j - 1] for j in members), Fraction(0))
        for i, a in enumerate(params.a, start=1):
            value = a - shift
            if _is_integer(value):
                label = f"a{i}" if not members else f"a{i}-{_subset_label(members)}"
                violations.append(Violation(label, value))
    doubled = 2 * (params.a1 + params.a2 - sum(params.b, Fraction(0)))
    if _is_integer(doubled):
        violations.append(Violation("2(a1+a2-Σb)", doubled))
    return violations


def validate(params: Params) -> List[Violation]:
    if isinstance(params, GHGParams):
        return validate_ghg(params)
    return validate_fc(params)


def require_valid(params: Params) -> Params:
    """Raise InvalidParameters listing every violation, else return params."""
    violations = validate(params)
    if violations:
        logger.warning(f"rejected {params.system} parameters: {'; '.join(map(str, violations))}")
        raise InvalidParameters(violations)
    return params


@dataclass(frozen=True)
class ExpParams:
    """Unit-circle values of the parameters at a working precision."""

    A: Tuple[BigComplex, ...]
    B: Tuple[BigComplex, ...]
    source: Params
    precision_bits: int


def unit_root(r: Fraction, precision_bits: int) -> BigComplex:
    """exp(2 pi i r) for rational r, exact at quarter turns."""
    r = Fraction(r) % 1
    with mp.workprec(precision_bits):
        twice = mp.mpf(2 * r.numerator) / r.denominator
        return mp.mpc(mp.cospi(twice), mp.sinpi(twice))


def exponentiate(params: Params, precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS
                 ) -> ExpParams:
    """A_i = exp(2 pi i a_i), B_j = exp(2 pi i b_j) at working precision."""
    check_precision(precision_bits)
    return ExpParams(
        A=tuple(unit_root(a, precision_bits) for a in params.a),
        B=tuple(unit_root(b, precision_bits) for b in params.b),
        source=params,
        precision_bits=precision_bits,
    )


def margin(precision_bits: int):
    """Distinctness margin 2^(-precision_bits/2)."""
    with mp.workprec(precision_bits):
        return mp.ldexp(mp.mpf(1), -(precision_bits // 2))


def margin_failures(exp: ExpParams) -> List[str]:
    """
    Numeric counterpart of validation: every pair that must differ does so by
    more than 2^(-precision_bits/2), and every value lies on the unit circle.
    """
    bits = exp.precision_bits
    failures = []
    with mp.workprec(bits):
        gap = margin(bits)
        slack = mp.ldexp(mp.mpf(1), -bits + ParamsConfig.UNIT_CIRCLE_SLACK_BITS)
        one = mp.mpc(1)
        for name, values in (("A", exp.A), ("B", exp.B)):
            for k, x in enumerate(values, start=1):
                if abs(abs(x) - 1) > slack:
                    failures.append(f"|{name}{k}| != 1")
                if abs(x - one) <= gap:
                    failures.append(f"{name}{k} = 1")
        if isinstance(exp.source, GHGParams):
            for i, a in enumerate(exp.A, start=1):
                for j, b in enumerate(exp.B, start=1):
                    if abs(a - b) <= gap:
                        failures.append(f"A{i} = B{j}")
            for (j, bj), (k, bk) in combinations(enumerate(exp.B, start=1), 2):
                if abs(bj - bk) <= gap:
                    failures.append(f"B{j} = B{k}")
            if abs(mp.fprod(exp.A) - mp.fprod(exp.B)) <= gap:
                failures.append("ΠA = ΠB")
    return failures


def vee(x, mode: str = "numeric"):
    """
    The involution negating every parameter.

    On values built from unit-circle generators with real parameters it is
    entrywise complex conjugation; exact-mode values substitute zeta -> 1/zeta.
    """
    if hasattr(x, 'vee'):
        return x.vee()
    if mode != "numeric":
        raise ValueError(f"exact-mode vee needs an exact value, got {type(x).__name__}")
    if isinstance(x, CMatrix):
        return x.conjugate()
    if isinstance(x, (list, tuple)):
        return type(x)(vee(item) for item in x)
    return mpmath.conj(x)


# --- Derived parameter sets ---

def as_fc(params: GHGParams) -> FCParams:
    """The p = 2 equation seen as the m = 1 F_C system."""
    if params.p != 2:
        raise ValueError(f"only p = 2 maps to F_C with m = 1, got p = {params.p}")
    return FCParams(params.a[0], params.a[1], params.b)


def as_ghg(params: FCParams) -> GHGParams:
    """The m = 1 F_C system seen as the p = 2 equation."""
    if params.m != 1:
        raise ValueError(f"only m = 1 maps to the rank-2 equation, got m = {params.m}")
    return GHGParams((params.a1, params.a2), params.b)


def fc_truncated(params: FCParams) -> FCParams:
    """(a1, a2; b_1..b_{m-1}): the system on the hyperplane x_m = 0."""
    if params.m < 2:
        raise ValueError("truncation needs m >= 2")
    return FCParams(params.a1, params.a2, params.b[:-1])


def fc_shifted(params: FCParams) -> FCParams:
    """(a1 - b_m, a2 - b_m; b_1..b_{m-1}): ratio system of the x_m^(1-b_m) block."""
    if params.m < 2:
        raise ValueError("shifting needs m >= 2")
    bm = params.b[-1]
    return FCParams(params.a1 - bm, params.a2 - bm, params.b[:-1])


# --- Random generation ---

def _random_rational(rng: np.random.Generator, max_denominator: int) -> Fraction:
    den = int(rng.integers(2, max_denominator + 1))
    num = int(rng.integers(-den, den + 1))
    return Fraction(num, den)


def random_ghg_params(rng: np.random.Generator, p: int,
                      max_denominator: int = ParamsConfig.RANDOM_MAX_DENOMINATOR) -> GHGParams:
    """Rejection-sample a valid rank-p parameter set."""
    for _ in range(ParamsConfig.RANDOM_MAX_ATTEMPTS):
        candidate = GHGParams(
            tuple(_random_rational(rng, max_denominator) for _ in range(p)),
            tuple(_random_rational(rng, max_denominator) for _ in range(p - 1)),
        )
        if not validate_ghg(candidate):
            return candidate
    raise RuntimeError(f"no valid p={p} parameters after {ParamsConfig.RANDOM_MAX_ATTEMPTS} draws")


def random_fc_params(rng: np.random.Generator, m: int,
                     max_denominator: int = ParamsConfig.RANDOM_MAX_DENOMINATOR) -> FCParams:
    """Rejection-sample a valid m-variable F_C parameter set."""
    for _ in range(ParamsConfig.RANDOM_MAX_ATTEMPTS):
        candidate = FCParams(
            _random_rational(rng, max_denominator),
            _random_rational(rng, max_denominator),
            tuple(_random_rational(rng, max_denominator) for _ in range(m)),
        )
        if not validate_fc(candidate):
            return candidate
    raise RuntimeError(f"no valid m={m} parameters after {ParamsConfig.RANDOM_MAX_ATTEMPTS} draws")


# --- JSON ---

def params_to_json(params: Params) -> dict:
    return {
        "system": params.system,
        "a": [encode_rational(x) for x in params.a],
        "b": [encode_rational(x) for x in params.b],
    }


def params_from_json(payload: dict) -> Params:
    system = payload.get("system")
    a = tuple(parse_rational(str(x)) for x in payload.get("a", []))
    b = tuple(parse_rational(str(x)) for x in payload.get("b", []))
    if system == "ghg":
        return GHGParams(a, b)
    if system == "fc":
        if len(a) != 2:
            raise ValueError(f"F_C needs exactly two upper parameters, got {len(a)}")
        return FCParams(a[0], a[1], b)
    raise ValueError(f"unknown system {system!r}; expected 'ghg' or 'fc'")
