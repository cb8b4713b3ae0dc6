"""
JSON encoding of arbitrary-precision numbers and matrices.

JSON doubles cannot carry 256-bit values, so every number travels as a
decimal string with at least 0.3 * precision_bits significant digits.
"""

import json
import math
from fractions import Fraction

import mpmath
from mpmath import mp

from app_config.constants import NumericsConfig


def digits_for(precision_bits):
    """Significant decimal digits written for a given precision."""
    return max(1, math.ceil(precision_bits * NumericsConfig.DIGITS_PER_BIT))


def encode_real(value, precision_bits):
    with mp.workprec(precision_bits):
        value = mp.mpf(value)
        if value == 0:
            return "0"
        return mpmath.nstr(value, digits_for(precision_bits), strip_zeros=False,
                           min_fixed=-4, max_fixed=8)


def encode_number(value, precision_bits):
    """mpc -> [re_string, im_string]."""
    with mp.workprec(precision_bits):
        value = mp.mpc(value)
        return [encode_real(value.real, precision_bits), encode_real(value.imag, precision_bits)]


def decode_number(pair, precision_bits):
    """[re_string, im_string] -> mpc at precision_bits."""
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValueError(f"complex number must be a [re, im] pair, got {pair!r}")
    with mp.workprec(precision_bits):
        return mp.mpc(mp.mpf(pair[0]), mp.mpf(pair[1]))


def encode_matrix(matrix):
    """CMatrix -> {"n", "precision_bits", "entries"} with entries row-major."""
    bits = matrix.precision_bits
    entries = [encode_number(value, bits) for row in matrix.rows() for value in row]
    return {"n": matrix.n, "precision_bits": bits, "entries": entries}


def decode_matrix(payload):
    """Inverse of encode_matrix."""
    # Local import keeps monodromy_utils importable without the core package
    from monodromy_core.numerics import CMatrix

    try:
        n = int(payload["n"])
        bits = int(payload["precision_bits"])
        entries = payload["entries"]
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed matrix JSON: {e}")
    if len(entries) != n * n:
        raise ValueError(f"matrix JSON has {len(entries)} entries, expected {n * n}")
    values = [decode_number(pair, bits) for pair in entries]
    rows = [values[i * n:(i + 1) * n] for i in range(n)]
    return CMatrix.from_rows(rows, bits)


def encode_rational(value):
    """Fraction -> 'u/d' (integers as 'u')."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def dump_json(document):
    """Deterministic serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
