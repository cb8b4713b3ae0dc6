# Input validation for command-line tokens and config values

import re
from fractions import Fraction
from typing import Optional, Tuple

import mpmath

from app_config.constants import NumericsConfig

_RATIONAL_PATTERN = re.compile(r"^\s*[+-]?\d+(\s*/\s*[+-]?\d+)?\s*$")


def validate_rational_token(token: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a rational written as 'u/d' or 'u'.

    Args:
        token: String to validate

    Returns:
        tuple: (is_valid, error_message)

    Example:
        >>> validate_rational_token("1/3")
        (True, None)
        >>> validate_rational_token("0.5")
        (False, "Rational must look like 'u/d' or 'u', got '0.5'")
    """
    if not isinstance(token, str):
        return False, "Rational must be a string"

    if not _RATIONAL_PATTERN.match(token):
        return False, f"Rational must look like 'u/d' or 'u', got '{token}'"

    if "/" in token and int(token.split("/")[1]) == 0:
        return False, f"Zero denominator in '{token}'"

    return True, None


def validate_rational_list(text: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a comma-separated list of rationals such as '1/3,1/5'.

    Returns:
        tuple: (is_valid, error_message)
    """
    if not isinstance(text, str) or not text.strip():
        return False, "Rational list must be a non-empty string"

    for position, token in enumerate(text.split(","), start=1):
        valid, msg = validate_rational_token(token)
        if not valid:
            return False, f"Entry {position}: {msg}"

    return True, None


def validate_precision(bits) -> Tuple[bool, Optional[str]]:
    """
    Validate a working precision in bits.

    Returns:
        tuple: (is_valid, error_message)
    """
    if not isinstance(bits, int) or isinstance(bits, bool):
        return False, f"Precision must be an integer, got {type(bits).__name__}"

    if bits < NumericsConfig.MIN_PRECISION_BITS:
        return False, f"Precision must be >= {NumericsConfig.MIN_PRECISION_BITS} bits, got {bits}"

    return True, None


def validate_positive_int(value, name: str) -> Tuple[bool, Optional[str]]:
    """
    Validate counts such as --trials, --jobs, --m, --p.

    Returns:
        tuple: (is_valid, error_message)
    """
    if not isinstance(value, int) or isinstance(value, bool):
        return False, f"{name} must be an integer"

    if value < 1:
        return False, f"{name} must be >= 1, got {value}"

    return True, None


def validate_base_point(eps: Fraction) -> Tuple[bool, Optional[str]]:
    """
    Validate the oracle base point: 0 < eps < 1/2.

    The rho_1 circle has radius 1 - eps around 1, so eps must stay well
    inside (0, 1) for both loops to avoid the other singular point.

    Returns:
        tuple: (is_valid, error_message)
    """
    if not isinstance(eps, Fraction):
        return False, "Base point must be a rational"

    if eps <= 0:
        return False, f"Base point must be positive, got {eps}"

    if eps >= Fraction(1, 2):
        return False, f"Base point must be < 1/2, got {eps}"

    return True, None


def validate_tolerance(text: str) -> Tuple[bool, Optional[str]]:
    """
    Validate a decimal tolerance such as '1e-40'.

    Parsed with mpmath, so exponents below the float range ('1e-400')
    stay positive.

    Returns:
        tuple: (is_valid, error_message)
    """
    try:
        value = mpmath.mpf(text)
    except (TypeError, ValueError):
        return False, f"Tolerance must be a decimal number, got {text!r}"

    if not mpmath.isfinite(value) or not value > 0:
        return False, f"Tolerance must be positive, got {text}"

    return True, None
