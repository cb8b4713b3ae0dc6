"""
Configuration constants for the hypergeometric monodromy toolkit.
All tunable parameters and magic numbers are defined here with explanations.
"""

from fractions import Fraction


class NumericsConfig:
    """Configuration for arbitrary-precision scalars and dense matrices."""

    # --- Precision ---
    # Working precision used when nothing else is requested (bits)
    DEFAULT_PRECISION_BITS = 256

    # Smallest precision accepted anywhere in the toolkit
    MIN_PRECISION_BITS = 64

    # --- LU Pivoting ---
    # A pivot whose magnitude is below 2^(-precision_bits * ratio) means singular
    SINGULAR_PIVOT_EXPONENT_RATIO = Fraction(1, 2)

    # --- Serialization ---
    # Decimal digits per precision bit when printing numbers (>= log10(2) ~ 0.301)
    DIGITS_PER_BIT = 0.302

    # Digits used for residual / tolerance strings in reports
    RESIDUAL_DIGITS = 3


class ParamsConfig:
    """Configuration for rational parameters and their random generation."""

    # --- Random Generation ---
    # Largest denominator drawn by the rejection sampler
    RANDOM_MAX_DENOMINATOR = 12

    # Give up after this many rejected draws for one parameter set
    RANDOM_MAX_ATTEMPTS = 10_000

    # --- Validation ---
    # validate_fc enumerates 2^m subsets; refuse beyond this
    FC_VALIDATION_MAX_M = 16

    # Unit-circle sanity margin exponent: ||A| - 1| <= 2^(-precision_bits + 16)
    UNIT_CIRCLE_SLACK_BITS = 16


class FCConfig:
    """Configuration for the Lauricella F_C builders."""

    # Dense 2^m x 2^m construction guard (2^10 = 1024)
    MAX_DENSE_M = 10

    # Range of m drawn by suites when no --m is given (inclusive)
    SUITE_M_MIN = 1
    SUITE_M_MAX = 6


class GHGConfig:
    """Configuration for the generalized hypergeometric builders."""

    # Range of p drawn by suites when no --p is given (inclusive)
    SUITE_P_MIN = 2
    SUITE_P_MAX = 6


class OracleConfig:
    """Configuration for the numerical analytic-continuation oracle."""

    # --- Base Point & Loops ---
    # Base point epsilon on the positive real axis
    BASE_POINT = Fraction(1, 10)

    # Step length <= ratio * distance from the current center to {0, 1}
    STEP_RADIUS_RATIO = Fraction(1, 2)

    # Minimum Taylor order per step; more terms are added until the tail is negligible
    TAYLOR_MIN_ORDER = 30

    # Hard cap on Taylor order per step
    TAYLOR_MAX_ORDER = 4000

    # --- Series ---
    # Hard cap on series terms before NoConvergence
    MAX_SERIES_TERMS = 1_000_000

    # Series are only summed inside |x| <= this radius
    SERIES_MAX_RADIUS = Fraction(9, 10)

    # Extra guard bits below the working precision for series truncation
    SERIES_GUARD_BITS = 16

    # --- Comparison ---
    # Working precision and tolerance of the end-to-end comparison
    WORKING_PRECISION_BITS = 128
    DEFAULT_TOLERANCE = "1e-10"

    # Largest rank p accepted by compare_to_closed_form (desk-scale continuation)
    MAX_P = 4

    # --- F_C Base Point ---
    # Consecutive epsilons satisfy eps_{i+1} <= eps_i / ratio
    FC_EPS_RATIO = 100

    # Gauge components below 2^(-precision_bits * ratio) are treated as vanishing
    GAUGE_VANISHING_EXPONENT_RATIO = Fraction(1, 4)


class SuiteConfig:
    """Configuration for the seeded identity suites."""

    # Tolerance at the reference precision
    REFERENCE_TOLERANCE = "1e-40"
    REFERENCE_PRECISION_BITS = 256

    # Tolerance changes by 2^(-delta_bits / 4) away from the reference ...
    TOLERANCE_SCALING_DIVISOR = 4

    # ... but never below the rounding floor 2^(-precision_bits * 0.55)
    TOLERANCE_FLOOR_EXPONENT_RATIO = 0.55

    DEFAULT_SEED = 42
    DEFAULT_TRIALS = 10

    # Entry perturbed by negative controls (row, column of the reflection)
    PERTURB_ENTRY = (0, 0)


class ExactConfig:
    """Configuration for the optional cyclotomic exact mode."""

    # Largest N for which Q(zeta_N) arithmetic is attempted
    MAX_CONDUCTOR = 420

    # Size limits of the exact mode
    MAX_P = 4
    MAX_M = 4


class CLIConfig:
    """Configuration for the command-line front end."""

    EXIT_OK = 0
    EXIT_CHECK_FAILED = 1
    EXIT_INVALID_PARAMETERS = 2
    EXIT_NUMERIC_FAILURE = 3

    OUTPUT_FORMATS = ("json",)


# --- Export Convenience Constants ---
# These can be used directly without accessing the class

DEFAULT_PRECISION_BITS = NumericsConfig.DEFAULT_PRECISION_BITS
MIN_PRECISION_BITS = NumericsConfig.MIN_PRECISION_BITS
MAX_DENSE_M = FCConfig.MAX_DENSE_M
BASE_POINT = OracleConfig.BASE_POINT
