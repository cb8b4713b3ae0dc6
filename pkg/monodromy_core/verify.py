"""
Seeded identity suites over the closed-form circuit sets.

Every check evaluates one identity as a residual and compares it with a
tolerance. Residual None stands for a structural failure (reported as
"inf"); a skipped check records why it could not run and is neither a
pass nor a failure.
"""

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from mpmath import mp

from app_config.constants import FCConfig, GHGConfig, NumericsConfig, SuiteConfig
from monodromy_utils.encoding import encode_rational
from monodromy_utils.logger import log_exceptions, log_performance
from monodromy_utils.parallel import run_ordered

from . import exact
from .errors import MonodromyError, MTooLarge, SingularMatrix
from .fc import (
    CircuitSetFC,
    block_determinants_expected,
    build_fc_circuit_set,
    build_fc_mlast,
    lambda_quadratic_residual,
    reduction_block_size,
    reduction_chain,
    reflection_coefficient_fc_closed_form,
    trace_h_fc_closed_form,
)
from .ghg import (
    CircuitSetGHG,
    build_circuit_set,
    closed_form_p2,
    det_m0m1_expected,
    distinct_exponent_indices,
    inf_spectrum_residual,
    reflection_coefficient_closed_form,
    riemann_scheme,
    solve_h_from_spectrum,
    trace_h_closed_form,
)
from .numerics import (
    CMatrix,
    char_poly_at,
    default_tolerance,
    det,
    diagonal_blocks,
    format_residual,
    mat_mul,
    max_abs_diff,
    max_abs_vector,
    off_block_mass,
    rank_one_defect,
)
from .params import (
    FCParams,
    GHGParams,
    Params,
    as_ghg,
    fc_shifted,
    fc_truncated,
    params_to_json,
    random_fc_params,
    random_ghg_params,
    validate_fc,
    vee,
)

logger = logging.getLogger(__name__)

__all__ = [
    'Check',
    'Report',
    'check_h_invariance',
    'check_spectrum_ghg',
    'check_fc_relations',
    'check_reduction',
    'default_tolerance',
    'perturb_entry',
    'run_suite',
]


@dataclass(frozen=True)
class Check:
    """One named identity: residual vs tolerance."""

    name: str
    residual: Optional[object]
    tolerance: object
    params: Optional[dict] = None
    seed: Optional[int] = None
    trial: Optional[int] = None
    skipped: Optional[str] = None
    detail: Optional[str] = None
    skipped_parts: Tuple[str, ...] = ()

    @property
    def passed(self) -> Optional[bool]:
        if self.skipped is not None:
            return None
        return self.residual is not None and self.residual <= self.tolerance

    def with_context(self, params: Optional[dict], seed: Optional[int],
                     trial: Optional[int]) -> 'Check':
        return dataclasses.replace(self, params=params, seed=seed, trial=trial)

    def to_json(self) -> dict:
        document = {
            "name": self.name,
            "residual": "skipped" if self.skipped is not None else format_residual(self.residual),
            "tolerance": format_residual(self.tolerance),
            "pass": self.passed,
            "params": self.params,
        }
        if self.seed is not None:
            document["seed"] = self.seed
        if self.trial is not None:
            document["trial"] = self.trial
        if self.skipped is not None:
            document["skipped"] = self.skipped
        if self.detail is not None:
            document["detail"] = self.detail
        if self.skipped_parts:
            document["skipped_parts"] = list(self.skipped_parts)
        return document


@dataclass
class Report:
    """Checks of one suite run. wall_time is informational and never serialized."""

    suite: str
    seed: Optional[int]
    precision_bits: int
    checks: List[Check] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def failed(self) -> List[Check]:
        return [c for c in self.checks if c.passed is False]

    @property
    def skipped(self) -> List[Check]:
        return [c for c in self.checks if c.passed is None]

    @property
    def all_passed(self) -> bool:
        return not self.failed

    def summary(self) -> Dict[str, int]:
        return {
            "total": len(self.checks),
            "passed": sum(1 for c in self.checks if c.passed is True),
            "failed": len(self.failed),
            "skipped": len(self.skipped),
        }

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "precision_bits": self.precision_bits,
            "checks": [c.to_json() for c in self.checks],
            "summary": self.summary(),
        }


def _tolerance(tolerance, precision_bits: int):
    if tolerance is None:
        return default_tolerance(precision_bits)
    with mp.workprec(precision_bits):
        return mp.mpf(tolerance)


def _guarded(name: str, tolerance, compute: Callable[[], object]) -> Check:
    # Numeric breakdowns inside a check are structural failures, not crashes
    try:
        return Check(name, compute(), tolerance)
    except MonodromyError as e:
        return Check(name, None, tolerance, detail=f"{type(e).__name__}: {e}")


# --- Generic checks ---

def check_h_invariance(M: CMatrix, H: CMatrix, tolerance=None,
                       name: str = "h_invariance") -> Check:
    """max |M H (M^vee)^T - H|."""
    tolerance = _tolerance(tolerance, M.precision_bits)
    return _guarded(
        name, tolerance,
        lambda: max_abs_diff(mat_mul(mat_mul(M, H), vee(M).transpose()), H),
    )


def _fixed_vector_residual(M: CMatrix, H: CMatrix):
    # (h_k e_0 - e_k) M = h_k e_0 - e_k for every k >= 1
    h = H.diagonal_entries()
    rows = M.rows()
    n = M.n
    with mp.workprec(M.precision_bits):
        best = mp.mpf(0)
        for k in range(1, n):
            for j in range(n):
                image = h[k] * rows[0][j] - rows[k][j]
                expected = (h[k] if j == 0 else 0) - (1 if j == k else 0)
                best = max(best, abs(image - expected))
        return best


def _column_sum_residual(M: CMatrix, lam):
    rows = M.rows()
    with mp.workprec(M.precision_bits):
        return max_abs_vector(mp.fsum(rows[i][j] for i in range(M.n)) - lam for j in range(M.n))


def check_reflection_structure(M: CMatrix, H: CMatrix, tolerance=None,
                               name: str = "reflection_structure") -> Check:
    """rank(M - id) = 1 and every w with w H 1^T = 0 is fixed."""
    tolerance = _tolerance(tolerance, M.precision_bits)

    def compute():
        identity = CMatrix.identity(M.n, M.precision_bits)
        return max(rank_one_defect(M - identity), _fixed_vector_residual(M, H))

    return _guarded(name, tolerance, compute)


def check_column_sums(M: CMatrix, lam, tolerance=None, name: str = "column_sums") -> Check:
    """1 M = lam 1."""
    tolerance = _tolerance(tolerance, M.precision_bits)
    return _guarded(name, tolerance, lambda: _column_sum_residual(M, lam))


def perturb_entry(matrix: CMatrix, i: int, j: int, delta) -> CMatrix:
    """Copy of matrix with delta added to entry (i, j)."""
    with mp.workprec(matrix.precision_bits):
        return matrix.with_entry(i, j, matrix[i, j] + mp.mpf(delta))


# --- Rank-p checks ---

def check_spectrum_ghg(circuit_set: CircuitSetGHG, product: Optional[CMatrix] = None,
                       tolerance=None) -> Check:
    """max_l |det(id / A_l - M0 M1)|; product overrides M0 M1 for negative controls."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    target = product if product is not None else mat_mul(circuit_set.M0, circuit_set.M1)

    def compute():
        with mp.workprec(bits):
            return max(abs(char_poly_at(target, 1 / a)) for a in circuit_set.exp_params.A)

    return _guarded("ghg.spectrum", tolerance, compute)


def check_trace_m0m1(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """tr(M0 M1) = sum 1/A_l."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)

    def compute():
        with mp.workprec(bits):
            expected = mp.fsum(1 / a for a in circuit_set.exp_params.A)
            return abs(mat_mul(circuit_set.M0, circuit_set.M1).trace() - expected)

    return _guarded("ghg.trace_m0m1", tolerance, compute)


def check_determinants_ghg(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """det M1 = lambda, det M0 = 1/prod B, det(M0 M1) = 1/prod A."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    exp = circuit_set.exp_params

    def compute():
        with mp.workprec(bits):
            return max(
                abs(det(circuit_set.M1) - circuit_set.lam),
                abs(det(circuit_set.M0) - 1 / mp.fprod(exp.B)),
                abs(det(mat_mul(circuit_set.M0, circuit_set.M1)) - det_m0m1_expected(exp)),
            )

    return _guarded("ghg.determinants", tolerance, compute)


def check_m_infinity(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """M_inf = (M0 M1)^-1 has eigenvalues A_1..A_p."""
    tolerance = _tolerance(tolerance, circuit_set.precision_bits)
    return _guarded("ghg.m_infinity_spectrum", tolerance,
                    lambda: inf_spectrum_residual(circuit_set))


def check_trace_h(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """Tr(H) and (1 - lambda)/Tr(H) against their closed forms."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    exp = circuit_set.exp_params

    def compute():
        with mp.workprec(bits):
            trace = circuit_set.H.trace()
            return max(
                abs(trace - trace_h_closed_form(exp)),
                abs((1 - circuit_set.lam) / trace - reflection_coefficient_closed_form(exp)),
            )

    return _guarded("ghg.trace_h", tolerance, compute)


def check_h_from_spectrum(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """
    h re-derived from Q(1/A_l) = 0 agrees with the closed form.

    When a_i - a_j is an integer two equations coincide; if the remaining
    ones do not determine h the check is skipped.
    """
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    repeated = len(distinct_exponent_indices(circuit_set.params)) < circuit_set.p

    def compute():
        solved, consistency = solve_h_from_spectrum(circuit_set.exp_params)
        with mp.workprec(bits):
            closed = circuit_set.H.diagonal_entries()[1:]
            return max(consistency, max_abs_vector(s - c for s, c in zip(solved, closed)))

    try:
        return Check("ghg.h_from_spectrum", compute(), tolerance)
    except SingularMatrix as e:
        if repeated:
            return Check("ghg.h_from_spectrum", None, tolerance,
                         skipped=f"repeated exponents at infinity: {e}")
        return Check("ghg.h_from_spectrum", None, tolerance, detail=f"SingularMatrix: {e}")
    except MonodromyError as e:
        return Check("ghg.h_from_spectrum", None, tolerance, detail=f"{type(e).__name__}: {e}")


def check_p2_closed_form(circuit_set: CircuitSetGHG, tolerance=None) -> Check:
    """The explicit rank-2 h and M1 match the general builders."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)

    def compute():
        h, m1 = closed_form_p2(circuit_set.exp_params)
        with mp.workprec(bits):
            return max(abs(h - circuit_set.H[1, 1]), max_abs_diff(m1, circuit_set.M1))

    return _guarded("ghg.p2_closed_form", tolerance, compute)


def check_riemann_scheme(params: GHGParams) -> Check:
    """Fuchs relation of the exact exponent table (exact: residual 0 or inf)."""
    defect = riemann_scheme(params).fuchs_defect()
    return Check("ghg.fuchs_relation", mp.mpf(0) if defect == 0 else None, mp.mpf(0),
                 detail=None if defect == 0 else f"defect {encode_rational(defect)}")


def ghg_checks(circuit_set: CircuitSetGHG, tolerance=None) -> List[Check]:
    """Every rank-p identity for one circuit set."""
    checks = [
        check_h_invariance(circuit_set.M0, circuit_set.H, tolerance, "ghg.h_invariance.M0"),
        check_h_invariance(circuit_set.M1, circuit_set.H, tolerance, "ghg.h_invariance.M1"),
        check_spectrum_ghg(circuit_set, tolerance=tolerance),
        check_trace_m0m1(circuit_set, tolerance),
        check_reflection_structure(circuit_set.M1, circuit_set.H, tolerance,
                                   "ghg.reflection_structure"),
        check_column_sums(circuit_set.M1, circuit_set.lam, tolerance, "ghg.column_sums"),
        check_determinants_ghg(circuit_set, tolerance),
        check_m_infinity(circuit_set, tolerance),
        check_trace_h(circuit_set, tolerance),
        check_h_from_spectrum(circuit_set, tolerance),
        check_riemann_scheme(circuit_set.params),
    ]
    if circuit_set.p == 2:
        checks.append(check_p2_closed_form(circuit_set, tolerance))
    return checks


# --- F_C checks ---

def check_fc_relations(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    """
    Commutation of M_1..M_m and (M_i M_{m+1})^2 = (M_{m+1} M_i)^2.

    With one variable the loops around 0 and 1 generate a free group, so
    neither relation applies and the check is skipped.
    """
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    if circuit_set.m < 2:
        return Check("fc.relations", None, tolerance,
                     skipped="needs m >= 2 (no relation among M_1, M_2 for one variable)")

    def compute():
        best = mp.mpf(0)
        generators = circuit_set.M
        for i, mi in enumerate(generators):
            for mj in generators[i + 1:]:
                best = max(best, max_abs_diff(mat_mul(mi, mj), mat_mul(mj, mi)))
        for mi in generators:
            left = mat_mul(mi, circuit_set.Mlast)
            right = mat_mul(circuit_set.Mlast, mi)
            best = max(best, max_abs_diff(mat_mul(left, left), mat_mul(right, right)))
        return best

    return _guarded("fc.relations", tolerance, compute)


def check_fc_eigenstructure(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    """1 M_{m+1} = lambda 1, (h_J e_0 - e_J) M_{m+1} fixed, rank(M_{m+1} - id) = 1."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    mlast = circuit_set.Mlast

    def compute():
        identity = CMatrix.identity(mlast.n, bits)
        return max(
            _column_sum_residual(mlast, circuit_set.lam),
            _fixed_vector_residual(mlast, circuit_set.H),
            rank_one_defect(mlast - identity),
        )

    return _guarded("fc.eigenstructure", tolerance, compute)


def check_fc_determinants(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    """det M_{m+1} = lambda and det M_i = B_i^(-2^(m-1))."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    half = 1 << (circuit_set.m - 1)

    def compute():
        with mp.workprec(bits):
            best = abs(det(circuit_set.Mlast) - circuit_set.lam)
            for mi, b in zip(circuit_set.M, circuit_set.exp_params.B):
                best = max(best, abs(det(mi) - b ** (-half)))
            return best

    return _guarded("fc.determinants", tolerance, compute)


def check_fc_trace_h(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    exp = circuit_set.exp_params

    def compute():
        with mp.workprec(bits):
            trace = circuit_set.H.trace()
            return max(
                abs(trace - trace_h_fc_closed_form(exp)),
                abs((1 - circuit_set.lam) / trace - reflection_coefficient_fc_closed_form(exp)),
            )

    return _guarded("fc.trace_h", tolerance, compute)


def check_lambda_quadratic(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    tolerance = _tolerance(tolerance, circuit_set.precision_bits)
    if circuit_set.m < 2:
        return Check("fc.lambda_quadratic", None, tolerance, skipped="needs m >= 2")
    return _guarded("fc.lambda_quadratic", tolerance,
                    lambda: lambda_quadratic_residual(circuit_set))


def _sub_build(params: FCParams, bits: int) -> Tuple[Optional[CMatrix], Optional[str]]:
    violations = validate_fc(params)
    if violations:
        return None, "; ".join(str(v) for v in violations)
    try:
        return build_fc_mlast(params, bits), None
    except MonodromyError as e:
        return None, f"{type(e).__name__}: {e}"


def check_reduction(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    """
    Block structure of N_m, ..., N_2, their first-level blocks against
    (m-1)-variable builds, and det N_m = lambda^2 with its block split.

    A truncated or shifted parameter set that fails validation drops only
    its block comparison; the omission is listed in skipped_parts.
    """
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    m = circuit_set.m
    if m < 2:
        return Check("fc.reduction", None, tolerance, skipped="needs m >= 2")
    params = circuit_set.params
    skipped_parts = []

    def compute():
        chain = reduction_chain(circuit_set)
        best = mp.mpf(0)
        for k, n_matrix in enumerate(chain):
            best = max(best, off_block_mass(n_matrix, reduction_block_size(m, k)))
        top_left, bottom_right = diagonal_blocks(chain[0], reduction_block_size(m, 0))

        expected_top, reason = _sub_build(fc_truncated(params), bits)
        if expected_top is None:
            skipped_parts.append(f"top_left: {reason}")
        else:
            best = max(best, max_abs_diff(top_left, expected_top))

        expected_bottom, reason = _sub_build(fc_shifted(params), bits)
        if expected_bottom is None:
            skipped_parts.append(f"SkippedShiftedCase: {reason}")
        else:
            best = max(best, max_abs_diff(bottom_right, expected_bottom))

        det_top, det_bottom = block_determinants_expected(circuit_set.exp_params)
        with mp.workprec(bits):
            best = max(
                best,
                abs(det(chain[0]) - circuit_set.lam ** 2),
                abs(det(top_left) - det_top),
                abs(det(bottom_right) - det_bottom),
            )
        return best

    check = _guarded("fc.reduction", tolerance, compute)
    if skipped_parts:
        logger.info(f"reduction for {params_to_json(params)}: {'; '.join(skipped_parts)}")
    return dataclasses.replace(check, skipped_parts=tuple(skipped_parts))


def check_m1_equals_ghg(circuit_set: CircuitSetFC, tolerance=None) -> Check:
    """One-variable F_C equals the rank-2 equation entrywise."""
    bits = circuit_set.precision_bits
    tolerance = _tolerance(tolerance, bits)
    if circuit_set.m != 1:
        return Check("fc.m1_equals_ghg", None, tolerance, skipped="needs m = 1")

    def compute():
        ghg_set = build_circuit_set(as_ghg(circuit_set.params), bits)
        with mp.workprec(bits):
            return max(
                max_abs_diff(circuit_set.M[0], ghg_set.M0),
                max_abs_diff(circuit_set.Mlast, ghg_set.M1),
                max_abs_diff(circuit_set.H, ghg_set.H),
                abs(circuit_set.lam - ghg_set.lam),
            )

    return _guarded("fc.m1_equals_ghg", tolerance, compute)


def fc_checks(circuit_set: CircuitSetFC, tolerance=None) -> List[Check]:
    """Every F_C identity applicable to one circuit set."""
    checks = [
        check_h_invariance(g, circuit_set.H, tolerance, f"fc.h_invariance.M{i}")
        for i, g in enumerate(circuit_set.generators, start=1)
    ]
    checks += [
        check_fc_relations(circuit_set, tolerance),
        check_fc_eigenstructure(circuit_set, tolerance),
        check_fc_determinants(circuit_set, tolerance),
        check_fc_trace_h(circuit_set, tolerance),
    ]
    if circuit_set.m >= 2:
        checks += [
            check_lambda_quadratic(circuit_set, tolerance),
            check_reduction(circuit_set, tolerance),
        ]
    else:
        checks.append(check_m1_equals_ghg(circuit_set, tolerance))
    return checks


def exact_checks(params: Params) -> List[Check]:
    """Exact-mode identities as zero-tolerance checks (skipped beyond the size guards)."""
    zero = mp.mpf(0)
    try:
        if isinstance(params, GHGParams):
            results = exact.exact_ghg_checks(params)
        else:
            results = exact.exact_fc_checks(params)
    except (MTooLarge, ValueError) as e:
        return [Check("exact", None, zero, skipped=str(e))]
    return [Check(name, zero if ok else None, zero) for name, ok in results.items()]


# --- Suites ---

def _trial_params(system: str, rng: np.random.Generator, size: Optional[int]) -> Params:
    if system == "ghg":
        p = size if size is not None else int(
            rng.integers(GHGConfig.SUITE_P_MIN, GHGConfig.SUITE_P_MAX + 1))
        return random_ghg_params(rng, p)
    m = size if size is not None else int(
        rng.integers(FCConfig.SUITE_M_MIN, FCConfig.SUITE_M_MAX + 1))
    return random_fc_params(rng, m)


def run_trial(payload: dict) -> List[Check]:
    """
    One suite trial. Module-level and driven by plain data so it can run in
    a worker process.
    """
    system = payload["system"]
    bits = payload["precision_bits"]
    seed = payload["seed"]
    trial = payload["trial"]
    params = payload.get("params")
    if params is None:
        rng = np.random.default_rng([seed, trial])
        params = _trial_params(system, rng, payload.get("size"))
    tolerance = _tolerance(payload.get("tolerance"), bits)

    if system == "ghg":
        circuit_set = build_circuit_set(params, bits)
        if payload.get("perturbation") is not None:
            i, j = SuiteConfig.PERTURB_ENTRY
            circuit_set = dataclasses.replace(
                circuit_set, M1=perturb_entry(circuit_set.M1, i, j, payload["perturbation"]))
        checks = ghg_checks(circuit_set, tolerance)
    else:
        circuit_set = build_fc_circuit_set(params, bits)
        if payload.get("perturbation") is not None:
            i, j = SuiteConfig.PERTURB_ENTRY
            circuit_set = dataclasses.replace(
                circuit_set, Mlast=perturb_entry(circuit_set.Mlast, i, j, payload["perturbation"]))
        checks = fc_checks(circuit_set, tolerance)

    if payload.get("exact"):
        checks += exact_checks(params)

    context = params_to_json(params)
    return [c.with_context(context, seed, trial) for c in checks]


@log_exceptions
@log_performance
def run_suite(system: str, trials: int = SuiteConfig.DEFAULT_TRIALS,
              seed: int = SuiteConfig.DEFAULT_SEED,
              precision_bits: int = NumericsConfig.DEFAULT_PRECISION_BITS, *,
              size: Optional[int] = None, params: Optional[Params] = None,
              tolerance: Union[str, None] = None, perturbation: Union[str, None] = None,
              exact_mode: bool = False, jobs: Optional[int] = 1) -> Report:
    """
    Run `trials` independent trials of the rank-p ("ghg") or F_C ("fc") suite.

    Trial t draws its parameters from numpy's generator seeded with
    (seed, t), so the report depends only on the arguments, never on jobs.
    size fixes p (ghg) or m (fc); params fixes the parameter set outright.
    perturbation adds a decimal to one entry of the reflection before the
    checks run (negative control).
    """
    if system not in ("ghg", "fc"):
        raise ValueError(f"unknown system {system!r}; expected 'ghg' or 'fc'")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    start = time.perf_counter()
    payloads = [
        {
            "system": system,
            "trial": trial,
            "seed": seed,
            "precision_bits": precision_bits,
            "size": size,
            "params": params,
            "tolerance": tolerance,
            "perturbation": perturbation,
            "exact": exact_mode,
        }
        for trial in range(trials)
    ]
    logger.info(f"running {system} suite: {trials} trials, seed {seed}, {precision_bits} bits")
    outcomes = run_ordered(run_trial, payloads, jobs)

    report = Report(suite=system, seed=seed, precision_bits=precision_bits)
    fallback_tolerance = _tolerance(tolerance, precision_bits)
    for payload, outcome in zip(payloads, outcomes):
        if outcome["status"] == "success":
            report.checks.extend(outcome["result"])
        else:
            logger.error(f"trial {payload['trial']} failed: {outcome['message']}")
            report.checks.append(Check(f"{system}.trial", None, fallback_tolerance, seed=seed,
                                       trial=payload["trial"], detail=outcome["message"]))
    report.wall_time = time.perf_counter() - start

    summary = report.summary()
    logger.info(f"{system} suite: {summary['passed']} passed, {summary['failed']} failed, "
                f"{summary['skipped']} skipped in {report.wall_time:.2f}s")
    return report
