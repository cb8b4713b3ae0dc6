"""
Unit tests for monodromy_core/verify.py.

Tests cover single checks, negative controls, report serialization and
the seeded suites. The full-size seeded runs are marked slow.
"""

import dataclasses
from fractions import Fraction as F

import pytest
from mpmath import mp

from monodromy_core.fc import build_fc_circuit_set
from monodromy_core.ghg import build_circuit_set
from monodromy_core.numerics import mat_mul
from monodromy_core.params import FCParams, GHGParams, random_fc_params
from monodromy_core.verify import (
    Check,
    Report,
    check_column_sums,
    check_fc_relations,
    check_h_from_spectrum,
    check_h_invariance,
    check_lambda_quadratic,
    check_reduction,
    check_reflection_structure,
    check_spectrum_ghg,
    exact_checks,
    fc_checks,
    ghg_checks,
    perturb_entry,
    run_suite,
)
from monodromy_utils.encoding import dump_json

BITS = 256


def checks_by_trial(report):
    trials = {}
    for check in report.checks:
        trials.setdefault(check.trial, []).append(check)
    return trials


class TestSingleChecks:
    """Test suite for individual identities."""

    def test_ghg_checks_pass(self, ghg_p3):
        """Every rank-3 identity holds at 256 bits."""
        checks = ghg_checks(build_circuit_set(ghg_p3, BITS))
        assert checks
        assert all(c.passed for c in checks), [c.to_json() for c in checks if not c.passed]

    def test_p2_adds_closed_form(self, ghg_p2):
        """Rank 2 also compares against the explicit 2x2 reflection."""
        names = [c.name for c in ghg_checks(build_circuit_set(ghg_p2, BITS))]
        assert "ghg.p2_closed_form" in names

    def test_fc_checks_pass(self, fc_m3):
        """Every three-variable F_C identity holds at 256 bits."""
        checks = fc_checks(build_fc_circuit_set(fc_m3, BITS))
        assert all(c.passed for c in checks), [c.to_json() for c in checks if not c.passed]

    def test_entry_checks_run_at_full_precision(self, ghg_p2):
        """Column sums and fixed vectors stay far below the 53-bit rounding level."""
        circuit_set = build_circuit_set(ghg_p2, BITS)
        column_sums = check_column_sums(circuit_set.M1, circuit_set.lam)
        structure = check_reflection_structure(circuit_set.M1, circuit_set.H)
        assert column_sums.residual < mp.mpf("1e-60")
        assert structure.residual < mp.mpf("1e-60")

    def test_perturbed_reflection_fails(self, ghg_p2):
        """An entry moved by 1e-10 breaks H-invariance."""
        circuit_set = build_circuit_set(ghg_p2, BITS)
        perturbed = perturb_entry(circuit_set.M1, 0, 0, "1e-10")
        check = check_h_invariance(perturbed, circuit_set.H)
        assert check.passed is False
        assert check.residual > mp.mpf("1e-12")

    @pytest.mark.parametrize("i, j", [(i, j) for i in range(3) for j in range(3)])
    def test_every_ghg_entry_is_detected(self, ghg_p3, i, j):
        """Moving any single entry of M1 fails at least one rank-3 check."""
        circuit_set = build_circuit_set(ghg_p3, BITS)
        perturbed = dataclasses.replace(circuit_set, M1=perturb_entry(circuit_set.M1, i, j,
                                                                       "1e-10"))
        assert any(c.passed is False for c in ghg_checks(perturbed))

    @pytest.mark.parametrize("i, j", [(i, j) for i in range(4) for j in range(4)])
    def test_every_fc_entry_is_detected(self, fc_m2, i, j):
        """Moving any single entry of M_3 fails the reduction check itself."""
        circuit_set = build_fc_circuit_set(fc_m2, BITS)
        assert not check_reduction(circuit_set).skipped_parts
        perturbed = dataclasses.replace(circuit_set, Mlast=perturb_entry(circuit_set.Mlast, i, j,
                                                                          "1e-10"))
        assert check_reduction(perturbed).passed is False
        assert any(c.passed is False for c in fc_checks(perturbed))

    def test_spectrum_negative_control(self, ghg_p2):
        """M1 squared in place of M0 M1 gives the wrong spectrum."""
        circuit_set = build_circuit_set(ghg_p2, BITS)
        wrong = mat_mul(circuit_set.M1, circuit_set.M1)
        assert check_spectrum_ghg(circuit_set, product=wrong).passed is False

    def test_relations_skipped_for_one_variable(self):
        """With one variable there is no braid relation to check."""
        circuit_set = build_fc_circuit_set(FCParams(F(1, 3), F(1, 5), (F(1, 2),)), BITS)
        check = check_fc_relations(circuit_set)
        assert check.passed is None
        assert check.skipped.startswith("needs m >= 2")

    def test_h_from_spectrum_skipped_when_underdetermined(self):
        """Three equal exponents at infinity leave two equations for three unknowns."""
        params = GHGParams((F(1, 2), F(-1, 2), F(3, 2), F(1, 3)), (F(1, 4), F(1, 5), F(1, 7)))
        check = check_h_from_spectrum(build_circuit_set(params, BITS))
        assert check.passed is None
        assert check.skipped.startswith("repeated exponents at infinity")

    def test_h_from_spectrum_with_repeated_exponent(self):
        """a1 - a2 in Z never turns into a structural failure."""
        params = GHGParams((F(1, 2), F(-1, 2), F(1, 3)), (F(1, 4), F(1, 5)))
        check = check_h_from_spectrum(build_circuit_set(params, BITS))
        assert check.passed is not False
        assert check.detail is None

    def test_lambda_quadratic_skipped_for_one_variable(self, rng):
        """The quadratic for lambda needs two variables."""
        circuit_set = build_fc_circuit_set(random_fc_params(rng, 1), BITS)
        check = check_lambda_quadratic(circuit_set)
        assert check.passed is None
        assert check.skipped == "needs m >= 2"

    def test_reduction_lists_skipped_parts(self):
        """An invalid shifted set drops only its block comparison."""
        # valid, but the shifted one-variable set has 2(a1 + a2 - b1) = 0
        params = FCParams(F(1, 3), F(1, 5), (F(1, 7), F(41, 210)))
        check = check_reduction(build_fc_circuit_set(params, BITS))
        assert check.passed is True
        assert len(check.skipped_parts) == 1
        assert check.skipped_parts[0].startswith("SkippedShiftedCase")

    def test_exact_checks_skipped_beyond_limits(self):
        """p = 5 is outside the exact-mode guards and reported as skipped."""
        params = GHGParams(tuple(F(1, k) for k in (3, 5, 7, 9, 11)),
                           tuple(F(1, 2 ** k) for k in range(1, 5)))
        checks = exact_checks(params)
        assert len(checks) == 1
        assert checks[0].passed is None

    def test_exact_checks_pass(self, ghg_p2):
        """Exact identities hold with zero tolerance for rank 2."""
        checks = exact_checks(ghg_p2)
        assert checks
        assert all(c.passed for c in checks)


class TestReportJSON:
    """Test suite for Check / Report serialization."""

    def test_check_fields(self):
        """A passing check carries its seed and trial."""
        check = Check("demo", mp.mpf("1e-50"), mp.mpf("1e-40"), params={"system": "ghg"},
                      seed=3, trial=1)
        document = check.to_json()
        assert document["pass"] is True
        assert document["seed"] == 3
        assert document["trial"] == 1
        assert "skipped" not in document

    def test_structural_failure_is_inf(self):
        """A missing residual is written as inf and fails."""
        document = Check("demo", None, mp.mpf("1e-40")).to_json()
        assert document["residual"] == "inf"
        assert document["pass"] is False

    def test_skipped_check(self):
        """A skipped check has pass null and keeps its reason."""
        document = Check("demo", None, mp.mpf("1e-40"), skipped="needs m >= 2").to_json()
        assert document["pass"] is None
        assert document["residual"] == "skipped"
        assert document["skipped"] == "needs m >= 2"

    def test_wall_time_not_serialized(self):
        """Reports are byte-stable: no timing in the JSON."""
        report = Report("ghg", 1, BITS, [Check("demo", mp.mpf(0), mp.mpf("1e-40"))],
                        wall_time=12.5)
        document = report.to_json()
        assert "wall_time" not in document
        assert document["summary"] == {"total": 1, "passed": 1, "failed": 0, "skipped": 0}


class TestSuites:
    """Test suite for run_suite."""

    def test_ghg_suite_passes(self):
        """Three random rank-p trials pass."""
        report = run_suite("ghg", trials=3, seed=1, precision_bits=BITS)
        assert report.all_passed, [c.to_json() for c in report.failed]
        assert {c.trial for c in report.checks} == {0, 1, 2}

    @pytest.mark.parametrize("size", [1, 2, 3])
    def test_fc_suite_passes(self, size):
        """Random F_C trials with a fixed number of variables pass."""
        report = run_suite("fc", trials=2, seed=5, precision_bits=BITS, size=size)
        assert report.all_passed, [c.to_json() for c in report.failed]

    def test_one_variable_relations_are_skipped(self):
        """m = 1 trials report the relation check as skipped, not failed."""
        report = run_suite("fc", trials=3, seed=11, precision_bits=BITS, size=1)
        relations = [c for c in report.checks if c.name == "fc.relations"]
        assert len(relations) == 3
        assert all(c.passed is None for c in relations)
        assert report.all_passed, [c.to_json() for c in report.failed]

    def test_fixed_params(self, fc_m2):
        """Fixed parameters are echoed in every check."""
        report = run_suite("fc", trials=1, seed=0, precision_bits=BITS, params=fc_m2)
        assert all(c.params == {"system": "fc", "a": ["1/3", "1/5"], "b": ["1/2", "1/4"]}
                   for c in report.checks)

    def test_perturbation_detected(self):
        """The rank-p negative control fails."""
        report = run_suite("ghg", trials=1, seed=1, precision_bits=BITS, size=3,
                           perturbation="1e-10")
        assert not report.all_passed

    def test_fc_perturbation_fails_reduction(self):
        """The F_C negative control fails the reduction check itself."""
        report = run_suite("fc", trials=1, seed=2, precision_bits=BITS, size=2,
                           perturbation="1e-10")
        reduction = [c for c in report.checks if c.name == "fc.reduction"]
        assert len(reduction) == 1
        assert reduction[0].passed is False

    def test_deterministic(self):
        """Same arguments give byte-identical reports."""
        first = run_suite("fc", trials=2, seed=9, precision_bits=128, size=2)
        second = run_suite("fc", trials=2, seed=9, precision_bits=128, size=2)
        assert dump_json(first.to_json()) == dump_json(second.to_json())

    def test_rejects_bad_arguments(self):
        """Unknown systems and empty runs are rejected up front."""
        with pytest.raises(ValueError, match="unknown system"):
            run_suite("appell", trials=1)
        with pytest.raises(ValueError, match="trials"):
            run_suite("ghg", trials=0)

    @pytest.mark.slow
    def test_jobs_do_not_change_the_report(self):
        """Worker processes do not change the report."""
        inline = run_suite("ghg", trials=3, seed=4, precision_bits=128, jobs=1)
        pooled = run_suite("ghg", trials=3, seed=4, precision_bits=128, jobs=2)
        assert dump_json(inline.to_json()) == dump_json(pooled.to_json())


@pytest.mark.slow
@pytest.mark.timeout(1800)
class TestSeededRuns:
    """Full-size seeded runs at 256 bits."""

    def test_ghg_identities(self):
        """200 random sets with p in 2..6 pass every identity."""
        report = run_suite("ghg", trials=200, seed=42, precision_bits=BITS, jobs=None)
        assert report.all_passed, [c.to_json() for c in report.failed]
        assert {len(c.params["a"]) for c in report.checks} == {2, 3, 4, 5, 6}

    def test_rank_two_closed_form(self):
        """50 rank-2 sets match the explicit 2x2 reflection and h."""
        report = run_suite("ghg", trials=50, seed=42, precision_bits=BITS, size=2, jobs=None)
        closed_form = [c for c in report.checks if c.name == "ghg.p2_closed_form"]
        assert len(closed_form) == 50
        assert all(c.passed for c in closed_form), [c.to_json() for c in closed_form]

    def test_fc_identities(self):
        """100 random F_C sets with m in 1..6 pass every identity."""
        report = run_suite("fc", trials=100, seed=42, precision_bits=BITS, jobs=None)
        assert report.all_passed, [c.to_json() for c in report.failed]
        assert {len(c.params["b"]) for c in report.checks} == {1, 2, 3, 4, 5, 6}

    @pytest.mark.parametrize("m, trials", [(2, 17), (3, 17), (4, 16)])
    def test_reduction(self, m, trials):
        """Reduction chains hold and invalid sub-builds are listed, never hidden."""
        report = run_suite("fc", trials=trials, seed=42, precision_bits=BITS, size=m, jobs=None)
        reduction = [c for c in report.checks if c.name == "fc.reduction"]
        assert len(reduction) == trials
        assert all(c.passed for c in reduction), [c.to_json() for c in reduction]
        for check in reduction:
            for part in check.skipped_parts:
                assert part.startswith(("top_left", "SkippedShiftedCase"))

    def test_one_variable_equals_rank_two(self):
        """50 one-variable F_C sets equal the rank-2 circuit sets."""
        report = run_suite("fc", trials=50, seed=42, precision_bits=BITS, size=1, jobs=None)
        same = [c for c in report.checks if c.name == "fc.m1_equals_ghg"]
        assert len(same) == 50
        assert all(c.passed for c in same), [c.to_json() for c in same]

    @pytest.mark.parametrize("system, size", [("ghg", None), ("fc", None), ("fc", 3)])
    def test_every_perturbed_trial_fails(self, system, size):
        """A 1e-10 perturbation fails at least one check in every trial."""
        report = run_suite(system, trials=10, seed=42, precision_bits=BITS, size=size,
                           perturbation="1e-10", jobs=None)
        for trial, checks in checks_by_trial(report).items():
            assert any(c.passed is False for c in checks), trial
            if size == 3:
                reduction = [c for c in checks if c.name == "fc.reduction"]
                assert reduction[0].passed is False, trial
