"""
Unit tests for monodromy_utils (encoding, validation, parallel, logger).
"""

import logging
import math
from fractions import Fraction as F

import pytest
from mpmath import mp

from monodromy_core.numerics import CMatrix, max_abs_diff
from monodromy_utils import logger as logger_module
from monodromy_utils.encoding import (
    decode_matrix,
    decode_number,
    digits_for,
    dump_json,
    encode_matrix,
    encode_number,
    encode_rational,
)
from monodromy_utils.logger import PACKAGE_LOGGERS, log_exceptions, setup_logging
from monodromy_utils.parallel import run_ordered, run_task
from monodromy_utils.validation import (
    validate_base_point,
    validate_positive_int,
    validate_precision,
    validate_rational_list,
    validate_rational_token,
    validate_tolerance,
)


class TestEncoding:
    """Test suite for JSON encoding of numbers and matrices."""

    def test_encode_rational(self):
        """Rationals are written as 'u/d'."""
        assert encode_rational(F(1, 3)) == "1/3"
        assert encode_rational(F(4, 2)) == "2"
        assert encode_rational(F(-3, 4)) == "-3/4"

    def test_digits(self):
        """256 bits need at least 77 digits."""
        assert digits_for(256) >= 77

    def test_encode_number_keeps_precision(self):
        """Decoding an encoded number loses nothing."""
        with mp.workprec(256):
            value = mp.mpc(mp.mpf(1) / 3, -mp.mpf(2) / 7)
        decoded = decode_number(encode_number(value, 256), 256)
        with mp.workprec(256):
            assert abs(decoded - value) < mp.mpf("1e-70")

    def test_zero(self):
        """Zero is encoded as a pair of zeros."""
        assert encode_number(0, 128) == ["0", "0"]

    def test_matrix_document(self):
        """Matrix documents carry size, precision and entries."""
        matrix = CMatrix.from_rows([[1, mp.mpc(0, 2)], [mp.mpf(1) / 3, -1]], 128)
        document = encode_matrix(matrix)
        assert document["n"] == 2
        assert document["precision_bits"] == 128
        assert len(document["entries"]) == 4
        assert max_abs_diff(decode_matrix(document), matrix) < mp.mpf("1e-35")

    def test_malformed_matrix(self):
        """Malformed documents are rejected."""
        with pytest.raises(ValueError, match="malformed"):
            decode_matrix({"n": 2})
        with pytest.raises(ValueError, match="entries"):
            decode_matrix({"n": 2, "precision_bits": 128, "entries": [["1", "0"]]})
        with pytest.raises(ValueError, match="pair"):
            decode_number("1", 128)

    def test_dump_json_is_deterministic(self):
        """Keys are sorted so the output is byte-stable."""
        text = dump_json({"b": 1, "a": [1, 2]})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert text == dump_json({"a": [1, 2], "b": 1})


class TestValidation:
    """Test suite for command-line value validation."""

    def test_rational_tokens(self):
        """Rational tokens."""
        assert validate_rational_token("1/3") == (True, None)
        assert validate_rational_token("-2") == (True, None)
        assert validate_rational_token("0.5")[0] is False
        assert "Zero denominator" in validate_rational_token("1/0")[1]
        assert validate_rational_token(3)[0] is False

    def test_rational_lists(self):
        """Comma-separated rational lists."""
        assert validate_rational_list("1/3,1/5") == (True, None)
        valid, message = validate_rational_list("1/3,x")
        assert not valid
        assert message.startswith("Entry 2")
        assert validate_rational_list("")[0] is False

    def test_precision(self):
        """Precision values."""
        assert validate_precision(128) == (True, None)
        assert validate_precision(16)[0] is False
        assert validate_precision("128")[0] is False
        assert validate_precision(True)[0] is False

    def test_positive_int(self):
        """Counts must be positive integers."""
        assert validate_positive_int(3, "trials") == (True, None)
        valid, message = validate_positive_int(0, "trials")
        assert not valid
        assert "trials" in message

    def test_base_point(self):
        """Base points inside (0, 1/2)."""
        assert validate_base_point(F(1, 10)) == (True, None)
        assert validate_base_point(F(0))[0] is False
        assert validate_base_point(F(1, 2))[0] is False
        assert validate_base_point(0.1)[0] is False

    def test_tolerance(self):
        """Tolerances must be finite and positive."""
        assert validate_tolerance("1e-40") == (True, None)
        assert validate_tolerance("1e-400") == (True, None)
        assert validate_tolerance("-1e-3")[0] is False
        assert validate_tolerance("0")[0] is False
        assert validate_tolerance("inf")[0] is False
        assert validate_tolerance("tight")[0] is False


class TestParallel:
    """Test suite for the ordered trial runner."""

    def test_inline(self):
        """jobs=1 runs inline, in order."""
        outcomes = run_ordered(math.factorial, [3, 4, 5], jobs=1)
        assert [o["result"] for o in outcomes] == [6, 24, 120]
        assert all(o["status"] == "success" for o in outcomes)

    def test_errors_are_captured(self):
        """Exceptions become error outcomes."""
        outcome = run_task(math.factorial, -1)
        assert outcome["status"] == "error"
        assert outcome["message"].startswith("ValueError")

    def test_failing_task_does_not_stop_others(self):
        """One failing task does not stop the others."""
        outcomes = run_ordered(math.factorial, [3, -1, 4], jobs=1)
        assert [o["status"] for o in outcomes] == ["success", "error", "success"]

    def test_invalid_jobs(self):
        """jobs must be positive."""
        with pytest.raises(ValueError, match="jobs"):
            run_ordered(math.factorial, [3], jobs=0)

    @pytest.mark.slow
    def test_process_pool_keeps_order(self):
        """Worker processes keep the payload order."""
        outcomes = run_ordered(math.factorial, list(range(8)), jobs=2)
        assert [o["result"] for o in outcomes] == [math.factorial(n) for n in range(8)]


class TestLogger:
    """Test suite for logging setup."""

    def test_setup_logging_with_file(self, tmp_path):
        """A log file receives the toolkit records."""
        log_file = tmp_path / "monodromy.log"
        logger = setup_logging(level=logging.DEBUG, log_file=str(log_file))
        try:
            assert logger.name == "monodromy"
            assert len(logger.handlers) == 2
            logger.debug("hello")
            for handler in logger.handlers:
                handler.flush()
            assert "hello" in log_file.read_text()
        finally:
            setup_logging(level=logging.INFO)

    def test_module_loggers_share_handlers(self, tmp_path):
        """Module loggers write through the toolkit handlers."""
        log_file = tmp_path / "monodromy.log"
        setup_logging(level=logging.DEBUG, log_file=str(log_file))
        try:
            module_logger = logging.getLogger("monodromy_core.verify")
            module_logger.debug("from a module")
            for name in PACKAGE_LOGGERS:
                for handler in logging.getLogger(name).handlers:
                    handler.flush()
            text = log_file.read_text()
            assert "from a module" in text
            assert "monodromy_core.verify" in text
        finally:
            setup_logging(level=logging.INFO)

    def test_log_exceptions_reraises(self, mocker):
        """Unexpected exceptions are logged with a traceback and re-raised."""
        error = mocker.patch.object(logger_module.logger, "error")

        @log_exceptions
        def broken():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="boom"):
            broken()
        assert error.call_args.kwargs["exc_info"] is True

    def test_expected_exceptions_are_not_logged(self, mocker):
        """Expected exceptions are re-raised without a log record."""
        error = mocker.patch.object(logger_module.logger, "error")

        @log_exceptions(expected=(ValueError,))
        def rejected():
            raise ValueError("bad input")

        with pytest.raises(ValueError, match="bad input"):
            rejected()
        error.assert_not_called()
