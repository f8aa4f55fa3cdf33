"""
Unit tests for geops/models.py and geops/cli.py

Run from project root:
    pytest tests/test_cli.py -v
"""
import json
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

EULER = "z*D^2 + (1 - z)*D - 1"


# ---------------------------------------------------------------------------
# Report payloads
# ---------------------------------------------------------------------------
class TestPayload:

    def test_scalars(self):
        from geops.models import to_payload
        assert to_payload(Fraction(2, 3)) == "2/3"
        assert to_payload(Fraction(4, 2)) == "2"
        assert to_payload(5) == "5"
        assert to_payload(True) is True
        assert to_payload(float("inf")) == "inf"

    def test_operators_render_as_parser_text(self):
        from geops.models import to_payload
        from geops.parser import parse_diffop
        A = parse_diffop(EULER)
        assert parse_diffop(to_payload(A)) == A

    def test_nested_keys(self):
        from geops.models import to_payload
        assert to_payload({Fraction(1, 2): [1, Fraction(1, 3)]}) == {"1/2": ["1", "1/3"]}

    def test_gevrey_window(self):
        import math
        from geops.arith import SequenceWindow, condition_G_report
        from geops.models import to_payload
        W = SequenceWindow(tuple(Fraction(1, math.factorial(n)) for n in range(81)))
        data = to_payload(condition_G_report(W, -1))
        assert data["window"] == ["40", "80"]
        assert data["window_length"] == "41"


class TestReport:

    def test_warning_marks_deficient(self):
        from geops.models import Report
        report = Report(command="frobenius")
        report.add_warning("just a note")
        assert not report.deficient
        report.add_warning("basis incomplete", deficient=True)
        assert report.deficient
        assert report.warnings == ["just a note", "basis incomplete"]

    def test_json_and_text(self):
        from geops.models import Report
        report = Report(command="laplace", inputs={"alpha": Fraction(1, 2)}, results={"ok": True})
        data = json.loads(report.to_json())
        assert data["inputs"] == {"alpha": "1/2"}
        assert data["results"] == {"ok": True}
        text = report.to_text()
        assert "command: laplace" in text
        assert "ok: yes" in text


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------
class TestRun:

    def test_fl_symmetrized(self, capsys):
        from geops.cli import run
        from geops.parser import parse_diffop
        assert run(["fl", EULER, "--symmetrized"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["command"] == "fl"
        assert parse_diffop(data["results"]["transform"]) == parse_diffop("z*(1 + z)*D + z")

    def test_parse_error_is_input_error(self, capsys):
        from geops.cli import EXIT_INPUT, run
        assert run(["fl", "D^^2"]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err

    def test_zero_denominator_is_input_error(self, capsys):
        from geops.cli import EXIT_INPUT, run
        assert run(["fl", "1/0*D"]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert "zero denominator" in err
        assert "Traceback" not in err

    def test_missing_command(self):
        from geops.cli import EXIT_INPUT, run
        assert run([]) == EXIT_INPUT

    def test_negative_order_option(self, capsys):
        from geops.cli import run
        from geops.parser import parse_diffop
        assert run(["recalibrate", "D^2 - z", "--order=-2/3"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert parse_diffop(data["results"]["recalibrated"]) == parse_diffop("9*z*D^2 + 3*D - 4*z")

    def test_pcurvature_needs_prime(self):
        from geops.cli import EXIT_INPUT, run
        assert run(["pcurvature", "D - 1"]) == EXIT_INPUT

    def test_text_format(self, capsys):
        from geops.cli import run
        assert run(["polygon", "D^2 - z", "--format", "text"]) == 0
        assert "slopes_at_infinity" in capsys.readouterr().out


class TestSelftest:

    def test_algebraic_identities_hold(self):
        from geops.cli import selftest
        failures = selftest(1, 3)
        for key in ("weyl_associativity", "fl_involution", "fl_multiplicative",
                    "recurrence_round_trip", "mellin_multiplicative", "mellin_round_trip"):
            assert failures[key] == 0, key
