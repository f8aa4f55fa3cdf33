"""
Unit tests for geops/suites.py and the batch runner.

Run from project root:
    pytest tests/test_suites.py -v
"""
import sys
import os
import pytest
from fractions import Fraction

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))


class TestLoadSuites:

    def test_bundled_file_defines_every_suite(self):
        from geops.suites import SUITE_NAMES, load_suites
        definitions = load_suites()
        assert set(SUITE_NAMES) <= set(definitions)
        assert definitions["airy"]["operator"] == "D^2 - z"

    def test_unknown_suite(self):
        from geops.suites import run_suite
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            run_suite("bessel")

    def test_missing_definition(self):
        from geops.suites import run_suite
        from geops.errors import PreconditionError
        with pytest.raises(PreconditionError):
            run_suite("airy", definitions={})


class TestAiry:

    def test_exact_checks(self):
        from geops.suites import run_suite
        result = run_suite("airy", 20)
        assert result["suite"] == "airy"
        assert result["truncation"] == 20
        for key in ("slopes_at_infinity", "recalibrated", "exponents_at_zero", "fl_transform"):
            assert result["checks"][key]["pass"], key

    def test_asymptotic_window(self):
        from geops.suites import airy_asymptotic_window
        W = airy_asymptotic_window(10)
        assert W.N == 10
        assert W[0] == 1
        assert all(isinstance(t, Fraction) for t in W.terms)


class TestRemark42:

    def test_all_checks_pass(self):
        from geops.suites import run_suite
        result = run_suite("remark42", 15)
        assert result["all_pass"], sorted(k for k, c in result["checks"].items() if not c["pass"])
        assert "right_division" in result["checks"]
        assert "galochkin_bounded" in result["checks"]


class TestDefaultTruncation:

    def _run(self, name):
        from geops.suites import run_suite
        result = run_suite(name)
        failed = sorted(k for k, c in result["checks"].items() if not c["pass"])
        assert result["all_pass"], failed
        return result

    def test_airy(self):
        checks = self._run("airy")["checks"]
        assert {"taylor_basis", "frobenius_basis", "infinity_basis"} <= set(checks)

    def test_weber(self):
        checks = self._run("weber")["checks"]
        assert {"frobenius_basis", "infinity_basis"} <= set(checks)

    def test_whittaker(self):
        checks = self._run("whittaker")["checks"]
        assert {"frobenius_basis", "infinity_basis"} <= set(checks)

    def test_euler(self):
        checks = self._run("euler")["checks"]
        assert {"frobenius_basis", "infinity_basis"} <= set(checks)

    def test_remark42(self):
        checks = self._run("remark42")["checks"]
        assert {"frobenius_basis", "infinity_basis"} <= set(checks)


class TestBatch:

    def test_failing_pipeline_marks_report(self, monkeypatch):
        from batch import suite_workflow

        def fake(name, truncation, definitions):
            if name == "weber":
                return {"suite": name, "checks": {}, "all_pass": False}
            return {"suite": name, "checks": {}, "all_pass": True}

        monkeypatch.setattr(suite_workflow, "run_suite", fake)
        report = suite_workflow.run_all(10, names=("airy", "weber"), workers=2)
        assert report.deficient
        assert set(report.results) == {"airy", "weber"}
