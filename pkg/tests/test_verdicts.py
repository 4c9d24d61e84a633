"""Tests for JMESPath verdicts."""

import pytest

from levyma import verdicts
from levyma.errors import ConfigError


class TestEvaluate:
    def test_pass_fail_skip(self):
        summary = {"ks": {"pvalue": 0.5}, "ad": {"statistic": 3.0, "critical_5pct": 2.492},
                   "var_ratio_gap": 0.1, "drift": None, "degenerate": None}
        out = {v["name"]: v["status"] for v in verdicts.evaluate(summary, "clt")}
        assert out["ks_pvalue"] == "pass"
        assert out["anderson_darling"] == "fail"
        assert out["drift_invariance"] == "skip"
        assert out["degenerate_trend"] == "skip"
        assert list(out) == sorted(out)

    def test_overrides_replace_and_extend(self):
        summary = {"ks": {"pvalue": 0.03}}
        out = verdicts.evaluate(summary, "clt", {"ks_pvalue": "ks.pvalue > `0.01`", "extra": "`true`"})
        status = {v["name"]: v["status"] for v in out}
        assert status["ks_pvalue"] == "pass"
        assert status["extra"] == "pass"

    def test_non_boolean_fails(self):
        (v,) = verdicts.evaluate({"x": 1}, "custom", {"x": "x"})
        assert v["status"] == "fail"

    def test_invalid_expression(self):
        with pytest.raises(ConfigError) as exc:
            verdicts.evaluate({}, "clt", {"broken": "ks.pvalue >"})
        assert exc.value.key == "acceptance.broken"

    def test_passed_ignores_skips(self):
        assert verdicts.passed([{"status": "pass"}, {"status": "skip"}])
        assert not verdicts.passed([{"status": "pass"}, {"status": "fail"}])

    def test_inequality_defaults(self):
        summary = {
            "bernstein": {"rows": [{"pass": True}]},
            "exponential": {"rows": [{"pass": True}, {"pass": False}]},
            "moment_bound": {"pass": True},
        }
        status = {v["name"]: v["status"] for v in verdicts.evaluate(summary, "inequalities")}
        assert status == {"bernstein": "pass", "exponential": "fail", "moment_bound": "pass"}


def test_render_text():
    text = verdicts.render_text([{"name": "ks_pvalue", "status": "pass", "expr": "ks.pvalue > `0.01`"}])
    assert "ks_pvalue" in text
    assert "pass" in text
    assert "\x1b[" not in text
