"""Tests for the Monte Carlo harness."""

import math

import numpy as np
import pytest

from levyma.config import from_dict
from levyma.errors import ConfigError
from levyma.harness import (
    AD_CRITICAL_5PCT,
    anderson_darling,
    aux_seed,
    estimate_records,
    record_seed,
    replay,
    resummarize,
    run_clt,
    run_clt_multivariate,
    run_consistency,
    summarize_clt,
    summarize_consistency,
)

SMALL_GRID = {"real_half_width": 40.96, "real_points": 2**12, "log_points": 2**12,
              "log_s_lo": -10.0, "log_s_hi": 10.0}


@pytest.fixture
def small_cfg():
    return from_dict({"grid": SMALL_GRID, "sim": {"window_side": 256}}, env={})


def _clt_records(z, n=400, gamma=0.0, L=0.2):
    out = []
    for rep, e in enumerate(z):
        L_hat = L + e / math.sqrt(n)
        out.append({"v": "bump", "v_index": 0, "n": n, "rep": rep, "gamma": gamma,
                    "L_hat": L_hat, "L_true": L, "err": L_hat - L, "err_W": e})
    return out


class TestSeeds:
    def test_record_seed_is_deterministic(self):
        assert record_seed(0, 64, 3) == record_seed(0, 64, 3)
        assert len({record_seed(0, 64, rep) for rep in range(100)}) == 100
        assert record_seed(0, 64, 0) != record_seed(0, 256, 0)

    def test_aux_seed_differs_from_records(self):
        assert aux_seed(5, 1) != aux_seed(5, 2)


class TestStatistics:
    def test_anderson_darling(self):
        """Normal scores sit well under the 5% critical value; shifted ones do not."""
        z = np.random.default_rng(0).standard_normal(500)
        assert anderson_darling(z) < AD_CRITICAL_5PCT
        assert anderson_darling(z + 1.0) > AD_CRITICAL_5PCT


class TestSummaries:
    def test_consistency_slope(self):
        """Mean absolute errors proportional to n^-1/2 give slope -1/2."""
        records = []
        for n in (64, 256, 1024):
            for rep in range(4):
                err = (1 if rep % 2 else -1) / math.sqrt(n)
                records.append({"v": "bump", "n": n, "rep": rep, "err": err, "abs_err": abs(err),
                                "err_W": math.sqrt(n) * err})
                records.append({"v": "zero", "n": n, "rep": rep, "err": 0.0, "abs_err": 0.0, "err_W": 0.0})
        summary = summarize_consistency(records, {"zero": ["zero"]})
        slopes = {s["v"]: s for s in summary["slopes"]}
        assert slopes["bump"]["slope"] == pytest.approx(-0.5)
        assert slopes["zero"]["slope"] is None
        assert all(row["max_abs"] == 0 for row in summary["per_n"] if row["zero"])

    def test_clt_summary(self):
        z = np.random.default_rng(3).standard_normal(400)
        summary = summarize_clt(_clt_records(z), {"sigma_sq": 1.0, "gamma": 0.0, "n": 400})
        assert summary["var_ratio_gap"] < 0.2
        assert summary["ks"]["pvalue"] > 0.01
        assert 0.9 < summary["coverage"]["fraction"] < 1.0
        assert summary["drift"] is None
        assert summary["degenerate"] is None

    def test_clt_drift_branch(self):
        z = np.random.default_rng(3).standard_normal(200)
        records = _clt_records(z) + _clt_records(z, gamma=1.0)
        summary = summarize_clt(records, {"sigma_sq": 1.0, "gamma": 0.0, "n": 400})
        assert summary["drift"]["gamma"] == 1.0
        assert summary["drift"]["ks_distance"] == 0.0

    def test_degenerate_branch(self):
        """sigma^2 = 0 tracks the largest error per window size."""
        records = [{"n": n, "gamma": 0.0, "err": e} for n, e in ((64, 0.0), (256, 0.0))]
        summary = summarize_clt(records, {"sigma_sq": 0.0, "gamma": 0.0, "n": 256})
        assert summary["ks"] is None
        assert summary["degenerate"]["trend_ok"] is True

    def test_resummarize(self):
        z = np.random.default_rng(4).standard_normal(100)
        records = _clt_records(z)
        summary = summarize_clt(records, {"sigma_sq": 2.0, "gamma": 0.0, "n": 400, "v": "bump"})
        assert resummarize("clt", records, summary) == summary

    def test_resummarize_unknown(self):
        with pytest.raises(ConfigError):
            resummarize("inequalities", [], {})


class TestReplicates:
    def test_replay_reproduces_record(self, small_cfg):
        seed = record_seed(0, 256, 0)
        (first,) = estimate_records(small_cfg, 256, seed, 0.0, [0.0], rep=0)
        (again,) = replay(small_cfg, 256, seed)
        assert again["L_hat"] == first["L_hat"]
        assert again["seed"] == seed
        assert first["err_W"] == pytest.approx(16 * first["err"])

    def test_too_few_reps(self, small_cfg):
        cfg = small_cfg.with_overrides(reps=10)
        with pytest.raises(ConfigError) as exc:
            run_clt(cfg)
        assert exc.value.key == "experiment.reps"


@pytest.mark.slow
class TestAcceptance:
    """Full experiments at reduced replicate counts."""

    def test_clt_indicator(self):
        cfg = from_dict({"experiment": {"scenario": "clt", "reps": 200, "threads": 4}}, env={})
        result = run_clt(cfg, drift=True)
        status = {v["name"]: v["status"] for v in result.verdicts}
        assert status["ks_pvalue"] == "pass"
        assert status["drift_invariance"] == "pass"

    def test_consistency_exp_window(self):
        cfg = from_dict(
            {"experiment": {"scenario": "consistency", "reps": 50, "threads": 4, "beta2": 4.0,
                            "window_sides": [256, 1024, 4096]}},
            env={},
        )
        result = run_consistency(cfg)
        slopes = [s["slope"] for s in result.summary["slopes"] if s["slope"] is not None]
        assert slopes
        assert all(-0.65 <= s <= -0.35 for s in slopes)

    def test_clt_multivariate_covariance(self):
        """The empirical covariance of (err_W(v1), err_W(v2)) sits within 25% of Sigma."""
        cfg = from_dict({"experiment": {"scenario": "clt", "reps": 200, "threads": 4}}, env={})
        v_list = [{"kind": "bump"}, {"kind": "bump", "center": 1.0}]
        result = run_clt_multivariate(cfg, v_list)
        assert result.summary["max_rel_gap"] is not None
        assert result.summary["max_rel_gap"] < 0.25
        status = {v["name"]: v["status"] for v in result.verdicts}
        assert status["covariance"] == "pass"
