"""Tests for record aggregation."""

import pytest

from levyma.agg import aggregate, parse_agg_specs
from levyma.errors import ConfigError

RECORDS = [
    {"v": "bump", "n": 64, "err": 1.0},
    {"v": "bump", "n": 64, "err": -3.0},
    {"v": "bump", "n": 256, "err": 0.5},
    {"v": "tail", "n": 64, "err": None},
]


class TestAggregate:
    def test_spec_parsing(self):
        assert parse_agg_specs("count, m=mean(err),") == [("count", "count"), ("m", "mean(err)")]

    def test_ungrouped(self):
        (row,) = aggregate(RECORDS, "total=sum(err), count")
        assert row == {"total": -1.5, "count": 4}

    def test_grouped_rows_are_sorted(self):
        """Groups come out ordered by key, nulls skipped inside reductions."""
        rows = aggregate(list(reversed(RECORDS)), "m=mean(err), worst=absmax(err), count", by=["v", "n"])
        assert [(r["v"], r["n"]) for r in rows] == [("bump", 64), ("bump", 256), ("tail", 64)]
        assert rows[0]["m"] == -1.0
        assert rows[0]["worst"] == 3.0
        assert rows[2]["m"] is None

    def test_sample_variance(self):
        (row,) = aggregate(RECORDS[:2], "v=var(err), s=std(err)")
        assert row["v"] == pytest.approx(8.0)
        assert row["s"] == pytest.approx(8.0**0.5)

    def test_single_value_variance(self):
        (row,) = aggregate(RECORDS[:1], "v=var(err)")
        assert row["v"] is None

    def test_list_and_median(self):
        (row,) = aggregate(RECORDS[:3], "all=list(err), mid=median(err)")
        assert row["all"] == [1.0, -3.0, 0.5]
        assert row["mid"] == 0.5

    def test_unknown_function(self):
        with pytest.raises(ConfigError, match="unknown aggregation"):
            aggregate(RECORDS, "x=mode(err)")

    def test_bad_form(self):
        with pytest.raises(ConfigError):
            aggregate(RECORDS, "x=err")

    def test_non_numeric(self):
        with pytest.raises(ConfigError):
            aggregate(RECORDS, "x=mean(v)")
