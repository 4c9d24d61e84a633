"""Pass/fail verdicts as JMESPath expressions over an experiment summary.

A verdict is an expression that evaluates to a boolean on ``summary.json``.
``true`` passes, ``false`` fails and ``null`` (the summary has no such
branch, e.g. the drift check was not run) is reported as skipped. Config
``[acceptance]`` entries replace or extend the defaults by name.
"""

import io
from typing import Any, Dict, List, Optional

import jmespath
import jmespath.exceptions
from rich import box
from rich.console import Console
from rich.table import Table

from .errors import ConfigError

DEFAULT_VERDICTS: Dict[str, Dict[str, str]] = {
    "consistency": {
        "schedules_monotone": "schedules.monotone",
        "rate_window": "length(slopes[?slope != `null` && (slope < `-0.65` || slope > `-0.35`)]) == `0`",
        "zero_function_exact": "length(per_n[?zero && max_abs > `0`]) == `0`",
    },
    "clt": {
        "ks_pvalue": "ks.pvalue > `0.01`",
        "anderson_darling": "ad.statistic < ad.critical_5pct",
        "variance_ratio": "var_ratio_gap < `0.2`",
        "drift_invariance": "drift.ks_distance < `0.1`",
        "degenerate_trend": "degenerate.trend_ok",
    },
    "clt_multi": {
        "covariance": "max_rel_gap < `0.25`",
        "cramer_wold": "length(cramer_wold[?pvalue <= `0.01`]) == `0`",
    },
    "inequalities": {
        "bernstein": "length(bernstein.rows[?!pass]) == `0`",
        "exponential": "length(exponential.rows[?!pass]) == `0`",
        "moment_bound": "moment_bound.pass",
    },
}


def evaluate(summary: Dict[str, Any], kind: str,
             overrides: Optional[Dict[str, str]] = None) -> List[Dict[str, Any]]:
    """Evaluate the verdicts of ``kind`` in name order."""
    exprs = dict(DEFAULT_VERDICTS.get(kind, {}))
    exprs.update(overrides or {})
    out = []
    for name in sorted(exprs):
        expr = exprs[name]
        try:
            value = jmespath.search(expr, summary)
        except jmespath.exceptions.JMESPathError as e:
            raise ConfigError(f"verdict {name!r}: invalid expression {expr!r}: {e}",
                              key=f"acceptance.{name}") from e
        if value is None:
            status = "skip"
        elif value is True:
            status = "pass"
        else:
            status = "fail"
        out.append({"name": name, "expr": expr, "status": status})
    return out


def passed(verdicts: List[Dict[str, Any]]) -> bool:
    return all(v["status"] != "fail" for v in verdicts)


def render_table(verdicts: List[Dict[str, Any]], title: str = "verdicts") -> Table:
    table = Table(title=title, show_header=True, box=box.SIMPLE)
    table.add_column("Verdict", style="cyan")
    table.add_column("Status")
    table.add_column("Expression", style="dim", max_width=60)
    styles = {"pass": "[green]pass[/green]", "fail": "[bold red]fail[/bold red]", "skip": "[dim]skip[/dim]"}
    for v in verdicts:
        table.add_row(v["name"], styles[v["status"]], v["expr"])
    return table


def render_text(verdicts: List[Dict[str, Any]], title: str = "verdicts") -> str:
    """Plain rendering for ``verdicts.txt``, identical across terminals."""
    buf = io.StringIO()
    Console(file=buf, width=120, color_system=None, force_terminal=False).print(
        render_table(verdicts, title)
    )
    return buf.getvalue()
