"""Rejected-box tables and text rendering.

Rows hold proportions; conversion to percent and rounding to significant
digits happen only here, at render time, on the exact decimal expansion of
each double so nothing is rounded twice.
"""

import io
import csv
import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

from transduct.binomial import (
    BinomialParams,
    PriorSample,
    beta_binomial_moments,
    binomial_log_pmf_row,
    binomial_moments,
    tail_and_overconfidence,
)
from transduct import numerics
from transduct.errors import ScenarioError, UndefinedOverconfidenceError

FORMATS = ("markdown", "csv", "json")
DEFAULT_PRECISION = 4
INF_TOKEN = "inf"

COTTER_COLUMNS = ("prior_sample_size", "mean_pct", "sd_pct", "rejected_pct", "additional_rejected_pct")
COTTER_CAPTIONS = (
    "prior sample size",
    "mean defects (%)",
    "sd of defects (%)",
    "boxes rejected (%)",
    "additional rejected (%)",
)


@dataclass(frozen=True)
class TableRow:
    """One prior sample size; ``math.inf`` marks the known-rate baseline.

    ``mean``, ``sd`` and ``rejected`` are proportions of the box; the
    ``additional_rejected`` value is the relative excess over the baseline
    (0.5 means 50 % more boxes rejected).
    """

    prior_sample_size: float
    mean: float
    sd: float
    rejected: float
    additional_rejected: float

    def percent_values(self):
        return (self.mean, self.sd, self.rejected, self.additional_rejected)


def format_sig(value, digits: int, scale: int = 1) -> str:
    """``value * scale`` rounded half-even to ``digits`` significant digits."""
    if isinstance(value, float) and not math.isfinite(value):
        return INF_TOKEN if value > 0 else ("-" + INF_TOKEN if value < 0 else "nan")
    d = Decimal(value) * scale
    if d == 0:
        return "0"
    exp = d.adjusted() - (digits - 1)
    q = d.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_EVEN)
    # rounding can carry into a new leading digit (9.9996 -> 10.00)
    if q.adjusted() != d.adjusted():
        q = d.quantize(Decimal(1).scaleb(exp + 1), rounding=ROUND_HALF_EVEN)
    return format(q, "f")


def _size_token(size):
    return INF_TOKEN if size == math.inf else str(int(size))


def _r0_for(n0, ratio):
    exact = Fraction(repr(float(ratio))) * n0
    if exact.denominator != 1:
        raise ScenarioError(
            f"ratio {ratio} x n0 {n0} = {float(exact)} is not a whole number of defects",
            path=f"n0={n0}")
    return int(exact)


def run_cotter_pin(n0_list, ratio: float, n: int, threshold: int, pseudo_count: float = 0.0) -> list:
    """One row per prior sample size plus the known-rate baseline row.

    The baseline uses the binomial with ``p = ratio`` directly; it never goes
    through the beta-binomial with a huge ``n0``.
    """
    ratio = float(ratio)
    if not 0.0 < ratio < 1.0:
        raise ScenarioError(f"ratio must lie in (0, 1), got {ratio}", path="ratio")
    if int(n) < 1:
        raise ScenarioError(f"n must be >= 1, got {n}", path="n")
    if not 0 <= int(threshold) < int(n):
        raise ScenarioError(f"threshold must satisfy 0 <= threshold < n, got {threshold}", path="threshold")
    priors = [PriorSample(_r0_for(int(n0), ratio), int(n0), pseudo_count) for n0 in n0_list]

    params = BinomialParams(n, ratio)
    baseline_row = binomial_log_pmf_row(params)
    baseline_tail = numerics.stable_tail_sum(lambda r: baseline_row[r], threshold + 1, n)
    known = binomial_moments(params)

    rows = []
    for prior in priors:
        tails = tail_and_overconfidence(n, threshold, prior)
        moments = beta_binomial_moments(n, prior)
        rows.append(TableRow(
            prior_sample_size=prior.n0,
            mean=moments.mean,
            sd=moments.sd,
            rejected=tails.transductive_tail,
            additional_rejected=tails.additional_rejected_pct / 100.0,
        ))
    if baseline_tail == 0.0:
        raise UndefinedOverconfidenceError("baseline tail probability underflows to zero")
    rows.append(TableRow(math.inf, known.mean, known.sd, baseline_tail, 0.0))
    return rows


def _cotter_cells(row, precision):
    return [_size_token(row.prior_sample_size)] + [format_sig(v, precision, 100) for v in row.percent_values()]


def render(rows, fmt: str = "markdown", precision: int = DEFAULT_PRECISION) -> str:
    """Render cotter-pin rows as CSV, a markdown table, or JSON records."""
    cells = [_cotter_cells(r, precision) for r in rows]
    if fmt == "csv":
        return render_csv(COTTER_COLUMNS, cells)
    if fmt == "markdown":
        return render_markdown(COTTER_CAPTIONS, cells)
    if fmt == "json":
        records = [
            {COTTER_COLUMNS[0]: c[0] if c[0] == INF_TOKEN else int(c[0]),
             **{k: float(v) for k, v in zip(COTTER_COLUMNS[1:], c[1:])}}
            for c in cells
        ]
        return json.dumps(records, indent=2) + "\n"
    raise ScenarioError(f"unknown format {fmt!r}; expected one of {FORMATS}", path="output.format")


def render_csv(header, cells) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(cells)
    return buf.getvalue()


def render_markdown(header, cells) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---:" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in cells]
    return "\n".join(lines) + "\n"
