"""Clustering agreement, selection accuracy, enrichment and summary statistics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._special import gammaln
from .exceptions import InvalidCounts, LengthMismatch

QUANTILES = (0.25, 0.5, 0.75)
FIELDS = ("ari", "relevant_prop", "irrelevant_prop", "runtime_seconds", "effective_k")


def _pairs(counts):
    counts = np.asarray(counts, dtype=np.float64)
    return float(np.sum(counts * (counts - 1.0)) / 2.0)


def contingency_table(a, b) -> np.ndarray:
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.shape != b.shape:
        raise LengthMismatch(f"label vectors have lengths {a.size} and {b.size}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index.

    When the denominator vanishes, which happens only if both partitions are
    a single block or both are all singletons, the partitions are identical
    and 1 is returned.
    """
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.size != b.size:
        raise LengthMismatch(f"label vectors have lengths {a.size} and {b.size}")
    if a.size < 2:
        raise LengthMismatch("need at least two observations")
    table = contingency_table(a, b)
    index = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    expected = sum_a * sum_b / _pairs([a.size])
    maximum = 0.5 * (sum_a + sum_b)
    if maximum == expected:
        return 1.0
    return (index - expected) / (maximum - expected)


def selection_metrics(predicted, truth) -> tuple[float, float]:
    """(share of truly relevant selected, share of truly irrelevant deselected).

    An empty truth class is vacuously recovered and scores 1.
    """
    predicted = np.asarray(predicted, dtype=bool).reshape(-1)
    truth = np.asarray(truth, dtype=bool).reshape(-1)
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"masks have lengths {predicted.size} and {truth.size}")
    relevant = float(predicted[truth].mean()) if truth.any() else 1.0
    irrelevant = float((~predicted[~truth]).mean()) if (~truth).any() else 1.0
    return relevant, irrelevant


def _log_choose(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def fisher_enrichment(selected_in_set: int, set_size: int, selected_total: int, universe: int) -> float:
    """One-sided Fisher test: P(overlap >= selected_in_set) under the hypergeometric."""
    counts = dict(
        selected_in_set=selected_in_set,
        set_size=set_size,
        selected_total=selected_total,
        universe=universe,
    )
    for name, value in counts.items():
        if isinstance(value, bool) or int(value) != value or value < 0:
            raise InvalidCounts(f"{name} must be a nonnegative integer, got {value!r}")
    k, big_k, n, big_n = (int(v) for v in (selected_in_set, set_size, selected_total, universe))
    if big_k > big_n or n > big_n:
        raise InvalidCounts("set_size and selected_total cannot exceed universe")
    if k > min(big_k, n):
        raise InvalidCounts("selected_in_set cannot exceed set_size or selected_total")
    lo = max(k, n + big_k - big_n, 0)
    hi = min(big_k, n)
    if lo == max(0, n + big_k - big_n):
        return 1.0
    x = np.arange(lo, hi + 1, dtype=np.float64)
    logs = _log_choose(big_k, x) + _log_choose(big_n - big_k, n - x) - _log_choose(big_n, n)
    top = logs.max()
    return min(1.0, math.exp(top) * float(np.sum(np.exp(logs - top))))


@dataclass
class RepetitionRecord:
    ari: float
    relevant_prop: float
    irrelevant_prop: float
    runtime_seconds: float
    effective_k: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class RepetitionSummary:
    records: list
    aggregates: dict
    failures: int = 0
    failure_messages: list = field(default_factory=list)

    def as_dict(self, runtimes: bool = True) -> dict:
        drop = () if runtimes else ("runtime_seconds",)
        return {
            "aggregates": {k: v for k, v in self.aggregates.items() if k not in drop},
            "repetitions": [
                {k: v for k, v in (r.as_dict() if hasattr(r, "as_dict") else r).items() if k not in drop}
                for r in self.records
            ],
            "failures": self.failures,
            "failure_messages": list(self.failure_messages),
        }


def quartiles(values) -> dict:
    """Lower quartile, median and upper quartile by linear interpolation."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return {"lower": None, "median": None, "upper": None}
    lower, median, upper = np.quantile(values, QUANTILES, method="linear")
    return {"lower": float(lower), "median": float(median), "upper": float(upper)}


def aggregate(repetitions, failures: int = 0, failure_messages=()) -> RepetitionSummary:
    records = list(repetitions)
    rows = [r.as_dict() if hasattr(r, "as_dict") else dict(r) for r in records]
    aggregates = {}
    for name in FIELDS:
        present = [row[name] for row in rows if row.get(name) is not None]
        aggregates[name] = quartiles(present)
    return RepetitionSummary(records, aggregates, failures, list(failure_messages))


def format_interval(stats: dict, digits: int = 2) -> str:
    """``median [lower, upper]`` with trailing zeros trimmed."""
    if stats["median"] is None:
        return "n/a"

    def fmt(v):
        text = f"{v:.{digits}f}".rstrip("0").rstrip(".")
        return text if text not in ("-0", "") else "0"

    return f"{fmt(stats['median'])} [{fmt(stats['lower'])}, {fmt(stats['upper'])}]"
