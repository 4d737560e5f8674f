"""Canned simulation protocols with published reference values.

Every row is a set of configuration overrides on top of :data:`PROTOCOL`
plus the reference ``median [lower, upper]`` strings it is compared with.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, resolve
from .exceptions import UnknownTable
from .harness import run_experiment, write_json
from .metrics import format_interval

# Defaults shared by every synthetic row: K=3 components, d0=3, b0=1.
PROTOCOL = {
    "simulate.enabled": True,
    "simulate.n": 100,
    "simulate.j_total": 200,
    "model.k_max": 3,
    "model.alpha0": 0.1,
    "model.b0": 1.0,
    "model.d0": 3.0,
    "model.c_init": 1.0,
    "run.repetitions": 10,
}


@dataclass(frozen=True)
class Row:
    label: str
    overrides: dict
    reference: dict = field(default_factory=dict)
    large: bool = False


def _ref(relevant, irrelevant, ari):
    return {"relevant_prop": relevant, "irrelevant_prop": irrelevant, "ari": ari}


def _sched(kind, t0, ia=5):
    return {"schedule.kind": kind, "schedule.t0": t0, "schedule.annealed_iterations": ia}


def _main_table(frac, ref100, ref1000):
    base = {"simulate.frac_relevant": frac}
    return [
        Row("n=100", base, ref100),
        Row("n=1000", {**base, "simulate.n": 1000}, ref1000, large=True),
    ]


_CORR_ALL = {"simulate.frac_relevant": 0.1, "simulate.correlation": "per_cluster_covariate"}
_CORR_K = {"simulate.frac_relevant": 0.1, "simulate.correlation": "per_cluster"}
_TEN = {"simulate.frac_relevant": 0.1}
_SUBOPT = {"simulate.frac_relevant": 0.1, "model.b0_range": (0.01, 1.0)}

TABLES = {
    "1": _main_table(
        0.05, _ref("1 [1, 1]", "1 [1, 1]", "0.99 [0.98, 1]"), _ref("1 [1, 1]", "1 [1, 1]", "0.95 [0.90, 0.96]")
    ),
    "2": _main_table(
        0.10, _ref("1 [1, 1]", "1 [0.99, 1]", "1 [0.98, 1]"), _ref("1 [1, 1]", "1 [0.99, 1]", "0.92 [0.87, 0.99]")
    ),
    "3": _main_table(0.25, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"), _ref("1 [1, 1]", "1 [0.99, 1]", "1 [1, 1]")),
    "4": _main_table(0.50, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"), _ref("1 [1, 1]", "1 [0.99, 1]", "1 [1, 1]")),
    "s3": [
        Row("T=1", {**_CORR_ALL, **_sched("fixed", 1.0)}, _ref("1 [1, 1]", "0.99 [0.99, 0.99]", "0.48 [0.41, 0.54]")),
        Row("T=2 G", {**_CORR_ALL, **_sched("geometric", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "0.69 [0.69, 0.71]")),
        Row("T=2 fixed", {**_CORR_ALL, **_sched("fixed", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "0.59 [0.40, 0.71]")),
    ],
    "s4": [
        Row(
            "rho=0.1 T=1",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.1, **_sched("fixed", 1.0)},
            _ref("1 [1, 1]", "1 [0.99, 1]", "0.97 [0.97, 0.97]"),
        ),
        Row(
            "rho=0.1 T=2 H",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.1, **_sched("harmonic", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [0.97, 1]"),
        ),
        Row(
            "rho=0.5 T=1",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.5, **_sched("fixed", 1.0)},
            _ref("1 [1, 1]", "1 [0.99, 1]", "0.68 [0.50, 0.71]"),
        ),
        Row(
            "rho=0.5 T=3 G",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.5, **_sched("geometric", 3.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "0.76 [0.76, 1]"),
        ),
        Row(
            "rho=0.1 T=2 fixed",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.1, **_sched("fixed", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"),
        ),
        Row(
            "rho=0.5 T=2 fixed",
            {**_TEN, "simulate.correlation": "fixed", "simulate.rho": 0.5, **_sched("fixed", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "0.70 [0.70, 0.73]"),
        ),
    ],
    "s5": [
        Row("T=1", {**_CORR_K, **_sched("fixed", 1.0)}, _ref("1 [1, 1]", "1 [0.99, 1]", "0.65 [0.65, 0.70]")),
        Row("T=2 G", {**_CORR_K, **_sched("geometric", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "0.74 [0.74, 1]")),
        Row("T=2 fixed", {**_CORR_K, **_sched("fixed", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "0.71 [0.67, 1]")),
    ],
    "s6": [
        Row("optimal T=1", {**_TEN, **_sched("fixed", 1.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]")),
        Row("optimal T=3 G", {**_TEN, **_sched("geometric", 3.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]")),
        Row("optimal T=2 H", {**_TEN, **_sched("harmonic", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]")),
        Row("sub-optimal T=1", {**_SUBOPT, **_sched("fixed", 1.0)}, _ref("1 [1, 1]", "0.98 [0.97, 0.99]", "0.84 [0.75, 0.88]")),
        Row("sub-optimal T=3 G", {**_SUBOPT, **_sched("geometric", 3.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [0.70, 1]")),
        Row("sub-optimal T=2 H", {**_SUBOPT, **_sched("harmonic", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [0.94, 1]")),
        Row("optimal T=2 fixed", {**_TEN, **_sched("fixed", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]")),
        Row("sub-optimal T=2 fixed", {**_SUBOPT, **_sched("fixed", 2.0)}, _ref("1 [1, 1]", "1 [1, 1]", "1 [0.84, 1]")),
    ],
    "s7": [
        Row("sd=0.1 T=1", {**_TEN, "simulate.noise_sd": 0.1}, _ref("1 [1, 1]", "0.98 [0.98, 1]", "0.89 [0.86, 0.95]")),
        Row(
            "sd=0.1 T=3 G",
            {**_TEN, "simulate.noise_sd": 0.1, **_sched("geometric", 3.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [0.93, 1]"),
        ),
        Row(
            "sd=0.1 T=3 H",
            {**_TEN, "simulate.noise_sd": 0.1, **_sched("harmonic", 3.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"),
        ),
        Row("sd=0.5 T=1", {**_TEN, "simulate.noise_sd": 0.5}, _ref("1 [1, 1]", "0.98 [0.97, 0.98]", "0.90 [0.65, 0.92]")),
        Row(
            "sd=0.5 T=2 G",
            {**_TEN, "simulate.noise_sd": 0.5, **_sched("geometric", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [0.77, 1]"),
        ),
        Row(
            "sd=0.5 T=2 H",
            {**_TEN, "simulate.noise_sd": 0.5, **_sched("harmonic", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"),
        ),
        Row(
            "sd=0.1 T=2 fixed",
            {**_TEN, "simulate.noise_sd": 0.1, **_sched("fixed", 2.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [1, 1]"),
        ),
        Row(
            "sd=0.5 T=4 fixed",
            {**_TEN, "simulate.noise_sd": 0.5, **_sched("fixed", 4.0)},
            _ref("1 [1, 1]", "1 [1, 1]", "1 [0.70, 1]"),
        ),
    ],
    "misspec1": [
        Row(
            f"n={n} {int(frac * 100)}%",
            {
                "simulate.frac_relevant": frac,
                "simulate.n": n,
                "simulate.misspecification": "t_noise",
                "simulate.dof": (2.0, 3.0, 3.0),
            },
            ref,
            large=n > 100,
        )
        for n, frac, ref in [
            (100, 0.10, _ref("1 [1, 1]", "0.99 [0.98, 1]", "0.60 [0.58, 0.68]")),
            (100, 0.25, _ref("1 [1, 1]", "1 [1, 1]", "0.56 [0.49, 0.65]")),
            (100, 0.50, _ref("1 [1, 1]", "0.99 [0.99, 1]", "0.46 [0.40, 0.55]")),
            (1000, 0.10, _ref("1 [1, 1]", "1 [1, 1]", "0.69 [0.67, 0.73]")),
            (1000, 0.25, _ref("1 [1, 1]", "1 [1, 1]", "0.78 [0.72, 0.88]")),
            (1000, 0.50, _ref("1 [1, 1]", "1 [1, 1]", "0.69 [0.66, 0.78]")),
        ]
    ],
    "misspec2": [
        Row(
            f"n={n} {int(frac * 100)}%",
            {
                "simulate.frac_relevant": frac,
                "simulate.n": n,
                "simulate.misspecification": "t_components",
                "simulate.dof": (3.0,),
            },
            ref,
            large=n > 100,
        )
        for n, frac, ref in [
            (100, 0.25, _ref("0.82 [0.72, 0.9]", "1 [0.99, 1]", "0.68 [0.62, 0.78]")),
            (100, 0.50, _ref("0.96 [0.85, 0.99]", "1 [1, 1]", "0.74 [0.71, 0.80]")),
            (1000, 0.25, _ref("0.92 [0.69, 0.98]", "1 [1, 1]", "0.59 [0.57, 0.63]")),
            (1000, 0.50, _ref("0.88 [0.86, 0.93]", "1 [1, 1]", "0.58 [0.56, 0.68]")),
        ]
    ],
    "kselect": [
        Row(f"K=10 alpha0={a}", {"simulate.frac_relevant": 0.1, "model.k_max": 10, "model.alpha0": a})
        for a in (0.1, 0.45)
    ],
    "permuted": [
        Row(
            "10 relevant + 50 permuted copies",
            {"simulate.frac_relevant": 0.05, "simulate.permuted_copies": 50},
        )
    ],
}


def table_ids():
    return sorted(TABLES)


def row_config(row: Row, extra=None) -> RunConfig:
    return RunConfig(resolve(PROTOCOL, {**row.overrides, **(extra or {})}))


def reproduce(table_id: str, output_dir, extra=None, include_large: bool = False) -> dict:
    """Run every row of a table and write ``report.txt`` and ``report.json``.

    Rows at n=1000 are skipped unless ``include_large`` is set.  ``extra``
    holds configuration overrides applied to every row (for example
    ``run.repetitions`` or ``run.workers``).
    """
    key = str(table_id).lower()
    if key not in TABLES:
        raise UnknownTable(f"unknown table {table_id!r}; choose from {', '.join(table_ids())}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {"table": key, "rows": []}
    lines = [f"table {key}", f"{'row':<28}{'metric':<17}{'reference':<22}reproduced"]
    for i, row in enumerate(TABLES[key]):
        if row.large and not include_large:
            continue
        row_dir = out / f"row_{i:02d}"
        config = row_config(row, {**(extra or {}), "output.dir": str(row_dir)})
        summary, reps = run_experiment(config)
        entry = {"label": row.label, "config": config.as_dict(), "failures": summary.failures, "metrics": {}}
        for metric in ("relevant_prop", "irrelevant_prop", "ari", "effective_k"):
            stats = summary.aggregates[metric]
            reproduced = format_interval(stats)
            reference = row.reference.get(metric, "-")
            entry["metrics"][metric] = {"reference": reference, "reproduced": stats}
            lines.append(f"{row.label:<28}{metric:<17}{reference:<22}{reproduced}")
        runtime = summary.aggregates["runtime_seconds"]
        lines.append(f"{row.label:<28}{'runtime_s':<17}{'-':<22}{format_interval(runtime)}")
        if key == "kselect":
            hits = sum(1 for r in reps if r.effective_k == 3)
            entry["effective_k_equals_3"] = hits
            lines.append(f"{row.label:<28}{'k=3 count':<17}{'-':<22}{hits}/{len(reps)}")
        if key == "permuted":
            copies = config["simulate.permuted_copies"]
            median = float(np.median([1.0 - r.selected[-copies:].mean() for r in reps]))
            entry["copies_deselected_median"] = median
            lines.append(f"{row.label:<28}{'copies_desel':<17}{'>= 0.91':<22}{median:.3f}")
        report["rows"].append(entry)
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text, encoding="utf-8")
    write_json(out / "report.json", report)
    report["text"] = text
    return report
