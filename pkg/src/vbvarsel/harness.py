"""CSV ingestion, artifact writing and the repetition harness."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import engine
from . import synthdata as sd
from .config import RunConfig
from .exceptions import ConfigError, DataError, LengthMismatch, NonNumericCell, ParseError, RaggedRow, VBVarSelError
from .metrics import RepetitionRecord, adjusted_rand_index, aggregate, selection_metrics
from .model import DataMatrix

logger = logging.getLogger(__name__)


def _cell(text):
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path) -> DataMatrix:
    """Read a comma-separated numeric matrix with an optional header row.

    The first row is a header when none of its cells parses as a number.
    Fully blank lines are ignored.  Line numbers in errors are 1-based file
    lines and column numbers 1-based fields.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from None
    rows, names, width = [], None, None
    with handle:
        reader = csv.reader(handle)
        try:
            for fields in reader:
                line = reader.line_num
                if not fields or all(not f.strip() for f in fields):
                    continue
                if width is None:
                    width = len(fields)
                    parsed = [_cell(f) for f in fields]
                    if all(v is None for v in parsed):
                        names = [f.strip() for f in fields]
                        continue
                if len(fields) != width:
                    raise RaggedRow(line, width, len(fields))
                row = []
                for col, text in enumerate(fields, start=1):
                    value = _cell(text)
                    if value is None:
                        raise NonNumericCell(line, col, text)
                    row.append(value)
                rows.append(row)
        except csv.Error as exc:
            raise ParseError(reader.line_num, 0, str(exc)) from None
    if not rows:
        raise DataError(f"{path} contains no data rows")
    return DataMatrix(np.array(rows), names)


def _read_two_column(path, what):
    data = load_csv(path)
    if data.j == 1:
        return data.values[:, 0]
    if data.j == 2:
        return data.values[:, 1]
    raise DataError(f"{what} file {path} should have one or two columns, found {data.j}")


def load_truth_labels(path) -> np.ndarray:
    values = _read_two_column(path, "label")
    if np.any(values != np.round(values)):
        raise DataError(f"labels in {path} must be integers")
    return values.astype(int)


def load_truth_relevant(path) -> np.ndarray:
    values = _read_two_column(path, "relevance")
    if not np.all((values == 0) | (values == 1)):
        raise DataError(f"relevance flags in {path} must be 0 or 1")
    return values.astype(bool)


def _fmt(value):
    return repr(float(value))


def write_rows(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_matrix(path, data: DataMatrix):
    write_rows(path, data.names(), ([_fmt(v) for v in row] for row in data.values))


def write_fit_artifacts(directory, labels, c, selected, names, elbo_trace, temperature_trace):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_rows(directory / "assignments.csv", ["observation_index", "label"], enumerate(int(v) for v in labels))
    write_rows(
        directory / "selection.csv",
        ["covariate", "c_value", "selected"],
        ((name, _fmt(cj), int(sj)) for name, cj, sj in zip(names, c, selected)),
    )
    write_rows(
        directory / "elbo_trace.csv",
        ["iteration", "temperature", "elbo"],
        ((i, _fmt(t), _fmt(e)) for i, (t, e) in enumerate(zip(temperature_trace, elbo_trace))),
    )


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@dataclass
class Repetition:
    """Everything one repetition produces, in original column order."""

    index: int
    labels: np.ndarray
    c: np.ndarray
    selected: np.ndarray
    names: list
    elbo_trace: list
    temperature_trace: list
    iterations: int
    converged: bool
    effective_k: int
    cluster_sizes: list
    runtime_seconds: float
    truth_labels: Optional[np.ndarray]
    truth_relevant: Optional[np.ndarray]
    b0: object = None

    def record(self) -> dict:
        out = {
            "repetition": self.index,
            "iterations": self.iterations,
            "converged": self.converged,
            "effective_k": self.effective_k,
            "cluster_sizes": self.cluster_sizes,
            "final_elbo": self.elbo_trace[-1],
            "n_selected": int(self.selected.sum()),
        }
        if self.b0 is not None:
            out["b0"] = self.b0
        if self.truth_labels is not None:
            out["ari"] = adjusted_rand_index(self.truth_labels, self.labels)
        if self.truth_relevant is not None:
            out["relevant_prop"], out["irrelevant_prop"] = selection_metrics(self.selected, self.truth_relevant)
        return out


def _seed(base_seed, t):
    return int(base_seed) + int(t)


def _repetition_data(config: RunConfig, t: int, shared):
    """Return (data, truth_labels, truth_relevant) for repetition ``t``."""
    if shared is not None:
        return shared
    spec = config.synthetic_spec(seed=config["simulate.seed"] + t)
    dataset = sd.generate(spec)
    copies = config["simulate.permuted_copies"]
    if copies:
        dataset, _ = sd.append_permuted_copies(dataset, copies, [spec.seed, 2])
    return dataset.data, dataset.labels, dataset.relevant


def run_repetition(config: RunConfig, t: int, shared=None) -> Repetition:
    seed_t = _seed(config["run.base_seed"], t)
    data, truth_labels, truth_relevant = _repetition_data(config, t, shared)
    hyper = config.hyperparameters()
    b0_used = None
    if config["model.b0_range"] is not None:
        low, high = config["model.b0_range"]
        b0_used = float(np.random.default_rng([seed_t, 4]).uniform(low, high))
        hyper = config.hyperparameters(b0=b0_used)
    order = np.arange(data.j)
    if config["run.shuffle_covariates"]:
        order = np.random.default_rng([seed_t, 1]).permutation(data.j)
        hyper = _permute_vectors(hyper, order, data.j)
    shuffled = data.take_columns(order)
    start = time.perf_counter()
    result = engine.fit(
        shuffled,
        hyper,
        config.schedule(),
        seed=seed_t,
        selection_threshold=config["selection.threshold"],
        init=config.init_options(),
    )
    runtime = time.perf_counter() - start
    # undo the column shuffle so everything is reported in input order
    c = np.empty(data.j)
    c[order] = result.c
    selected = np.empty(data.j, dtype=bool)
    selected[order] = result.selected
    return Repetition(
        index=t,
        labels=result.labels,
        c=c,
        selected=selected,
        names=data.names(),
        elbo_trace=[float(e) for e in result.elbo_trace],
        temperature_trace=[float(v) for v in result.temperature_trace],
        iterations=result.iterations,
        converged=result.converged,
        effective_k=result.effective_k,
        cluster_sizes=[int(v) for v in result.cluster_sizes],
        runtime_seconds=runtime,
        truth_labels=truth_labels,
        truth_relevant=truth_relevant,
        b0=b0_used,
    )


def _permute_vectors(hyper, order, j):
    changes = {}
    for name in ("m0", "b0"):
        value = getattr(hyper, name)
        if value is not None and np.ndim(value) == 1:
            if len(value) != j:
                raise ConfigError(f"model.{name} has {len(value)} entries for {j} covariates")
            changes[name] = np.asarray(value)[order]
    return hyper if not changes else hyper.__class__(**{**hyper.as_dict(), **changes})


def _safe_repetition(args):
    config, t, shared = args
    try:
        return run_repetition(config, t, shared)
    except VBVarSelError as exc:
        return f"repetition {t}: {type(exc).__name__}: {exc}"


def _input_source(config: RunConfig):
    if config["simulate.enabled"] == (config["input.path"] is not None):
        raise ConfigError("set exactly one of input.path or simulate.enabled=true")
    if config["input.path"] is None:
        return None
    data = load_csv(config["input.path"])
    labels = relevant = None
    if config["truth.labels"] is not None:
        labels = load_truth_labels(config["truth.labels"])
        if labels.size != data.n:
            raise LengthMismatch(f"{labels.size} truth labels for {data.n} observations")
    if config["truth.relevant"] is not None:
        relevant = load_truth_relevant(config["truth.relevant"])
        if relevant.size != data.j:
            raise LengthMismatch(f"{relevant.size} relevance flags for {data.j} covariates")
    return data, labels, relevant


def run_experiment(config: RunConfig, write: bool = True):
    """Run ``run.repetitions`` fits and return ``(summary, repetitions)``.

    Repetition ``t`` uses seed ``run.base_seed + t`` for initialization and
    the column shuffle, and simulated data seeded ``simulate.seed + t``.
    Failed repetitions are counted and excluded from the aggregates.
    Runtimes go to ``timings.json`` so ``summary.json`` is reproducible
    byte for byte.
    """
    shared = _input_source(config)
    jobs = [(config, t, shared) for t in range(config["run.repetitions"])]
    if config["run.workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config["run.workers"]) as pool:
            outcomes = list(pool.map(_safe_repetition, jobs))
    else:
        outcomes = [_safe_repetition(job) for job in jobs]
    reps = [o for o in outcomes if isinstance(o, Repetition)]
    failures = [o for o in outcomes if isinstance(o, str)]
    for message in failures:
        logger.warning(message)

    records = []
    for rep in reps:
        rec = rep.record()
        records.append(
            RepetitionRecord(
                ari=rec.get("ari"),
                relevant_prop=rec.get("relevant_prop"),
                irrelevant_prop=rec.get("irrelevant_prop"),
                runtime_seconds=rep.runtime_seconds,
                effective_k=rep.effective_k,
            )
        )
    summary = aggregate(records, len(failures), failures)
    if write:
        out = Path(config["output.dir"])
        out.mkdir(parents=True, exist_ok=True)
        for rep in reps:
            write_fit_artifacts(
                out / f"rep_{rep.index:03d}",
                rep.labels,
                rep.c,
                rep.selected,
                rep.names,
                rep.elbo_trace,
                rep.temperature_trace,
            )
        body = summary.as_dict(runtimes=False)
        body["repetitions"] = [rep.record() for rep in reps]
        body["config"] = config.as_dict()
        write_json(out / "summary.json", body)
        write_json(
            out / "timings.json",
            {
                "runtime_seconds": {str(rep.index): rep.runtime_seconds for rep in reps},
                "aggregate": summary.aggregates["runtime_seconds"],
            },
        )
    return summary, reps


def run_fit(config: RunConfig) -> Repetition:
    """Single fit of ``input.path`` (seed ``run.base_seed``, no shuffling)."""
    if config["input.path"] is None:
        raise ConfigError("fit needs input.path")
    values = dict(config.values, **{"run.repetitions": 1, "run.shuffle_covariates": False, "simulate.enabled": False})
    single = RunConfig(values)
    rep = run_repetition(single, 0, _input_source(single))
    out = Path(config["output.dir"])
    write_fit_artifacts(out, rep.labels, rep.c, rep.selected, rep.names, rep.elbo_trace, rep.temperature_trace)
    body = rep.record()
    body["config"] = single.as_dict()
    write_json(out / "summary.json", body)
    write_json(out / "timings.json", {"runtime_seconds": rep.runtime_seconds})
    return rep


def run_simulate(config: RunConfig) -> sd.SyntheticDataset:
    """Write ``data.csv``, ``truth_labels.csv`` and ``truth_relevant.csv``."""
    spec = config.synthetic_spec()
    dataset = sd.generate(spec)
    copies = config["simulate.permuted_copies"]
    if copies:
        dataset, _ = sd.append_permuted_copies(dataset, copies, [spec.seed, 2])
    out = Path(config["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    names = [f"v{j}" for j in range(dataset.data.j)]
    write_matrix(out / "data.csv", DataMatrix(dataset.data.values, names))
    write_rows(out / "truth_labels.csv", ["observation_index", "label"], enumerate(int(v) for v in dataset.labels))
    write_rows(out / "truth_relevant.csv", ["covariate_index", "relevant"], enumerate(int(v) for v in dataset.relevant))
    return dataset
