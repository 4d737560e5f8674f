"""Domain types, hyperparameter validation and the null (no-cluster) model."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import DataError, InvalidHyperparameter, ZeroVarianceColumn
from .schedule import TemperatureSchedule


@dataclass(frozen=True)
class DataMatrix:
    """N observations by J covariates of finite reals."""

    values: np.ndarray
    column_names: Optional[tuple] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DataError(f"data must be two-dimensional, got shape {values.shape}")
        if values.shape[0] < 2 or values.shape[1] < 1:
            raise DataError(f"need N >= 2 and J >= 1, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite entry at row {bad[0]}, column {bad[1]}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != values.shape[1]:
                raise DataError(f"{len(names)} column names for {values.shape[1]} columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def j(self) -> int:
        return self.values.shape[1]

    def names(self) -> list:
        if self.column_names is not None:
            return list(self.column_names)
        return [str(i) for i in range(self.j)]

    def take_columns(self, index) -> "DataMatrix":
        index = np.asarray(index, dtype=int)
        names = None if self.column_names is None else [self.column_names[i] for i in index]
        return DataMatrix(self.values[:, index], names)


@dataclass(frozen=True)
class Hyperparameters:
    """Prior and engine constants.

    ``m0`` of ``None`` means "per-column data mean"; ``m0`` and ``b0`` may be
    scalars, which are broadcast over covariates by :meth:`resolve`.
    """

    k_max: int = 10
    alpha0: float = 0.1
    m0: Optional[object] = None
    beta0: float = 1e-3
    a0: float = 3.0
    b0: object = 1.0
    d0: float = 0.9
    c_init: float = 1.0
    max_iterations: int = 200
    epsilon: float = 1e-5
    standardize: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        def positive(name):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidHyperparameter(name, value, "> 0")

        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise InvalidHyperparameter("k_max", self.k_max, "integer >= 1")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidHyperparameter("max_iterations", self.max_iterations, "integer >= 1")
        for name in ("alpha0", "beta0", "a0", "d0", "epsilon"):
            positive(name)
        if not (0 < self.c_init <= 1):
            raise InvalidHyperparameter("c_init", self.c_init, "0 < c_init <= 1")
        b0 = np.asarray(self.b0, dtype=np.float64)
        if b0.ndim > 1 or b0.size == 0 or not np.all(np.isfinite(b0) & (b0 > 0)):
            raise InvalidHyperparameter("b0", self.b0, "every entry > 0")
        if self.m0 is not None:
            m0 = np.asarray(self.m0, dtype=np.float64)
            if m0.ndim > 1 or m0.size == 0 or not np.all(np.isfinite(m0)):
                raise InvalidHyperparameter("m0", self.m0, "finite scalar or vector")

    def resolve(self, data: DataMatrix) -> tuple[np.ndarray, np.ndarray]:
        """Return length-J ``(m0, b0)`` vectors for ``data``."""
        j = data.j
        if self.m0 is None:
            m0 = data.values.mean(axis=0)
        else:
            m0 = _broadcast("m0", self.m0, j)
        return m0, _broadcast("b0", self.b0, j)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                value = value.tolist()
            out[f.name] = value
        return out


@dataclass(frozen=True)
class InitOptions:
    """How a fit is started.

    ``concentration`` is the symmetric Dirichlet parameter of the initial
    responsibility rows; large values start every observation close to
    uniform, so the leading direction of variation emerges gradually instead
    of the first E-step locking onto noise.  Selection weights are held at
    ``c_init`` until the mean of ``max_k r_nk`` reaches ``release_certainty``
    (or for ``max_hold`` sweeps at most).  ``n_init`` independent starts are
    run and the one with the highest final ELBO is kept.

    :meth:`plain` gives a single flat-Dirichlet start with no hold.
    """

    concentration: float = 3000.0
    n_init: int = 5
    release_certainty: float = 0.6
    max_hold: int = 20

    def __post_init__(self):
        if not (np.isfinite(self.concentration) and self.concentration > 0):
            raise InvalidHyperparameter("concentration", self.concentration, "> 0")
        if int(self.n_init) != self.n_init or self.n_init < 1:
            raise InvalidHyperparameter("n_init", self.n_init, "integer >= 1")
        if not (0 <= self.release_certainty <= 1):
            raise InvalidHyperparameter("release_certainty", self.release_certainty, "in [0, 1]")
        if int(self.max_hold) != self.max_hold or self.max_hold < 0:
            raise InvalidHyperparameter("max_hold", self.max_hold, "integer >= 0")

    @classmethod
    def plain(cls) -> "InitOptions":
        return cls(concentration=1.0, n_init=1, release_certainty=0.0, max_hold=0)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _broadcast(name, value, j):
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim == 0:
        return np.full(j, float(arr))
    if arr.shape != (j,):
        raise InvalidHyperparameter(name, value, f"length {j}")
    return arr.copy()


@dataclass(frozen=True)
class NullParams:
    """Per-covariate mean and precision under "no clustering structure"."""

    mu0: np.ndarray
    tau0: np.ndarray


@dataclass(frozen=True)
class VariationalState:
    r: np.ndarray
    c: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    m: np.ndarray
    a: np.ndarray
    b: np.ndarray
    null: NullParams
    temperature: float = 1.0
    m0: np.ndarray = field(default=None, repr=False)
    b0: np.ndarray = field(default=None, repr=False)

    @property
    def nk(self) -> np.ndarray:
        return self.r.sum(axis=0)

    @property
    def k(self) -> int:
        return self.r.shape[1]

    def replace(self, **changes) -> "VariationalState":
        return replace(self, **changes)


def _column_variance(values):
    mean = values.mean(axis=0)
    var = ((values - mean) ** 2).mean(axis=0)
    for j in np.flatnonzero(~(var > 0)):
        raise ZeroVarianceColumn(int(j))
    return mean, var


def fit_null_params(data: DataMatrix) -> NullParams:
    """Maximum-likelihood mean and precision of every column (divide-by-N)."""
    mean, var = _column_variance(data.values)
    return NullParams(mu0=mean, tau0=1.0 / var)


def standardize(data: DataMatrix) -> DataMatrix:
    mean, var = _column_variance(data.values)
    return DataMatrix((data.values - mean) / np.sqrt(var), data.column_names)


def init_state(
    data: DataMatrix,
    hyper: Hyperparameters,
    seed,
    schedule: Optional[TemperatureSchedule] = None,
    concentration: float = 1.0,
) -> VariationalState:
    """Random responsibilities, prior-valued component parameters.

    Responsibility rows are symmetric Dirichlet(``concentration``) draws
    from ``numpy``'s PCG64 stream seeded with ``seed`` (an integer or a
    sequence of integers); everything else is deterministic.
    """
    null = fit_null_params(data)
    m0, b0 = hyper.resolve(data)
    k, j = hyper.k_max, data.j
    rng = np.random.default_rng(seed)
    r = rng.dirichlet(np.full(k, float(concentration)), size=data.n)
    r /= r.sum(axis=1, keepdims=True)
    temperature = 1.0 if schedule is None else schedule.temperature(0)
    return VariationalState(
        r=r,
        c=np.full(j, float(hyper.c_init)),
        alpha=np.full(k, float(hyper.alpha0)),
        beta=np.full((k, j), float(hyper.beta0)),
        m=np.tile(m0, (k, 1)),
        a=np.full((k, j), float(hyper.a0)),
        b=np.tile(b0, (k, 1)),
        null=null,
        temperature=temperature,
        m0=m0,
        b0=b0,
    )


def as_data_matrix(x, column_names: Optional[Sequence[str]] = None) -> DataMatrix:
    if isinstance(x, DataMatrix):
        return x
    return DataMatrix(np.asarray(x, dtype=np.float64), column_names)
