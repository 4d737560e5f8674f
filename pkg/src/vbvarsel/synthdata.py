"""Synthetic three-cluster benchmarks with known labels and relevant columns.

Every generator draws from a single PCG64 stream seeded by ``spec.seed`` and
places the relevant covariates first; callers that want them elsewhere
shuffle the columns and carry the ``relevant`` mask along.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidSpec, NotPositiveDefinite
from .model import DataMatrix, standardize

RHO_MAX = 0.5
_PD_RETRIES = 20


@dataclass(frozen=True)
class FixedAll:
    """One equicorrelation ``rho`` shared by every cluster."""

    rho: float


@dataclass(frozen=True)
class PerCluster:
    """Equicorrelation drawn uniformly in ``[low, high]`` for each cluster."""

    low: float = 0.0
    high: float = RHO_MAX


@dataclass(frozen=True)
class PerClusterAndCovariate:
    """A loading ``rho_kj`` per cluster and covariate; ``cov_ij = sqrt(rho_ki rho_kj)``."""

    low: float = 0.0
    high: float = RHO_MAX


@dataclass(frozen=True)
class StudentTNoise:
    """Add t noise to every entry, with degrees of freedom set by the row's cluster."""

    dof: tuple = (2.0, 3.0, 3.0)


@dataclass(frozen=True)
class StudentTComponents:
    """Relevant block drawn from multivariate t instead of Gaussian; output standardized."""

    dof: float = 3.0


Correlation = Union[None, FixedAll, PerCluster, PerClusterAndCovariate]
Misspecification = Union[None, StudentTNoise, StudentTComponents]


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 100
    j_total: int = 200
    frac_relevant: float = 0.1
    weights: tuple = (0.5, 0.3, 0.2)
    means: tuple = (0.0, 2.0, -2.0)
    correlation: Correlation = None
    noise_sd: float = 0.0
    misspecification: Misspecification = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        self.validate()

    @property
    def n_relevant(self) -> int:
        return int(round(self.frac_relevant * self.j_total))

    def validate(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidSpec(f"n must be an integer >= 2, got {self.n}")
        if int(self.j_total) != self.j_total or self.j_total < 1:
            raise InvalidSpec(f"j_total must be a positive integer, got {self.j_total}")
        if not (0 < self.frac_relevant <= 1):
            raise InvalidSpec(f"frac_relevant must lie in (0, 1], got {self.frac_relevant}")
        if self.n_relevant < 1:
            raise InvalidSpec("frac_relevant * j_total rounds to zero relevant covariates")
        w = np.asarray(self.weights)
        if w.shape != (3,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise InvalidSpec(f"weights must be three nonnegative numbers summing to 1, got {self.weights}")
        if len(self.means) != 3 or not np.all(np.isfinite(self.means)):
            raise InvalidSpec(f"means must be three finite numbers, got {self.means}")
        if not (np.isfinite(self.noise_sd) and self.noise_sd >= 0):
            raise InvalidSpec(f"noise_sd must be >= 0, got {self.noise_sd}")
        corr = self.correlation
        if isinstance(corr, FixedAll):
            _check_rho(corr.rho, corr.rho)
        elif isinstance(corr, (PerCluster, PerClusterAndCovariate)):
            _check_rho(corr.low, corr.high)
        elif corr is not None:
            raise InvalidSpec(f"unknown correlation variant {corr!r}")
        mis = self.misspecification
        if isinstance(mis, StudentTNoise):
            dof = np.asarray(mis.dof, dtype=float)
            if dof.shape != (3,) or np.any(~(dof > 1)):
                raise InvalidSpec(f"t noise needs three dof values > 1, got {mis.dof}")
        elif isinstance(mis, StudentTComponents):
            if not mis.dof > 1:
                raise InvalidSpec(f"t components need dof > 1, got {mis.dof}")
        elif mis is not None:
            raise InvalidSpec(f"unknown misspecification variant {mis!r}")


def _check_rho(low, high):
    if not (0 <= low <= high <= RHO_MAX):
        raise InvalidSpec(f"correlation bounds must satisfy 0 <= low <= high <= {RHO_MAX}, got [{low}, {high}]")


@dataclass(frozen=True)
class SyntheticDataset:
    data: DataMatrix
    labels: np.ndarray
    relevant: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        relevant = np.asarray(self.relevant, dtype=bool)
        if labels.shape != (self.data.n,) or relevant.shape != (self.data.j,):
            raise InvalidSpec("labels/relevant do not match the data shape")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "relevant", relevant)


def _labels(spec, rng):
    return rng.choice(3, size=spec.n, p=np.asarray(spec.weights))


def _relevant_mask(spec):
    mask = np.zeros(spec.j_total, dtype=bool)
    mask[: spec.n_relevant] = True
    return mask


def _assemble(spec, rng, relevant_block, labels, info=None):
    noise = rng.standard_normal((spec.n, spec.j_total - spec.n_relevant))
    values = np.hstack([relevant_block, noise])
    return SyntheticDataset(DataMatrix(values), labels, _relevant_mask(spec), info or {})


def generate_base(spec: SyntheticSpec) -> SyntheticDataset:
    """Spherical unit-variance clusters on the relevant block, N(0, 1) elsewhere."""
    if spec.correlation is not None or spec.noise_sd != 0 or spec.misspecification is not None:
        raise InvalidSpec("generate_base takes a spec without correlation, noise or misspecification")
    rng = np.random.default_rng(spec.seed)
    labels = _labels(spec, rng)
    centres = np.asarray(spec.means)[labels][:, None]
    block = centres + rng.standard_normal((spec.n, spec.n_relevant))
    return _assemble(spec, rng, block, labels)


def correlation_matrix(loadings) -> np.ndarray:
    """``1`` on the diagonal, ``sqrt(rho_i rho_j)`` off it."""
    s = np.sqrt(np.asarray(loadings, dtype=np.float64))
    corr = np.outer(s, s)
    np.fill_diagonal(corr, 1.0)
    return corr


def _draw_loadings(corr, r, rng):
    if isinstance(corr, FixedAll):
        return np.full((3, r), float(corr.rho))
    if isinstance(corr, PerCluster):
        return np.repeat(rng.uniform(corr.low, corr.high, size=3)[:, None], r, axis=1)
    return rng.uniform(corr.low, corr.high, size=(3, r))


def generate_correlated(spec: SyntheticSpec) -> SyntheticDataset:
    """Relevant block from per-cluster correlated Gaussians (unit variances).

    The correlation matrix of cluster ``k`` is built from loadings
    ``rho_kj`` as in :func:`correlation_matrix`; with equal loadings this is
    equicorrelation.  Each is Cholesky-factored, and a failed factorization
    triggers a fresh draw, up to a bounded number of attempts.
    """
    if spec.correlation is None:
        raise InvalidSpec("generate_correlated needs a correlation variant")
    if spec.misspecification is not None:
        raise InvalidSpec("correlation and misspecification cannot be combined")
    rng = np.random.default_rng(spec.seed)
    labels = _labels(spec, rng)
    r = spec.n_relevant
    for _ in range(_PD_RETRIES):
        loadings = _draw_loadings(spec.correlation, r, rng)
        try:
            factors = [np.linalg.cholesky(correlation_matrix(row)) for row in loadings]
            break
        except np.linalg.LinAlgError:
            continue
    else:
        raise NotPositiveDefinite(f"no positive-definite correlation after {_PD_RETRIES} draws")
    z = rng.standard_normal((spec.n, r))
    block = np.empty((spec.n, r))
    for k in range(3):
        rows = labels == k
        block[rows] = spec.means[k] + z[rows] @ factors[k].T
    data = _assemble(spec, rng, block, labels, {"loadings": loadings})
    if spec.noise_sd > 0:
        data = add_gaussian_noise(data, spec.noise_sd, [spec.seed, 1])
    return data


def add_gaussian_noise(dataset: SyntheticDataset, sd: float, seed) -> SyntheticDataset:
    if not (np.isfinite(sd) and sd >= 0):
        raise InvalidSpec(f"noise sd must be >= 0, got {sd}")
    if sd == 0:
        return dataset
    values = dataset.data.values
    noisy = values + sd * np.random.default_rng(seed).standard_normal(values.shape)
    return replace(dataset, data=DataMatrix(noisy, dataset.data.column_names))


def generate_misspecified(spec: SyntheticSpec) -> SyntheticDataset:
    """Heavy-tailed variants of the base generator.

    :class:`StudentTNoise` adds t noise to every entry of the base data,
    using the degrees of freedom of the row's cluster, and leaves the scale
    alone.  :class:`StudentTComponents` draws each relevant row as
    ``centre + z / sqrt(w / dof)`` with one ``w ~ chi2(dof)`` per row, keeps
    the irrelevant block Gaussian and standardizes every column.
    """
    mis = spec.misspecification
    if mis is None:
        raise InvalidSpec("generate_misspecified needs a misspecification variant")
    if spec.correlation is not None:
        raise InvalidSpec("correlation and misspecification cannot be combined")
    rng = np.random.default_rng(spec.seed)
    labels = _labels(spec, rng)
    centres = np.asarray(spec.means)[labels][:, None]
    r = spec.n_relevant
    if isinstance(mis, StudentTNoise):
        block = centres + rng.standard_normal((spec.n, r))
        data = _assemble(spec, rng, block, labels)
        dof = np.asarray(mis.dof, dtype=float)[labels][:, None]
        noise = rng.standard_t(np.broadcast_to(dof, (spec.n, spec.j_total)))
        values = data.data.values + noise
        data = replace(data, data=DataMatrix(values))
    else:
        z = rng.standard_normal((spec.n, r))
        w = rng.chisquare(mis.dof, size=spec.n)[:, None]
        block = centres + z / np.sqrt(w / mis.dof)
        data = _assemble(spec, rng, block, labels)
        data = replace(data, data=standardize(data.data))
    if spec.noise_sd > 0:
        data = add_gaussian_noise(data, spec.noise_sd, [spec.seed, 1])
    return data


def generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Dispatch on the spec's variant fields."""
    if spec.misspecification is not None:
        return generate_misspecified(spec)
    if spec.correlation is not None:
        return generate_correlated(spec)
    if spec.noise_sd > 0:
        base = generate_base(replace(spec, noise_sd=0.0))
        return add_gaussian_noise(base, spec.noise_sd, [spec.seed, 1])
    return generate_base(spec)


def permute_covariates(data: DataMatrix, columns, seed) -> DataMatrix:
    """Shuffle each listed column over rows, independently of the others."""
    columns = np.asarray(columns, dtype=int).reshape(-1)
    if columns.size == 0:
        return data
    if np.any((columns < 0) | (columns >= data.j)):
        raise InvalidSpec(f"column index out of range for {data.j} columns")
    rng = np.random.default_rng(seed)
    values = np.array(data.values)
    for j in columns:
        values[:, j] = rng.permutation(values[:, j])
    return DataMatrix(values, data.column_names)


def append_permuted_copies(dataset: SyntheticDataset, copies: int, seed) -> tuple:
    """Append ``copies`` row-shuffled duplicates of the relevant columns.

    Copies cycle through the relevant columns in order.  They keep each
    source column's values but lose its link to the labels, so they are
    marked irrelevant.  Returns the new dataset and a mask of copy columns.
    """
    if int(copies) != copies or copies < 0:
        raise InvalidSpec(f"copies must be a nonnegative integer, got {copies}")
    source = np.flatnonzero(dataset.relevant)
    picks = source[np.arange(copies) % source.size]
    base = dataset.data
    joined = DataMatrix(np.hstack([base.values, base.values[:, picks]]))
    joined = permute_covariates(joined, np.arange(base.j, base.j + copies), seed)
    mask = np.zeros(joined.j, dtype=bool)
    mask[base.j :] = True
    relevant = np.concatenate([dataset.relevant, np.zeros(copies, dtype=bool)])
    info = dict(dataset.info, copy_sources=picks)
    return SyntheticDataset(joined, dataset.labels, relevant, info), mask
