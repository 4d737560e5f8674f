import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from vbvarsel import synthdata as sd
from vbvarsel.exceptions import InvalidSpec


@pytest.mark.parametrize("frac,j,expected", [(0.05, 200, 10), (0.1, 200, 20), (0.25, 200, 50), (0.5, 200, 100), (0.3, 10, 3)])
def test_relevant_count(frac, j, expected):
    ds = sd.generate(sd.SyntheticSpec(n=20, j_total=j, frac_relevant=frac))
    assert ds.relevant.sum() == expected
    assert ds.relevant[:expected].all() and not ds.relevant[expected:].any()
    assert ds.data.values.shape == (20, j)


def test_label_counts_follow_weights():
    n = 20000
    ds = sd.generate(sd.SyntheticSpec(n=n, j_total=2, frac_relevant=0.5, seed=1))
    counts = np.bincount(ds.labels, minlength=3)
    w = np.array([0.5, 0.3, 0.2])
    assert np.all(np.abs(counts - n * w) <= 4 * np.sqrt(n * w * (1 - w)))


def test_cluster_moments():
    ds = sd.generate(sd.SyntheticSpec(n=30000, j_total=4, frac_relevant=0.5, seed=2))
    x = ds.data.values
    for k, mean in enumerate((0.0, 2.0, -2.0)):
        rows = x[ds.labels == k]
        assert np.allclose(rows[:, :2].mean(axis=0), mean, atol=0.05)
        assert np.allclose(rows[:, :2].var(axis=0), 1.0, atol=0.06)
    assert np.allclose(x[:, 2:].mean(axis=0), 0.0, atol=0.03)
    assert np.allclose(x[:, 2:].var(axis=0), 1.0, atol=0.04)


def test_fixed_correlation_recovered():
    spec = sd.SyntheticSpec(n=6000, j_total=10, frac_relevant=0.5, correlation=sd.FixedAll(0.5), seed=3)
    ds = sd.generate(spec)
    rows = ds.data.values[ds.labels == 0][:, :5]
    corr = np.corrcoef(rows, rowvar=False)
    off = corr[~np.eye(5, dtype=bool)]
    assert np.all(np.abs(off - 0.5) <= 0.1)


def test_per_cluster_loadings_constant_within_cluster():
    spec = sd.SyntheticSpec(n=50, j_total=20, correlation=sd.PerCluster(0.1, 0.4), seed=4)
    loadings = sd.generate(spec).info["loadings"]
    assert loadings.shape == (3, 2)
    assert np.all(loadings[:, 0] == loadings[:, 1])
    assert np.all((loadings >= 0.1) & (loadings <= 0.4))


def test_correlation_matrix_structure():
    corr = sd.correlation_matrix([0.25, 0.25, 0.04])
    assert np.allclose(corr, [[1, 0.25, 0.1], [0.25, 1, 0.1], [0.1, 0.1, 1]])
    np.linalg.cholesky(sd.correlation_matrix(np.full(50, sd.RHO_MAX)))


@given(st.integers(0, 10_000))
def test_per_covariate_correlation_always_positive_definite(seed):
    spec = sd.SyntheticSpec(n=10, j_total=30, frac_relevant=0.5, correlation=sd.PerClusterAndCovariate(), seed=seed)
    loadings = sd.generate(spec).info["loadings"]
    for row in loadings:
        assert np.all(np.linalg.eigvalsh(sd.correlation_matrix(row)) > 0)


def test_noise_adds_variance():
    spec = sd.SyntheticSpec(n=20000, j_total=4, frac_relevant=0.5, correlation=sd.FixedAll(0.2), seed=5)
    clean = sd.generate(spec)
    noisy = sd.generate(sd.SyntheticSpec(**{**spec.__dict__, "noise_sd": 0.5}))
    assert np.array_equal(clean.labels, noisy.labels)
    diff = noisy.data.values - clean.data.values
    assert diff.var() == pytest.approx(0.25, abs=0.01)
    assert np.allclose(noisy.data.values.var(axis=0) - clean.data.values.var(axis=0), 0.25, atol=0.03)


def test_zero_noise_is_identity():
    ds = sd.generate(sd.SyntheticSpec(n=10, j_total=5, frac_relevant=0.4))
    assert sd.add_gaussian_noise(ds, 0.0, 1) is ds


@pytest.mark.parametrize(
    "spec",
    [
        sd.SyntheticSpec(n=30, j_total=12, seed=9),
        sd.SyntheticSpec(n=30, j_total=12, seed=9, correlation=sd.PerClusterAndCovariate(), noise_sd=0.3),
        sd.SyntheticSpec(n=30, j_total=12, seed=9, misspecification=sd.StudentTNoise()),
        sd.SyntheticSpec(n=30, j_total=12, seed=9, misspecification=sd.StudentTComponents()),
    ],
)
def test_generation_is_deterministic(spec):
    a, b = sd.generate(spec), sd.generate(spec)
    assert np.array_equal(a.data.values, b.data.values) and np.array_equal(a.labels, b.labels)


def test_t_noise_is_heavy_tailed():
    spec = sd.SyntheticSpec(n=20000, j_total=4, frac_relevant=0.5, misspecification=sd.StudentTNoise((5.0, 5.0, 5.0)), seed=6)
    ds = sd.generate(spec)
    noise_col = ds.data.values[:, 3]
    # N(0,1) + t5: excess kurtosis is 6/(5-4) * (5/3)^2 / (1 + 5/3)^2
    assert stats.kurtosis(noise_col) > 0.8


def test_t_noise_large_dof_is_nearly_gaussian():
    spec = sd.SyntheticSpec(n=5000, j_total=2, frac_relevant=0.5, misspecification=sd.StudentTNoise((1e6,) * 3), seed=7)
    col = sd.generate(spec).data.values[:, 1]
    assert stats.kstest(col / np.sqrt(2.0), "norm").pvalue > 0.01


def test_t_components_standardized_and_heavy():
    spec = sd.SyntheticSpec(n=20000, j_total=4, frac_relevant=0.5, misspecification=sd.StudentTComponents(3.0), seed=8)
    x = sd.generate(spec).data.values
    assert np.allclose(x.mean(axis=0), 0, atol=1e-12) and np.allclose(x.var(axis=0), 1)
    assert stats.kurtosis(x[:, 0]) > stats.kurtosis(x[:, 3]) + 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"misspecification": sd.StudentTNoise((1.0, 3.0, 3.0))},
        {"misspecification": sd.StudentTComponents(0.5)},
        {"correlation": sd.FixedAll(0.6)},
        {"correlation": sd.PerCluster(0.3, 0.2)},
        {"frac_relevant": 0.0},
        {"frac_relevant": 0.001},
        {"weights": (0.5, 0.5, 0.5)},
        {"means": (0.0, 1.0)},
        {"noise_sd": -1.0},
        {"n": 1},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpec):
        sd.SyntheticSpec(**kwargs)


def test_permute_keeps_multisets():
    ds = sd.generate(sd.SyntheticSpec(n=40, j_total=6, seed=10))
    out = sd.permute_covariates(ds.data, [1, 4], seed=0)
    before, after = ds.data.values, out.values
    for j in range(6):
        assert np.array_equal(np.sort(before[:, j]), np.sort(after[:, j]))
        if j not in (1, 4):
            assert np.array_equal(before[:, j], after[:, j])
    assert not np.array_equal(before[:, 1], after[:, 1])


def test_permuted_copies():
    ds = sd.generate(sd.SyntheticSpec(n=40, j_total=20, frac_relevant=0.1, seed=11))
    out, mask = sd.append_permuted_copies(ds, 5, seed=1)
    assert out.data.j == 25 and mask.sum() == 5 and mask[20:].all()
    assert out.relevant.sum() == 2 and not out.relevant[20:].any()
    assert out.info["copy_sources"].tolist() == [0, 1, 0, 1, 0]
    for j, src in zip(range(20, 25), out.info["copy_sources"]):
        assert np.array_equal(np.sort(out.data.values[:, j]), np.sort(ds.data.values[:, src]))
