import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vbvarsel.exceptions import ConfigError, DataError, InvalidHyperparameter, ZeroVarianceColumn
from vbvarsel.model import (
    DataMatrix,
    Hyperparameters,
    InitOptions,
    fit_null_params,
    init_state,
    standardize,
)
from vbvarsel.schedule import TemperatureSchedule


def test_data_matrix_basic():
    d = DataMatrix([[1, 2], [3, 4], [5, 6]], ["a", "b"])
    assert (d.n, d.j) == (3, 2)
    assert d.names() == ["a", "b"]
    assert not d.values.flags.writeable
    assert DataMatrix(np.ones((2, 3)) * np.arange(3)).names() == ["0", "1", "2"]


@pytest.mark.parametrize(
    "values",
    [np.ones(4), np.ones((1, 3)), np.ones((3, 0)), [[1.0, np.nan], [1.0, 2.0]], [[np.inf, 1.0], [0.0, 1.0]]],
)
def test_data_matrix_rejects(values):
    with pytest.raises(DataError):
        DataMatrix(values)


def test_data_matrix_name_count():
    with pytest.raises(DataError):
        DataMatrix(np.ones((3, 2)), ["only"])


def test_take_columns_keeps_names():
    d = DataMatrix(np.arange(12.0).reshape(3, 4), list("abcd"))
    sub = d.take_columns([2, 0])
    assert sub.names() == ["c", "a"]
    assert np.array_equal(sub.values, d.values[:, [2, 0]])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"k_max": 0},
        {"k_max": 2.5},
        {"alpha0": 0.0},
        {"beta0": -1.0},
        {"a0": float("nan")},
        {"d0": 0.0},
        {"c_init": 0.0},
        {"c_init": 1.5},
        {"epsilon": 0.0},
        {"max_iterations": 0},
        {"b0": [1.0, -1.0]},
        {"m0": [np.inf]},
    ],
)
def test_hyperparameter_validation(kwargs):
    with pytest.raises(InvalidHyperparameter):
        Hyperparameters(**kwargs)


def test_hyperparameter_error_is_config_error():
    assert issubclass(InvalidHyperparameter, ConfigError)


def test_resolve_broadcasts_and_defaults_to_means():
    d = DataMatrix([[0.0, 10.0], [2.0, 20.0]])
    m0, b0 = Hyperparameters(b0=0.5).resolve(d)
    assert np.array_equal(m0, [1.0, 15.0])
    assert np.array_equal(b0, [0.5, 0.5])
    m0, b0 = Hyperparameters(m0=[1.0, 2.0], b0=[0.1, 0.2]).resolve(d)
    assert np.array_equal(m0, [1.0, 2.0]) and np.array_equal(b0, [0.1, 0.2])
    with pytest.raises(InvalidHyperparameter):
        Hyperparameters(b0=[1.0, 2.0, 3.0]).resolve(d)


def test_null_params_are_mle():
    x = np.array([[1.0, 0.0], [3.0, 4.0], [5.0, 8.0]])
    null = fit_null_params(DataMatrix(x))
    assert np.allclose(null.mu0, [3.0, 4.0])
    assert np.allclose(null.tau0, 1.0 / np.array([8.0 / 3.0, 32.0 / 3.0]))


def test_zero_variance_column():
    with pytest.raises(ZeroVarianceColumn) as info:
        fit_null_params(DataMatrix([[1.0, 2.0], [1.0, 3.0]]))
    assert info.value.column == 0


def test_standardize():
    rng = np.random.default_rng(3)
    d = standardize(DataMatrix(rng.normal(5.0, 3.0, size=(50, 4))))
    assert np.allclose(d.values.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(d.values.var(axis=0), 1.0)


def _data(n=7, j=3, seed=0):
    return DataMatrix(np.random.default_rng(seed).standard_normal((n, j)))


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_init_rows_sum_to_one(seed, k):
    state = init_state(_data(), Hyperparameters(k_max=k), seed)
    assert np.all(np.abs(state.r.sum(axis=1) - 1.0) <= 1e-12)
    assert state.r.shape == (7, k)


def test_init_prior_values_and_selection():
    h = Hyperparameters(k_max=3, alpha0=0.2, beta0=0.01, a0=4.0, b0=[0.1, 0.2, 0.3], c_init=1.0)
    d = _data()
    state = init_state(d, h, 5)
    assert np.all(state.c == 1.0)
    assert np.all(state.alpha == 0.2) and np.all(state.beta == 0.01) and np.all(state.a == 4.0)
    assert np.array_equal(state.b, np.tile([0.1, 0.2, 0.3], (3, 1)))
    assert np.array_equal(state.m, np.tile(d.values.mean(axis=0), (3, 1)))
    assert np.array_equal(state.null.mu0, fit_null_params(d).mu0)


def test_init_is_deterministic_and_pure():
    d, h = _data(), Hyperparameters(k_max=4)
    first, second = init_state(d, h, 11), init_state(d, h, 11)
    assert np.array_equal(first.r, second.r)
    assert not np.array_equal(first.r, init_state(d, h, 12).r)


def test_init_temperature_from_schedule():
    state = init_state(_data(), Hyperparameters(), 0, TemperatureSchedule.geometric(4.0, 3))
    assert state.temperature == 4.0
    assert init_state(_data(), Hyperparameters(), 0).temperature == 1.0


def test_init_concentration_softens_rows():
    d, h = _data(n=200), Hyperparameters(k_max=3)
    flat = init_state(d, h, 0).r
    soft = init_state(d, h, 0, concentration=3000.0).r
    assert soft.std() < 0.02 < flat.std()


@pytest.mark.parametrize(
    "kwargs",
    [{"concentration": 0.0}, {"n_init": 0}, {"release_certainty": 1.5}, {"max_hold": -1}],
)
def test_init_options_validation(kwargs):
    with pytest.raises(InvalidHyperparameter):
        InitOptions(**kwargs)


def test_plain_init_options():
    plain = InitOptions.plain()
    assert (plain.concentration, plain.n_init, plain.release_certainty, plain.max_hold) == (1.0, 1, 0.0, 0)
