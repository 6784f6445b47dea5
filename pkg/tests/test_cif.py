import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwlse.cif import cif_measurement_update, cif_time_update, run_cif, wls_solve
from dwlse.models import (
    DegenerateError,
    SensorModel,
    StackedWlsProblem,
    StateEstimate,
    SystemModel,
    stack_wls,
)

from conftest import random_instance, rel_err


def scalar_prior(mean, info):
    return StateEstimate([mean], [[info]])


UNIT = SensorModel([[1.0]], [[1.0]])


def test_scalar_measurement_update():
    # info' = 1 + 1 = 2, mean' = (1*0 + 1*2) / 2 = 1
    post = cif_measurement_update(scalar_prior(0, 1), [UNIT], [[2.0]])
    assert post.mean[0] == pytest.approx(1.0)
    assert post.info[0, 0] == pytest.approx(2.0)


def test_no_sensors_returns_prior():
    prior = scalar_prior(3, 2)
    assert cif_measurement_update(prior, [], []) is prior


def test_measurement_agrees_with_prior():
    post = cif_measurement_update(scalar_prior(5, 4), [UNIT], [[5.0]])
    assert post.mean[0] == pytest.approx(5.0)
    assert post.info[0, 0] == pytest.approx(5.0)


def test_time_update_identity():
    post = StateEstimate([1.0, -2.0], [[2.0, 0.3], [0.3, 1.0]])
    pred = cif_time_update(post, SystemModel(np.eye(2), np.zeros((2, 2))))
    np.testing.assert_allclose(pred.mean, post.mean, rtol=0, atol=0)
    np.testing.assert_allclose(pred.info, post.info, rtol=1e-14)


def test_time_update_scalar():
    # P = 1/2; F P F + Q = 4 * 0.5 + 1 = 3
    pred = cif_time_update(scalar_prior(1, 2), SystemModel([[2.0]], [[1.0]]))
    assert pred.mean[0] == pytest.approx(2.0)
    assert pred.info[0, 0] == pytest.approx(1 / 3)


def test_time_update_constant_velocity_shift():
    sys = SystemModel.constant_velocity(1.0, np.eye(4))
    pred = cif_time_update(StateEstimate([0, 0, 1, 1], np.eye(4)), sys)
    np.testing.assert_array_equal(pred.mean, [1, 1, 1, 1])


def test_time_update_singular():
    with pytest.raises(DegenerateError):
        cif_time_update(scalar_prior(0, 1), SystemModel([[0.0]], [[0.0]]))


def test_wls_scalar():
    post = wls_solve(stack_wls(scalar_prior(0, 1), [UNIT], [[2.0]]))
    assert post.mean[0] == pytest.approx(1.0)
    assert post.info[0, 0] == pytest.approx(2.0)


def test_wls_singular_normal_matrix():
    problem = StackedWlsProblem([1.0, 2.0], [[1.0, 1.0], [1.0, 1.0]], np.eye(2))
    with pytest.raises(DegenerateError):
        wls_solve(problem)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 4), J=st.integers(1, 5))
def test_wls_equals_information_filter(seed, m, J):
    prior, sensors, ys = random_instance(np.random.default_rng(seed), m, J)
    a = wls_solve(stack_wls(prior, sensors, ys))
    b = cif_measurement_update(prior, sensors, ys)
    assert rel_err(a.mean, b.mean) <= 1e-9
    assert rel_err(a.info, b.info) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 4), J=st.integers(1, 5))
def test_information_never_decreases(seed, m, J):
    prior, sensors, ys = random_instance(np.random.default_rng(seed), m, J)
    post = cif_measurement_update(prior, sensors, ys)
    gain = post.info - prior.info
    assert np.linalg.eigvalsh(gain).min() >= -1e-10 * np.abs(post.info).max()


def test_weight_scaling():
    rng = np.random.default_rng(3)
    prior, sensors, ys = random_instance(rng, 3, 4)
    p = stack_wls(prior, sensors, ys)
    base = wls_solve(p)
    scaled = wls_solve(StackedWlsProblem(p.obs, p.design, 7.5 * p.weight, p.blocks))
    np.testing.assert_allclose(scaled.mean, base.mean, rtol=1e-10)
    np.testing.assert_allclose(scaled.info, 7.5 * base.info, rtol=1e-10)


def test_uninformative_prior_gives_least_squares():
    rng = np.random.default_rng(8)
    m = 3
    sensors = [SensorModel(rng.normal(size=(2, m)), np.diag(rng.uniform(0.5, 2, 2))) for _ in range(3)]
    ys = [rng.normal(size=2) for _ in sensors]
    post = cif_measurement_update(StateEstimate(np.zeros(m), 1e-12 * np.eye(m)), sensors, ys)
    # whitened ordinary least squares as the oracle
    H = np.vstack([s.H / np.sqrt(np.diag(s.R))[:, None] for s in sensors])
    y = np.concatenate([yy / np.sqrt(np.diag(s.R)) for s, yy in zip(sensors, ys)])
    expected = np.linalg.lstsq(H, y, rcond=None)[0]
    np.testing.assert_allclose(post.mean, expected, rtol=1e-8, atol=1e-9)


def test_wls_solution_is_optimal():
    rng = np.random.default_rng(21)
    prior, sensors, ys = random_instance(rng, 4, 5)
    p = stack_wls(prior, sensors, ys)
    x = wls_solve(p).mean
    best = p.cost(x)
    for _ in range(100):
        assert best <= p.cost(x + rng.normal(scale=10 ** rng.uniform(-4, 1), size=x.size))


def test_run_cif_sequence():
    sys = SystemModel([[1.0]], [[0.5]])
    out = run_cif(scalar_prior(0, 1), sys, [UNIT], [[[1.0]], [[2.0]]])
    first = cif_measurement_update(scalar_prior(0, 1), [UNIT], [[1.0]])
    second = cif_measurement_update(cif_time_update(first, sys), [UNIT], [[2.0]])
    np.testing.assert_array_equal(out[1].mean, second.mean)
    assert len(out) == 2
