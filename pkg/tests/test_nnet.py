import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from comsebm.errors import ConfigError, InputError
from comsebm.nnet import (MlpField, OptimizerState, ParamGrad, energy, field_from_dict,
                          field_to_dict, forward, grad_input, grad_params, mlp_init,
                          optimizer_step)

from conftest import fd_input_grad, fd_param_grad, random_field, rel_err


def test_init_param_count():
    f = mlp_init(2, 256, seed=0)
    assert f.n_params == 2 * 256 + 256 + 256 + 1 == 1025


def test_init_deterministic():
    a, b = mlp_init(2, 256, seed=0), mlp_init(2, 256, seed=0)
    assert a.flat().tobytes() == b.flat().tobytes()


def test_init_glorot_bound_and_zero_bias():
    f = mlp_init(2, 4, seed=7)
    assert np.all(np.abs(f.w1) <= 1.0)
    assert np.all(f.b1 == 0) and f.b2 == 0


@pytest.mark.parametrize("dims", [(0, 4), (2, 0), (-1, 3), (2.5, 3)])
def test_init_rejects_bad_dims(dims):
    with pytest.raises(ConfigError):
        mlp_init(*dims)


def test_inconsistent_shapes_rejected():
    with pytest.raises(ConfigError):
        MlpField(w1=np.zeros((3, 2)), b1=np.zeros(2), w2=np.zeros(3), b2=0.0)


def test_constant_network():
    f = MlpField(w1=np.zeros((5, 2)), b1=np.zeros(5), w2=np.zeros(5), b2=3.5)
    assert forward(f, [0.3, -7.0]) == 3.5
    assert np.all(forward(f, np.random.default_rng(0).normal(size=(10, 2))) == 3.5)


def test_tiny_network_values(tiny_field):
    assert forward(tiny_field, [0.0, 9.0]) == 0.0
    assert forward(tiny_field, [1.0, 0.0]) == pytest.approx(2 * math.tanh(1.0), rel=1e-15)
    assert forward(tiny_field, [1.0, 0.0]) == pytest.approx(1.52318, abs=1e-5)


def test_tiny_network_input_grad(tiny_field):
    np.testing.assert_array_equal(grad_input(tiny_field, [0.0, 0.0]), [2.0, 0.0])


def test_zero_field_grad_is_zero():
    f = MlpField(w1=np.zeros((4, 2)), b1=np.zeros(4), w2=np.zeros(4), b2=1.0)
    np.testing.assert_array_equal(grad_input(f, [1.3, -0.2]), [0.0, 0.0])


def test_nonfinite_input_rejected(tiny_field):
    with pytest.raises(InputError):
        forward(tiny_field, [np.nan, 0.0])
    with pytest.raises(InputError):
        grad_input(tiny_field, [np.inf, 0.0])


def test_energy_is_exact_negation():
    f = mlp_init(2, 16, seed=3)
    x = np.random.default_rng(1).normal(size=(50, 2))
    assert (energy(f, x) == -forward(f, x)).all()
    assert f.energy(x[0]) == -f(x[0])


def test_batch_rows_match_single_points():
    f = mlp_init(2, 64, seed=2)
    x = np.random.default_rng(5).normal(size=(37, 2))
    batch = grad_input(f, x)
    for i in (0, 17, 36):
        np.testing.assert_allclose(grad_input(f, x[i]), batch[i], rtol=1e-13, atol=1e-15)
        assert forward(f, x[i]) == pytest.approx(forward(f, x)[i], rel=1e-13, abs=1e-15)


def test_pure_and_deterministic():
    f = mlp_init(2, 64, seed=2)
    x = np.random.default_rng(8).normal(size=(20, 2))
    assert forward(f, x).tobytes() == forward(f, x).tobytes()
    assert grad_input(f, x).tobytes() == grad_input(f, x).tobytes()


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), scale=st.floats(0.1, 2.0))
def test_grad_input_matches_finite_differences(seed, scale):
    rng = np.random.default_rng(seed)
    f = random_field(rng, scale=scale)
    x = rng.uniform(-2, 2, size=2)
    assert rel_err(grad_input(f, x), fd_input_grad(f, x)).max() < 1e-4


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), upstream=st.floats(-3, 3))
def test_grad_params_matches_finite_differences(seed, upstream):
    rng = np.random.default_rng(seed)
    f = random_field(rng, hidden_dim=int(rng.integers(1, 9)))
    x = rng.uniform(-2, 2, size=2)
    g = grad_params(f, x, upstream).flat()
    g_fd = fd_param_grad(lambda ff: upstream * ff(x), f)
    assert rel_err(g, g_fd).max() < 1e-4


def test_grad_params_zero_upstream():
    f = mlp_init(2, 8, seed=0)
    g = grad_params(f, [0.4, 0.1], 0.0)
    assert not g.flat().any()


def test_grad_params_linear_in_upstream():
    f = random_field(np.random.default_rng(11), hidden_dim=12)
    x = [0.7, -0.3]
    ga, gb, gab = grad_params(f, x, 1.25), grad_params(f, x, -0.5), grad_params(f, x, 0.75)
    np.testing.assert_allclose((ga + gb).flat(), gab.flat(), rtol=1e-12, atol=1e-15)


def test_grad_params_batch_is_sum():
    f = random_field(np.random.default_rng(4), hidden_dim=6)
    x = np.random.default_rng(6).normal(size=(4, 2))
    u = np.array([0.5, -1.0, 2.0, 0.1])
    total = ParamGrad.zeros_like(f)
    for xi, ui in zip(x, u):
        total = total + grad_params(f, xi, ui)
    np.testing.assert_allclose(grad_params(f, x, u).flat(), total.flat(), rtol=1e-12, atol=1e-14)


def test_optimizer_zero_grad_keeps_params():
    f = mlp_init(2, 8, seed=1)
    f2, st_ = optimizer_step(f, OptimizerState.fresh(f), ParamGrad.zeros_like(f))
    assert f2.flat().tobytes() == f.flat().tobytes()
    assert st_.step == 1


def test_optimizer_step_counter():
    f = mlp_init(2, 4, seed=1)
    state = OptimizerState.fresh(f)
    g = grad_params(f, [0.1, 0.2], 1.0)
    for _ in range(7):
        f, state = optimizer_step(f, state, g)
    assert state.step == 7


def test_optimizer_quadratic_scalar():
    # L(theta) = theta^2 on b2 only; a hand-rolled scalar Adam is the oracle
    f = MlpField(w1=np.zeros((1, 2)), b1=np.zeros(1), w2=np.zeros(1), b2=1.0)
    state = OptimizerState.fresh(f, learning_rate=0.1)
    th, m, v = 1.0, 0.0, 0.0
    for t in range(1, 201):
        g = ParamGrad.zeros_like(f)
        g.b2 = 2 * f.b2
        f, state = optimizer_step(f, state, g)
        gs = 2 * th
        m = 0.9 * m + 0.1 * gs
        v = 0.999 * v + 0.001 * gs * gs
        th -= 0.1 * (m / (1 - 0.9 ** t)) / (math.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
    assert abs(f.b2) < 1e-2
    assert f.b2 == pytest.approx(th, rel=1e-9, abs=1e-12)
    assert not f.w1.any() and not f.w2.any()


def test_optimizer_shape_mismatch():
    f = mlp_init(2, 4, seed=0)
    with pytest.raises(RuntimeError):
        optimizer_step(f, OptimizerState.fresh(f), ParamGrad.zeros_like(mlp_init(2, 5, 0)))


def test_dict_round_trip_exact():
    f = mlp_init(2, 32, seed=9).replace(b2=0.1 + 0.2)
    g = field_from_dict(field_to_dict(f))
    assert g.flat().tobytes() == f.flat().tobytes()


def test_field_is_immutable():
    f = mlp_init(2, 4, seed=0)
    with pytest.raises(ValueError):
        f.w1[0, 0] = 1.0
