import sys

import numpy as np
import pytest

from comsebm.nnet import MlpField


def rel_err(a, b, floor=1e-6):
    """Elementwise |a - b| / max(|a|, |b|, floor)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def random_field(rng, hidden_dim=None, scale=1.0):
    h = hidden_dim or int(rng.integers(1, 33))
    return MlpField(w1=rng.normal(0, scale, (h, 2)), b1=rng.normal(0, scale, h),
                    w2=rng.normal(0, scale, h), b2=float(rng.normal()))


def field_from_flat(theta, hidden_dim):
    h = hidden_dim
    return MlpField(w1=theta[:2 * h].reshape(h, 2), b1=theta[2 * h:3 * h],
                    w2=theta[3 * h:4 * h], b2=float(theta[4 * h]))


def fd_input_grad(field, x, h=1e-5):
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros(2)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        g[j] = (field(x + e) - field(x - e)) / (2 * h)
    return g


def fd_param_grad(loss_of_field, field, h=1e-5):
    theta = field.flat()
    g = np.zeros_like(theta)
    for i in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        g[i] = (loss_of_field(field_from_flat(tp, field.hidden_dim))
                - loss_of_field(field_from_flat(tm, field.hidden_dim))) / (2 * h)
    return g


@pytest.fixture
def tiny_field():
    # hidden_dim=1, w1=[[1,0]], b1=[0], w2=[2], b2=0
    return MlpField(w1=[[1.0, 0.0]], b1=[0.0], w2=[2.0], b2=0.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
