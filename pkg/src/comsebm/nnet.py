"""One-hidden-layer tanh MLP used as a scalar field f(x), with hand-derived
gradients w.r.t. inputs and parameters, and an Adam optimizer.

The same network plays two roles: the conservative model f_theta (whose
negation is the energy) and the independent reward oracle f_omega.

Every function accepts either a single point of shape (input_dim,) or a batch
of shape (n, input_dim). Batches go through BLAS, so a row's value can differ
in the last bit depending on the batch it is evaluated in; for a fixed batch
the result is deterministic.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError

ACTIVATIONS = ("tanh",)


@dataclass(frozen=True)
class MlpField:
    """f(x) = w2 . tanh(w1 x + b1) + b2.

    Attributes
    ----------
    w1 : (hidden_dim, input_dim) array
    b1 : (hidden_dim,) array
    w2 : (hidden_dim,) array
    b2 : float
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    activation: str = "tanh"

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        b1 = np.asarray(self.b1, dtype=np.float64).reshape(-1)
        w2 = np.asarray(self.w2, dtype=np.float64).reshape(-1)
        if w1.ndim != 2:
            raise ConfigError(f"w1 must be 2-D, got shape {w1.shape}")
        if b1.shape[0] != w1.shape[0] or w2.shape[0] != w1.shape[0]:
            raise ConfigError(
                f"inconsistent shapes: w1 {w1.shape}, b1 {b1.shape}, w2 {w2.shape}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unsupported activation {self.activation!r}")
        for name, arr in (("w1", w1), ("b1", b1), ("w2", w2)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"non-finite entries in {name}")
        if not np.isfinite(self.b2):
            raise InputError("non-finite b2")
        for arr in (w1, b1, w2):
            arr.setflags(write=False)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_params(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + 1

    def __call__(self, x):
        return forward(self, x)

    def energy(self, x):
        return energy(self, x)

    def grad_input(self, x):
        return grad_input(self, x)

    def grad_params(self, x, upstream):
        return grad_params(self, x, upstream)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    def replace(self, **changes) -> "MlpField":
        return dataclasses.replace(self, **changes)


@dataclass
class ParamGrad:
    """Gradient of a scalar loss w.r.t. every trainable entry of an MlpField."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    @classmethod
    def zeros_like(cls, field: MlpField) -> "ParamGrad":
        return cls(np.zeros_like(field.w1), np.zeros_like(field.b1),
                   np.zeros_like(field.w2), 0.0)

    def __add__(self, other: "ParamGrad") -> "ParamGrad":
        return ParamGrad(self.w1 + other.w1, self.b1 + other.b1,
                         self.w2 + other.w2, self.b2 + other.b2)

    def scale(self, c: float) -> "ParamGrad":
        return ParamGrad(self.w1 * c, self.b1 * c, self.w2 * c, self.b2 * c)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.w1 ** 2) + np.sum(self.b1 ** 2)
                             + np.sum(self.w2 ** 2) + self.b2 ** 2))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flat())))


def mlp_init(input_dim: int = 2, hidden_dim: int = 256, seed: int = 0) -> MlpField:
    """Glorot-uniform weights and zero biases, deterministic in ``seed``."""
    if int(input_dim) != input_dim or int(hidden_dim) != hidden_dim \
            or input_dim < 1 or hidden_dim < 1:
        raise ConfigError(
            f"dims must be positive integers, got input_dim={input_dim}, "
            f"hidden_dim={hidden_dim}")
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (input_dim + hidden_dim))
    lim2 = np.sqrt(6.0 / (hidden_dim + 1))
    w1 = rng.uniform(-lim1, lim1, size=(hidden_dim, input_dim))
    w2 = rng.uniform(-lim2, lim2, size=hidden_dim)
    return MlpField(w1=w1, b1=np.zeros(hidden_dim), w2=w2, b2=0.0)


def _as_points(field: MlpField, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2 or pts.shape[1] != field.input_dim:
        raise InputError(
            f"expected points of dimension {field.input_dim}, got shape {x.shape}")
    if not np.all(np.isfinite(pts)):
        raise InputError("non-finite input point")
    return pts, single


def _hidden(field: MlpField, pts: np.ndarray) -> np.ndarray:
    pre = pts @ field.w1.T
    pre += field.b1
    return np.tanh(pre, out=pre)


def forward(field: MlpField, x):
    """Evaluate f(x); returns a float for one point or an (n,) array."""
    pts, single = _as_points(field, x)
    a = _hidden(field, pts)
    out = a @ field.w2 + field.b2
    return float(out[0]) if single else out


def energy(field: MlpField, x):
    """E(x) = -f(x)."""
    return -forward(field, x)


def grad_input(field: MlpField, x) -> np.ndarray:
    """Analytic gradient of f w.r.t. x, same shape as ``x``."""
    pts, single = _as_points(field, x)
    d = _hidden(field, pts)
    d *= d
    np.subtract(1.0, d, out=d)
    d *= field.w2
    g = d @ field.w1
    return g[0] if single else g


def grad_params(field: MlpField, x, upstream) -> ParamGrad:
    """upstream * d f(x) / d theta.

    For a batch, ``upstream`` is an (n,) array of per-point coefficients and the
    result is the sum over points, i.e. the gradient of sum_i u_i f(x_i).
    """
    pts, single = _as_points(field, x)
    u = np.atleast_1d(np.asarray(upstream, dtype=np.float64))
    if single and u.shape != (1,):
        raise InputError("upstream must be a scalar for a single point")
    if u.shape != (pts.shape[0],):
        raise InputError(f"upstream shape {u.shape} does not match {pts.shape[0]} points")
    if not np.all(np.isfinite(u)):
        raise InputError("non-finite upstream gradient")
    a = _hidden(field, pts)
    g_w2 = u @ a
    delta = (u[:, None] * field.w2) * (1.0 - a * a)
    g_b1 = delta.sum(axis=0)
    g_w1 = delta.T @ pts
    return ParamGrad(w1=g_w1, b1=g_b1, w2=g_w2, b2=float(u.sum()))


@dataclass
class OptimizerState:
    """Adam state; moments mirror the field's parameter shapes."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: ParamGrad | None = None
    v: ParamGrad | None = None
    step: int = 0
    algorithm: str = "adam"

    @classmethod
    def fresh(cls, field: MlpField, **hyper) -> "OptimizerState":
        return cls(m=ParamGrad.zeros_like(field), v=ParamGrad.zeros_like(field), **hyper)


def optimizer_step(field: MlpField, state: OptimizerState,
                   grad: ParamGrad) -> tuple[MlpField, OptimizerState]:
    """One Adam update that decreases the loss whose gradient is ``grad``.

    Returns new field and state; the inputs are left untouched.
    """
    if state.m is None:
        state = dataclasses.replace(state, m=ParamGrad.zeros_like(field),
                                    v=ParamGrad.zeros_like(field))
    if grad.w1.shape != field.w1.shape or grad.b1.shape != field.b1.shape \
            or grad.w2.shape != field.w2.shape or state.m.w1.shape != field.w1.shape:
        raise RuntimeError("parameter / gradient shape mismatch")

    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t

    new = {}
    m_new = {}
    v_new = {}
    for name in ("w1", "b1", "w2", "b2"):
        g = np.asarray(getattr(grad, name), dtype=np.float64)
        m = b1 * np.asarray(getattr(state.m, name)) + (1.0 - b1) * g
        v = b2 * np.asarray(getattr(state.v, name)) + (1.0 - b2) * (g * g)
        p = getattr(field, name) - state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        new[name], m_new[name], v_new[name] = p, m, v

    new_field = field.replace(w1=new["w1"], b1=new["b1"], w2=new["w2"], b2=float(new["b2"]))
    new_state = dataclasses.replace(
        state,
        m=ParamGrad(m_new["w1"], m_new["b1"], m_new["w2"], float(m_new["b2"])),
        v=ParamGrad(v_new["w1"], v_new["b1"], v_new["w2"], float(v_new["b2"])),
        step=t,
    )
    return new_field, new_state


def field_to_dict(field: MlpField) -> dict:
    return {
        "input_dim": field.input_dim,
        "hidden_dim": field.hidden_dim,
        "activation": field.activation,
        "w1": field.w1.tolist(),
        "b1": field.b1.tolist(),
        "w2": field.w2.tolist(),
        "b2": field.b2,
    }


def field_from_dict(d: dict) -> MlpField:
    try:
        field = MlpField(w1=np.array(d["w1"], dtype=np.float64),
                         b1=np.array(d["b1"], dtype=np.float64),
                         w2=np.array(d["w2"], dtype=np.float64),
                         b2=float(d["b2"]),
                         activation=d.get("activation", "tanh"))
    except KeyError as exc:
        raise InputError(f"checkpoint missing key {exc}") from None
    if field.input_dim != d.get("input_dim", field.input_dim) \
            or field.hidden_dim != d.get("hidden_dim", field.hidden_dim):
        raise InputError("checkpoint dims disagree with weight shapes")
    return field
