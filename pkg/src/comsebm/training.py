"""Contrastive-divergence training of conservative objective models.

The minimised per-batch loss is

    mean_i 1/2 (y_i - f(x_i))^2  +  alpha * (mean_j f(x'_j) - mean_i f(x_i))

where x'_j are negatives obtained by running k sampler steps from the batch
inputs. Negatives are constants w.r.t. the parameters (no gradient flows
through the chain). With alpha = 0 this is plain regression, which is how
the independent reward oracle is trained.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from .data import Dataset
from .errors import ConfigError, SamplerDiverged
from .nnet import MlpField, OptimizerState, ParamGrad, forward, grad_params, mlp_init, optimizer_step
from .sampling import geomspace, gradient_ascent_chain, langevin_chain

log = logging.getLogger(__name__)

VARIANTS = ("original", "stochastic", "oracle_only")


@dataclass
class TrainConfig:
    variant: str = "stochastic"
    alpha: float = 0.0
    cd_steps: int = 100
    neg_schedule_start: float = 0.02
    neg_schedule_end: float = 0.001
    neg_eps: float = 0.01
    epochs: int = 500
    batch_size: int = 64
    hidden_dim: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float | None = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if self.variant == "oracle_only" and self.alpha != 0:
            raise ConfigError("oracle_only training requires alpha = 0")
        if int(self.cd_steps) != self.cd_steps or self.cd_steps < 0:
            raise ConfigError("cd_steps must be a non-negative integer")
        if self.variant != "oracle_only" and self.alpha > 0 and self.cd_steps < 1:
            raise ConfigError("a regularised variant needs cd_steps >= 1")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if self.neg_eps <= 0:
            raise ConfigError("neg_eps must be positive")

    def neg_schedule(self) -> np.ndarray:
        if self.cd_steps == 0:
            return np.empty(0)
        return geomspace(self.neg_schedule_start, self.neg_schedule_end, self.cd_steps)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LossBreakdown:
    mse_term: float
    reg_term: float
    total: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Checkpoint:
    field: MlpField
    config: TrainConfig
    history: list[LossBreakdown] = dc_field(default_factory=list)
    steps_trained: int = 0

    @property
    def meta(self) -> dict:
        return {"variant": self.config.variant, "alpha": self.config.alpha,
                "seed": self.config.seed, "steps_trained": self.steps_trained,
                "config": self.config.to_dict()}


def com_loss_and_grad(field: MlpField, batch: Dataset, negatives, alpha: float
                      ) -> tuple[LossBreakdown, ParamGrad]:
    """Loss and its parameter gradient for one batch; negatives held fixed."""
    n = len(batch)
    if n == 0:
        raise ConfigError("empty batch")
    pred = forward(field, batch.x)
    resid = pred - batch.y
    mse = 0.5 * float(np.mean(resid * resid))
    upstream = resid / n

    if alpha > 0:
        neg = np.asarray(negatives, dtype=np.float64).reshape(-1, 2)
        if neg.shape[0] == 0:
            raise ConfigError("alpha > 0 requires negatives")
        neg_pred = forward(field, neg)
        reg = float(np.mean(neg_pred) - np.mean(pred))
        upstream = upstream - alpha / n
        grad = grad_params(field, batch.x, upstream) + \
            grad_params(field, neg, np.full(neg.shape[0], alpha / neg.shape[0]))
    else:
        if negatives is not None and len(negatives) > 0:
            neg_pred = forward(field, np.asarray(negatives, dtype=np.float64).reshape(-1, 2))
            reg = float(np.mean(neg_pred) - np.mean(pred))
        else:
            reg = 0.0
        grad = grad_params(field, batch.x, upstream)
    return LossBreakdown(mse, reg, mse + alpha * reg), grad


def make_negatives(field: MlpField, batch_x, config: TrainConfig, step: int = 0) -> np.ndarray:
    """k sampler steps started at the batch inputs (contrastive divergence).

    The chain noise for the ``step``-th optimiser update is drawn from a stream
    seeded by (config.seed, step), so training is reproducible.
    """
    if config.variant not in ("original", "stochastic"):
        raise ConfigError(f"variant {config.variant!r} does not use negatives")
    x = np.array(batch_x, dtype=np.float64).reshape(-1, 2)
    if config.cd_steps == 0:
        return x
    if config.variant == "original":
        return gradient_ascent_chain(field, x, config.neg_eps, config.cd_steps)
    rng = np.random.default_rng([int(config.seed), 1, int(step)])
    return langevin_chain(field, x, config.neg_schedule(), rng)


def _clip(grad: ParamGrad, max_norm: float | None) -> ParamGrad:
    if max_norm is None:
        return grad
    norm = grad.norm()
    if norm > max_norm:
        log.info("gradient norm %.3g clipped to %.3g", norm, max_norm)
        return grad.scale(max_norm / norm)
    return grad


def train_com(config: TrainConfig, dataset: Dataset, callback=None) -> Checkpoint:
    """Train a fresh field on ``dataset``; deterministic given ``config.seed``.

    ``callback(epoch, LossBreakdown)`` is called after each epoch if given.
    """
    n = len(dataset)
    if n == 0:
        raise ConfigError("cannot train on an empty dataset")
    field = mlp_init(2, config.hidden_dim, config.seed)
    state = OptimizerState.fresh(field, learning_rate=config.learning_rate, beta1=config.beta1,
                                 beta2=config.beta2, eps=config.adam_eps)
    shuffle_rng = np.random.default_rng([int(config.seed), 0])
    use_negatives = config.variant != "oracle_only" and config.alpha > 0
    history = []

    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n)
        sums = np.zeros(2)
        for b, lo in enumerate(range(0, n, config.batch_size)):
            batch = dataset[order[lo:lo + config.batch_size]]
            try:
                neg = make_negatives(field, batch.x, config, state.step) if use_negatives else None
            except SamplerDiverged as exc:
                raise SamplerDiverged(exc.step, exc.chain,
                                      f"negatives for epoch {epoch}, batch {b}") from None
            loss, grad = com_loss_and_grad(field, batch, neg, config.alpha)
            if not grad.is_finite() or not np.isfinite(loss.total):
                raise SamplerDiverged(state.step, None, f"training epoch {epoch}, batch {b}")
            field, state = optimizer_step(field, state, _clip(grad, config.clip_norm))
            w = len(batch) / n
            sums += w * np.array([loss.mse_term, loss.reg_term])
        mse, reg = float(sums[0]), float(sums[1])
        rec = LossBreakdown(mse, reg, mse + config.alpha * reg)
        history.append(rec)
        if callback is not None:
            callback(epoch, rec)
        log.debug("epoch %d mse=%.5g reg=%.5g total=%.5g", epoch, mse, reg, rec.total)

    return Checkpoint(field=field, config=config, history=history, steps_trained=state.step)


def train_oracle(config: TrainConfig, dataset: Dataset, callback=None) -> Checkpoint:
    """Plain regression of the independent reward oracle.

    Variant and alpha in ``config`` are overridden (oracle_only, 0), so the
    result never depends on them.
    """
    cfg = TrainConfig(**{**config.to_dict(), "variant": "oracle_only", "alpha": 0.0})
    return train_com(cfg, dataset, callback)
