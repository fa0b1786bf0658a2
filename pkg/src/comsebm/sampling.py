"""Chains that move points along the gradient of a scalar field.

Three samplers are provided:

* ``gradient_ascent_chain`` -- noiseless x <- x + eps * grad f(x); converges to modes.
* ``langevin_chain`` -- x <- x + eps_t^2/2 * grad f(x) + eps_t * z, z ~ N(0, I).
* ``tilted_langevin_chain`` -- Langevin on f_energy + w * f_oracle.

A "field" here is anything with a ``grad_input(x)`` method accepting an
(n, 2) batch, e.g. :class:`comsebm.nnet.MlpField` or :class:`QuadraticField`.
All chains run vectorised over a batch of starting points.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .data import PriorSpec
from .errors import ConfigError, SamplerDiverged

log = logging.getLogger(__name__)

SAMPLER_KINDS = ("gradient_ascent", "langevin", "tilted_langevin")

# Per-chain Gaussian draws are pulled in fixed-size blocks. The block size is
# part of the reproducibility contract: changing it changes sampled values.
NOISE_BLOCK = 256
# sample_batch vectorises over fixed blocks of chains; threads take whole blocks,
# so the worker count never changes how a chain's arithmetic is batched.
CHAIN_BLOCK = 256


def geomspace(start: float, end: float, steps: int) -> np.ndarray:
    """Geometric sequence from ``start`` to ``end`` (both included exactly)."""
    if not (start > 0 and end > 0):
        raise ConfigError("geometric schedule endpoints must be positive")
    if int(steps) != steps or steps < 1:
        raise ConfigError(f"steps must be an integer >= 1, got {steps}")
    if steps == 1:
        if start != end:
            raise ConfigError("a 1-step schedule requires start == end")
        return np.array([float(start)])
    s = np.geomspace(start, end, int(steps))
    s[0], s[-1] = start, end
    return s


@dataclass(frozen=True)
class GeometricSchedule:
    start: float
    end: float
    steps: int

    def __post_init__(self):
        geomspace(self.start, self.end, self.steps)  # validates

    @property
    def values(self) -> np.ndarray:
        return geomspace(self.start, self.end, self.steps)

    def __len__(self):
        return self.steps

    def __array__(self, dtype=None, copy=None):
        v = self.values
        return v if dtype is None else v.astype(dtype)


@dataclass(frozen=True)
class QuadraticField:
    """Analytic test field f(x) = -scale * ||x - center||^2."""

    center: tuple = (0.0, 0.0)
    scale: float = 1.0

    def __call__(self, x):
        d = np.asarray(x, dtype=np.float64) - np.asarray(self.center)
        return -self.scale * (d * d).sum(axis=-1)

    def grad_input(self, x):
        return -2.0 * self.scale * (np.asarray(x, dtype=np.float64) - np.asarray(self.center))


class _Noise:
    """Standard normal draws, either one shared stream or one stream per chain."""

    def __init__(self, rng, n_chains: int, n_steps: int):
        self.n = n_chains
        self.remaining = n_steps
        if isinstance(rng, np.random.Generator):
            self.shared, self.gens = rng, None
        else:
            self.shared, self.gens = None, list(rng)
            if len(self.gens) != n_chains:
                raise ConfigError(f"{len(self.gens)} rng streams for {n_chains} chains")
        self.buf = None
        self.pos = 0

    def _refill(self):
        b = min(NOISE_BLOCK, self.remaining)
        if self.shared is not None:
            self.buf = self.shared.standard_normal((b, self.n, 2))
        else:
            blk = np.empty((b, self.n, 2))
            for i, g in enumerate(self.gens):
                blk[:, i, :] = g.standard_normal((b, 2))
            self.buf = blk
        self.remaining -= b
        self.pos = 0

    def next(self) -> np.ndarray:
        if self.buf is None or self.pos == self.buf.shape[0]:
            self._refill()
        z = self.buf[self.pos]
        self.pos += 1
        return z


def _as_batch(x0):
    x = np.array(x0, dtype=np.float64)
    single = x.ndim == 1
    return (x[None, :] if single else x), single


def _check(x, step, where):
    if not np.isfinite(x).all():
        bad = np.flatnonzero(~np.isfinite(x).all(axis=1))
        raise SamplerDiverged(step, int(bad[0]), where)


def _langevin(drift: Callable[[np.ndarray], np.ndarray], x0, schedule, rng, where):
    x, single = _as_batch(x0)
    eps = np.asarray(schedule, dtype=np.float64).reshape(-1)
    if np.any(eps < 0) or not np.all(np.isfinite(eps)):
        raise ConfigError("schedule entries must be finite and non-negative")
    if eps.size == 0:
        return x[0] if single else x
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    if single and isinstance(rng, np.random.Generator):
        rng = [rng]
    noise = _Noise(rng, x.shape[0], eps.size)
    with np.errstate(over="ignore", invalid="ignore"):
        for t, e in enumerate(eps):
            x = x + (0.5 * e * e) * drift(x) + e * noise.next()
            _check(x, t + 1, where)
    return x[0] if single else x


def gradient_ascent_chain(field, x0, eps: float = 0.01, steps: int = 100):
    """Noiseless ascent x_{t+1} = x_t + eps * grad f(x_t); returns x_steps."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if int(steps) != steps or steps < 0:
        raise ConfigError("steps must be a non-negative integer")
    x, single = _as_batch(x0)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(int(steps)):
            x = x + eps * field.grad_input(x)
            _check(x, t + 1, "gradient ascent")
    return x[0] if single else x


def langevin_chain(field, x0, schedule, rng):
    """Langevin iterates with noise scale ``schedule[t]`` at step t.

    ``rng`` is a Generator (shared by all chains) or a sequence with one
    Generator per chain; a single starting point with a Generator uses it as
    that chain's own stream.
    """
    return _langevin(field.grad_input, x0, schedule, rng, "langevin")


def tilted_langevin_chain(energy_field, oracle_field, w: float, x0, schedule, rng):
    """Langevin on the reward-tilted density p(x) exp(w f_oracle(x)).

    The tilt's normaliser is constant in x and never needed.
    """
    if w < 0:
        raise ConfigError("tilt weight w must be non-negative")
    if oracle_field is None:
        raise ConfigError("tilted sampling requires an oracle field")

    def drift(x):
        return w * oracle_field.grad_input(x) + energy_field.grad_input(x)

    return _langevin(drift, x0, schedule, rng, "tilted langevin")


@dataclass
class SamplerSpec:
    kind: str = "langevin"
    steps: int = 50_000
    schedule: GeometricSchedule | None = None
    fixed_eps: float = 0.01
    tilt_weight: float = 0.0
    prior: PriorSpec | str = dc_field(default_factory=PriorSpec)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ConfigError(f"unknown sampler kind {self.kind!r}; choose from {SAMPLER_KINDS}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ConfigError("steps must be a non-negative integer")
        if self.schedule is None and self.kind != "gradient_ascent" and self.steps > 0:
            self.schedule = GeometricSchedule(0.1, 1e-5, self.steps)
        if self.schedule is not None and self.kind != "gradient_ascent" \
                and self.schedule.steps != self.steps:
            raise ConfigError("schedule length must equal the number of steps")
        if self.tilt_weight < 0:
            raise ConfigError("tilt weight must be non-negative")
        if isinstance(self.prior, str) and self.prior != "init_from_data":
            raise ConfigError(f"prior must be a PriorSpec or 'init_from_data', got {self.prior!r}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "steps": self.steps, "seed": self.seed}
        if self.kind == "gradient_ascent":
            d["fixed_eps"] = self.fixed_eps
        elif self.schedule is not None:
            d["schedule"] = {"start": self.schedule.start, "end": self.schedule.end,
                             "steps": self.schedule.steps}
        if self.kind == "tilted_langevin":
            d["tilt_weight"] = self.tilt_weight
        if isinstance(self.prior, PriorSpec):
            d["prior"] = {"kind": self.prior.kind, "low": self.prior.low,
                          "high": self.prior.high, "dim": self.prior.dim}
        else:
            d["prior"] = self.prior
        return d


def chain_rng(seed: int, index: int) -> np.random.Generator:
    """The independent stream owned by chain ``index``."""
    return np.random.default_rng([int(seed), int(index)])


def sample_batch(spec: SamplerSpec, energy_field, n: int, oracle_field=None,
                 init_points=None, workers: int = 1) -> np.ndarray:
    """Draw ``n`` samples, one chain per sample.

    Chain i takes its starting point and all of its noise from
    ``chain_rng(spec.seed, i)``. Output is bitwise identical for any ``workers``;
    changing ``n`` only perturbs other chains at the level of BLAS rounding.
    Returns an (n, 2) array.
    """
    if int(n) != n or n < 0:
        raise ConfigError("n must be a non-negative integer")
    if spec.kind == "tilted_langevin" and oracle_field is None:
        raise ConfigError("tilted_langevin requires an oracle field")
    if n == 0:
        return np.empty((0, 2))

    gens = [chain_rng(spec.seed, i) for i in range(n)]
    if spec.prior == "init_from_data":
        if init_points is None or len(init_points) == 0:
            raise ConfigError("init_from_data needs non-empty init_points")
        pts = np.asarray(init_points, dtype=np.float64)
        x0 = np.array([pts[g.integers(len(pts))] for g in gens])
    else:
        pr = spec.prior
        x0 = np.array([g.uniform(pr.low, pr.high, size=pr.dim) for g in gens])

    def run(lo, hi):
        try:
            if spec.kind == "gradient_ascent":
                return gradient_ascent_chain(energy_field, x0[lo:hi], spec.fixed_eps, spec.steps)
            sched = spec.schedule.values if spec.steps > 0 else np.empty(0)
            if spec.kind == "langevin":
                return langevin_chain(energy_field, x0[lo:hi], sched, gens[lo:hi])
            return tilted_langevin_chain(energy_field, oracle_field, spec.tilt_weight,
                                         x0[lo:hi], sched, gens[lo:hi])
        except SamplerDiverged as exc:
            chain = lo + (exc.chain or 0)
            raise SamplerDiverged(exc.step, chain, spec.kind) from None

    blocks = [(lo, min(lo + CHAIN_BLOCK, n)) for lo in range(0, n, CHAIN_BLOCK)]
    workers = max(1, min(int(workers), len(blocks)))
    if workers == 1:
        parts = [run(lo, hi) for lo, hi in blocks]
    else:
        log.debug("sampling %d chains in %d blocks on %d threads", n, len(blocks), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: run(*b), blocks))
    return np.concatenate(parts, axis=0)
