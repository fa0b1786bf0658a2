"""Sample-quality statistics on the spiral benchmark."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .data import SpiralSpec, ground_truth_reward, spiral_centerline
from .errors import ConfigError, InputError

GRID_POINTS = 10_000
_REFINE_ITERS = 60
_CHUNK = 512


@dataclass
class EvalReport:
    n_samples: int
    mean_reward: float
    max_reward: float
    validity_rate: float
    mean_valid_reward: float
    diversity: float
    threshold: float

    def to_dict(self) -> dict:
        return asdict(self)


def distance_to_spiral(x, spec: SpiralSpec = SpiralSpec()):
    """Euclidean distance from ``x`` to the noise-free spiral centerline.

    A dense grid over t locates the nearest segment, then ternary search on
    the bracketing interval refines it. Accepts one point or an (n, 2) batch.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x.reshape(-1, 2)
    if not np.all(np.isfinite(pts)):
        raise InputError("non-finite point")
    c = spec.radius_coef
    grid = np.linspace(spec.t_min, spec.t_max, GRID_POINTS)
    dt = grid[1] - grid[0] if GRID_POINTS > 1 else 0.0
    centre = spiral_centerline(grid, c)
    out = np.empty(len(pts))
    for lo in range(0, len(pts), _CHUNK):
        p = pts[lo:lo + _CHUNK]
        d2 = ((centre[None, :, :] - p[:, None, :]) ** 2).sum(axis=-1)
        k = d2.argmin(axis=1)
        best = d2[np.arange(len(p)), k]
        a = np.maximum(grid[k] - dt, spec.t_min)
        b = np.minimum(grid[k] + dt, spec.t_max)
        for _ in range(_REFINE_ITERS):
            m1 = a + (b - a) / 3
            m2 = b - (b - a) / 3
            f1 = ((spiral_centerline(m1, c) - p) ** 2).sum(axis=-1)
            f2 = ((spiral_centerline(m2, c) - p) ** 2).sum(axis=-1)
            left = f1 < f2
            b = np.where(left, m2, b)
            a = np.where(left, a, m1)
        refined = ((spiral_centerline(0.5 * (a + b), c) - p) ** 2).sum(axis=-1)
        out[lo:lo + _CHUNK] = np.sqrt(np.minimum(best, refined))
    return float(out[0]) if single else out


def diversity(samples) -> float:
    """Mean pairwise Euclidean distance (0 for fewer than two samples)."""
    s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if len(s) < 2:
        return 0.0
    return float(pdist(s).mean())


def evaluate(samples, spec: SpiralSpec = SpiralSpec(), threshold: float = 0.1) -> EvalReport:
    s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if len(s) == 0:
        raise ConfigError("cannot evaluate an empty sample set")
    if not np.all(np.isfinite(s)):
        raise InputError("samples must be finite")
    reward = ground_truth_reward(s)
    valid = distance_to_spiral(s, spec) < threshold
    return EvalReport(
        n_samples=int(len(s)),
        mean_reward=float(reward.mean()),
        max_reward=float(reward.max()),
        validity_rate=float(valid.mean()),
        mean_valid_reward=float(reward[valid].mean()) if valid.any() else 0.0,
        diversity=diversity(s),
        threshold=float(threshold),
    )


def gradient_alignment(field, radius: float = 0.5, grid: int = 25,
                       low: float = -1.5, high: float = 2.0) -> float:
    """Mean cosine similarity between grad f and the direction to the origin.

    Taken over the points of a ``grid`` x ``grid`` lattice on [low, high]^2 that
    lie strictly within ``radius`` of the origin. Zero-length gradients count
    as similarity 0.
    """
    g = np.linspace(low, high, grid)
    xx, yy = np.meshgrid(g, g)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    r = np.linalg.norm(pts, axis=1)
    pts = pts[(r < radius) & (r > 0)]
    if len(pts) == 0:
        raise ConfigError("no grid points inside the disk")
    v = np.asarray(field.grad_input(pts))
    to_origin = -pts / np.linalg.norm(pts, axis=1, keepdims=True)
    vn = np.linalg.norm(v, axis=1)
    cos = np.where(vn > 0, (v * to_origin).sum(axis=1) / np.where(vn > 0, vn, 1.0), 0.0)
    return float(cos.mean())
