"""2D spiral benchmark: reward oracle, dataset generator, prior, JSON IO."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, DatasetFormatError


class LabeledPoint(NamedTuple):
    x: tuple[float, float]
    y: float


@dataclass(frozen=True)
class SpiralSpec:
    n: int = 1000
    t_min: float = 2.0
    t_max: float = 12.0
    radius_coef: float = 0.15
    noise_std: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ConfigError(f"n must be a non-negative integer, got {self.n}")
        # t_min == t_max is allowed: a degenerate single-angle spiral
        if not self.t_min <= self.t_max:
            raise ConfigError("t_min must not exceed t_max")
        if self.radius_coef <= 0:
            raise ConfigError("radius_coef must be positive")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative")


@dataclass(frozen=True)
class PriorSpec:
    low: float = -1.5
    high: float = 2.0
    dim: int = 2
    kind: str = "uniform_box"

    def __post_init__(self):
        if self.kind != "uniform_box":
            raise ConfigError(f"unknown prior kind {self.kind!r}")
        if not self.low < self.high:
            raise ConfigError("prior requires low < high")


@dataclass
class Dataset:
    """Offline data: designs ``x`` of shape (n, 2) and rewards ``y`` of shape (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64).reshape(-1, 2)
        self.y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if self.x.shape[0] != self.y.shape[0]:
            raise ConfigError("x and y lengths differ")

    def __len__(self):
        return self.y.shape[0]

    def __iter__(self) -> Iterator[LabeledPoint]:
        for xi, yi in zip(self.x, self.y):
            yield LabeledPoint((float(xi[0]), float(xi[1])), float(yi))

    def __getitem__(self, idx):
        return Dataset(self.x[idx], self.y[idx])

    @classmethod
    def from_points(cls, points) -> "Dataset":
        points = list(points)
        return cls(np.array([p.x for p in points], dtype=np.float64).reshape(-1, 2),
                   np.array([p.y for p in points], dtype=np.float64))


def ground_truth_reward(x):
    """sum_i exp(-x_i^2); peaks at the origin with value 2."""
    x = np.asarray(x, dtype=np.float64)
    r = np.exp(-x * x).sum(axis=-1)
    return float(r) if x.ndim == 1 else r


def spiral_centerline(t, radius_coef: float = 0.15) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    r = radius_coef * t
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def spiral_generate(spec: SpiralSpec = SpiralSpec()) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    t = rng.uniform(spec.t_min, spec.t_max, size=spec.n)
    noise = rng.standard_normal((spec.n, 2)) * spec.noise_std
    x = spiral_centerline(t, spec.radius_coef).reshape(-1, 2) + noise
    return Dataset(x, ground_truth_reward(x))


def prior_sample(spec: PriorSpec, n: int, seed) -> np.ndarray:
    """(n, dim) i.i.d. uniform draws on [low, high]^dim."""
    rng = np.random.default_rng(seed)
    return rng.uniform(spec.low, spec.high, size=(n, spec.dim))


def dataset_to_json(ds: Dataset) -> str:
    records = [{"x": [float(a), float(b)], "y": float(v)} for (a, b), v in zip(ds.x, ds.y)]
    return json.dumps(records, indent=1)


def dataset_from_json(text: str) -> Dataset:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise DatasetFormatError("top level must be a JSON array")
    xs, ys = [], []
    for i, rec in enumerate(raw):
        if not isinstance(rec, dict) or set(rec) != {"x", "y"}:
            raise DatasetFormatError("expected an object with keys 'x' and 'y'", i)
        x, y = rec["x"], rec["y"]
        if not isinstance(x, list) or len(x) != 2:
            raise DatasetFormatError("'x' must be a 2-element array", i)
        vals = list(x) + [y]
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals) \
                or not all(math.isfinite(v) for v in vals):
            raise DatasetFormatError("entries must be finite numbers", i)
        xs.append([float(x[0]), float(x[1])])
        ys.append(float(y))
    return Dataset(np.array(xs, dtype=np.float64).reshape(-1, 2), np.array(ys, dtype=np.float64))


def write_dataset(ds: Dataset, path) -> None:
    Path(path).write_text(dataset_to_json(ds) + "\n")


def read_dataset(path) -> Dataset:
    return dataset_from_json(Path(path).read_text())
