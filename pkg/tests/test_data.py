import json
import math

import numpy as np
import pytest

from comsebm.data import (Dataset, LabeledPoint, PriorSpec, SpiralSpec, dataset_from_json,
                          ground_truth_reward, prior_sample, read_dataset, spiral_generate,
                          write_dataset)
from comsebm.errors import ConfigError, DatasetFormatError


def test_reward_peak():
    assert ground_truth_reward([0.0, 0.0]) == 2.0


def test_reward_values():
    assert ground_truth_reward([1.0, 1.0]) == pytest.approx(2 * math.exp(-1), rel=1e-15)
    assert ground_truth_reward([1.0, 1.0]) == pytest.approx(0.73576, abs=1e-5)
    assert ground_truth_reward([10.0, 10.0]) < 1e-40


def test_reward_grid_maximum_at_origin():
    g = np.round(np.arange(-150, 201) * 0.01, 10)
    xx, yy = np.meshgrid(g, g)
    r = ground_truth_reward(np.stack([xx.ravel(), yy.ravel()], axis=-1))
    best = np.argmax(r)
    assert (xx.ravel()[best], yy.ravel()[best]) == (0.0, 0.0)
    assert r.max() == 2.0


def test_spiral_noise_free_at_t_min():
    ds = spiral_generate(SpiralSpec(n=3, t_min=2.0, t_max=2.0, noise_std=0.0, seed=0))
    np.testing.assert_allclose(ds.x, np.tile([-0.12484, 0.27279], (3, 1)), atol=1e-5)
    np.testing.assert_allclose(ds.x[0], 0.3 * np.array([math.cos(2), math.sin(2)]), rtol=1e-15)


def test_spiral_properties():
    spec = SpiralSpec(n=1000, seed=0)
    ds = spiral_generate(spec)
    assert len(ds) == 1000
    assert np.all(np.abs(ds.x) <= 1.8 + 5 * spec.noise_std)
    # labels exactly equal the oracle
    assert (ds.y == ground_truth_reward(ds.x)).all()
    # the high-reward centre is not part of the data
    assert np.linalg.norm(ds.x, axis=1).min() > 0.25


def test_spiral_deterministic():
    a = spiral_generate(SpiralSpec(n=50, seed=3))
    b = spiral_generate(SpiralSpec(n=50, seed=3))
    assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()


def test_spiral_empty():
    assert len(spiral_generate(SpiralSpec(n=0))) == 0


@pytest.mark.parametrize("kw", [{"n": -1}, {"t_min": 5.0, "t_max": 2.0},
                                {"radius_coef": 0.0}, {"noise_std": -0.1}])
def test_spiral_spec_validation(kw):
    with pytest.raises(ConfigError):
        SpiralSpec(**kw)


def test_prior_bounds_and_mean():
    s = prior_sample(PriorSpec(), 10_000, seed=0)
    assert s.shape == (10_000, 2)
    assert s.min() >= -1.5 and s.max() <= 2.0
    assert np.all(np.abs(s.mean(axis=0) - 0.25) < 0.05)


def test_prior_empty_and_invalid():
    assert prior_sample(PriorSpec(), 0, seed=1).shape == (0, 2)
    with pytest.raises(ConfigError):
        PriorSpec(low=2.0, high=1.0)


def test_dataset_round_trip(tmp_path):
    ds = spiral_generate(SpiralSpec(n=40, seed=1))
    p = tmp_path / "d.json"
    write_dataset(ds, p)
    back = read_dataset(p)
    assert back.x.tobytes() == ds.x.tobytes() and back.y.tobytes() == ds.y.tobytes()


def test_dataset_empty_file(tmp_path):
    p = tmp_path / "e.json"
    p.write_text("[]")
    assert len(read_dataset(p)) == 0


def test_dataset_bad_record_index():
    text = json.dumps([{"x": [0, 1], "y": 1.0}, {"x": [0, 1], "y": 2.0},
                       {"x": [0, 1, 2], "y": 0.5}])
    with pytest.raises(DatasetFormatError, match="record 2") as exc:
        dataset_from_json(text)
    assert exc.value.index == 2


@pytest.mark.parametrize("bad", ['{"x": 1}', "not json", '[{"x": [1, "a"], "y": 1}]',
                                 '[{"x": [1, 2]}]'])
def test_dataset_malformed(bad):
    with pytest.raises(DatasetFormatError):
        dataset_from_json(bad)


def test_dataset_iteration():
    ds = Dataset([[0.0, 1.0], [2.0, 3.0]], [0.5, 0.25])
    pts = list(ds)
    assert pts[1] == LabeledPoint((2.0, 3.0), 0.25)
    assert Dataset.from_points(pts).x.tolist() == ds.x.tolist()
