import itertools

import numpy as np
import pytest

from scanpath.baselines import center_bias, wta_scanpath
from scanpath.core import SaliencyMap
from scanpath.errors import DegenerateSaliencyError, InputError
from scanpath.metrics import congruency
from scanpath.models import WtaConfig


def loop_wta(values: np.ndarray, n: int, radius: float):
    """Plain-loop winner-takes-all on a copy of ``values``."""
    values = values.astype(np.float64).copy()
    height, width = values.shape
    alive = np.ones(values.shape, dtype=bool)
    points = []
    for _ in range(n):
        best = None
        for row in range(height):
            for col in range(width):
                if alive[row, col] and (best is None or values[row, col] > values[best]):
                    best = (row, col)
        if best is None:
            break
        x = best[1] / (width - 1)
        y = best[0] / (height - 1)
        points.append((x, y))
        for row in range(height):
            for col in range(width):
                if (col / (width - 1) - x) ** 2 + (row / (height - 1) - y) ** 2 <= radius ** 2:
                    alive[row, col] = False
    return points


class TestCenterBias:
    def test_inside_unit_square(self):
        scanpath = center_bias(500, seed=1)
        xy = scanpath.xy()
        assert xy.shape == (500, 2)
        assert np.all((xy >= 0.0) & (xy <= 1.0))

    def test_centered(self):
        xy = center_bias(2000, seed=2).xy()
        np.testing.assert_allclose(xy.mean(axis=0), [0.5, 0.5], atol=0.02)
        np.testing.assert_allclose(xy.std(axis=0), [0.15, 0.15], atol=0.02)

    def test_mean_of_ten_thousand_points(self):
        xy = center_bias(10000, seed=5).xy()
        np.testing.assert_allclose(xy.mean(axis=0), [0.5, 0.5], atol=0.01)

    def test_deterministic_per_seed(self):
        assert center_bias(8, seed=3) == center_bias(8, seed=3)
        assert center_bias(8, seed=3) != center_bias(8, seed=4)

    def test_wide_spread_still_fills(self):
        assert len(center_bias(16, seed=0, std=2.0)) == 16

    def test_rejects_empty(self):
        with pytest.raises(InputError):
            center_bias(0, seed=0)


class TestWta:
    def test_matches_loop_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            height, width = (int(v) for v in rng.integers(3, 12, size=2))
            values = rng.uniform(size=(height, width))
            cfg = WtaConfig(n_fixations=int(rng.integers(1, 10)), ior_radius=float(rng.uniform(0.05, 0.5)))
            scanpath = wta_scanpath(values, cfg)
            np.testing.assert_allclose(scanpath.xy(), loop_wta(values, cfg.n_fixations, cfg.ior_radius))

    def test_first_fixation_is_global_max(self):
        values = np.zeros((5, 5))
        values[1, 3] = 2.0
        scanpath = wta_scanpath(values)
        assert scanpath.xy()[0].tolist() == [0.75, 0.25]

    def test_ties_take_smallest_row_then_column(self):
        values = np.zeros((3, 3))
        values[2, 0] = values[1, 2] = 1.0
        scanpath = wta_scanpath(values, WtaConfig(n_fixations=1))
        assert scanpath.xy()[0].tolist() == [1.0, 0.5]

    def test_fixations_respect_inhibition_radius(self):
        values = np.random.default_rng(1).uniform(size=(20, 20))
        cfg = WtaConfig(n_fixations=8, ior_radius=0.2)
        xy = wta_scanpath(values, cfg).xy()
        for a, b in itertools.combinations(xy, 2):
            assert np.linalg.norm(a - b) > cfg.ior_radius

    def test_stops_when_map_exhausted(self):
        values = np.array([[0.1, 0.2, 0.3], [0.4, 1.0, 0.5], [0.6, 0.7, 0.8]])
        scanpath = wta_scanpath(values, WtaConfig(n_fixations=8, ior_radius=0.6))
        assert len(scanpath) == 5
        assert scanpath.xy()[0].tolist() == [0.5, 0.5]
        assert sorted(map(tuple, scanpath.xy()[1:].tolist())) == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]

    def test_constant_map(self):
        with pytest.raises(DegenerateSaliencyError):
            wta_scanpath(np.full((4, 4), 0.3))

    def test_accepts_saliency_map(self):
        values = np.random.default_rng(2).uniform(size=(6, 6))
        assert wta_scanpath(SaliencyMap(values)) == wta_scanpath(values)


class TestOrdering:
    def test_wta_congruency_beats_center_bias(self):
        rng = np.random.default_rng(3)
        grid_x, grid_y = np.meshgrid(np.linspace(0, 1, 24), np.linspace(0, 1, 24))
        wta_scores, center_scores = [], []
        for index in range(50):
            cx, cy = rng.choice([0.15, 0.85], size=2) + rng.uniform(-0.05, 0.05, size=2)
            saliency = np.exp(-((grid_x - cx) ** 2 + (grid_y - cy) ** 2) / (2 * 0.1 ** 2))
            wta_scores.append(congruency(saliency, wta_scanpath(saliency)))
            center_scores.append(congruency(saliency, center_bias(8, seed=index)))
        assert np.mean(wta_scores) > np.mean(center_scores)
