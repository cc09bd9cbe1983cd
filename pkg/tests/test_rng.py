import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from qdensity.resampling import _stable_sum
from qdensity.rng import _BLOCK, child_seed, normal_draws, stream


class TestStreams:
    def test_same_path_same_draws(self):
        a = stream(42, 1, 2).standard_normal(5)
        b = stream(42, 1, 2).standard_normal(5)
        assert_array_equal(a, b)

    def test_different_paths_differ(self):
        a = stream(42, 1, 2).standard_normal(5)
        b = stream(42, 1, 3).standard_normal(5)
        c = stream(43, 1, 2).standard_normal(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_negative_seed_accepted(self):
        a = stream(-7, 0).standard_normal(3)
        b = stream(-7, 0).standard_normal(3)
        assert_array_equal(a, b)


class TestChildSeed:
    def test_deterministic_and_distinct(self):
        assert child_seed(5, 1, 2) == child_seed(5, 1, 2)
        seen = {child_seed(5, i) for i in range(200)}
        assert len(seen) == 200

    def test_path_order_matters(self):
        assert child_seed(5, 1, 2) != child_seed(5, 2, 1)


class TestNormalDraws:
    def test_block_prefix_stability(self):
        # element b depends only on (seed, path, b): asking for more draws
        # never changes the earlier ones
        short = normal_draws(9, (4,), _BLOCK)
        longer = normal_draws(9, (4,), _BLOCK + 1000)
        assert_array_equal(longer[:_BLOCK], short)

    def test_scale_applied(self):
        unit = normal_draws(3, (), 1000)
        scaled = normal_draws(3, (), 1000, scale=2.5)
        assert_array_equal(scaled, 2.5 * unit)

    def test_spans_blocks(self):
        draws = normal_draws(1, (), 2 * _BLOCK + 17)
        assert draws.shape == (2 * _BLOCK + 17,)
        assert np.all(np.isfinite(draws))
        # the second block really is a different stream
        assert not np.array_equal(draws[:100], draws[_BLOCK : _BLOCK + 100])


class TestStableSum:
    def test_matches_fsum_exactly_across_chunks(self):
        rng = np.random.default_rng(0)
        for size in (10, _BLOCK, _BLOCK + 1, 3 * _BLOCK + 123):
            x = rng.normal(0, 1, size) * 10.0 ** rng.integers(-3, 3, size)
            assert _stable_sum(x) == pytest.approx(math.fsum(x), rel=1e-15)

    def test_order_of_chunks_irrelevant(self):
        rng = np.random.default_rng(1)
        x = rng.normal(0, 1, 2 * _BLOCK)
        swapped = np.concatenate([x[_BLOCK:], x[:_BLOCK]])
        assert _stable_sum(x) == pytest.approx(_stable_sum(swapped), rel=1e-15)
