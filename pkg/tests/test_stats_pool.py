import numpy as np
import pandas as pd
import pytest

from src.errors import ValidationError
from src.sim import (
    SamplePool, block_rng, block_slices, config_hash, ecdf, histogram_export, ks_two_sample, map_blocks,
    standard_error,
)


def make_pool(values, censored=None):
    return SamplePool(tag='test', values=np.asarray(values, dtype=float), seed=1, generator_id='gen',
                      censored=censored, meta={'config': {'a': 1, 'b': [1, 2]}})


class TestConfigHash:
    """Stable hashes of configurations."""

    def test_key_order(self):
        assert config_hash({'a': 1, 'b': 2.5}) == config_hash({'b': 2.5, 'a': 1})

    def test_values_matter(self):
        assert config_hash({'a': 1}) != config_hash({'a': 2})

    def test_length(self):
        assert len(config_hash({})) == 16


class TestPool:
    """Sample pools and their exports."""

    def test_histogram(self):
        table = histogram_export(make_pool([0.5, 1.5, 1.5, np.inf]), [0.0, 1.0, 2.0])
        assert list(table['count']) == [1, 2]
        np.testing.assert_allclose(table['density'], [1.0 / 3.0, 2.0 / 3.0])

    def test_histogram_skips_censored(self):
        pool = make_pool([0.5, 1.5, 1.5], censored=[False, False, True])
        assert list(histogram_export(pool, [0.0, 1.0, 2.0])['count']) == [1, 1]

    def test_censored_fraction(self):
        assert make_pool([1.0, 2.0], censored=[True, False]).censored_fraction == 0.5
        assert make_pool([1.0, 2.0]).censored_fraction == 0.0

    def test_frame_columns(self):
        pool = make_pool(np.ones((3, 2)))
        assert list(pool.to_frame().columns) == ['u1', 'u2']

    def test_csv_header(self, tmp_path):
        path = make_pool([1.0, 2.0], censored=[False, True]).to_csv(str(tmp_path / 'pool.csv'))
        with open(path) as handle:
            header = [next(handle) for _ in range(5)]
        assert header[0] == "# tag: test\n"
        assert header[3] == f"# config_hash: {config_hash({'a': 1, 'b': [1, 2]})}\n"
        frame = pd.read_csv(path, comment='#')
        assert list(frame.columns) == ['value', 'censored']
        assert frame['value'].tolist() == [1.0, 2.0]


class TestBlocks:
    """Per-block generators and ordered block maps."""

    def test_slices(self):
        assert block_slices(5, 2) == [(0, 0, 2), (1, 2, 4), (2, 4, 5)]
        with pytest.raises(ValidationError):
            block_slices(5, 0)

    def test_generator_reproducible(self):
        np.testing.assert_array_equal(block_rng(3, 1).random(4), block_rng(3, 1).random(4))
        assert not np.array_equal(block_rng(3, 1).random(4), block_rng(3, 2).random(4))

    def test_negative_seed(self):
        with pytest.raises(ValidationError):
            block_rng(-1, 0)

    def test_order_independent_of_workers(self):
        def draw(block, start, stop):
            return block_rng(9, block).random(stop - start)

        serial = np.concatenate(map_blocks(draw, 1000, 64, threads=1))
        parallel = np.concatenate(map_blocks(draw, 1000, 64, threads=8))
        np.testing.assert_array_equal(serial, parallel)


class TestStatistics:
    """Empirical distribution and KS distances."""

    def test_identical_samples(self, rng):
        values = rng.random(500)
        assert ks_two_sample(values, values.copy()) == 0.0

    def test_different_laws(self, rng):
        assert ks_two_sample(rng.random(2000), rng.exponential(size=2000)) > 0.2

    def test_never_hit_values(self):
        assert ks_two_sample(np.array([1.0, np.inf]), np.array([1.0, np.inf])) == 0.0

    def test_ecdf(self):
        f = ecdf(np.array([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(f(np.array([0.5, 1.0, 2.5, 3.0])), [0.0, 1 / 3, 2 / 3, 1.0])

    def test_empty(self):
        with pytest.raises(ValidationError):
            ecdf(np.array([]))

    def test_standard_error(self):
        np.testing.assert_allclose(standard_error(np.array([1.0, 3.0])), 1.0)
