import math
import numpy as np
import pytest

from src.errors import DomainError, EnumerationCapError
from src.marttree.generators import fair_coin_tree, random_tree
from src.marttree.norms import enumerate_partial_sums, lp_norm_partial_sum, monte_carlo_lp
from src.marttree.tree import MartingaleTree


class TestExactNorms:

    def test_single_level(self):
        assert lp_norm_partial_sum(fair_coin_tree(1), 2) == pytest.approx(1.0)

    def test_fair_coin_depth_two(self):
        tree = fair_coin_tree(2)
        assert enumerate_partial_sums(tree).tolist() == [2.0, 0.0, 0.0, -2.0]
        assert lp_norm_partial_sum(tree, 2) == pytest.approx(math.sqrt(2))
        assert lp_norm_partial_sum(tree, 1) == pytest.approx(1.0)
        assert lp_norm_partial_sum(tree, math.inf) == 2.0
        assert lp_norm_partial_sum(tree, 2, upto=1) == pytest.approx(1.0)
        assert lp_norm_partial_sum(tree, 2, upto=0) == 0.0

    def test_upto_out_of_range(self):
        with pytest.raises(DomainError):
            lp_norm_partial_sum(fair_coin_tree(2), 2, upto=3)

    def test_cap(self):
        with pytest.raises(EnumerationCapError, match="monte_carlo_lp"):
            lp_norm_partial_sum(random_tree(3, 3, seed=0), 2, cap=10)

    def test_workers_do_not_change_result(self):
        tree = random_tree(4, 3, seed=9)
        assert lp_norm_partial_sum(tree, 3, workers=3) == lp_norm_partial_sum(tree, 3, workers=1)

    def test_matches_direct_enumeration(self):
        tree = random_tree(3, 3, seed=21)
        sums = enumerate_partial_sums(tree)
        assert sums.size == 27
        assert sums[5] == pytest.approx(tree.branch(())[0] + tree.branch((0,))[1] + tree.branch((0, 1))[2])
        assert lp_norm_partial_sum(tree, 3) == pytest.approx(np.mean(np.abs(sums) ** 3) ** (1 / 3))


class TestMonteCarlo:

    def test_zero_tree(self):
        tree = MartingaleTree((np.zeros((1, 3)), np.zeros((3, 3))), 3)
        assert monte_carlo_lp(tree, 2, 1000, seed=1)[:2] == (0.0, 0.0)

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            monte_carlo_lp(fair_coin_tree(2), 2, 99, seed=1)

    def test_fair_coin_close_to_exact(self):
        estimate, standard_error, samples = monte_carlo_lp(fair_coin_tree(2), 2, 100_000, seed=7)
        assert samples == 100_000
        assert standard_error > 0
        assert abs(estimate - math.sqrt(2)) <= 4 * standard_error

    def test_deterministic_and_worker_independent(self):
        tree = random_tree(3, 3, seed=4)
        first = monte_carlo_lp(tree, 3, 25_000, seed=12, chunk_size=4_000)
        assert monte_carlo_lp(tree, 3, 25_000, seed=12, chunk_size=4_000) == first
        assert monte_carlo_lp(tree, 3, 25_000, seed=12, chunk_size=4_000, workers=3) == first
        assert monte_carlo_lp(tree, 3, 25_000, seed=13, chunk_size=4_000) != first

    def test_infinity_norm_is_sample_maximum(self):
        estimate = monte_carlo_lp(fair_coin_tree(2), math.inf, 500, seed=3).estimate
        assert estimate == 2.0
