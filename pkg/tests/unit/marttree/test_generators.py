import numpy as np
import pytest

from src.errors import DomainError, HypothesisCheckError, UsageError
from src.marttree.checks import (
    check_domination,
    check_martingale_property,
    check_strong_domination,
    check_subordination,
)
from src.marttree.generators import GENERATOR_KINDS, GeneratorFactory, dominated_pair, random_tree
from src.marttree.generators.subordinate_generator import SubordinateGenerator
from src.marttree.transforms import scale
from src.rearrange import check_lambda_equivalence, row_k_functionals
from src.stochmat import Classification, classify


class TestRandomTree:

    def test_zero_sum_and_deterministic(self):
        tree = random_tree(3, 4, seed=17)
        assert tree.zero_sum_violations() == []
        assert check_martingale_property(tree)
        assert all(np.array_equal(a, b) for a, b in zip(tree.levels, random_tree(3, 4, seed=17).levels))

    def test_node_streams_do_not_depend_on_depth(self):
        shallow, deep = random_tree(2, 3, seed=5), random_tree(3, 3, seed=5)
        assert np.array_equal(shallow.levels[1], deep.levels[1])


class TestGeneratorFactory:

    @pytest.mark.parametrize("kind", GENERATOR_KINDS)
    def test_every_generated_pair_passes_its_check(self, kind):
        generator = GeneratorFactory.create_generator(kind)
        for seed in range(10):
            pair = generator.pair(3, 3, seed)
            assert generator.verify(pair)
            assert check_martingale_property(pair.e)

    def test_unknown_kind(self):
        with pytest.raises(UsageError, match="not a valid generator"):
            GeneratorFactory.create_generator("rejection")

    def test_pair_unpacks(self):
        d, e = dominated_pair("tangent", 2, 3, seed=1)
        assert d.shape == e.shape == (2, 3)

    @pytest.mark.parametrize("kind, name", [
        ("subordinate", "subordination"),
        ("tangent", "tangency"),
        ("operator", "domination"),
        ("kappa", "kappa_domination"),
    ])
    def test_hypothesis_check_names_failing_nodes(self, kind, name):
        generator = GeneratorFactory.create_generator(kind)
        pair = generator.pair(2, 3, seed=5)
        check = generator.hypothesis_check(pair.d, pair.e, 1e-9)
        assert check.name == name and check.holds and check.failures() == []
        inflated = generator.hypothesis_check(pair.d, scale(pair.d, 5.0), 1e-9)
        assert not inflated.holds
        assert "" in inflated.failures()

    def test_verify_raises_on_failed_hypothesis(self):
        generator = GeneratorFactory.create_generator("subordinate")
        pair = generator.pair(2, 3, seed=0)
        inflated = type(pair)(pair.kind, pair.d, scale(pair.d, 3.0))
        with pytest.raises(HypothesisCheckError):
            generator.verify(inflated)


class TestSubordinate:

    def test_uniform_multipliers_in_range(self):
        pair = dominated_pair("subordinate", 3, 3, seed=2)
        assert all(np.all(np.abs(level) <= 1) for level in pair.attachment.levels)
        assert check_subordination(pair.d, pair.e).holds

    def test_global_sign_is_isometry(self):
        pair = dominated_pair("subordinate", 3, 3, seed=2, params={"sign_mode": "global"})
        sign = pair.attachment.value(())
        assert sign in (-1.0, 1.0)
        assert all(np.array_equal(e, sign * d) for d, e in zip(pair.d.levels, pair.e.levels))

    def test_unknown_sign_mode(self):
        with pytest.raises(UsageError):
            SubordinateGenerator({"sign_mode": "random"})


class TestOperatorAndKappa:

    def test_operator_attachments_are_zero_sum_contractions(self):
        pair = dominated_pair("operator", 2, 4, seed=6, params={"terms": 3})
        for level in pair.attachment.levels:
            for matrix in level:
                assert classify(matrix).classification == Classification.ZERO_SUM_CONTRACTION

    def test_operator_mass_bounds(self):
        with pytest.raises(DomainError):
            GeneratorFactory.create_generator("operator", {"mass": 1.5})

    def test_kappa_below_one(self):
        with pytest.raises(DomainError):
            GeneratorFactory.create_generator("kappa", {"kappa": 0.5})

    def test_kappa_pairs_share_permutations(self):
        one = dominated_pair("kappa", 3, 3, seed=4, params={"kappa": 1.0})
        five = dominated_pair("kappa", 3, 3, seed=4, params={"kappa": 5.0})
        assert all(np.allclose(5.0 * a, b) for a, b in zip(one.e.levels, five.e.levels))


class TestImplicationChain:

    @pytest.mark.parametrize("kind", ["subordinate", "tangent", "operator"])
    def test_node_wise_implications(self, kind):
        for seed in range(20):
            d, e = dominated_pair(kind, 2, 3, seed)
            strong = check_strong_domination(d, e)
            weak = check_domination(d, e)
            for node, ok in strong.results.items():
                if ok:
                    assert weak.results[node]
            for path, d_branch in d.nodes():
                report = check_lambda_equivalence(d_branch, e.branch(path))
                assert report.consistent

    @pytest.mark.parametrize("sign_mode", ["uniform", "global"])
    def test_subordination_implies_strong_domination(self, sign_mode):
        for seed in range(20):
            d, e = dominated_pair("subordinate", 3, 3, seed, {"sign_mode": sign_mode})
            assert check_subordination(d, e).holds
            assert check_strong_domination(d, e).holds
            assert check_domination(d, e).holds

    def test_tangent_pairs_have_equal_rearrangements(self):
        for seed in range(10):
            d, e = dominated_pair("tangent", 3, 3, seed)
            for d_level, e_level in zip(d.levels, e.levels):
                assert np.array_equal(row_k_functionals(d_level), row_k_functionals(e_level))
