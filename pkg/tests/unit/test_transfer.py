import numpy as np
import pytest

from src.errors import DomainError, FormatError, NoTransferOperatorError
from src.rearrange import weakly_majorizes
from src.stochmat import is_contraction, line_abs_sums, permutation_matrix
from src.transfer import (
    construct_transfer,
    first_violation,
    t_transform_chain,
    t_transform_matrix,
    verify_only_if,
    water_fill,
)
from tests.utils.helpers import random_contraction


def assert_certificate(certificate, f, g):
    assert np.max(np.abs(certificate.T @ f - g)) <= 1e-9 * (1 + np.abs(f).max())
    assert certificate.residual <= 1e-9 * (1 + np.abs(f).max())
    assert certificate.max_row_abs_sum <= 1 + 1e-12
    assert certificate.max_col_abs_sum <= 1 + 1e-12


class TestConstructTransfer:

    def test_equal_vectors(self):
        f = np.array([1.0, -3.0, 2.0])
        certificate = construct_transfer(f, f)
        assert_certificate(certificate, f, f)
        assert np.allclose(certificate.T, np.eye(3))
        assert certificate.chain_length == 0

    def test_averaging_example(self):
        certificate = construct_transfer([2.0, 0.0], [1.0, 1.0])
        assert_certificate(certificate, np.array([2.0, 0.0]), np.array([1.0, 1.0]))
        assert certificate.chain_length == 1

    def test_violation_reports_index(self):
        with pytest.raises(NoTransferOperatorError) as excinfo:
            construct_transfer([2.0, 0.0], [1.5, 0.6])
        assert excinfo.value.index == 2
        assert "partial sum 2" in str(excinfo.value)

    def test_tolerance_matches_majorization_check(self):
        f = np.array([1.0, 0.0, 0.0, 0.0])
        inside = np.array([1.0 + 2e-9, 0.0, 0.0, 0.0])
        assert weakly_majorizes(f, inside)
        certificate = construct_transfer(f, inside)
        assert certificate.residual <= 4 * 1e-9
        assert certificate.max_row_abs_sum <= 1 + 1e-12

        outside = np.array([1.0 + 5e-9, 0.0, 0.0, 0.0])
        assert not weakly_majorizes(f, outside)
        with pytest.raises(NoTransferOperatorError) as excinfo:
            construct_transfer(f, outside)
        assert excinfo.value.index == 1

    def test_length_mismatch(self):
        with pytest.raises(FormatError):
            construct_transfer([1.0, 2.0], [1.0])

    def test_random_majorized_pairs(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 8))
            f = rng.normal(size=n)
            g = random_contraction(rng, n) @ f
            certificate = construct_transfer(f, g)
            assert_certificate(certificate, f, g)
            assert certificate.chain_length <= max(n - 1, 0)
            for _, factor in certificate.factors:
                assert max(line_abs_sums(factor)) <= 1 + 1e-12
            assert verify_only_if(certificate.T, f)

    def test_fails_exactly_when_not_majorized(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 6))
            f, g = rng.normal(size=n), rng.normal(size=n)
            if weakly_majorizes(f, g):
                assert_certificate(construct_transfer(f, g), f, g)
            else:
                with pytest.raises(NoTransferOperatorError):
                    construct_transfer(f, g)

    def test_sign_and_zero_entries(self):
        f = np.array([0.0, -4.0, 1.0, 0.0])
        g = np.array([-1.0, 0.0, 2.0, -1.5])
        assert_certificate(construct_transfer(f, g), f, g)


class TestPipelineSteps:

    def test_first_violation(self):
        assert first_violation(np.array([2.0, 0.0]), np.array([1.5, 0.6])) == 2
        assert first_violation(np.array([3.0, 1.0]), np.array([2.0, 2.0])) is None

    def test_water_fill_raises_tail(self):
        h = water_fill(np.array([4.0, 2.0, 0.0]), np.array([3.0, 0.5, 0.0]))
        assert h == pytest.approx([3.0, 1.5, 1.5])
        assert h.sum() == pytest.approx(6.0)

    def test_water_fill_keeps_head_when_tail_fits(self):
        h = water_fill(np.array([5.0, 1.0]), np.array([1.0, 1.0]))
        assert h == pytest.approx([3.0, 3.0])

    def test_chain_reaches_target(self):
        x = np.array([4.0, 2.0, 0.0])
        y = np.array([3.0, 1.5, 1.5])
        chain = t_transform_chain(x, y)
        assert len(chain) <= 2
        doubly = np.eye(3)
        for j, k, lam in chain:
            assert 0.0 <= lam <= 1.0
            doubly = t_transform_matrix(3, j, k, lam) @ doubly
        assert doubly @ x == pytest.approx(y)
        assert np.allclose(doubly.sum(axis=0), 1.0) and np.allclose(doubly.sum(axis=1), 1.0)

    def test_t_transform_matrix(self):
        assert t_transform_matrix(2, 0, 1, 0.25).tolist() == [[0.25, 0.75], [0.75, 0.25]]


class TestVerifyOnlyIf:

    def test_permutation_and_zero(self, rng):
        f = rng.normal(size=4)
        assert verify_only_if(permutation_matrix([2, 0, 3, 1]), f)
        assert verify_only_if(np.zeros((4, 4)), f)

    def test_random_contractions(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 7))
            T = random_contraction(rng, n)
            assert is_contraction(T)
            assert verify_only_if(T, rng.normal(size=n))

    def test_rejects_non_contraction(self):
        with pytest.raises(DomainError):
            verify_only_if(2 * np.eye(2), [1.0, 1.0])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(FormatError):
            verify_only_if(np.eye(3), [1.0, 1.0])
