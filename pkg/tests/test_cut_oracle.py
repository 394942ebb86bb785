"""Tests for the brute-force covariance oracle."""

import math

import numpy as np
import pytest

from diamondnet.converse import cutset_objective
from diamondnet.cut_oracle import (
    CovarianceMatrix,
    CutSubset,
    brute_force_min_cut,
    equicorrelation_matrix,
    gauss_jordan_inverse,
    oracle_check_eta,
    schur_quadratic,
    structured_schur_quadratic,
)
from diamondnet.exceptions import EnumerationLimitError, InvalidNetworkError, NumericalError
from diamondnet.models import SymmetricNetwork

RHO_GRID = [round(0.1 * k, 1) for k in range(10)] + [0.99, 1.0]


def test_equicorrelation_matrix():
    """Test covariance construction and its PSD range."""
    q = equicorrelation_matrix(3, 0.5)

    assert q.dim == 3
    np.testing.assert_allclose(np.diag(q.entries), 1.0)
    assert q.entries[0, 2] == 0.5
    assert equicorrelation_matrix(1, 0.9).entries.tolist() == [[1.0]]

    low = equicorrelation_matrix(4, -1.0 / 3.0)
    assert np.ones(4) @ low.entries @ np.ones(4) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n_relays, rho", [(3, 1.5), (4, -0.5), (0, 0.0)])
def test_equicorrelation_matrix_rejects_bad_input(n_relays, rho):
    """Test out-of-range correlations and empty networks."""
    with pytest.raises(InvalidNetworkError):
        equicorrelation_matrix(n_relays, rho)


def test_covariance_matrix_validation():
    """Test that non-square, asymmetric and indefinite matrices are rejected."""
    with pytest.raises(InvalidNetworkError):
        CovarianceMatrix(np.ones((2, 3)))
    with pytest.raises(NumericalError):
        CovarianceMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(NumericalError):
        CovarianceMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_cut_subset_normalizes_members():
    """Test subset sorting, complement and range check."""
    cut = CutSubset((3, 1), 4)

    assert cut.members == (1, 3)
    assert cut.complement == (2, 4)
    assert len(cut) == 2
    with pytest.raises(InvalidNetworkError):
        CutSubset((0,), 4)


def test_gauss_jordan_inverse_matches_numpy():
    """Test batched inversion against numpy on random SPD matrices."""
    rng = np.random.default_rng(7)
    a = rng.standard_normal((20, 5, 5))
    spd = a @ np.transpose(a, (0, 2, 1)) + 5.0 * np.eye(5)

    result = gauss_jordan_inverse(spd)

    assert not result.singular.any()
    np.testing.assert_allclose(result.inverse, np.linalg.inv(spd), rtol=1e-9, atol=1e-12)


def test_gauss_jordan_inverse_flags_singular():
    """Test that a rank-one block is flagged and filled with NaN."""
    result = gauss_jordan_inverse(np.stack([np.ones((3, 3)), 2.0 * np.eye(3)]))

    assert result.singular.tolist() == [True, False]
    assert np.isnan(result.inverse[0]).all()
    np.testing.assert_allclose(result.inverse[1], 0.5 * np.eye(3))


def test_schur_quadratic_examples():
    """Test the Schur quadratic at hand-computed points."""
    assert schur_quadratic(equicorrelation_matrix(5, 0.0), (1, 2)) == pytest.approx(2.0)
    assert schur_quadratic(equicorrelation_matrix(4, 0.5), (1, 2)) == pytest.approx(5.0 / 3.0)
    assert schur_quadratic(equicorrelation_matrix(3, 1.0), (1,)) == pytest.approx(0.0, abs=1e-9)


def test_schur_quadratic_empty_and_full_sets():
    """Test the empty set gives 0 and the full set gives the total power."""
    q = equicorrelation_matrix(4, 0.3)

    assert schur_quadratic(q, ()) == 0.0
    assert schur_quadratic(q, (1, 2, 3, 4)) == pytest.approx(q.entries.sum())


def test_structured_path_matches_explicit_path():
    """Test the Sherman-Morrison path against Gauss-Jordan."""
    for rho in (0.0, 0.4, 0.95, 1.0):
        q = equicorrelation_matrix(6, rho)
        for subset in [(1,), (2, 5), (1, 3, 4), (1, 2, 3, 4, 5)]:
            assert structured_schur_quadratic(6, rho, subset) == pytest.approx(
                schur_quadratic(q, subset), abs=1e-10
            )


def test_eta_against_oracle():
    """Test closed-form eta against both numeric paths for N up to 12."""
    for n_relays in range(2, 13):
        for rho in RHO_GRID:
            for n in range(n_relays + 1):
                check = oracle_check_eta(n_relays, rho, n)
                scale = max(1.0, check.closed)

                assert check.abs_err <= 1e-9 * scale, (n_relays, rho, n)
                assert check.path_err <= 1e-10 * scale, (n_relays, rho, n)


def test_oracle_check_eta_limits():
    """Test the relay count range of the oracle."""
    with pytest.raises(EnumerationLimitError):
        oracle_check_eta(21, 0.1, 0)
    with pytest.raises(InvalidNetworkError):
        oracle_check_eta(1, 0.1, 0)


def test_schur_quadratic_depends_only_on_subset_size():
    """Test permutation symmetry of equicorrelated covariances."""
    rng = np.random.default_rng(11)
    for n_relays, rho in [(8, 0.3), (10, 0.8)]:
        q = equicorrelation_matrix(n_relays, rho)
        for size in (2, 5):
            reference = schur_quadratic(q, range(1, size + 1))
            for _ in range(25):
                subset = rng.choice(np.arange(1, n_relays + 1), size=size, replace=False)
                assert schur_quadratic(q, subset.tolist()) == pytest.approx(
                    reference, abs=1e-10
                )


def test_schur_quadratic_monotone_in_covariance():
    """Test that adding diagonal power never lowers the Schur quadratic."""
    rng = np.random.default_rng(3)
    base = equicorrelation_matrix(6, 0.6)
    for _ in range(20):
        bigger = CovarianceMatrix(base.entries + np.diag(rng.uniform(0.0, 2.0, size=6)))
        for subset in [(1,), (1, 2, 3), (2, 4, 5, 6)]:
            assert schur_quadratic(base, subset) <= schur_quadratic(bigger, subset) + 1e-10


def test_schur_quadratic_concave_in_correlation():
    """Test concavity along mixtures of two equicorrelated covariances."""
    rng = np.random.default_rng(5)
    for _ in range(30):
        rho_a, rho_b = rng.uniform(0.0, 0.99, size=2)
        weight = rng.uniform()
        mix = weight * rho_a + (1.0 - weight) * rho_b
        subset = (1, 2, 3)

        mixed = schur_quadratic(equicorrelation_matrix(7, mix), subset)
        blended = weight * schur_quadratic(equicorrelation_matrix(7, rho_a), subset) + (
            1.0 - weight
        ) * schur_quadratic(equicorrelation_matrix(7, rho_b), subset)

        assert mixed >= blended - 1e-10


def test_brute_force_min_cut_examples():
    """Test exhaustive minima at hand-computed points."""
    best = brute_force_min_cut(SymmetricNetwork(n_relays=3, g=1.0, h=1.0), 0.0)
    assert best.value == pytest.approx(1.0)
    assert best.subset.members == ()
    assert best.subsets_checked == 8

    single = brute_force_min_cut(SymmetricNetwork(n_relays=1, g=5.0, h=7.0), 0.3)
    assert single.value == pytest.approx(0.5 * math.log2(6.0))
    assert single.subset.members == ()


def test_brute_force_min_cut_lexicographic_tie():
    """Test the lexicographically smallest subset wins among equal sizes."""
    net = SymmetricNetwork(n_relays=4, g=1.0, h=1.0)
    best = brute_force_min_cut(net, 0.99)

    assert best.subset.members == (1, 2, 3)
    assert best.value == pytest.approx(cutset_objective(net, 0.99).value, abs=1e-9)
    assert cutset_objective(net, 0.99).cut_index == 3


def test_brute_force_enumeration_limit():
    """Test that N above the cap is refused."""
    with pytest.raises(EnumerationLimitError):
        brute_force_min_cut(SymmetricNetwork(n_relays=21, g=1.0, h=1.0), 0.1)


@pytest.mark.parametrize("n_relays", range(2, 13))
def test_integer_cut_reduction(n_relays):
    """Test the minimum over 2^N subsets equals the minimum over cut sizes."""
    for rho in (0.0, 0.25, 0.5, 0.75, 0.99):
        for g in (0.01, 1.0, 100.0):
            for h in (0.01, 1.0, 100.0):
                net = SymmetricNetwork(n_relays=n_relays, g=g, h=h)
                brute = brute_force_min_cut(net, rho)
                reduced = cutset_objective(net, rho)

                assert brute.value == pytest.approx(reduced.value, abs=1e-9)
                assert brute.subsets_checked == 2**n_relays
