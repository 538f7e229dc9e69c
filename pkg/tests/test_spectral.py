#!/usr/bin/env python3
"""
Tests for spectral resolutions, functional calculus, the unitary group,
polar decomposition and range/null projections
"""

import sys
import os
# Add parent directory to path so we can import from root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from config import RANK_FLOOR
from numkernel import (
    RejectedInputError, diag, matrix_unit, operator_norm, random_cmat, random_hermitian, random_unitary, trace
)
from spectral import (
    hermitian_eigen, spectral_resolution, resolution_report, fun_calculus, unitary_group,
    stone_generator_gap, polar_decompose, polar_report, range_null_projections, rn_identity_gaps,
    null_projection, range_projection, rank_cut, unitarity_gap
)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(99))


def test_hermitian_eigen_rejects_non_hermitian():
    with pytest.raises(RejectedInputError):
        hermitian_eigen(matrix_unit(3, 0, 2))


def test_resolution_of_repeated_eigenvalue():
    res = spectral_resolution(diag([1, 1, 2]))
    assert res.thresholds == pytest.approx((1.0, 2.0))
    assert np.allclose(res.projection_at(0.0), np.zeros((3, 3)))
    assert np.allclose(res.projection_at(1.5), diag([1, 1, 0]))
    assert np.allclose(res.projection_at(5.0), np.eye(3))
    assert np.allclose(res.interval_projection(1.5, 2.5), diag([0, 0, 1]))
    assert np.allclose(res.truncation(1.0), diag([1, 1, 0]))
    assert np.allclose(res.reconstruct(), diag([1, 1, 2]))


def test_resolution_is_right_continuous():
    res = spectral_resolution(diag([-1, 3]))
    assert np.allclose(res.projection_at(-1.0), diag([1, 0]))
    assert np.allclose(res.projection_at(-1.0 - 1e-9), np.zeros((2, 2)))


@pytest.mark.parametrize("n", [2, 4, 8])
def test_resolution_report_on_random_hermitian(rng, n):
    a = random_hermitian(rng, n)
    report = resolution_report(a)
    assert set(report) == {"i", "ii", "iv", "v"}
    assert max(report.values()) <= 1e-9


def test_eigen_reconstruction(rng):
    a = np.asarray(random_hermitian(rng, 10))
    eig = hermitian_eigen(a)
    assert np.linalg.norm(np.asarray(eig.reconstruct()) - a) <= 1e-10


def test_fun_calculus_square_root():
    assert np.allclose(fun_calculus(diag([1, 4]), np.sqrt), diag([1, 2]))
    assert np.allclose(fun_calculus(diag([1, 4]), lambda lam: 7.0), 7.0 * np.eye(2))


def test_unitary_group_and_generator(rng):
    h = random_hermitian(rng, 6)
    assert unitarity_gap(unitary_group(h, 0.7)) <= 1e-10
    x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    for t in (1e-1, 1e-2, 1e-3):
        gap, bound = stone_generator_gap(h, t, x)
        assert gap <= bound


def test_polar_of_matrix_unit():
    parts = polar_decompose(matrix_unit(2, 0, 1))
    assert np.allclose(parts.modulus, matrix_unit(2, 1, 1))
    assert np.allclose(parts.isometry, matrix_unit(2, 0, 1))


def test_polar_of_invertible_is_unitary(rng):
    t = random_cmat(rng, 5)
    parts = polar_decompose(t)
    assert unitarity_gap(parts.isometry) <= 1e-9
    assert max(polar_report(t, parts).values()) <= 1e-9


@pytest.mark.parametrize("rank", [0, 1, 3, 5])
def test_polar_and_range_null_on_rank_deficient(rng, rank):
    mask = np.zeros(5)
    mask[:rank] = 1.0
    t = np.asarray(random_cmat(rng, 5)) * mask
    if rank > 0:
        assert max(polar_report(t).values()) <= 1e-9
    assert max(rn_identity_gaps(t).values()) <= 1e-9


def test_range_null_of_matrix_unit():
    r, n = range_null_projections(matrix_unit(2, 0, 0))
    assert np.allclose(r, matrix_unit(2, 0, 0))
    assert np.allclose(n, matrix_unit(2, 1, 1))
    r, n = range_null_projections(matrix_unit(2, 0, 1))
    assert np.allclose(r, matrix_unit(2, 0, 0))
    assert np.allclose(n, matrix_unit(2, 0, 0))
    with pytest.raises(RejectedInputError):
        range_null_projections(np.ones((2, 3)))


def test_unitary_group_closed_forms():
    pauli_x = np.array([[0, 1], [1, 0]])
    assert np.allclose(unitary_group(pauli_x, 0.0), np.eye(2))
    assert np.allclose(unitary_group(np.array([[np.pi]]), 1.0), [[-1.0]])
    assert np.allclose(unitary_group(pauli_x, np.pi / 2.0), 1j * pauli_x)


def test_unitary_group_law(rng):
    h = random_hermitian(rng, 5)
    product = np.asarray(unitary_group(h, 0.3)) @ np.asarray(unitary_group(h, 0.9))
    assert np.linalg.norm(np.asarray(unitary_group(h, 1.2)) - product) <= 1e-9


def test_polar_keeps_small_singular_values():
    t = diag([1.0, 1e-7])
    parts = polar_decompose(t)
    assert np.allclose(parts.isometry, np.eye(2), atol=1e-12)
    assert np.allclose(parts.modulus, t, atol=1e-15)
    assert max(polar_report(t, parts).values()) <= 1e-9


@pytest.mark.parametrize("rank", [1, 3, 5])
def test_polar_is_unique(rng, rank):
    mask = np.zeros(5)
    mask[:rank] = 1.0
    t = np.asarray(random_cmat(rng, 5)) * mask
    parts = polar_decompose(t)
    again = polar_decompose(np.asarray(parts.isometry) @ np.asarray(parts.modulus))
    assert np.allclose(again.isometry, parts.isometry, atol=1e-9)
    assert np.allclose(again.modulus, parts.modulus, atol=1e-9)


def test_rank_ignores_rounding_noise():
    tiny = 1e-17 * np.array([[1.0, 2.0], [3.0, -1.0]])
    assert np.allclose(null_projection(tiny), np.eye(2))
    assert np.allclose(range_projection(tiny), np.zeros((2, 2)))
    assert np.allclose(null_projection(1e-12 * np.eye(2)), np.zeros((2, 2)))


def test_rank_cut_uses_the_reference_scale(rng):
    u = np.asarray(random_unitary(rng, 3))
    e = u @ np.conj(u).T
    t = np.asarray(random_cmat(rng, 3))
    product = (np.eye(3) - e) @ t
    assert np.allclose(null_projection(product, scale=operator_norm(t)), np.eye(3))
    assert rank_cut(np.array([1e-3, 0.0]), scale=2.0) == pytest.approx(2e-10)
    assert rank_cut(np.array([0.0, 0.0])) == RANK_FLOOR


@pytest.mark.parametrize("small, rank", [(1e-7, 2), (1e-12, 1)])
def test_hermitian_and_general_inputs_get_the_same_rank(rng, small, rank):
    h = diag([1.0, small])
    w = np.asarray(random_unitary(rng, 2))
    for t in (h, np.asarray(h) @ w):
        assert trace(range_projection(t)).real == pytest.approx(rank)
        assert trace(null_projection(t)).real == pytest.approx(2 - rank)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
