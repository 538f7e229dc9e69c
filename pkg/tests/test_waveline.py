#!/usr/bin/env python3
"""
Tests for the grid model of L2: translations, difference-quotient
diagnostics, the jump profile, position/momentum, the Volterra operator,
D3 and the averaging operators
"""

import sys
import os
# Add parent directory to path so we can import from root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from numkernel import RejectedInputError, hermitian_gap
from waveline import (
    CENTRAL, SPECTRAL, GridFunction, grid_function, translate, difference_quotient_diagnostic,
    jump_blowup_profile, position_apply, momentum_apply, position_matrix, momentum_matrix,
    heisenberg_residual, d0_symmetry_gap, volterra_apply, remove_mean, d3_skewness_check,
    averaging_convergence
)


def gaussian(s):
    return np.exp(-s ** 2 / 2.0)


def gaussian_prime(s):
    return -s * np.exp(-s ** 2 / 2.0)


def step(s):
    return (s >= 0.0).astype(float)


def test_grid_is_cell_centred():
    f = grid_function(np.ones_like, 0.0, 1.0, 8)
    assert f.h == pytest.approx(0.125)
    assert f.points[0] == pytest.approx(1.0 / 16.0)
    assert f.points[-1] == pytest.approx(1.0 - 1.0 / 16.0)
    assert f.norm() == pytest.approx(1.0)


def test_grid_function_validation():
    with pytest.raises(RejectedInputError):
        GridFunction(0.0, 1.0, np.ones(4))
    with pytest.raises(RejectedInputError):
        GridFunction(1.0, 0.0, np.ones(16))
    with pytest.raises(RejectedInputError):
        GridFunction(0.0, 1.0, np.full(16, np.inf))


def test_inner_product_needs_same_grid():
    f = grid_function(np.ones_like, 0.0, 1.0, 16)
    g = grid_function(np.ones_like, 0.0, 2.0, 16)
    with pytest.raises(RejectedInputError):
        f.inner(g)
    assert f.inner(f) == pytest.approx(1.0)


def test_translate_indicator():
    f = grid_function(lambda s: ((s >= 0.0) & (s < 0.5)).astype(float), -1.0, 1.0, 64)
    shifted = translate(f, f.h)
    expected = ((f.points >= -f.h) & (f.points < 0.5 - f.h)).astype(float)
    assert np.array_equal(shifted.values.real, expected)
    assert np.array_equal(translate(f, 0.0).values, f.values)


def test_translate_rejects_sub_grid_shift():
    f = grid_function(gaussian, -1.0, 1.0, 64)
    with pytest.raises(RejectedInputError, match="nearest admissible"):
        translate(f, 0.3 * f.h)


def test_diagnostic_gaussian_converges():
    f = grid_function(gaussian, -10.0, 10.0, 1024)
    g = grid_function(gaussian_prime, -10.0, 10.0, 1024)
    diagnostic = difference_quotient_diagnostic(f, g)
    assert diagnostic.verdict == "converging"
    assert diagnostic.residuals[-1] < 1e-3
    assert diagnostic.t_samples[0] == pytest.approx(64 * f.h)
    assert diagnostic.t_samples[-1] == pytest.approx(f.h)


def test_diagnostic_without_candidate_derivative():
    f = grid_function(gaussian, -10.0, 10.0, 1024)
    g = grid_function(gaussian_prime, -10.0, 10.0, 1024)
    estimated = difference_quotient_diagnostic(f)
    exact = difference_quotient_diagnostic(f, g)
    assert estimated.verdict == "converging"
    assert all(r > 0.0 for r in estimated.residuals)
    assert all(b < a for a, b in zip(estimated.residuals, estimated.residuals[1:]))
    assert estimated.residuals == pytest.approx(exact.residuals, rel=1e-2)


def test_diagnostic_step_blows_up():
    f = grid_function(step, -10.0, 10.0, 1024)
    diagnostic = difference_quotient_diagnostic(f)
    assert diagnostic.verdict == "blowing_up"
    assert diagnostic.blowup_exponent == pytest.approx(-0.5, abs=0.05)


def test_diagnostic_zero_function():
    f = grid_function(np.zeros_like, -1.0, 1.0, 64)
    diagnostic = difference_quotient_diagnostic(f)
    assert diagnostic.verdict == "converging"
    assert all(r == 0.0 for r in diagnostic.residuals)


def test_jump_profile_bound_holds():
    f = grid_function(step, -2.0, 2.0, 4000)
    rows = jump_blowup_profile(f, 0.0)
    assert rows
    assert all(row.holds for row in rows)
    assert all(row.t >= 2 * f.h for row in rows)


def test_jump_profile_known_row():
    f = grid_function(step, -2.0, 2.0, 4000)
    (row,) = jump_blowup_profile(f, 0.0, n_values=[11])
    assert row.t == pytest.approx(0.1)
    assert row.squared_norm == pytest.approx(10.0, rel=1e-9)
    assert row.bound == pytest.approx(9.0 + 1.0 / 11.0)


def test_jump_profile_smooth_function_stays_bounded():
    f = grid_function(gaussian, -5.0, 5.0, 2000)
    rows = jump_blowup_profile(f, 0.0, n_values=range(2, 50))
    assert max(row.squared_norm for row in rows) <= 1.3 * math.sqrt(math.pi) / 2.0


def test_jump_point_outside_window():
    f = grid_function(step, -1.0, 1.0, 64)
    with pytest.raises(RejectedInputError):
        jump_blowup_profile(f, 3.0)


def test_position_apply():
    f = grid_function(np.ones_like, -1.0, 2.0, 30)
    assert np.allclose(position_apply(f).values, f.points)


def test_central_momentum_of_ramp_is_constant():
    f = grid_function(lambda s: 3.0 * s, 0.0, 1.0, 64)
    p = momentum_apply(f, CENTRAL)
    assert np.allclose(p.values[1:-1], 3j)


def test_spectral_momentum_of_plane_wave():
    length = 2.0
    f = grid_function(lambda s: np.exp(2j * np.pi * s / length), 0.0, length, 64)
    p = momentum_apply(f, SPECTRAL, check_boundary=False)
    assert np.max(np.abs(p.values + (2.0 * np.pi / length) * f.values)) <= 1e-10


def test_spectral_momentum_needs_vanishing_boundary():
    f = grid_function(np.ones_like, 0.0, 1.0, 64)
    with pytest.raises(RejectedInputError):
        momentum_apply(f, SPECTRAL)
    with pytest.raises(RejectedInputError):
        momentum_apply(f, "forward")


@pytest.mark.parametrize("mode", [CENTRAL, SPECTRAL])
def test_grid_matrices_are_hermitian(mode):
    assert hermitian_gap(position_matrix(-1.0, 1.0, 16)) == 0.0
    assert hermitian_gap(momentum_matrix(-1.0, 1.0, 16, mode)) <= 1e-12


def test_heisenberg_residual_spectral_is_tiny():
    f = grid_function(gaussian, -10.0, 10.0, 256)
    assert heisenberg_residual(f, SPECTRAL) <= 1e-8


def test_heisenberg_residual_on_unit_interval():
    f = grid_function(lambda s: np.exp(-200.0 * (s - 0.5) ** 2), 0.0, 1.0, 512)
    assert heisenberg_residual(f, SPECTRAL) <= 1e-8


def test_heisenberg_residual_central_is_second_order():
    residuals = [heisenberg_residual(grid_function(gaussian, -10.0, 10.0, n), CENTRAL) for n in (128, 256, 512)]
    for coarse, fine in zip(residuals, residuals[1:]):
        assert coarse / fine == pytest.approx(4.0, rel=0.05)


def test_heisenberg_residual_edge_cases():
    assert heisenberg_residual(grid_function(np.zeros_like, -1.0, 1.0, 64)) == 0.0
    with pytest.raises(RejectedInputError):
        heisenberg_residual(grid_function(np.ones_like, -1.0, 1.0, 64))


def test_d0_is_symmetric_on_vanishing_functions():
    f = grid_function(lambda s: np.sin(np.pi * s) ** 2, 0.0, 1.0, 128)
    g = grid_function(lambda s: s * np.exp(-20.0 * (s - 0.5) ** 2) * np.sin(np.pi * s), 0.0, 1.0, 128)
    f = f.with_values(np.where(np.abs(f.values) < 1e-3, 0.0, f.values))
    g = g.with_values(np.where(np.abs(g.values) < 1e-3, 0.0, g.values))
    assert d0_symmetry_gap(f, g) <= 1e-12


def test_volterra_exact_cases():
    one = grid_function(np.ones_like, 0.0, 1.0, 64)
    assert np.max(np.abs(volterra_apply(one).values - one.points)) <= 1e-12
    ramp = grid_function(lambda s: 2.0 * s, 0.0, 1.0, 64)
    assert np.max(np.abs(volterra_apply(ramp).values - (ramp.points ** 2 + ramp.h ** 2 / 4.0))) <= 1e-12
    zero = grid_function(np.zeros_like, 0.0, 1.0, 64)
    assert volterra_apply(zero).norm() == 0.0


def test_volterra_needs_unit_interval():
    with pytest.raises(RejectedInputError):
        volterra_apply(grid_function(np.ones_like, 0.0, 2.0, 64))


def test_volterra_is_a_contraction():
    rng = np.random.Generator(np.random.Philox(11))
    for _ in range(20):
        f = GridFunction(0.0, 1.0, rng.standard_normal(256) + 1j * rng.standard_normal(256))
        assert volterra_apply(f).norm() <= f.norm()


def test_remove_mean():
    f = remove_mean(grid_function(lambda s: s ** 2 + 1.0, 0.0, 1.0, 128))
    assert abs(f.inner(f.with_values(np.ones(128)))) <= 1e-12


@pytest.mark.parametrize("a1, a2", [(0.0, 0.0), (1.0, 1j), (2.0 - 1j, -3.0)])
def test_d3_is_skew(a1, a2):
    f1 = grid_function(lambda s: np.sin(2 * np.pi * s) * math.sqrt(2.0), 0.0, 1.0, 256)
    f2 = grid_function(lambda s: np.cos(4 * np.pi * s) + 1j * np.sin(2 * np.pi * s), 0.0, 1.0, 256)
    assert abs(d3_skewness_check(f1, f2, a1, a2)) <= 1e-10


def test_d3_zero_and_rejection():
    zero = grid_function(np.zeros_like, 0.0, 1.0, 64)
    assert d3_skewness_check(zero, zero, 0.0, 0.0) == 0
    one = grid_function(np.ones_like, 0.0, 1.0, 64)
    with pytest.raises(RejectedInputError):
        d3_skewness_check(one, zero, 0.0, 0.0)


def test_averaging_constant_is_fixed():
    f = grid_function(np.ones_like, -1.0, 1.0, 256)
    assert max(averaging_convergence(f, [16 * f.h, 4 * f.h, f.h])) <= 1e-12


def test_averaging_step_matches_square_root_rate():
    f = grid_function(step, -1.0, 1.0, 2048)
    ts = [k * f.h for k in (256, 64, 16)]
    for residual, t in zip(averaging_convergence(f, ts), ts):
        assert residual / math.sqrt(t / 3.0) == pytest.approx(1.0, rel=0.1)


def test_averaging_gaussian_decreases():
    f = grid_function(gaussian, -10.0, 10.0, 1024)
    residuals = averaging_convergence(f, [k * f.h for k in (64, 32, 16, 8, 4)])
    assert all(b < a for a, b in zip(residuals, residuals[1:]))


def test_averaging_rejects_zero_width():
    f = grid_function(gaussian, -10.0, 10.0, 64)
    with pytest.raises(RejectedInputError):
        averaging_convergence(f, [0.0])


def test_averaging_rejects_increasing_widths():
    f = grid_function(gaussian, -10.0, 10.0, 64)
    with pytest.raises(RejectedInputError):
        averaging_convergence(f, [f.h, 4 * f.h])
    with pytest.raises(RejectedInputError):
        averaging_convergence(f, [4 * f.h, 4 * f.h])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
