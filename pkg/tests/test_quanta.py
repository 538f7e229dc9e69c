#!/usr/bin/env python3
"""
Tests for the old-quantum-theory formulas: black-body densities,
photoelectric effect, de Broglie wavelengths, Bohr orbits and the
Balmer series
"""

import sys
import os
# Add parent directory to path so we can import from root
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

import quanta
from numkernel import RejectedInputError
from quanta import (
    Constants, DEFAULT_CONSTANTS, planck_density, rayleigh_jeans_density, uv_catastrophe_integral,
    uv_catastrophe_quadrature, planck_peak_wavelength, photon_energy, photon_momentum, photoelectric_max_ke,
    de_broglie_wavelength, bohr_orbit, rydberg, balmer_line, balmer_series, audit_dimensions
)


def test_constants_must_be_positive():
    with pytest.raises(RejectedInputError):
        Constants(h=-1.0)
    with pytest.raises(RejectedInputError):
        Constants(c=float("inf"))
    assert DEFAULT_CONSTANTS.hbar == pytest.approx(DEFAULT_CONSTANTS.h / (2.0 * math.pi))


def test_rydberg_matches_printed_value():
    assert rydberg() == pytest.approx(quanta.PRINTED_RYDBERG, abs=0.05)


def test_balmer_series_goldens():
    lines = balmer_series()
    assert [line.l for line in lines] == [3, 4, 5, 6, 7]
    expected = [6560.99, 4859.99, 4339.28, 4100.62, 3968.99]
    for line, value in zip(lines, expected):
        assert line.wavelength_angstrom == pytest.approx(value, abs=0.05)
    assert [line.rounded() for line in lines] == [6561, 4860, 4339, 4101, 3969]
    assert [line.rounded() for line in lines] == [quanta.PRINTED_BALMER_ANGSTROM[line.l] for line in lines]


def test_balmer_observed_table_is_kept():
    assert quanta.OBSERVED_BALMER_ANGSTROM == (6563, 4861, 4380, 4102, 3921)


def test_balmer_wave_numbers_increase():
    lines = balmer_series(2, 12)
    assert all(a.wave_number < b.wave_number for a, b in zip(lines, lines[1:]))
    assert all(line.wave_number < rydberg() / 4.0 for line in lines)


def test_balmer_rejects_bad_levels():
    with pytest.raises(RejectedInputError):
        balmer_line(3, 3)
    with pytest.raises(RejectedInputError):
        balmer_line(0, 2)


def test_de_broglie_electron_at_a_third_of_c():
    v = DEFAULT_CONSTANTS.c / 3.0
    wavelength = de_broglie_wavelength(DEFAULT_CONSTANTS.m_e, v) * quanta.ANGSTROM_PER_CM
    assert wavelength == pytest.approx(0.072777, abs=1e-5)
    assert wavelength == pytest.approx(quanta.PRINTED_DE_BROGLIE_ANGSTROM, abs=5e-4)


def test_de_broglie_scaling():
    m = DEFAULT_CONSTANTS.m_e
    assert de_broglie_wavelength(m, 2e9) == pytest.approx(de_broglie_wavelength(m, 1e9) / 2.0)
    assert de_broglie_wavelength(DEFAULT_CONSTANTS.h, 1.0) == pytest.approx(1.0)
    with pytest.raises(RejectedInputError):
        de_broglie_wavelength(m, 0.0)


def test_bohr_orbits():
    first = bohr_orbit(1)
    assert first.radius == pytest.approx(5.291258e-9, rel=1e-5)
    for k in (2, 3, 7):
        orbit = bohr_orbit(k)
        assert orbit.radius / first.radius == pytest.approx(k ** 2)
        assert orbit.energy * k ** 2 == pytest.approx(first.energy)
        circumference = 2 * math.pi * orbit.radius
        assert circumference == pytest.approx(k * de_broglie_wavelength(DEFAULT_CONSTANTS.m_e, orbit.speed))
    assert first.energy < 0


def test_bohr_rejects_non_integer_orbit():
    with pytest.raises(RejectedInputError):
        bohr_orbit(1.5)
    with pytest.raises(RejectedInputError):
        bohr_orbit(0)


def test_planck_tends_to_rayleigh_jeans_at_long_wavelengths():
    t = 5000.0
    k = DEFAULT_CONSTANTS
    lam = 100.0 * k.h * k.c / (k.k_B * t)
    assert planck_density(lam, t) / rayleigh_jeans_density(lam, t) == pytest.approx(1.0, abs=0.01)


def test_planck_vanishes_at_short_wavelengths():
    assert planck_density(1e-9, 300.0) == 0.0


def test_planck_below_rayleigh_jeans():
    lam = np.geomspace(1e-6, 1.0, 200)
    assert np.all(planck_density(lam, 3000.0) <= rayleigh_jeans_density(lam, 3000.0) * (1.0 + 1e-12))


def test_planck_rejects_nonpositive_inputs():
    with pytest.raises(RejectedInputError):
        planck_density(0.0, 300.0)
    with pytest.raises(RejectedInputError):
        planck_density(1e-4, -1.0)


def test_planck_peak_is_unimodal():
    peak = planck_peak_wavelength(5000.0)
    assert peak.unimodal
    k = DEFAULT_CONSTANTS
    wien = k.h * k.c / (4.965114 * k.k_B * 5000.0)
    assert peak.wavelength == pytest.approx(wien, rel=0.01)


def test_uv_catastrophe_closed_form_and_quadrature():
    closed = uv_catastrophe_integral(1e-4, 1e-2, 5000.0)
    assert uv_catastrophe_quadrature(1e-4, 1e-2, 5000.0) == pytest.approx(closed, rel=1e-6)
    assert uv_catastrophe_integral(1e-4, 1e-4, 5000.0) == 0.0
    assert uv_catastrophe_quadrature(1e-4, 1e-4, 5000.0) == 0.0


def test_uv_catastrophe_grows_eightfold_when_halving():
    r = 1.0
    first = uv_catastrophe_integral(1e-3, r, 300.0)
    second = uv_catastrophe_integral(5e-4, r, 300.0)
    assert second / first == pytest.approx(8.0, rel=1e-8)


def test_uv_catastrophe_rejects_inverted_band():
    with pytest.raises(RejectedInputError):
        uv_catastrophe_integral(2.0, 1.0, 300.0)


def test_photoelectric_threshold():
    threshold = 1e15
    work = DEFAULT_CONSTANTS.h * threshold
    assert photoelectric_max_ke(threshold, work).emitted
    assert photoelectric_max_ke(threshold, work).kinetic_energy == pytest.approx(0.0, abs=1e-24)
    below = photoelectric_max_ke(0.5 * threshold, work)
    assert not below.emitted
    assert below.kinetic_energy < 0
    above = photoelectric_max_ke(2.0 * threshold, work)
    assert above.kinetic_energy == pytest.approx(work)
    with pytest.raises(RejectedInputError):
        photoelectric_max_ke(-1.0, work)


def test_photon_energy_and_momentum():
    assert photon_energy(1e15) == pytest.approx(DEFAULT_CONSTANTS.h * 1e15)
    assert photon_momentum(5e-5) == pytest.approx(DEFAULT_CONSTANTS.h / 5e-5)


def test_dimensional_audit_is_consistent():
    report = audit_dimensions()
    assert len(report) == 11
    assert all(entry["consistent"] for entry in report)
    assert {entry["quantity"] for entry in report} >= {"rydberg", "bohr radius", "de_broglie_wavelength"}


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
