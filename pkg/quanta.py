#!/usr/bin/env python3
"""
Old quantum theory formulas in CGS units for opspectra

Black-body densities (Planck and Rayleigh-Jeans), the ultraviolet catastrophe,
Einstein's photoelectric equation, de Broglie wavelengths, Bohr orbits and the
Balmer series, with a dimensional audit of every formula.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np

from config import (
    H_PLANCK, ELECTRON_MASS, ELECTRON_CHARGE, SPEED_OF_LIGHT, BOLTZMANN,
    QUADRATURE_POINTS, PEAK_SCAN_POINTS
)
from numkernel import RejectedInputError

logger = logging.getLogger(__name__)

ANGSTROM_PER_CM = 1e8

# Observed hydrogen lines as printed alongside the computed series (l = 3..7)
OBSERVED_BALMER_ANGSTROM = (6563, 4861, 4380, 4102, 3921)

# Values printed with the computed series, used as regression goldens
PRINTED_RYDBERG = 109739.53  # 1/cm
PRINTED_BALMER_ANGSTROM = {3: 6561, 4: 4860, 5: 4339, 6: 4101, 7: 3969}
PRINTED_DE_BROGLIE_ANGSTROM = 0.0727  # electron at c/3

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class Constants:
    """Physical constants (CGS)."""
    h: float = H_PLANCK  # erg*sec
    m_e: float = ELECTRON_MASS  # gram
    epsilon: float = ELECTRON_CHARGE  # esu
    c: float = SPEED_OF_LIGHT  # cm/sec
    k_B: float = BOLTZMANN  # erg/K

    def __post_init__(self):
        for name in ("h", "m_e", "epsilon", "c", "k_B"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise RejectedInputError(f"constant {name} must be positive and finite, got {value}")

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)


DEFAULT_CONSTANTS = Constants()


def _positive(name: str, value) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0)) or not np.all(np.isfinite(arr)):
        raise RejectedInputError(f"{name} must be positive, got {value}")
    return arr


def _scalar_or_array(values: np.ndarray, like):
    return float(values) if np.ndim(like) == 0 else values


def planck_density(lam, temperature, constants: Constants = DEFAULT_CONSTANTS):
    """
    Energy per unit volume per unit wavelength, 8 pi h c lam^-5 / (e^x - 1).

    x = h c / (k lam T); evaluated as e^-x / (1 - e^-x) so that neither large
    nor small x overflows or cancels.
    """
    lam_arr = _positive("wavelength", lam)
    t_arr = _positive("temperature", temperature)
    c = constants
    x = c.h * c.c / (c.k_B * lam_arr * t_arr)
    with np.errstate(over="ignore", under="ignore"):
        values = 8.0 * math.pi * c.h * c.c * lam_arr ** -5.0 * np.exp(-x) / (-np.expm1(-x))
    return _scalar_or_array(values, lam if np.ndim(lam) else temperature)


def rayleigh_jeans_density(lam, temperature, constants: Constants = DEFAULT_CONSTANTS):
    """Classical density 8 pi k T lam^-4."""
    lam_arr = _positive("wavelength", lam)
    t_arr = _positive("temperature", temperature)
    values = 8.0 * math.pi * constants.k_B * t_arr * lam_arr ** -4.0
    return _scalar_or_array(values, lam if np.ndim(lam) else temperature)


def _check_band(lambda_min: float, r: float):
    _positive("lambda_min", lambda_min)
    _positive("r", r)
    if lambda_min > r:
        raise RejectedInputError(f"lambda_min ({lambda_min}) must not exceed r ({r})")


def uv_catastrophe_integral(lambda_min: float, r: float, temperature: float,
                            constants: Constants = DEFAULT_CONSTANTS) -> float:
    """Rayleigh-Jeans energy between lambda_min and r: (8 pi k T / 3)(lambda_min^-3 - r^-3)."""
    _check_band(lambda_min, r)
    _positive("temperature", temperature)
    return 8.0 * math.pi * constants.k_B * temperature / 3.0 * (lambda_min ** -3 - r ** -3)


def uv_catastrophe_quadrature(lambda_min: float, r: float, temperature: float,
                              constants: Constants = DEFAULT_CONSTANTS,
                              points: int = QUADRATURE_POINTS) -> float:
    """The same integral by the trapezoid rule in u = ln(lambda)."""
    _check_band(lambda_min, r)
    if lambda_min == r:
        return 0.0
    u = np.linspace(math.log(lambda_min), math.log(r), points)
    lam = np.exp(u)
    return float(_trapezoid(rayleigh_jeans_density(lam, temperature, constants) * lam, u))


@dataclass(frozen=True)
class PlanckPeak:
    wavelength: float
    density: float
    unimodal: bool


def planck_peak_wavelength(temperature: float, constants: Constants = DEFAULT_CONSTANTS,
                           points: int = PEAK_SCAN_POINTS) -> PlanckPeak:
    """
    Scan log-spaced wavelengths around hc/(5kT) for the maximum of the density.

    unimodal is True when the scanned values rise and then fall exactly once.
    """
    _positive("temperature", temperature)
    centre = constants.h * constants.c / (5.0 * constants.k_B * temperature)
    lam = np.geomspace(centre / 100.0, centre * 100.0, points)
    values = planck_density(lam, temperature, constants)
    signs = np.sign(np.diff(values))
    changes = int(np.count_nonzero(np.diff(signs) != 0))
    peak = int(np.argmax(values))
    return PlanckPeak(wavelength=float(lam[peak]), density=float(values[peak]),
                      unimodal=changes == 1 and signs[0] > 0 and signs[-1] < 0)


@dataclass(frozen=True)
class PhotoelectricResult:
    """Largest electron kinetic energy; emitted is False below the threshold frequency."""
    kinetic_energy: float
    emitted: bool


def photon_energy(nu: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    return constants.h * float(_positive("frequency", nu))


def photon_momentum(lam: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    return constants.h / float(_positive("wavelength", lam))


def photoelectric_max_ke(nu: float, a: float, constants: Constants = DEFAULT_CONSTANTS) -> PhotoelectricResult:
    """(1/2) m v_m^2 = h nu - a."""
    if nu < 0 or a < 0:
        raise RejectedInputError(f"frequency and work function must be nonnegative, got nu={nu}, a={a}")
    energy = constants.h * nu - a
    return PhotoelectricResult(kinetic_energy=energy, emitted=energy >= 0.0)


def de_broglie_wavelength(m: float, v: float, constants: Constants = DEFAULT_CONSTANTS) -> float:
    """h / (m v) in cm."""
    _positive("mass", m)
    _positive("speed", v)
    return constants.h / (m * v)


@dataclass(frozen=True)
class BohrOrbit:
    """Stable orbit k: radius (cm), total energy (erg) and orbital speed (cm/sec)."""
    k: int
    radius: float
    energy: float
    speed: float


def bohr_orbit(k: int, constants: Constants = DEFAULT_CONSTANTS) -> BohrOrbit:
    """r = k^2 h^2 / (4 pi^2 m e^2), E = -2 pi^2 m e^4 / (k^2 h^2), v = k hbar / (m r)."""
    if int(k) != k or k < 1:
        raise RejectedInputError(f"orbit index must be a positive integer, got {k}")
    c = constants
    radius = k * k * c.h ** 2 / (4.0 * math.pi ** 2 * c.m_e * c.epsilon ** 2)
    energy = -2.0 * math.pi ** 2 * c.m_e * c.epsilon ** 4 / (k * k * c.h ** 2)
    speed = k * c.hbar / (c.m_e * radius)
    return BohrOrbit(k=int(k), radius=radius, energy=energy, speed=speed)


def rydberg(constants: Constants = DEFAULT_CONSTANTS) -> float:
    """2 pi^2 m e^4 / (h^3 c), in waves per cm."""
    c = constants
    return 2.0 * math.pi ** 2 * c.m_e * c.epsilon ** 4 / (c.h ** 3 * c.c)


@dataclass(frozen=True)
class BalmerLine:
    k: int
    l: int
    wave_number: float  # 1/cm
    wavelength_angstrom: float

    def rounded(self) -> int:
        """Wavelength to the nearest whole angstrom, as printed in the historical tables."""
        return int(round(self.wavelength_angstrom))


def balmer_line(k: int, l: int, constants: Constants = DEFAULT_CONSTANTS) -> BalmerLine:
    """w = R (1/k^2 - 1/l^2), lambda = 1/w."""
    if k < 1 or l <= k:
        raise RejectedInputError(f"need 1 <= k < l, got k={k}, l={l}")
    w = rydberg(constants) * (1.0 / k ** 2 - 1.0 / l ** 2)
    return BalmerLine(k=k, l=l, wave_number=w, wavelength_angstrom=ANGSTROM_PER_CM / w)


def balmer_series(k: int = 2, l_max: int = 7, constants: Constants = DEFAULT_CONSTANTS) -> List[BalmerLine]:
    return [balmer_line(k, l, constants) for l in range(k + 1, l_max + 1)]


# Dimensional audit
BASE_UNITS = ("g", "cm", "s", "K")


@dataclass(frozen=True)
class Dimension:
    """Exponents of gram, centimetre, second and kelvin."""
    exponents: Tuple[Fraction, Fraction, Fraction, Fraction] = (Fraction(0),) * 4

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, power) -> "Dimension":
        return Dimension(tuple(a * Fraction(power) for a in self.exponents))

    def __str__(self) -> str:
        parts = [f"{u}^{e}" for u, e in zip(BASE_UNITS, self.exponents) if e != 0]
        return " ".join(parts) or "1"


def _dim(g=0, cm=0, s=0, K=0) -> Dimension:
    return Dimension((Fraction(g), Fraction(cm), Fraction(s), Fraction(K)))


GRAM = _dim(g=1)
CM = _dim(cm=1)
SEC = _dim(s=1)
KELVIN = _dim(K=1)
ONE = _dim()
ERG = _dim(g=1, cm=2, s=-2)
ESU = _dim(g=Fraction(1, 2), cm=Fraction(3, 2), s=-1)

UNITS: Dict[str, Dimension] = {
    "h": ERG * SEC,
    "m_e": GRAM,
    "epsilon": ESU,
    "c": CM / SEC,
    "k_B": ERG / KELVIN,
    "lambda": CM,
    "T": KELVIN,
    "nu": SEC ** -1,
    "v": CM / SEC,
}


def audit_dimensions() -> List[Dict]:
    """Dimension of every formula against the unit it is reported in."""
    u = UNITS
    checks = [
        ("planck exponent hc/(k lambda T)", u["h"] * u["c"] / (u["k_B"] * u["lambda"] * u["T"]), ONE),
        ("planck_density", u["h"] * u["c"] * u["lambda"] ** -5, ERG / CM ** 4),
        ("rayleigh_jeans_density", u["k_B"] * u["T"] * u["lambda"] ** -4, ERG / CM ** 4),
        ("uv_catastrophe_integral", u["k_B"] * u["T"] * u["lambda"] ** -3, ERG / CM ** 3),
        ("photon_energy", u["h"] * u["nu"], ERG),
        ("photon_momentum", u["h"] / u["lambda"], GRAM * CM / SEC),
        ("de_broglie_wavelength", u["h"] / (u["m_e"] * u["v"]), CM),
        ("bohr radius", u["h"] ** 2 / (u["m_e"] * u["epsilon"] ** 2), CM),
        ("bohr energy", u["m_e"] * u["epsilon"] ** 4 / u["h"] ** 2, ERG),
        ("bohr speed", u["h"] / (u["m_e"] * CM), CM / SEC),
        ("rydberg", u["m_e"] * u["epsilon"] ** 4 / (u["h"] ** 3 * u["c"]), CM ** -1),
    ]
    report = []
    for name, computed, expected in checks:
        report.append({
            "quantity": name,
            "computed": str(computed),
            "expected": str(expected),
            "consistent": computed == expected,
        })
        if computed != expected:
            logger.error(f"Dimension mismatch for {name}: {computed} vs {expected}")
    return report
