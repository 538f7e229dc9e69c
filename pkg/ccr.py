#!/usr/bin/env python3
"""
Bounded obstructions to the canonical commutation relation

Trace obstruction, AB/BA spectrum symmetry, the Wielandt inverse, truncated
oscillator pairs, the spectral-truncation identity and the non-preclosed
product example.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import HBAR, H_PLANCK, SPECTRUM_ROOTS_MAX_DIM
from numkernel import (
    CMat, as_cmat, freeze, commutator, trace, operator_norm, char_poly, poly_roots,
    smallest_singular_value, require_hermitian, RejectedInputError, NumericalFailure,
    SingularityError
)
from spectral import spectral_resolution

logger = logging.getLogger(__name__)


def physical_hbar() -> float:
    """h / 2pi with the CGS value of h (erg*sec)."""
    return H_PLANCK / (2.0 * math.pi)


@dataclass(frozen=True)
class CanonicalPair:
    """Position and momentum truncations at `levels` oscillator levels."""
    q: CMat
    p: CMat
    levels: int
    hbar: float = HBAR


@dataclass(frozen=True)
class ObstructionReport:
    """
    How far [A, B] is from i*hbar*I.

    defect_norm is measured against +i*hbar*I and defect_norm_negative against
    -i*hbar*I; the two sign conventions are both reported.
    """
    commutator_trace: complex
    defect_norm: float
    defect_location: Tuple[int, int]
    defect_norm_negative: float
    dimension: int
    hbar: float

    def as_dict(self) -> Dict:
        return {
            "commutator_trace": {"re": self.commutator_trace.real, "im": self.commutator_trace.imag},
            "defect_norm_vs_plus_i_hbar": self.defect_norm,
            "defect_location": list(self.defect_location),
            "defect_norm_vs_minus_i_hbar": self.defect_norm_negative,
            "dimension": self.dimension,
            "hbar": self.hbar,
        }


def _same_square(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise RejectedInputError(f"expected square matrices of equal size, got {a.shape} and {b.shape}")
    return a.shape[0]


def trace_obstruction(a: CMat, b: CMat, hbar: float = HBAR) -> ObstructionReport:
    """Trace of [A, B] and its distance from the Heisenberg right-hand side."""
    a = as_cmat(a)
    b = as_cmat(b)
    n = _same_square(a, b)
    c = np.asarray(commutator(a, b))
    eye = np.eye(n)
    defect = c - 1j * hbar * eye
    location = np.unravel_index(int(np.argmax(np.abs(defect))), defect.shape)
    return ObstructionReport(
        commutator_trace=trace(c),
        defect_norm=operator_norm(defect),
        defect_location=(int(location[0]), int(location[1])),
        defect_norm_negative=operator_norm(c + 1j * hbar * eye),
        dimension=n,
        hbar=hbar,
    )


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    max_coeff_gap: float
    root_gap: Optional[float]
    tolerance: float


def _greedy_root_gap(first: np.ndarray, second: np.ndarray, floor: float) -> float:
    """Largest distance in a greedy nearest pairing of the nonzero roots."""
    left = [z for z in first if abs(z) > floor]
    right = [z for z in second if abs(z) > floor]
    if len(left) != len(right):
        return math.inf
    gap = 0.0
    for z in left:
        distances = [abs(z - w) for w in right]
        k = int(np.argmin(distances))
        gap = max(gap, distances[k])
        right.pop(k)
    return gap


def spectrum_symmetry_check(a: CMat, b: CMat, tol: float = 1e-9,
                            max_dim: int = SPECTRUM_ROOTS_MAX_DIM) -> SymmetryReport:
    """
    Compare char_poly(AB) and char_poly(BA) coefficientwise.

    The coefficient of lambda^(n-k) is scaled by C(n, k) s^k, s = max(||AB||, ||BA||, 1),
    the bound on its size. Root multisets are a secondary diagnostic.
    """
    a = as_cmat(a)
    b = as_cmat(b)
    n = _same_square(a, b)
    if n > max_dim:
        raise RejectedInputError(f"spectrum_symmetry_check is limited to n <= {max_dim}, got {n}")
    ab = a @ b
    ba = b @ a
    s = max(operator_norm(ab), operator_norm(ba), 1.0)
    p_ab = char_poly(ab)
    p_ba = char_poly(ba)
    gap = 0.0
    for i in range(n + 1):
        k = n - i
        bound = comb(n, k) * s ** k
        gap = max(gap, abs(p_ab.coefficients[i] - p_ba.coefficients[i]) / bound)

    try:
        root_gap = _greedy_root_gap(poly_roots(p_ab), poly_roots(p_ba), floor=1e-6 * s) / s
    except NumericalFailure as e:
        logger.warning(f"Root comparison skipped: {e}")
        root_gap = None
    return SymmetryReport(passed=gap <= tol, max_coeff_gap=gap, root_gap=root_gap, tolerance=tol)


def wielandt_inverse(a: CMat, b: CMat) -> CMat:
    """
    C = B (I - AB)^-1 A + I, an inverse of I - BA.

    Raises:
        SingularityError: when I - AB has a singular value below 1e-8 * ||I - AB||.
    """
    a = as_cmat(a)
    b = as_cmat(b)
    n = _same_square(a, b)
    eye = np.eye(n)
    m = eye - a @ b
    sigma = smallest_singular_value(m)
    if sigma <= 1e-8 * operator_norm(m):
        raise SingularityError(f"I - AB is numerically singular (smallest singular value {sigma:.3e})", sigma)
    return freeze(b @ np.linalg.solve(m, a) + eye)


@dataclass(frozen=True)
class WielandtResiduals:
    left: float
    right: float
    condition: float


def wielandt_residuals(a: CMat, b: CMat, c: CMat) -> WielandtResiduals:
    """||(I - BA)C - I||, ||C(I - BA) - I|| and ||I - BA|| ||C||."""
    a = np.asarray(a)
    b = np.asarray(b)
    c = np.asarray(c)
    eye = np.eye(a.shape[0])
    m = eye - b @ a
    return WielandtResiduals(
        left=operator_norm(m @ c - eye),
        right=operator_norm(c @ m - eye),
        condition=operator_norm(m) * operator_norm(c),
    )


def lowering_matrix(n: int) -> CMat:
    """a[k-1, k] = sqrt(k) for k = 1..n-1."""
    a = np.zeros((n, n), dtype=np.complex128)
    for k in range(1, n):
        a[k - 1, k] = math.sqrt(k)
    return freeze(a)


def truncated_canonical_pair(n: int, hbar: float = HBAR) -> CanonicalPair:
    """
    Oscillator truncation Q = sqrt(hbar/2)(a + a*), P = i sqrt(hbar/2)(a* - a).

    [Q, P] = i hbar (I - n E_{n-1,n-1}).
    """
    if n < 2:
        raise RejectedInputError(f"truncated_canonical_pair needs n >= 2, got {n}")
    if hbar <= 0:
        raise RejectedInputError(f"hbar must be positive, got {hbar}")
    a = np.asarray(lowering_matrix(n))
    a_star = np.conj(a).T
    s = math.sqrt(hbar / 2.0)
    return CanonicalPair(q=freeze(s * (a + a_star)), p=freeze(1j * s * (a_star - a)), levels=n, hbar=hbar)


@dataclass(frozen=True)
class TruncationRow:
    cutoff: float
    rank: int
    residual: float
    truncated_trace: complex


@dataclass(frozen=True)
class TruncationReport:
    rows: Tuple[TruncationRow, ...]
    full_trace: complex
    scale: float


def truncation_identity_check(p: CMat, a: CMat, cutoffs: Sequence[float]) -> TruncationReport:
    """
    E_n P E_n E_n A E_n - E_n A E_n E_n P E_n = E_n B E_n with B = [P, A]
    and E_n the spectral projection of P for [-n, n].
    """
    p = require_hermitian(p)
    a = as_cmat(a)
    _same_square(p, a)
    b = np.asarray(commutator(p, a))
    resolution = spectral_resolution(p)
    scale = (operator_norm(p) + 1.0) * (operator_norm(a) + 1.0)
    rows = []
    for cutoff in cutoffs:
        e = np.asarray(resolution.interval_projection(-cutoff, cutoff))
        epe = e @ p @ e
        eae = e @ a @ e
        ebe = e @ b @ e
        residual = operator_norm(epe @ eae - eae @ epe - ebe)
        rows.append(TruncationRow(
            cutoff=float(cutoff),
            rank=int(round(trace(e).real)),
            residual=residual,
            truncated_trace=trace(ebe),
        ))
        logger.debug(f"cutoff {cutoff}: rank {rows[-1].rank}, residual {residual:.3e}")
    return TruncationReport(rows=tuple(rows), full_trace=trace(b), scale=scale)


@dataclass(frozen=True)
class PreclosedRow:
    m: int
    u_norm: float
    residual: float
    coefficient: Fraction = field(default=Fraction(1))


def preclosed_failure_demo(m_max: int, dim: int) -> List[PreclosedRow]:
    """
    T = diag(1^2, ..., dim^2), B x = <x, z> z with z = sum n^-1 e_n, u_m = m^-1 e_m.

    Exact rational arithmetic: ||u_m|| = 1/m -> 0 while B T u_m = z for every m.
    """
    if m_max < 2 or dim < 2:
        raise RejectedInputError(f"need dim >= m_max >= 2, got m_max={m_max}, dim={dim}")
    if m_max > dim:
        raise RejectedInputError(f"m_max ({m_max}) exceeds dim ({dim})")
    z = [Fraction(1, k) for k in range(1, dim + 1)]
    t_diag = [k * k for k in range(1, dim + 1)]
    rows = []
    for m in range(1, m_max + 1):
        u = [Fraction(0)] * dim
        u[m - 1] = Fraction(1, m)
        tu = [t_k * u_k for t_k, u_k in zip(t_diag, u)]
        coefficient = sum(x * y for x, y in zip(tu, z))
        btu = [coefficient * z_k for z_k in z]
        residual_sq = sum((x - y) ** 2 for x, y in zip(btu, z))
        u_norm_sq = sum(x * x for x in u)
        rows.append(PreclosedRow(
            m=m,
            u_norm=math.sqrt(u_norm_sq),
            residual=math.sqrt(residual_sq),
            coefficient=coefficient,
        ))
    return rows
