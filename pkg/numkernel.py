#!/usr/bin/env python3
"""
Dense complex linear algebra kernel for opspectra

Matrices are plain numpy complex128 arrays, returned read-only so that every
value can be shared freely. Everything else in the project builds on the
arithmetic, norms, traces, characteristic polynomials and root finder here.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial as npoly

from config import (
    JACOBI_OFFDIAG_TOL, JACOBI_MAX_SWEEPS, POWER_ITERATIONS, CHAR_POLY_MAX_DIM,
    ROOT_TOL, ROOT_MAX_SWEEPS, ROOT_ROTATION, HERMITIAN_TOL
)

logger = logging.getLogger(__name__)

CMat = npt.NDArray[np.complex128]

_EPS = np.finfo(np.float64).eps


class OpSpectraError(Exception):
    """Base class for every error raised by opspectra."""


class RejectedInputError(OpSpectraError, ValueError):
    """Input violates a precondition (shape, range, self-adjointness...)."""


class NumericalFailure(OpSpectraError, np.linalg.LinAlgError):
    """An iteration did not converge or a matrix is numerically singular."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SingularityError(NumericalFailure):
    """A matrix that must be inverted has a negligible singular value."""

    def __init__(self, message: str, singular_value: float):
        super().__init__(message, {"singular_value": singular_value})
        self.singular_value = singular_value


def freeze(arr: np.ndarray) -> CMat:
    """Return arr as a read-only complex128 array (copying only when needed)."""
    out = np.asarray(arr, dtype=np.complex128)
    if out is arr and out.flags.writeable and out.base is not None:
        out = out.copy()
    out.setflags(write=False)
    return out


def as_cmat(data) -> CMat:
    """Validate and copy data into an immutable 2-D complex matrix."""
    arr = np.array(data, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise RejectedInputError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise RejectedInputError("matrix has non-finite entries")
    arr.setflags(write=False)
    return arr


def _require_square(a: CMat, name: str = "matrix") -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise RejectedInputError(f"{name} must be square, got shape {a.shape}")
    return a.shape[0]


def identity(n: int) -> CMat:
    return freeze(np.eye(n, dtype=np.complex128))


def zeros(rows: int, cols: Optional[int] = None) -> CMat:
    return freeze(np.zeros((rows, cols or rows), dtype=np.complex128))


def matrix_unit(n: int, i: int, j: int) -> CMat:
    """E_ij of size n (0-based indices)."""
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return freeze(e)


def diag(values) -> CMat:
    return freeze(np.diag(np.asarray(values, dtype=np.complex128)))


def adjoint(a: CMat) -> CMat:
    return freeze(np.conj(np.asarray(a)).T)


def matmul(a: CMat, b: CMat) -> CMat:
    """Standard product; rejects mismatched inner dimensions."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise RejectedInputError(f"cannot multiply {a.shape} by {b.shape}")
    return freeze(a @ b)


def commutator(a: CMat, b: CMat) -> CMat:
    """AB - BA for square matrices of equal size."""
    a = np.asarray(a)
    b = np.asarray(b)
    _require_square(a, "A")
    _require_square(b, "B")
    if a.shape != b.shape:
        raise RejectedInputError(f"commutator needs equal sizes, got {a.shape} and {b.shape}")
    return freeze(a @ b - b @ a)


def trace(a: CMat) -> complex:
    a = np.asarray(a)
    _require_square(a)
    return complex(np.trace(a))


def normalized_trace(a: CMat) -> complex:
    a = np.asarray(a)
    return trace(a) / a.shape[0]


def frobenius_norm(a: CMat) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def hermitian_gap(a: CMat) -> float:
    """Frobenius norm of A - A*."""
    a = np.asarray(a)
    return float(np.linalg.norm(a - np.conj(a).T))


def require_hermitian(a: CMat, tol: float = HERMITIAN_TOL) -> CMat:
    """Return a as a frozen matrix after checking self-adjointness to tol (relative)."""
    a = as_cmat(a)
    _require_square(a)
    gap = hermitian_gap(a)
    if gap > tol * max(1.0, frobenius_norm(a)):
        raise RejectedInputError(f"matrix is not self-adjoint (||A - A*|| = {gap:.3e})")
    return a


def _offdiag_mass(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(h: CMat, offdiag_tol: float = JACOBI_OFFDIAG_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS,
                compute_vectors: bool = True) -> Tuple[np.ndarray, Optional[CMat]]:
    """
    Cyclic Jacobi eigensolver for a Hermitian matrix.

    Each rotation first removes the phase of the pivot a_pq, then applies the
    classical real rotation. Terminates when the off-diagonal Frobenius mass
    drops below offdiag_tol * ||h||_F.

    Returns:
        Eigenvalues in ascending order and (optionally) the unitary matrix whose
        columns are the matching eigenvectors.
    """
    a = np.array(h, dtype=np.complex128)
    n = _require_square(a)
    v = np.eye(n, dtype=np.complex128) if compute_vectors else None
    scale = float(np.linalg.norm(a))
    threshold = offdiag_tol * scale
    skip_below = 0.01 * threshold / n

    off = _offdiag_mass(a)
    sweep = 0
    while off > threshold:
        if sweep >= max_sweeps:
            logger.warning(f"Jacobi did not converge after {max_sweeps} sweeps (off-diagonal mass {off:.3e})")
            raise NumericalFailure(
                "Jacobi eigensolver did not converge",
                {"sweeps": sweep, "offdiag_mass": off, "threshold": threshold},
            )
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip_below:
                    continue
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                phase = np.conj(apq) / mag
                # G = diag(1, e^{-i phi}) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = np.conj(g).T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if v is not None:
                    v[:, idx] = v[:, idx] @ g
        off = _offdiag_mass(a)

    logger.debug(f"Jacobi converged in {sweep} sweeps (n={n})")
    eigenvalues = np.real(np.diag(a)).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvalues.setflags(write=False)
    if v is None:
        return eigenvalues, None
    return eigenvalues, freeze(v[:, order])


def _power_top_eigenvalue(gram: np.ndarray, iterations: int = POWER_ITERATIONS) -> float:
    """Largest eigenvalue of a positive semidefinite matrix by power iteration."""
    n = gram.shape[0]
    x = np.linspace(1.0, 2.0, n).astype(np.complex128)
    x /= np.linalg.norm(x)
    value = 0.0
    for _ in range(iterations):
        y = gram @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        new_value = float(np.real(np.vdot(x, y)))
        x = y / norm
        if abs(new_value - value) <= 4 * _EPS * abs(new_value):
            return new_value
        value = new_value
    return value


def operator_norm(a: CMat) -> float:
    """
    Largest singular value: sqrt of the top eigenvalue of A*A.

    Uses the Jacobi solver; power iteration takes over if Jacobi fails.
    """
    a = np.asarray(a, dtype=np.complex128)
    gram = np.conj(a).T @ a
    try:
        eigenvalues, _ = jacobi_eigh(gram, compute_vectors=False)
        top = float(eigenvalues[-1])
    except NumericalFailure:
        logger.warning("Falling back to power iteration for the operator norm")
        top = _power_top_eigenvalue(gram)
    return math.sqrt(max(top, 0.0))


def smallest_singular_value(a: CMat) -> float:
    a = np.asarray(a, dtype=np.complex128)
    eigenvalues, _ = jacobi_eigh(np.conj(a).T @ a, compute_vectors=False)
    return math.sqrt(max(float(eigenvalues[0]), 0.0))


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial, coefficients in ascending degree."""
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128).ravel()
        if coeffs.size == 0:
            raise RejectedInputError("polynomial needs at least one coefficient")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, z):
        return poly_eval(self, z)


def poly_eval(p: Polynomial, z):
    """Horner evaluation at a scalar or array."""
    return npoly.polyval(z, p.coefficients)


def char_poly(a: CMat, max_dim: int = CHAR_POLY_MAX_DIM) -> Polynomial:
    """
    Monic characteristic polynomial det(lambda I - A) by Faddeev-LeVerrier.

    M_1 = I, c_{n-k} = -tr(A M_k)/k, M_{k+1} = A M_k + c_{n-k} I.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = _require_square(a)
    if n > max_dim:
        raise RejectedInputError(f"char_poly is limited to n <= {max_dim}, got {n}")
    eye = np.eye(n, dtype=np.complex128)
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[n] = 1.0
    m = eye
    for k in range(1, n + 1):
        am = a @ m
        coeffs[n - k] = -np.trace(am) / k
        m = am + coeffs[n - k] * eye
    return Polynomial(coeffs)


def poly_roots(p: Polynomial, tol: float = ROOT_TOL, max_sweeps: int = ROOT_MAX_SWEEPS) -> np.ndarray:
    """
    All roots with multiplicity by Durand-Kerner simultaneous iteration.

    Initial guesses sit on a circle of radius 1 + max|c_i| (monic form), rotated
    by ROOT_ROTATION. Stops when the largest update is below tol (relative to
    the root magnitude) or every residual reaches the rounding floor, which is
    where multiple roots stall.
    """
    coeffs = np.asarray(p.coefficients, dtype=np.complex128)
    if coeffs.size < 2:
        raise RejectedInputError("poly_roots needs degree >= 1")
    if coeffs[-1] == 0:
        raise RejectedInputError("leading coefficient must be nonzero")
    monic = coeffs / coeffs[-1]
    abs_coeffs = np.abs(monic)
    n = monic.size - 1

    radius = 1.0 + float(np.max(np.abs(monic[:-1])))
    z = radius * np.exp(1j * (2.0 * np.pi * np.arange(n) / n + ROOT_ROTATION))
    residuals = np.abs(npoly.polyval(z, monic))

    for sweep in range(1, max_sweeps + 1):
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, 1.0)
        update = npoly.polyval(z, monic) / np.prod(diffs, axis=1)
        z = z - update
        step = float(np.max(np.abs(update)))
        residuals = np.abs(npoly.polyval(z, monic))
        floor = 8.0 * _EPS * npoly.polyval(np.abs(z), abs_coeffs)
        if step < tol * max(1.0, float(np.max(np.abs(z)))) or np.all(residuals <= floor):
            logger.debug(f"Durand-Kerner converged in {sweep} sweeps (degree {n})")
            roots = np.sort_complex(z)
            roots.setflags(write=False)
            return roots

    logger.warning(f"Durand-Kerner did not converge after {max_sweeps} sweeps")
    raise NumericalFailure(
        "polynomial root iteration did not converge",
        {"sweeps": max_sweeps, "residuals": residuals.tolist(), "last_step": step},
    )


def random_cmat(rng: np.random.Generator, rows: int, cols: Optional[int] = None) -> CMat:
    """Complex Gaussian matrix with entries of variance 1/rows."""
    cols = cols or rows
    raw = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return freeze(raw / math.sqrt(2.0 * rows))


def random_hermitian(rng: np.random.Generator, n: int) -> CMat:
    g = random_cmat(rng, n)
    return freeze((g + np.conj(g).T) / 2.0)


def random_unitary(rng: np.random.Generator, n: int) -> CMat:
    """Haar-distributed unitary (QR of a Gaussian with phase correction)."""
    q, r = np.linalg.qr(random_cmat(rng, n))
    phases = np.diag(r) / np.abs(np.diag(r))
    return freeze(q * phases)
