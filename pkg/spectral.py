#!/usr/bin/env python3
"""
Finite-dimensional spectral theory for opspectra

Hermitian eigendecomposition, spectral resolutions {E_lambda}, the pointwise
function calculus, one-parameter unitary groups exp(itH), polar decomposition
and the range/null projection identities.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from more_itertools import split_when

from config import HERMITIAN_TOL, EIGEN_MERGE_TOL, RANK_CUT, RANK_FLOOR
from numkernel import (
    CMat, freeze, require_hermitian, jacobi_eigh, adjoint, identity, zeros,
    operator_norm, frobenius_norm, NumericalFailure, RejectedInputError
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HermitianEigen:
    """Ascending eigenvalues and the unitary basis of eigenvectors (columns)."""
    eigenvalues: np.ndarray
    basis: CMat

    def reconstruct(self) -> CMat:
        return freeze((self.basis * self.eigenvalues) @ np.conj(self.basis).T)


@dataclass(frozen=True)
class SpectralResolution:
    """
    Cumulative spectral projections of a Hermitian matrix.

    projections[i] is E at thresholds[i]: the projection onto the eigenspaces
    with eigenvalue <= thresholds[i]. E is right-continuous by construction.
    """
    thresholds: Tuple[float, ...]
    projections: Tuple[CMat, ...]
    dimension: int

    def projection_at(self, lam: float) -> CMat:
        """E_lambda for any real lambda."""
        current = zeros(self.dimension)
        for threshold, projection in zip(self.thresholds, self.projections):
            if threshold > lam:
                break
            current = projection
        return current

    def interval_projection(self, lo: float, hi: float) -> CMat:
        """Spectral projection for the closed interval [lo, hi]."""
        below = zeros(self.dimension)
        upto = zeros(self.dimension)
        for threshold, projection in zip(self.thresholds, self.projections):
            if threshold < lo:
                below = projection
            if threshold <= hi:
                upto = projection
        return freeze(upto - below)

    def truncation(self, n: float) -> CMat:
        """F_n = E_n - E_{-n}."""
        return freeze(self.projection_at(n) - self.projection_at(-n))

    def reconstruct(self) -> CMat:
        """Sum of lambda_i (E_{lambda_i} - E_{lambda_{i-1}})."""
        total = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        previous = np.zeros_like(total)
        for threshold, projection in zip(self.thresholds, self.projections):
            total += threshold * (projection - previous)
            previous = projection
        return freeze(total)


@dataclass(frozen=True)
class PolarParts:
    """T = V H with V a partial isometry and H = (T*T)^(1/2)."""
    isometry: CMat
    modulus: CMat


def hermitian_eigen(a: CMat, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """Full eigensystem of a self-adjoint matrix by cyclic Jacobi rotations."""
    a = require_hermitian(a, tol)
    eigenvalues, basis = jacobi_eigh(a)
    return HermitianEigen(eigenvalues, basis)


def _clusters(eigenvalues: np.ndarray, merge_tol: float) -> List[List[int]]:
    """Group indices of ascending eigenvalues that lie within merge_tol of each other."""
    indices = range(len(eigenvalues))
    return [list(group) for group in split_when(indices, lambda i, j: eigenvalues[j] - eigenvalues[i] > merge_tol)]


def spectral_resolution(a: CMat, merge_tol: float = EIGEN_MERGE_TOL) -> SpectralResolution:
    """
    Spectral resolution with one threshold per distinct eigenvalue.

    Eigenvalues closer than merge_tol * ||A|| are merged; the threshold is the
    mean of the merged cluster.
    """
    eig = hermitian_eigen(a)
    n = eig.basis.shape[0]
    norm = max(float(np.max(np.abs(eig.eigenvalues))), 1e-300)
    thresholds = []
    projections = []
    cumulative = np.zeros((n, n), dtype=np.complex128)
    for group in _clusters(eig.eigenvalues, merge_tol * norm):
        vectors = eig.basis[:, group]
        cumulative = cumulative + vectors @ np.conj(vectors).T
        thresholds.append(float(np.mean(eig.eigenvalues[group])))
        projections.append(freeze(cumulative.copy()))
    return SpectralResolution(tuple(thresholds), tuple(projections), n)


def _hermitian_floor(a: np.ndarray, basis: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix that is nearly diagonal in basis."""
    a = np.conj(basis).T @ a @ basis
    sym = (a + np.conj(a).T) / 2.0
    eigenvalues, _ = jacobi_eigh(sym, compute_vectors=False)
    return float(eigenvalues[0])


def resolution_report(a: CMat, resolution: SpectralResolution = None) -> Dict[str, float]:
    """
    Residuals of the resolution properties, all scaled by max(1, ||A||).

    (i)   E below -||A|| is 0 and E at ||A|| is I
    (ii)  E_l E_l' = E_min(l, l')
    (iv)  A E_l <= l E_l and l (I - E_l) <= A (I - E_l) (violation depth)
    (v)   A = sum l_i (E_i - E_{i-1})
    """
    a = require_hermitian(a)
    res = resolution or spectral_resolution(a)
    basis = np.asarray(hermitian_eigen(a).basis)
    n = res.dimension
    norm = operator_norm(a)
    scale = max(1.0, norm)
    eye = np.eye(n)

    below = res.projection_at(-norm - 1e-9 * scale)
    top = res.projection_at(norm + 1e-9 * scale)
    gap_i = max(frobenius_norm(below), frobenius_norm(top - eye))

    gap_ii = 0.0
    for i, e_i in enumerate(res.projections):
        for j in range(i, len(res.projections)):
            gap_ii = max(gap_ii, frobenius_norm(e_i @ res.projections[j] - e_i),
                         frobenius_norm(res.projections[j] @ e_i - e_i))

    gap_iv = 0.0
    for lam, e in zip(res.thresholds, res.projections):
        upper = lam * e - a @ e
        lower = a @ (eye - e) - lam * (eye - e)
        gap_iv = max(gap_iv, -_hermitian_floor(upper, basis), -_hermitian_floor(lower, basis))

    gap_v = frobenius_norm(res.reconstruct() - a)
    return {
        "i": gap_i / scale,
        "ii": gap_ii,
        "iv": max(gap_iv, 0.0) / scale,
        "v": gap_v / scale,
    }


def fun_calculus(a: CMat, f: Callable[[np.ndarray], np.ndarray]) -> CMat:
    """basis diag(f(lambda_i)) basis*; f receives the eigenvalue array."""
    eig = hermitian_eigen(a)
    values = np.asarray(f(eig.eigenvalues), dtype=np.complex128)
    if values.shape != eig.eigenvalues.shape:
        values = np.broadcast_to(values, eig.eigenvalues.shape)
    return freeze((eig.basis * values) @ np.conj(eig.basis).T)


def unitary_group(h: CMat, t: float) -> CMat:
    """U_t = exp(itH)."""
    return fun_calculus(h, lambda lam: np.exp(1j * t * lam))


def stone_generator_gap(h: CMat, t: float, x: np.ndarray) -> Tuple[float, float]:
    """
    ||(U_t x - x)/t - iHx|| and the bound ||H||^2 ||x|| |t| it must respect.
    """
    x = np.asarray(x, dtype=np.complex128)
    u = unitary_group(h, t)
    gap = float(np.linalg.norm((u @ x - x) / t - 1j * (np.asarray(h) @ x)))
    bound = operator_norm(h) ** 2 * float(np.linalg.norm(x)) * abs(t)
    return gap, bound


def _singular_system(t: CMat) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """T = W diag(sigma) X*, sigma descending; returns (W, sigma, X)."""
    t = np.asarray(t, dtype=np.complex128)
    try:
        left, sigma, right_h = np.linalg.svd(t)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"singular value decomposition did not converge: {e}", {"shape": t.shape}) from e
    return left, sigma, np.conj(right_h).T


def rank_cut(sigma: np.ndarray, scale: Optional[float] = None) -> float:
    """
    Singular values at or below this count as zero.

    Relative to the largest singular value, or to the caller's scale when that
    is larger, and never below RANK_FLOOR.
    """
    reference = float(sigma[0]) if sigma.size else 0.0
    if scale is not None:
        reference = max(reference, float(scale))
    return max(RANK_CUT * reference, RANK_FLOOR)


def polar_decompose(t: CMat) -> PolarParts:
    """
    T = V H with H = (T*T)^(1/2) and V = T H^+.

    Both come from one singular value decomposition T = W S X*: H = X S X*,
    and V = W X* restricted to the singular values above the rank cut.
    """
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise RejectedInputError(f"polar_decompose expects a square matrix, got {t.shape}")
    left, sigma, right = _singular_system(t)
    keep = sigma > rank_cut(sigma)
    modulus = (right * sigma) @ np.conj(right).T
    isometry = left[:, keep] @ np.conj(right[:, keep]).T
    logger.debug(f"polar decomposition: rank {int(np.count_nonzero(keep))} of {t.shape[0]}")
    return PolarParts(freeze(isometry), freeze(modulus))


def null_projection(t: CMat, scale: Optional[float] = None) -> CMat:
    """
    Projection onto the (numerical) null space of T.

    Pass scale when T is a product whose factors set the size of rounding noise,
    e.g. (I - E) T with scale ||T||.
    """
    _, sigma, right = _singular_system(t)
    vectors = right[:, sigma <= rank_cut(sigma, scale)]
    return freeze(vectors @ np.conj(vectors).T)


def range_projection(t: CMat, scale: Optional[float] = None) -> CMat:
    """Projection onto the closure of the range of T."""
    left, sigma, _ = _singular_system(t)
    vectors = left[:, sigma > rank_cut(sigma, scale)]
    return freeze(vectors @ np.conj(vectors).T)


def range_null_projections(t: CMat) -> Tuple[CMat, CMat]:
    """(R(T), N(T))."""
    t = np.asarray(t, dtype=np.complex128)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise RejectedInputError(f"range_null_projections expects a square matrix, got {t.shape}")
    return range_projection(t), null_projection(t)


def rn_identity_gaps(t: CMat) -> Dict[str, float]:
    """
    Frobenius residuals of R(T) = I - N(T*), N(T) = I - R(T*),
    R(T*T) = R(T*) and N(T*T) = N(T).
    """
    t = np.asarray(t, dtype=np.complex128)
    n = t.shape[0]
    eye = np.eye(n)
    t_star = adjoint(t)
    gram = t_star @ t
    r_t, n_t = range_null_projections(t)
    r_ts, n_ts = range_null_projections(t_star)
    r_g, n_g = range_null_projections(gram)
    return {
        "R(T)=I-N(T*)": frobenius_norm(r_t - (eye - n_ts)),
        "N(T)=I-R(T*)": frobenius_norm(n_t - (eye - r_ts)),
        "R(T*T)=R(T*)": frobenius_norm(r_g - r_ts),
        "N(T*T)=N(T)": frobenius_norm(n_g - n_t),
    }


def polar_report(t: CMat, parts: PolarParts = None) -> Dict[str, float]:
    """Residuals of V*V = R(H), VV* = R(T) and VH = T (the last scaled by ||T||)."""
    t = np.asarray(t, dtype=np.complex128)
    parts = parts or polar_decompose(t)
    v = np.asarray(parts.isometry)
    h = np.asarray(parts.modulus)
    scale = max(operator_norm(t), 1e-300)
    return {
        "V*V=R(H)": frobenius_norm(np.conj(v).T @ v - range_projection(h)),
        "VV*=R(T)": frobenius_norm(v @ np.conj(v).T - range_projection(t)),
        "VH=T": frobenius_norm(v @ h - t) / scale,
    }


def unitarity_gap(u: CMat) -> float:
    u = np.asarray(u)
    return operator_norm(np.conj(u).T @ u - identity(u.shape[0]))
