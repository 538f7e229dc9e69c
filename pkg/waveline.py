#!/usr/bin/env python3
"""
Grid model of L2 on an interval for opspectra

Functions are sampled on the cell-centred grid s_j = left + (j + 1/2) h. The
module covers the translation group U_t, difference-quotient diagnostics for
its generator, the jump blow-up profile, the position/momentum pair, the
Volterra operator K on [0, 1] with the skew-adjoint extension D3, and the
averaging operators A_t.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from more_itertools import pairwise

from config import (
    MIN_GRID_POINTS, QUOTIENT_MAX_STEPS, VERDICT_SLOPE_CUT, MONOTONE_SLACK,
    SPECTRAL_BOUNDARY_TOL, CORE_MARGIN, JUMP_WIDTH
)
from numkernel import CMat, freeze, RejectedInputError

logger = logging.getLogger(__name__)

CENTRAL = "central_difference"
SPECTRAL = "spectral"
MOMENTUM_MODES = (CENTRAL, SPECTRAL)


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a function on [left, right] at n cell centres."""
    left: float
    right: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128).ravel()
        if values.size < MIN_GRID_POINTS:
            raise RejectedInputError(f"a grid function needs at least {MIN_GRID_POINTS} samples, got {values.size}")
        if not self.right > self.left:
            raise RejectedInputError(f"empty interval [{self.left}, {self.right}]")
        if not np.all(np.isfinite(values)):
            raise RejectedInputError("grid function has non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], left: float, right: float, n: int) -> "GridFunction":
        h = (right - left) / n
        points = left + (np.arange(n) + 0.5) * h
        return cls(left, right, np.broadcast_to(np.asarray(fn(points), dtype=np.complex128), points.shape))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return (self.right - self.left) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.left + (np.arange(self.n) + 0.5) * self.h

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.left, self.right, values)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.n == other.n and math.isclose(self.left, other.left) and math.isclose(self.right, other.right)

    def norm(self) -> float:
        """Discrete L2 norm sqrt(h sum |f_j|^2)."""
        return _norm(self.values, self.h)

    def inner(self, other: "GridFunction") -> complex:
        """<f, g> = h sum f_j conj(g_j)."""
        _require_same_grid(self, other)
        return complex(self.h * np.vdot(other.values, self.values))

    def to_rows(self) -> List[Tuple[float, float, float]]:
        return [(float(s), float(v.real), float(v.imag)) for s, v in zip(self.points, self.values)]

    def to_dict(self) -> Dict:
        return {
            "left": self.left,
            "right": self.right,
            "n": self.n,
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "GridFunction":
        values = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(float(data["left"]), float(data["right"]), values)


def grid_function(fn: Callable[[np.ndarray], np.ndarray], left: float, right: float, n: int) -> GridFunction:
    return GridFunction.sample(fn, left, right, n)


def _norm(values: np.ndarray, h: float) -> float:
    return math.sqrt(h * float(np.sum(np.abs(values) ** 2)))


def _require_same_grid(f: GridFunction, g: GridFunction):
    if not f.same_grid(g):
        raise RejectedInputError(
            f"grid mismatch: [{f.left}, {f.right}] x {f.n} vs [{g.left}, {g.right}] x {g.n}"
        )


def _shift(values: np.ndarray, k: int) -> np.ndarray:
    """out[j] = values[j + k], zero outside the window."""
    n = values.size
    out = np.zeros(n, dtype=np.complex128)
    if abs(k) >= n:
        return out
    if k >= 0:
        out[:n - k] = values[k:]
    else:
        out[-k:] = values[:n + k]
    return out


def _steps(f: GridFunction, t: float) -> int:
    """t / h as an integer, rejecting sub-grid shifts."""
    exact = t / f.h
    k = int(round(exact))
    if abs(exact - k) > 1e-9 * max(1.0, abs(exact)):
        raise RejectedInputError(
            f"t = {t} is not a multiple of h = {f.h}; nearest admissible t is {k * f.h}"
        )
    return k


def translate(f: GridFunction, t: float) -> GridFunction:
    """(U_t f)(s) = f(s + t), zero-filled where s + t leaves the window."""
    return f.with_values(_shift(f.values, _steps(f, t)))


def _symmetric_derivative(values: np.ndarray, h: float) -> np.ndarray:
    return (_shift(values, 1) - _shift(values, -1)) / (2.0 * h)


def _fourth_order_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Five-point central difference, fourth order in h."""
    return (8.0 * (_shift(values, 1) - _shift(values, -1)) - (_shift(values, 2) - _shift(values, -2))) / (12.0 * h)


def _midpoint(values: np.ndarray, k: int) -> np.ndarray:
    """values at s_j + k h / 2 (linear interpolation for odd k)."""
    if k % 2 == 0:
        return _shift(values, k // 2)
    return (_shift(values, (k - 1) // 2) + _shift(values, (k + 1) // 2)) / 2.0


@dataclass(frozen=True)
class DomainDiagnostic:
    """
    Difference-quotient curve of U_t at f.

    The verdict thresholds (slope cut, monotonicity slack) are heuristics, not
    a decision procedure for domain membership.
    """
    t_samples: Tuple[float, ...]
    residuals: Tuple[float, ...]
    quotient_norms: Tuple[float, ...]
    verdict: str
    blowup_exponent: float
    heuristic: str = "verdict thresholds are heuristic estimates"


def _fit_slope(ts: Sequence[float], norms: Sequence[float]) -> float:
    if len(ts) < 2 or min(norms) <= 0.0:
        return 0.0
    slope, _ = np.polyfit(np.log(ts), np.log(norms), 1)
    return float(slope)


def difference_quotient_diagnostic(f: GridFunction, g: Optional[GridFunction] = None,
                                   max_steps: int = QUOTIENT_MAX_STEPS) -> DomainDiagnostic:
    """
    Residuals ||t^-1 (U_t f - f) - g|| for t = K h, K h / 2, ..., h.

    The quotient is compared with g at the midpoint s + t/2. Without g the
    five-point central difference of f is the candidate limit.
    """
    if g is None:
        g_values = _fourth_order_derivative(f.values, f.h)
    else:
        _require_same_grid(f, g)
        g_values = g.values

    steps = []
    k = max(1, int(max_steps))
    while k >= 1:
        steps.append(k)
        k //= 2

    ts, residuals, quotient_norms = [], [], []
    for k in steps:
        t = k * f.h
        quotient = (_shift(f.values, k) - f.values) / t
        ts.append(t)
        residuals.append(_norm(quotient - _midpoint(g_values, k), f.h))
        quotient_norms.append(_norm(quotient, f.h))

    exponent = _fit_slope(ts, quotient_norms)
    monotone = all(later <= (1.0 + MONOTONE_SLACK) * earlier for earlier, later in pairwise(residuals))
    if all(r == 0.0 for r in residuals):
        verdict = "converging"
    elif exponent <= VERDICT_SLOPE_CUT:
        verdict = "blowing_up"
    elif monotone and residuals[-1] < 10.0 * residuals[0] * (f.h / ts[0]):
        verdict = "converging"
    else:
        verdict = "inconclusive"
    logger.debug(f"difference quotients: verdict {verdict}, slope {exponent:.3f}")
    return DomainDiagnostic(tuple(ts), tuple(residuals), tuple(quotient_norms), verdict, exponent)


@dataclass(frozen=True)
class JumpRow:
    n: int
    t: float
    squared_norm: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.squared_norm >= self.bound


def jump_blowup_profile(f: GridFunction, jump_point: float, n_values: Optional[Sequence[int]] = None,
                        width: float = JUMP_WIDTH) -> List[JumpRow]:
    """
    ||t_n^-1 (U_{t_n} f - f)||^2 over the jump neighbourhood, t_n <= 1/(n-1).

    t_n is the largest multiple of h not exceeding 1/(n-1); rows with t_n < 2h
    are left out. For a unit jump of width >= 1 every row satisfies
    squared_norm >= n - 2 + 1/n.
    """
    if not f.left < jump_point < f.right:
        raise RejectedInputError(f"jump point {jump_point} is not inside ({f.left}, {f.right})")
    mask = np.abs(f.points - jump_point) <= width
    if n_values is None:
        n_values = range(2, int(math.floor(1.0 / (2.0 * f.h))) + 2)

    rows = []
    for n in n_values:
        if n < 2:
            continue
        k = int(math.floor(1.0 / ((n - 1) * f.h) + 1e-9))
        if k < 2:
            continue
        t = k * f.h
        quotient = (_shift(f.values, k) - f.values) / t
        squared = f.h * float(np.sum(np.abs(quotient[mask]) ** 2))
        rows.append(JumpRow(n=n, t=t, squared_norm=squared, bound=n - 2 + 1.0 / n))
    return rows


def position_apply(f: GridFunction) -> GridFunction:
    """(Qf)(s) = s f(s)."""
    return f.with_values(f.points * f.values)


def _spectral_derivative(values: np.ndarray, h: float) -> np.ndarray:
    n = values.size
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(values))


def momentum_apply(f: GridFunction, mode: str = CENTRAL, check_boundary: bool = True) -> GridFunction:
    """
    (Pf)(s) = i f'(s).

    Spectral mode treats the window as periodic, so f must vanish at both edges
    unless check_boundary is False (genuinely periodic samples).
    """
    if mode == CENTRAL:
        return f.with_values(1j * _symmetric_derivative(f.values, f.h))
    if mode == SPECTRAL:
        if check_boundary and max(abs(f.values[0]), abs(f.values[-1])) > SPECTRAL_BOUNDARY_TOL:
            raise RejectedInputError("spectral differentiation needs f to vanish at the window boundary")
        return f.with_values(1j * _spectral_derivative(f.values, f.h))
    raise RejectedInputError(f"unknown momentum mode '{mode}' (expected one of {MOMENTUM_MODES})")


def position_matrix(left: float, right: float, n: int) -> CMat:
    h = (right - left) / n
    return freeze(np.diag(left + (np.arange(n) + 0.5) * h).astype(np.complex128))


def momentum_matrix(left: float, right: float, n: int, mode: str = CENTRAL) -> CMat:
    """Dense Hermitian matrix of P on the grid."""
    h = (right - left) / n
    eye = np.eye(n, dtype=np.complex128)
    if mode == CENTRAL:
        d = (np.eye(n, k=1) - np.eye(n, k=-1)) / (2.0 * h)
        p = 1j * d
    elif mode == SPECTRAL:
        columns = [_spectral_derivative(eye[:, j], h) for j in range(n)]
        p = 1j * np.column_stack(columns)
    else:
        raise RejectedInputError(f"unknown momentum mode '{mode}' (expected one of {MOMENTUM_MODES})")
    return freeze((p + np.conj(p).T) / 2.0)


def _require_core(f: GridFunction, margin: int = CORE_MARGIN):
    peak = float(np.max(np.abs(f.values)))
    edge = np.concatenate([f.values[:margin], f.values[-margin:]])
    if float(np.max(np.abs(edge))) > 1e-12 * peak:
        raise RejectedInputError(f"f must vanish on the {margin} cells next to each boundary")


def heisenberg_residual(f: GridFunction, mode: str = CENTRAL) -> float:
    """||(QP - PQ) f + i f|| / ||f|| for f in the discrete core."""
    if f.norm() == 0.0:
        return 0.0
    _require_core(f)
    qp = position_apply(momentum_apply(f, mode, check_boundary=False))
    pq = momentum_apply(position_apply(f), mode, check_boundary=False)
    defect = qp.values - pq.values + 1j * f.values
    return _norm(defect, f.h) / f.norm()


def d0_symmetry_gap(f: GridFunction, g: GridFunction) -> float:
    """|<iD0 f, g> - <f, iD0 g>| for f, g vanishing at the endpoints."""
    _require_same_grid(f, g)
    for x in (f, g):
        if x.norm() > 0.0:
            _require_core(x, margin=1)
    pf = momentum_apply(f, CENTRAL)
    pg = momentum_apply(g, CENTRAL)
    return abs(pf.inner(g) - f.inner(pg))


def _require_unit_interval(f: GridFunction):
    if abs(f.left) > 1e-12 or abs(f.right - 1.0) > 1e-12:
        raise RejectedInputError(f"expected a grid on [0, 1], got [{f.left}, {f.right}]")


def volterra_apply(f: GridFunction) -> GridFunction:
    """
    (Kf)(s) = integral of f over [0, s].

    On cell centres: (Kf)_j = h (f_0 + ... + f_{j-1} + f_j / 2).
    """
    _require_unit_interval(f)
    return f.with_values(f.h * (np.cumsum(f.values) - f.values / 2.0))


def remove_mean(f: GridFunction) -> GridFunction:
    """Orthogonal projection onto {f : <f, u> = 0}, u the normalised constant."""
    u = np.full(f.n, 1.0 / math.sqrt(f.right - f.left), dtype=np.complex128)
    coefficient = f.h * np.vdot(u, f.values)
    return f.with_values(f.values - coefficient * u)


def d3_skewness_check(f1: GridFunction, f2: GridFunction, a1: complex, a2: complex,
                      tol: float = 1e-10) -> complex:
    """
    <D3 g1, g2> + <g1, D3 g2> with g_i = K f_i + a_i u and D3 g_i = f_i.

    Requires <f_i, u> ~ 0 (use remove_mean first).
    """
    _require_unit_interval(f1)
    _require_same_grid(f1, f2)
    u = f1.with_values(np.ones(f1.n))
    for f in (f1, f2):
        if abs(f.inner(u)) > tol:
            raise RejectedInputError(f"f is not orthogonal to the constants (<f, u> = {abs(f.inner(u)):.3e})")
    g1 = f1.with_values(volterra_apply(f1).values + a1 * u.values)
    g2 = f2.with_values(volterra_apply(f2).values + a2 * u.values)
    return f1.inner(g2) + g1.inner(f2)


def averaging_convergence(f: GridFunction, ts: Sequence[float]) -> List[float]:
    """
    ||A_t f - f|| with (A_t f)(x) the mean of f over [x, x + t].

    ts must be strictly decreasing. Near the right edge the mean runs over the
    cells that exist.
    """
    if any(later >= earlier for earlier, later in pairwise(ts)):
        raise RejectedInputError(f"averaging widths must be strictly decreasing, got {list(ts)}")
    csum = np.concatenate([[0.0], np.cumsum(f.values)])
    starts = np.arange(f.n)
    residuals = []
    for t in ts:
        k = _steps(f, t)
        if k < 1:
            raise RejectedInputError(f"averaging width must be at least h, got t = {t}")
        ends = np.minimum(starts + k, f.n)
        averages = (csum[ends] - csum[starts]) / (ends - starts)
        residuals.append(_norm(averages - f.values, f.h))
    return residuals
