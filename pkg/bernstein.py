#!/usr/bin/env python3
"""
Bernstein approximation engine for opspectra

B_n(f)(x) = sum_k C(n,k) x^k (1-x)^(n-k) f(k/n) on [0, 1], its derivative,
the moment identities, transport to other intervals and uniform-error
measurement.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config import UNIFORM_GRID_POINTS, KERNEL_INTERIOR_MARGIN
from numkernel import RejectedInputError

logger = logging.getLogger(__name__)

RealFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BernsteinModel:
    """
    Degree-n Bernstein data: samples[k] = f(phi(k/n)).

    phi maps [0, 1] affinely onto source_interval (identity for [0, 1]).
    """
    degree: int
    samples: np.ndarray
    source_interval: Tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).ravel()
        if self.degree < 1:
            raise RejectedInputError(f"degree must be at least 1, got {self.degree}")
        if samples.size != self.degree + 1:
            raise RejectedInputError(f"expected {self.degree + 1} samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            raise RejectedInputError("samples must be finite")
        left, right = self.source_interval
        if not right > left:
            raise RejectedInputError(f"empty source interval [{left}, {right}]")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "source_interval", (float(left), float(right)))

    @classmethod
    def from_function(cls, fn: RealFn, n: int, left: float = 0.0, right: float = 1.0) -> "BernsteinModel":
        nodes = left + (right - left) * np.arange(n + 1) / n
        return cls(n, np.broadcast_to(np.asarray(fn(nodes), dtype=float), nodes.shape), (left, right))

    @property
    def width(self) -> float:
        left, right = self.source_interval
        return right - left

    def to_source(self, x):
        """phi(x)."""
        return self.source_interval[0] + self.width * np.asarray(x, dtype=float)

    def from_source(self, y):
        """phi^-1(y)."""
        return (np.asarray(y, dtype=float) - self.source_interval[0]) / self.width


def _unit_points(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
        raise RejectedInputError("Bernstein evaluation needs 0 <= x <= 1")
    return x


def _unwrap(values: np.ndarray, like):
    return float(values[0]) if np.ndim(like) == 0 else values


def bernstein_basis(n: int, x) -> np.ndarray:
    """
    Table b[i, k] = C(n,k) x_i^k (1-x_i)^(n-k) by degree raising.

    No binomial coefficients are formed, so large n neither overflows nor
    loses the partition of unity.
    """
    if n < 0:
        raise RejectedInputError(f"basis degree must be nonnegative, got {n}")
    x = _unit_points(x)
    y = 1.0 - x
    table = np.zeros((x.size, n + 1))
    table[:, 0] = 1.0
    for m in range(1, n + 1):
        table[:, 1:m + 1] = y[:, None] * table[:, 1:m + 1] + x[:, None] * table[:, 0:m]
        table[:, 0] *= y
    return table


def bernstein_eval(model: BernsteinModel, x):
    """B_n(f)(x) for x in [0, 1]; scalar in, scalar out."""
    values = bernstein_basis(model.degree, x) @ model.samples
    return _unwrap(values, x)


def bernstein_derivative_eval(model: BernsteinModel, x):
    """B_n'(f)(x) = n sum_k (f_{k+1} - f_k) b_{k,n-1}(x)."""
    n = model.degree
    values = n * (bernstein_basis(n - 1, x) @ np.diff(model.samples))
    return _unwrap(values, x)


def derivative_kernel_eval(model: BernsteinModel, x, margin: float = KERNEL_INTERIOR_MARGIN):
    """
    n sum_k C(n,k) (k/n - x) x^(k-1) (1-x)^(n-k-1) f(k/n).

    Written as n sum_k b_{k,n}(x) (k/n - x) f(k/n) / (x (1-x)); the endpoint
    singularities are removable, so only x in [margin, 1 - margin] is accepted.
    """
    points = _unit_points(x)
    if np.any(points < margin) or np.any(points > 1.0 - margin):
        raise RejectedInputError(f"kernel form is only evaluated on [{margin}, {1.0 - margin}]")
    n = model.degree
    nodes = np.arange(n + 1) / n
    weights = bernstein_basis(n, points) * (nodes[None, :] - points[:, None])
    values = n * (weights @ model.samples) / (points * (1.0 - points))
    return _unwrap(values, x)


def _moment_closed_forms(n: int, x: np.ndarray) -> Dict[str, np.ndarray]:
    q = x * (1.0 - x)
    return {
        "B_n(1)": np.ones_like(x),
        "B_n(x)": x,
        "B_n(x^2)": (n - 1) * x ** 2 / n + x / n,
        "B_n(x^3)": (n - 1) * (n - 2) * x ** 3 / n ** 2 + 3 * (n - 1) * x ** 2 / n ** 2 + x / n ** 2,
        "B_n(x^4)": ((n - 1) * (n - 2) * (n - 3) * x ** 4 + 6 * (n - 1) * (n - 2) * x ** 3
                     + 7 * (n - 1) * x ** 2 + x) / n ** 3,
        "second central moment": q / n,
        "fourth central moment": q * ((3 * n - 6) * q + 1) / n ** 3,
    }


def moment_identities_check(n: int, xs: Sequence[float]) -> Dict[str, Dict[str, float]]:
    """
    Direct summation against the closed forms of the Bernstein moments.

    Returns, per identity, the largest gap over xs and whether it is within
    1e-10 * n.
    """
    if n < 1:
        raise RejectedInputError(f"n must be positive, got {n}")
    x = _unit_points(xs)
    table = bernstein_basis(n, x)
    nodes = np.arange(n + 1) / n
    centred = nodes[None, :] - x[:, None]
    direct = {
        "B_n(1)": table.sum(axis=1),
        "B_n(x)": table @ nodes,
        "B_n(x^2)": table @ nodes ** 2,
        "B_n(x^3)": table @ nodes ** 3,
        "B_n(x^4)": table @ nodes ** 4,
        "second central moment": np.sum(table * centred ** 2, axis=1),
        "fourth central moment": np.sum(table * centred ** 4, axis=1),
    }
    closed = _moment_closed_forms(n, x)
    tolerance = 1e-10 * n
    report = {}
    for name, summed in direct.items():
        gap = float(np.max(np.abs(summed - closed[name])))
        report[name] = {
            "max_gap": gap,
            "passed": gap <= tolerance,
            "direct": summed.tolist(),
            "closed_form": closed[name].tolist(),
        }
    return report


def transport_interval(fn: RealFn, n: int, left: float, right: float) -> BernsteinModel:
    """B_n(f o phi) o phi^-1 for f on [left, right]."""
    return BernsteinModel.from_function(fn, n, left, right)


def _source_points(model: BernsteinModel, y):
    left, right = model.source_interval
    arr = np.asarray(y, dtype=float)
    if np.any(arr < left) or np.any(arr > right):
        raise RejectedInputError(f"y must lie in [{left}, {right}]")
    return np.clip(model.from_source(arr), 0.0, 1.0)


def source_eval(model: BernsteinModel, y):
    """Transported approximant at y in the source interval."""
    return bernstein_eval(model, _source_points(model, y))


def source_derivative_eval(model: BernsteinModel, y):
    """Derivative of the transported approximant (chain factor 1 / (right - left))."""
    return bernstein_derivative_eval(model, _source_points(model, y)) / model.width


def uniform_error(f: RealFn, fprime: RealFn, n: int, points: int = UNIFORM_GRID_POINTS) -> Tuple[float, float]:
    """sup |B_n(f) - f| and sup |B_n'(f) - f'| on a uniform grid of [0, 1]."""
    xs = np.linspace(0.0, 1.0, points)
    model = BernsteinModel.from_function(f, n)
    sup_err = float(np.max(np.abs(bernstein_eval(model, xs) - f(xs))))
    sup_deriv_err = float(np.max(np.abs(bernstein_derivative_eval(model, xs) - fprime(xs))))
    logger.debug(f"n={n}: sup error {sup_err:.3e}, derivative {sup_deriv_err:.3e}")
    return sup_err, sup_deriv_err


def approximant_table(model: BernsteinModel, f: RealFn, fprime: RealFn,
                      ys: Sequence[float]) -> List[Tuple[float, float, float, float, float]]:
    """Rows (x, f, Bn, f', Bn') at points of the source interval."""
    ys = np.asarray(ys, dtype=float)
    approx = np.atleast_1d(source_eval(model, ys))
    approx_prime = np.atleast_1d(source_derivative_eval(model, ys))
    exact = np.broadcast_to(np.asarray(f(ys), dtype=float), ys.shape)
    exact_prime = np.broadcast_to(np.asarray(fprime(ys), dtype=float), ys.shape)
    return [
        (float(y), float(a), float(b), float(c), float(d))
        for y, a, b, c, d in zip(np.atleast_1d(ys), np.atleast_1d(exact), approx,
                                 np.atleast_1d(exact_prime), approx_prime)
    ]
