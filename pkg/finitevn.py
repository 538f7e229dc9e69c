#!/usr/bin/env python3
"""
Finite von Neumann algebras as block matrices for opspectra

The algebra M_{n_1} + ... + M_{n_m} is the general finite-dimensional von
Neumann algebra. Its center is m-tuples of scalars, its center-valued trace is
the tuple of normalized block traces and two projections are equivalent
exactly when their block ranks agree. This is only a shadow of the type II_1
situation: at this scale every statement below reduces to trace cyclicity and
rank counting.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from numkernel import (
    CMat, freeze, as_cmat, jacobi_eigh, normalized_trace, operator_norm, frobenius_norm,
    random_cmat, random_unitary, RejectedInputError
)
from spectral import range_projection, null_projection

logger = logging.getLogger(__name__)

PROJECTION_TOL = 1e-9


class EquivalenceFailure(RejectedInputError):
    """Two projections are not Murray-von Neumann equivalent."""

    def __init__(self, message: str, block: int):
        super().__init__(message)
        self.block = block


@dataclass(frozen=True)
class BlockAlgebra:
    """The direct sum of full matrix algebras of sizes block_dims."""
    block_dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.block_dims)
        if not dims or any(d < 1 for d in dims):
            raise RejectedInputError(f"block sizes must be positive and non-empty, got {self.block_dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def size(self) -> int:
        return sum(self.block_dims)

    def __len__(self) -> int:
        return len(self.block_dims)

    def element(self, blocks: Sequence) -> "BlockElement":
        return BlockElement(self, tuple(blocks))

    def identity(self) -> "BlockElement":
        return self.element([np.eye(d) for d in self.block_dims])

    def zero(self) -> "BlockElement":
        return self.element([np.zeros((d, d)) for d in self.block_dims])

    def scalar(self, values: Sequence[complex]) -> "BlockElement":
        """Central element with value values[i] on block i."""
        return self.element([c * np.eye(d) for c, d in zip(values, self.block_dims)])

    def random_element(self, rng: np.random.Generator) -> "BlockElement":
        return self.element([random_cmat(rng, d) for d in self.block_dims])

    def random_hermitian(self, rng: np.random.Generator) -> "BlockElement":
        x = self.random_element(rng)
        return (x + x.adjoint()) * 0.5

    def random_projection(self, rng: np.random.Generator,
                          ranks: Optional[Sequence[int]] = None) -> "BlockElement":
        """Haar-random projection with the given (or random) block ranks."""
        if ranks is None:
            ranks = [int(rng.integers(0, d + 1)) for d in self.block_dims]
        blocks = []
        for r, d in zip(ranks, self.block_dims):
            if not 0 <= r <= d:
                raise RejectedInputError(f"rank {r} impossible in a block of size {d}")
            u = np.asarray(random_unitary(rng, d))[:, :r]
            blocks.append(u @ np.conj(u).T)
        return self.element(blocks)


@dataclass(frozen=True, eq=False)
class BlockElement:
    """An element of a BlockAlgebra, stored block by block."""
    algebra: BlockAlgebra
    blocks: Tuple[CMat, ...]

    def __post_init__(self):
        blocks = tuple(as_cmat(b) for b in self.blocks)
        if len(blocks) != len(self.algebra):
            raise RejectedInputError(f"expected {len(self.algebra)} blocks, got {len(blocks)}")
        for i, (b, d) in enumerate(zip(blocks, self.algebra.block_dims)):
            if b.shape != (d, d):
                raise RejectedInputError(f"block {i} has shape {b.shape}, expected {(d, d)}")
        object.__setattr__(self, "blocks", blocks)

    def _same(self, other: "BlockElement"):
        if not isinstance(other, BlockElement) or other.algebra != self.algebra:
            raise RejectedInputError("operands belong to different block algebras")

    def __add__(self, other: "BlockElement") -> "BlockElement":
        self._same(other)
        return self.algebra.element([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "BlockElement") -> "BlockElement":
        self._same(other)
        return self.algebra.element([a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "BlockElement":
        return self.algebra.element([-a for a in self.blocks])

    def __mul__(self, scalar: complex) -> "BlockElement":
        return self.algebra.element([scalar * a for a in self.blocks])

    __rmul__ = __mul__

    def __matmul__(self, other: "BlockElement") -> "BlockElement":
        self._same(other)
        return self.algebra.element([a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "BlockElement":
        return self.algebra.element([np.conj(a).T for a in self.blocks])

    def norm(self) -> float:
        """Operator norm: the largest block norm."""
        return max(operator_norm(b) for b in self.blocks)

    def dense(self) -> CMat:
        """Block-diagonal matrix on C^(n_1 + ... + n_m)."""
        out = np.zeros((self.algebra.size, self.algebra.size), dtype=np.complex128)
        offset = 0
        for b, d in zip(self.blocks, self.algebra.block_dims):
            out[offset:offset + d, offset:offset + d] = b
            offset += d
        return freeze(out)

    def to_dict(self) -> Dict:
        return {
            "block_dims": list(self.algebra.block_dims),
            "blocks": [{"re": b.real.tolist(), "im": b.imag.tolist()} for b in self.blocks],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "BlockElement":
        algebra = BlockAlgebra(tuple(data["block_dims"]))
        blocks = [np.asarray(b["re"], dtype=float) + 1j * np.asarray(b["im"], dtype=float) for b in data["blocks"]]
        return cls(algebra, tuple(blocks))


@dataclass(frozen=True)
class CenterElement:
    """An element of the center: one scalar per block."""
    scalars: Tuple[complex, ...]

    def __sub__(self, other: "CenterElement") -> "CenterElement":
        return CenterElement(tuple(a - b for a, b in zip(self.scalars, other.scalars)))

    def __add__(self, other: "CenterElement") -> "CenterElement":
        return CenterElement(tuple(a + b for a, b in zip(self.scalars, other.scalars)))

    def max_abs(self) -> float:
        return max(abs(c) for c in self.scalars)

    def real(self) -> List[float]:
        return [c.real for c in self.scalars]

    def to_dict(self) -> Dict:
        return {"re": [c.real for c in self.scalars], "im": [c.imag for c in self.scalars]}


def center_valued_trace(x: BlockElement) -> CenterElement:
    """tau(x): the normalized trace of every block."""
    return CenterElement(tuple(normalized_trace(b) for b in x.blocks))


def _require_projection(e: BlockElement, tol: float = PROJECTION_TOL):
    for i, b in enumerate(e.blocks):
        scale = max(1.0, frobenius_norm(b))
        idempotent = frobenius_norm(b @ b - b)
        selfadjoint = frobenius_norm(b - np.conj(b).T)
        if max(idempotent, selfadjoint) > tol * scale:
            raise RejectedInputError(
                f"block {i} is not a projection (||E^2 - E|| = {idempotent:.2e}, ||E - E*|| = {selfadjoint:.2e})"
            )


def _range_basis(block: CMat) -> np.ndarray:
    """Orthonormal basis (columns) of the range of a projection block."""
    eigenvalues, vectors = jacobi_eigh((block + np.conj(block).T) / 2.0)
    return np.asarray(vectors)[:, eigenvalues > 0.5]


def dimension_function(e: BlockElement) -> CenterElement:
    """Delta(E): block rank / block size, with rank = #eigenvalues > 1/2."""
    _require_projection(e)
    values = []
    for b, d in zip(e.blocks, e.algebra.block_dims):
        eigenvalues, _ = jacobi_eigh((b + np.conj(b).T) / 2.0, compute_vectors=False)
        values.append(complex(int(np.count_nonzero(eigenvalues > 0.5)) / d))
    return CenterElement(tuple(values))


def equivalence_witness(e: BlockElement, f: BlockElement) -> BlockElement:
    """
    V with V*V = E and VV* = F.

    Raises:
        EquivalenceFailure: when some block has rank(E_i) != rank(F_i).
    """
    e._same(f)
    _require_projection(e)
    _require_projection(f)
    blocks = []
    for i, (eb, fb) in enumerate(zip(e.blocks, f.blocks)):
        x = _range_basis(eb)
        y = _range_basis(fb)
        if x.shape[1] != y.shape[1]:
            raise EquivalenceFailure(f"block {i}: rank {x.shape[1]} of E vs rank {y.shape[1]} of F", block=i)
        blocks.append(y @ np.conj(x).T)
    return e.algebra.element(blocks)


def complement_equivalence(e: BlockElement, f: BlockElement) -> BlockElement:
    """A witness for I - E ~ I - F, given E ~ F."""
    equivalence_witness(e, f)
    one = e.algebra.identity()
    return equivalence_witness(one - e, one - f)


def witness_residuals(v: BlockElement, e: BlockElement, f: BlockElement) -> Tuple[float, float]:
    """(||V*V - E||, ||VV* - F||), largest over blocks."""
    vv = v.adjoint() @ v
    ww = v @ v.adjoint()
    return (max(frobenius_norm(a - b) for a, b in zip(vv.blocks, e.blocks)),
            max(frobenius_norm(a - b) for a, b in zip(ww.blocks, f.blocks)))


def lattice_ops(e: BlockElement, f: BlockElement) -> Tuple[BlockElement, BlockElement]:
    """
    (E v F, E ^ F).

    The join is the range projection of E + F and the meet is the complement of
    the join of I - E and I - F.
    """
    e._same(f)
    _require_projection(e)
    _require_projection(f)
    joins = []
    meets = []
    for eb, fb in zip(e.blocks, f.blocks):
        eye = np.eye(eb.shape[0])
        joins.append(range_projection(eb + fb, scale=2.0))
        meets.append(eye - np.asarray(range_projection(2.0 * eye - eb - fb, scale=2.0)))
    return e.algebra.element(joins), e.algebra.element(meets)


def lattice_dimension_gap(e: BlockElement, f: BlockElement) -> float:
    """max |Delta(E v F) + Delta(E ^ F) - Delta(E) - Delta(F)|."""
    join, meet = lattice_ops(e, f)
    gap = dimension_function(join) + dimension_function(meet) - dimension_function(e) - dimension_function(f)
    return gap.max_abs()


@dataclass(frozen=True)
class PullbackReport:
    """F projects onto {x : Tx in range(E)}; E is dominated by F when delta_e <= delta_f."""
    projection: BlockElement
    delta_e: CenterElement
    delta_f: CenterElement

    @property
    def dominated(self) -> bool:
        return all(a.real <= b.real + 1e-9 for a, b in zip(self.delta_e.scalars, self.delta_f.scalars))


def domain_pullback_projection(t: BlockElement, e: BlockElement) -> PullbackReport:
    """F = null projection of (I - E) T, blockwise."""
    t._same(e)
    _require_projection(e)
    blocks = []
    for tb, eb in zip(t.blocks, e.blocks):
        eye = np.eye(tb.shape[0])
        blocks.append(null_projection((eye - eb) @ tb, scale=operator_norm(tb)))
    f = e.algebra.element(blocks)
    report = PullbackReport(projection=f, delta_e=dimension_function(e), delta_f=dimension_function(f))
    if not report.dominated:
        logger.warning(f"Delta(E) = {report.delta_e.real()} exceeds Delta(F) = {report.delta_f.real()}")
    return report


def _commutant_unitaries(algebra: BlockAlgebra) -> List[np.ndarray]:
    """Block-scalar unitaries with pairwise distinct phases."""
    m = len(algebra)
    unitaries = []
    for step in (1.0, math.sqrt(2.0)):
        phases = [np.exp(2j * math.pi * step * i / (m + 1)) for i in range(m)]
        unitaries.append(np.diag(np.concatenate([np.full(d, p) for p, d in zip(phases, algebra.block_dims)])))
    return unitaries


def is_affiliated(t, algebra: BlockAlgebra, tol: float = PROJECTION_TOL) -> bool:
    """
    U*TU = T for every unitary U in the commutant of the algebra.

    The commutant consists of block-scalar unitaries, so this holds exactly
    when T is block diagonal.
    """
    if isinstance(t, BlockElement):
        t = t.dense()
    t = as_cmat(t)
    if t.shape != (algebra.size, algebra.size):
        raise RejectedInputError(f"operator of shape {t.shape} does not act on C^{algebra.size}")
    scale = max(1.0, frobenius_norm(t))
    for u in _commutant_unitaries(algebra):
        if frobenius_norm(np.conj(u).T @ t @ u - t) > tol * scale:
            return False
    return True


def commutator_center_report(p: BlockElement, q: BlockElement, a: complex) -> Dict:
    """
    tau([P, Q]) and the distance ||[P, Q] - aI|| against |a|.

    tau([P, Q]) = 0 forces ||[P, Q] - aI|| >= |a|, so [P, Q] is never a nonzero
    multiple of the identity.
    """
    p._same(q)
    c = p @ q - q @ p
    tau = center_valued_trace(c)
    distance = (c - a * p.algebra.identity()).norm()
    return {
        "center_trace": tau.to_dict(),
        "center_trace_max": tau.max_abs(),
        "distance": distance,
        "bound": abs(a),
        "holds": distance >= abs(a) * (1.0 - 1e-9),
    }
