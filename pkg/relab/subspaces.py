"""
Subspace arithmetic over C^n.

A subspace is stored as an orthonormal basis. Equality of subspaces is always
decided by the gap metric, never by comparing bases.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from .exceptions import DimensionMismatch

logger = logging.getLogger(__name__)

# Defaults used when no Django settings are available
DEFAULT_TOL_RANK = 1e-10  # relative singular-value cutoff
DEFAULT_TOL_GAP = 1e-9    # subspace equality threshold on the gap metric

EPS = np.finfo(float).eps
ORTHONORMAL_SLACK = 1e-10  # accepted deviation of basis^H basis from I at construction


@dataclass(frozen=True)
class Tolerance:
    """Rank cutoff and equality threshold shared by every computation of a run."""

    rank_rel: float = DEFAULT_TOL_RANK
    gap_eq: float = DEFAULT_TOL_GAP

    def __post_init__(self):
        if not (self.rank_rel > 0 and self.gap_eq > 0):
            raise ValueError(f'Tolerances must be positive, got rank={self.rank_rel}, gap={self.gap_eq}')

    def cutoff(self, sigma_max: float, n: int) -> float:
        """Singular values at or below this value count as zero."""
        return max(self.rank_rel, n * EPS) * max(sigma_max, 1.0)


def get_tolerance(gap_eq: float = None, rank_rel: float = None) -> Tolerance:
    """Get tolerances from settings or use defaults; explicit arguments win."""
    try:
        default_gap = getattr(settings, 'RELAB_TOL_GAP', DEFAULT_TOL_GAP)
        default_rank = getattr(settings, 'RELAB_TOL_RANK', DEFAULT_TOL_RANK)
    except ImproperlyConfigured:
        default_gap, default_rank = DEFAULT_TOL_GAP, DEFAULT_TOL_RANK
    return Tolerance(
        rank_rel=default_rank if rank_rel is None else rank_rel,
        gap_eq=default_gap if gap_eq is None else gap_eq,
    )


def orth(matrix, tol: Tolerance = None) -> np.ndarray:
    """
    Orthonormal basis for the column space of `matrix`.

    Args:
        matrix: n x k complex matrix
        tol: rank policy (singular values against Tolerance.cutoff)

    Returns:
        n x r matrix with orthonormal columns, r the numerical rank
    """
    tol = tol or get_tolerance()
    matrix = np.asarray(matrix, dtype=complex)
    n = matrix.shape[0]
    if matrix.size == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = la.svd(matrix, full_matrices=False)
    cutoff = tol.cutoff(s[0], max(matrix.shape))
    rank = int(np.count_nonzero(s > cutoff))
    if rank < s.size:
        logger.debug('rank %d of %d (dropped sigma=%.3e, cutoff=%.3e)', rank, s.size, s[rank], cutoff)
    return u[:, :rank]


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^ambient_dim held as a column-orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f'Basis of shape {basis.shape} does not live in C^{self.ambient_dim}'
            )
        d = basis.shape[1]
        if d > self.ambient_dim:
            raise DimensionMismatch(f'{d} basis vectors in C^{self.ambient_dim}')
        if d and np.max(np.abs(basis.conj().T @ basis - np.eye(d))) > ORTHONORMAL_SLACK:
            raise ValueError('Subspace basis is not orthonormal')
        basis.flags.writeable = False
        object.__setattr__(self, 'basis', basis)

    @classmethod
    def zero(cls, n: int) -> 'Subspace':
        return cls(n, np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> 'Subspace':
        return cls(n, np.eye(n, dtype=complex))

    @classmethod
    def from_columns(cls, matrix, tol: Tolerance = None) -> 'Subspace':
        """Column space of an already well-scaled matrix (internal constructions)."""
        matrix = np.asarray(matrix, dtype=complex)
        return cls(matrix.shape[0], orth(matrix, tol))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def project(self, v) -> np.ndarray:
        return project(self, v)

    def residual(self, v) -> float:
        """Distance from v to the subspace."""
        v = _as_vector(v, self.ambient_dim)
        return float(la.norm(v - self.basis @ (self.basis.conj().T @ v)))

    def __repr__(self):
        return f'Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})'


def _as_vector(v, n: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != n:
        raise DimensionMismatch(f'Vector of length {v.shape[0]} used in C^{n}')
    return v


def _check_same_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(
            f'Subspaces of C^{a.ambient_dim} and C^{b.ambient_dim} cannot be compared'
        )


def span(generators, ambient_dim: int = None, tol: Tolerance = None) -> Subspace:
    """
    Orthonormalized span of a list of vectors.

    Each generator is normalized before the rank decision, so the scale of a
    generator never decides whether it counts. `ambient_dim` is required when
    the list is empty.
    """
    vectors = [np.asarray(g, dtype=complex).reshape(-1) for g in generators]
    if ambient_dim is None:
        if not vectors:
            raise DimensionMismatch('span of no vectors needs an explicit ambient dimension')
        ambient_dim = vectors[0].shape[0]
    for v in vectors:
        if v.shape[0] != ambient_dim:
            raise DimensionMismatch(
                f'Generators of lengths {sorted({u.shape[0] for u in vectors} | {ambient_dim})} in one span'
            )
    columns = [v / la.norm(v) for v in vectors if la.norm(v) > 0]
    if not columns:
        return Subspace.zero(ambient_dim)
    return Subspace(ambient_dim, orth(np.column_stack(columns), tol))


def complement(space: Subspace) -> Subspace:
    """Orthogonal complement in the ambient space."""
    n, d = space.ambient_dim, space.dim
    if d == 0:
        return Subspace.full(n)
    if d == n:
        return Subspace.zero(n)
    u, _, _ = la.svd(space.basis, full_matrices=True)
    return Subspace(n, u[:, d:])


def join(a: Subspace, b: Subspace, tol: Tolerance = None) -> Subspace:
    _check_same_ambient(a, b)
    return Subspace(a.ambient_dim, orth(np.hstack([a.basis, b.basis]), tol))


def meet(a: Subspace, b: Subspace, tol: Tolerance = None) -> Subspace:
    """Intersection as the complement of the join of complements."""
    _check_same_ambient(a, b)
    return complement(join(complement(a), complement(b), tol))


def meet_join(a: Subspace, b: Subspace, tol: Tolerance = None) -> tuple:
    return meet(a, b, tol), join(a, b, tol)


def gap(a: Subspace, b: Subspace) -> float:
    """
    Gap metric ||P_A - P_B|| (spectral norm).

    Subspaces of different dimension are at gap 1.
    """
    _check_same_ambient(a, b)
    if a.dim != b.dim:
        return 1.0
    if a.dim == 0 or a.dim == a.ambient_dim:
        return 0.0
    return float(la.norm(a.projector - b.projector, 2))


def equal(a: Subspace, b: Subspace, tol: Tolerance = None) -> bool:
    tol = tol or get_tolerance()
    return gap(a, b) <= tol.gap_eq


def inclusion_gap(small: Subspace, big: Subspace) -> float:
    """Largest distance from a unit vector of `small` to `big`; 0 iff small is inside big."""
    _check_same_ambient(small, big)
    if small.dim == 0:
        return 0.0
    rest = small.basis - big.basis @ (big.basis.conj().T @ small.basis)
    return float(la.norm(rest, 2))


def is_subspace(small: Subspace, big: Subspace, tol: Tolerance = None) -> bool:
    tol = tol or get_tolerance()
    return inclusion_gap(small, big) <= tol.gap_eq


def project(space: Subspace, v) -> np.ndarray:
    """Orthogonal projection of v onto the subspace."""
    v = _as_vector(v, space.ambient_dim)
    return space.basis @ (space.basis.conj().T @ v)


def image(space: Subspace, matrix, tol: Tolerance = None) -> Subspace:
    """The subspace matrix @ space (matrix maps C^ambient_dim into C^rows)."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape[1] != space.ambient_dim:
        raise DimensionMismatch(f'{matrix.shape} matrix applied to a subspace of C^{space.ambient_dim}')
    return Subspace(matrix.shape[0], orth(matrix @ space.basis, tol))


def direct_sum(a: Subspace, b: Subspace) -> Subspace:
    """a x b inside C^(n+m), first block then second block."""
    return Subspace(a.ambient_dim + b.ambient_dim, la.block_diag(a.basis, b.basis))


def embed(space: Subspace, offset: int, total: int) -> Subspace:
    """Place a subspace into coordinates [offset, offset + n) of C^total."""
    if offset < 0 or offset + space.ambient_dim > total:
        raise DimensionMismatch(f'Block [{offset}, {offset + space.ambient_dim}) outside C^{total}')
    basis = np.zeros((total, space.dim), dtype=complex)
    basis[offset:offset + space.ambient_dim] = space.basis
    return Subspace(total, basis)


def coordinate_block(total: int, start: int, stop: int) -> Subspace:
    """span{e_start, ..., e_(stop-1)} in C^total."""
    return embed(Subspace.full(stop - start), start, total)


def block(space: Subspace, start: int, stop: int, tol: Tolerance = None) -> Subspace:
    """Projection of the subspace onto the coordinates [start, stop)."""
    return Subspace(stop - start, orth(space.basis[start:stop], tol))
