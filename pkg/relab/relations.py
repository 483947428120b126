"""
Linear relations between finite-dimensional spaces.

A relation from C^n to C^m is its graph, a subspace of C^(n+m) whose vectors
are pairs (f, f'). Every construction below (adjoint, inverse, composition,
sum, operator part, restriction) is a statement about graphs and is computed
with the subspace toolkit only.

At finite dimension every relation is closed, so `closure` is the identity.
"""
import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch
from .subspaces import (
    Subspace, Tolerance, coordinate_block, complement, direct_sum, embed, gap,
    get_tolerance, inclusion_gap, meet, orth, span,
)

logger = logging.getLogger(__name__)

FINGERPRINT_DECIMALS = 8


@dataclass(frozen=True, eq=False)
class Relation:
    """A linear relation C^dim_from -> C^dim_to given by its graph."""

    dim_from: int
    dim_to: int
    graph: Subspace

    def __post_init__(self):
        if self.graph.ambient_dim != self.dim_from + self.dim_to:
            raise DimensionMismatch(
                f'Graph in C^{self.graph.ambient_dim} for a relation '
                f'C^{self.dim_from} -> C^{self.dim_to}'
            )

    @property
    def first(self) -> np.ndarray:
        """Source components of the graph basis."""
        return self.graph.basis[:self.dim_from]

    @property
    def second(self) -> np.ndarray:
        """Target components of the graph basis."""
        return self.graph.basis[self.dim_from:]

    @property
    def is_endo(self) -> bool:
        return self.dim_from == self.dim_to

    def __repr__(self):
        return f'Relation(C^{self.dim_from} -> C^{self.dim_to}, graph dim {self.graph.dim})'


@dataclass(frozen=True)
class RelationParts:
    dom: Subspace
    ran: Subspace
    ker: Subspace
    mul: Subspace


# ============================================================================
# Constructors
# ============================================================================

def make_relation(dim_from: int, dim_to: int, pairs, tol: Tolerance = None) -> Relation:
    """Relation spanned by (f, f') pairs."""
    stacked = []
    for f, g in pairs:
        f = np.asarray(f, dtype=complex).reshape(-1)
        g = np.asarray(g, dtype=complex).reshape(-1)
        if f.shape[0] != dim_from or g.shape[0] != dim_to:
            raise DimensionMismatch(
                f'Pair of lengths ({f.shape[0]}, {g.shape[0]}) in a relation '
                f'C^{dim_from} -> C^{dim_to}'
            )
        stacked.append(np.concatenate([f, g]))
    return Relation(dim_from, dim_to, span(stacked, dim_from + dim_to, tol))


def from_matrix(matrix) -> Relation:
    """Graph {(f, Mf)} of an everywhere defined operator."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    m, n = matrix.shape
    return Relation(n, m, Subspace.from_columns(np.vstack([np.eye(n), matrix])))


def identity(n: int) -> Relation:
    return from_matrix(np.eye(n))


def pure(dim_from: int, values: Subspace) -> Relation:
    """The purely multivalued relation {0} x values."""
    return Relation(dim_from, values.ambient_dim, embed(values, dim_from, dim_from + values.ambient_dim))


def closure(relation: Relation) -> Relation:
    """Closure of a relation; every finite-dimensional graph is already closed."""
    return relation


# ============================================================================
# Parts
# ============================================================================

def domain(relation: Relation, tol: Tolerance = None) -> Subspace:
    return Subspace(relation.dim_from, orth(relation.first, tol))


def range_of(relation: Relation, tol: Tolerance = None) -> Subspace:
    return Subspace(relation.dim_to, orth(relation.second, tol))


def kernel(relation: Relation, tol: Tolerance = None) -> Subspace:
    n, total = relation.dim_from, relation.graph.ambient_dim
    pairs = meet(relation.graph, coordinate_block(total, 0, n), tol)
    return Subspace(n, orth(pairs.basis[:n], tol))


def multivalued_part(relation: Relation, tol: Tolerance = None) -> Subspace:
    n, total = relation.dim_from, relation.graph.ambient_dim
    pairs = meet(relation.graph, coordinate_block(total, n, total), tol)
    return Subspace(relation.dim_to, orth(pairs.basis[n:], tol))


def parts(relation: Relation, tol: Tolerance = None) -> RelationParts:
    """Domain, range, kernel and multivalued part."""
    return RelationParts(
        dom=domain(relation, tol),
        ran=range_of(relation, tol),
        ker=kernel(relation, tol),
        mul=multivalued_part(relation, tol),
    )


def is_operator(relation: Relation, tol: Tolerance = None) -> bool:
    return multivalued_part(relation, tol).dim == 0


# ============================================================================
# Calculus
# ============================================================================

def adjoint(relation: Relation) -> Relation:
    """
    Adjoint relation C^dim_to -> C^dim_from.

    The graph is the orthogonal complement of {(f', -f) : (f, f') in R}.
    """
    flipped = np.vstack([relation.second, -relation.first])
    return Relation(relation.dim_to, relation.dim_from,
                    complement(Subspace(relation.graph.ambient_dim, flipped)))


def inverse(relation: Relation) -> Relation:
    swapped = np.vstack([relation.second, relation.first])
    return Relation(relation.dim_to, relation.dim_from,
                    Subspace(relation.graph.ambient_dim, swapped))


def compose(outer: Relation, inner: Relation, tol: Tolerance = None) -> Relation:
    """
    outer o inner = {(h, k) : (h, m) in inner and (m, k) in outer for some m}.

    Works in H + M + K: meet (graph inner) x K with H x (graph outer), then
    drop the middle block.
    """
    if inner.dim_to != outer.dim_from:
        raise DimensionMismatch(
            f'Cannot compose C^{outer.dim_from} -> C^{outer.dim_to} after '
            f'C^{inner.dim_from} -> C^{inner.dim_to}'
        )
    h, m, k = inner.dim_from, inner.dim_to, outer.dim_to
    total = h + m + k
    left = direct_sum(inner.graph, Subspace.full(k))
    right = direct_sum(Subspace.full(h), outer.graph)
    both = meet(left, right, tol)
    outer_rows = np.vstack([both.basis[:h], both.basis[h + m:]])
    logger.debug('compose: %d-dim meet in C^%d', both.dim, total)
    return Relation(h, k, Subspace(h + k, orth(outer_rows, tol)))


def compose_chain(*relations: Relation, tol: Tolerance = None) -> Relation:
    """compose_chain(A, B, C) = A o B o C."""
    result = relations[-1]
    for relation in reversed(relations[:-1]):
        result = compose(relation, result, tol)
    return result


def operator_sum(first: Relation, second: Relation, tol: Tolerance = None) -> Relation:
    """{(h, h1' + h2') : (h, h1') in first, (h, h2') in second}."""
    if (first.dim_from, first.dim_to) != (second.dim_from, second.dim_to):
        raise DimensionMismatch('Summands must share source and target spaces')
    n, m = first.dim_from, first.dim_to
    # coordinates (h, k1, k2)
    with_first = direct_sum(first.graph, Subspace.full(m))
    second_cols = np.zeros((n + 2 * m, second.graph.dim + m), dtype=complex)
    second_cols[:n, :second.graph.dim] = second.first
    second_cols[n + m:, :second.graph.dim] = second.second
    second_cols[n:n + m, second.graph.dim:] = np.eye(m)
    with_second = Subspace(n + 2 * m, second_cols)
    both = meet(with_first, with_second, tol)
    summed = np.vstack([both.basis[:n], both.basis[n:n + m] + both.basis[n + m:]])
    return Relation(n, m, Subspace(n + m, orth(summed, tol)))


def direct_product(first: Relation, second: Relation) -> Relation:
    """first x second from C^(n1+n2) to C^(m1+m2), pairs ((f1, f2), (g1, g2))."""
    n1, n2 = first.dim_from, second.dim_from
    m1, m2 = first.dim_to, second.dim_to
    d1, d2 = first.graph.dim, second.graph.dim
    basis = np.zeros((n1 + n2 + m1 + m2, d1 + d2), dtype=complex)
    basis[:n1, :d1] = first.first
    basis[n1 + n2:n1 + n2 + m1, :d1] = first.second
    basis[n1:n1 + n2, d1:] = second.first
    basis[n1 + n2 + m1:, d1:] = second.second
    return Relation(n1 + n2, m1 + m2, Subspace(basis.shape[0], basis))


def operator_part(relation: Relation, tol: Tolerance = None) -> Relation:
    """{(f, P f')} with P the projector onto the complement of mul R."""
    projector = complement(multivalued_part(relation, tol)).projector
    stacked = np.vstack([relation.first, projector @ relation.second])
    return Relation(relation.dim_from, relation.dim_to,
                    Subspace(relation.graph.ambient_dim, orth(stacked, tol)))


def restrict(relation: Relation, subspace: Subspace, tol: Tolerance = None) -> Relation:
    """{(f, f') in R : f in subspace}."""
    if subspace.ambient_dim != relation.dim_from:
        raise DimensionMismatch(
            f'Cannot restrict a relation on C^{relation.dim_from} to a subspace of C^{subspace.ambient_dim}'
        )
    allowed = direct_sum(subspace, Subspace.full(relation.dim_to))
    return Relation(relation.dim_from, relation.dim_to, meet(relation.graph, allowed, tol))


# ============================================================================
# Comparison
# ============================================================================

def _check_same_spaces(a: Relation, b: Relation):
    if (a.dim_from, a.dim_to) != (b.dim_from, b.dim_to):
        raise DimensionMismatch(
            f'Relations C^{a.dim_from} -> C^{a.dim_to} and C^{b.dim_from} -> C^{b.dim_to} differ in spaces'
        )


def relation_gap(a: Relation, b: Relation) -> float:
    _check_same_spaces(a, b)
    return gap(a.graph, b.graph)


def same_relation(a: Relation, b: Relation, tol: Tolerance = None) -> bool:
    tol = tol or get_tolerance()
    return relation_gap(a, b) <= tol.gap_eq


def containment_gap(small: Relation, big: Relation) -> float:
    """0 iff graph(small) is inside graph(big)."""
    _check_same_spaces(small, big)
    return inclusion_gap(small.graph, big.graph)


def contains(big: Relation, small: Relation, tol: Tolerance = None) -> bool:
    tol = tol or get_tolerance()
    return containment_gap(small, big) <= tol.gap_eq


def fingerprint(relation: Relation) -> str:
    """Basis-independent digest of a relation (rounded graph projector)."""
    projector = np.round(relation.graph.projector, FINGERPRINT_DECIMALS) + (0.0 + 0.0j)
    digest = hashlib.sha256()
    digest.update(f'{relation.dim_from}x{relation.dim_to}:'.encode())
    digest.update(np.ascontiguousarray(projector).tobytes())
    return digest.hexdigest()[:16]
