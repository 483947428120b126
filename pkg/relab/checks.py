"""
Assertions for identities that must hold at finite dimension.

Each helper measures a gap and raises InternalInconsistency when it exceeds
the equality threshold; on success it returns the measured gap.
"""
import logging

from .exceptions import InternalInconsistency
from .relations import Relation, containment_gap, relation_gap
from .subspaces import Subspace, Tolerance, gap, get_tolerance, inclusion_gap

logger = logging.getLogger(__name__)

IDENTITY_SLACK = 10  # identities are checked at IDENTITY_SLACK x gap_eq


def _require(measured: float, what: str, tol: Tolerance) -> float:
    if measured > tol.gap_eq * IDENTITY_SLACK:
        raise InternalInconsistency(what, gap=measured)
    logger.debug('%s: gap %.3e', what, measured)
    return measured


def require_same_relation(first: Relation, second: Relation, what: str, tol: Tolerance = None) -> float:
    return _require(relation_gap(first, second), what, tol or get_tolerance())


def require_contains(big: Relation, small: Relation, what: str, tol: Tolerance = None) -> float:
    return _require(containment_gap(small, big), what, tol or get_tolerance())


def require_same_subspace(first: Subspace, second: Subspace, what: str, tol: Tolerance = None) -> float:
    return _require(gap(first, second), what, tol or get_tolerance())


def require_subspace(small: Subspace, big: Subspace, what: str, tol: Tolerance = None) -> float:
    return _require(inclusion_gap(small, big), what, tol or get_tolerance())


def require(condition: bool, what: str):
    if not condition:
        raise InternalInconsistency(what)
