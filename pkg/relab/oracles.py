"""
Definitional ground truth for extensions of sectorial relations.

Friedrichs: first representation of the form of S. Krein: the same applied
to S^-1 and inverted back. Extremality: the form of the extension must be a
restriction of the Krein form. Meets are also available through stacked null
spaces, a path that shares nothing with the complement-based meet.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .checks import IDENTITY_SLACK
from .exceptions import NotSectorial, PreconditionError
from .relations import Relation, containment_gap, domain, inverse
from .sectorial import (
    SesquiForm, form_of, hermitian_parts, relation_of_form, restrict_form, sectoriality,
)
from .subspaces import Subspace, Tolerance, get_tolerance, inclusion_gap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtensionVerdict:
    extends: bool
    maximal: bool
    extremal: bool
    witness_gap: float

    def as_dict(self) -> dict:
        return {
            'extends': self.extends,
            'maximal': self.maximal,
            'extremal': self.extremal,
            'witness_gap': self.witness_gap,
        }


def _require_sectorial(relation: Relation, tol: Tolerance):
    if not sectoriality(relation, tol).is_sectorial:
        raise NotSectorial('Extensions are only defined for sectorial relations')


def friedrichs_oracle(relation: Relation, tol: Tolerance = None) -> Relation:
    """Maximal sectorial relation of the (closed) form of S."""
    tol = tol or get_tolerance()
    _require_sectorial(relation, tol)
    return relation_of_form(form_of(relation, tol), tol)


def krein_oracle(relation: Relation, tol: Tolerance = None) -> Relation:
    """S_K = ((S^-1)_F)^-1."""
    tol = tol or get_tolerance()
    _require_sectorial(relation, tol)
    return inverse(friedrichs_oracle(inverse(relation), tol))


def meet_by_nullspace(first: Subspace, second: Subspace, tol: Tolerance = None) -> Subspace:
    """Intersection from the null space of [A, -B]."""
    tol = tol or get_tolerance()
    if first.dim == 0 or second.dim == 0:
        return Subspace.zero(first.ambient_dim)
    null = la.null_space(np.hstack([first.basis, -second.basis]), rcond=tol.rank_rel)
    return Subspace.from_columns(first.basis @ null[:first.dim], tol)


def _align(small: SesquiForm, big: SesquiForm) -> tuple:
    """Coordinates of small.domain in big.domain's basis, and the fit residual."""
    if small.dim == 0:
        return np.zeros((big.dim, 0), dtype=complex), 0.0
    if big.dim == 0:
        return np.zeros((0, small.dim), dtype=complex), float(la.norm(small.domain.basis, 2))
    coords = la.lstsq(big.domain.basis, small.domain.basis)[0]
    residual = float(la.norm(big.domain.basis @ coords - small.domain.basis, 2))
    return coords, residual


def form_order_holds(lower: SesquiForm, upper: SesquiForm, tol: Tolerance = None) -> bool:
    """
    lower <= upper in the form order: dom upper inside dom lower and
    lower[h] <= upper[h] on dom upper (real parts).
    """
    tol = tol or get_tolerance()
    limit = tol.gap_eq * IDENTITY_SLACK
    coords, residual = _align(upper, lower)
    if residual > limit:
        return False
    if upper.dim == 0:
        return True
    restricted = coords.conj().T @ lower.matrix @ coords
    difference = hermitian_parts(upper.matrix - restricted)[0]
    scale = max(1.0, float(la.norm(upper.matrix, 2)))
    return bool(la.eigvalsh(difference)[0] >= -limit * scale)


def extremal_oracle(extension: Relation, relation: Relation, tol: Tolerance = None) -> ExtensionVerdict:
    """
    Decide whether `extension` is an extremal maximal sectorial extension of
    `relation`.

    Args:
        extension: candidate H
        relation: sectorial S

    Returns:
        ExtensionVerdict; witness_gap is the largest violated gap, 0 when all pass
    """
    tol = tol or get_tolerance()
    _require_sectorial(relation, tol)
    limit = tol.gap_eq * IDENTITY_SLACK
    violations = []

    extend_gap = containment_gap(relation, extension)
    extends = extend_gap <= limit
    if not extends:
        violations.append(extend_gap)
    maximal = sectoriality(extension, tol).is_maximal

    extremal = False
    if extends and maximal:
        extension_form = form_of(extension, tol)
        krein_form = form_of(krein_oracle(relation, tol), tol)
        coords, residual = _align(extension_form, krein_form)
        if residual > limit:
            violations.append(residual)
        else:
            aligned = coords.conj().T @ krein_form.matrix @ coords
            mismatch = float(la.norm(extension_form.matrix - aligned, 2)) if extension_form.dim else 0.0
            scale = max(1.0, float(la.norm(krein_form.matrix, 2)) if krein_form.dim else 1.0)
            if mismatch > limit * scale:
                violations.append(mismatch)
            else:
                extremal = True
    logger.debug('extremal_oracle: extends=%s maximal=%s extremal=%s', extends, maximal, extremal)
    return ExtensionVerdict(
        extends=extends,
        maximal=maximal,
        extremal=extremal,
        witness_gap=max(violations) if violations else 0.0,
    )


def extension_family_general(relation: Relation, subspace: Subspace, tol: Tolerance = None) -> Relation:
    """
    Extremal extension whose form is the Krein form restricted to L, for
    dom S <= L <= dom t_SK.
    """
    tol = tol or get_tolerance()
    krein_form = form_of(krein_oracle(relation, tol), tol)
    if inclusion_gap(domain(relation, tol), subspace) > tol.gap_eq:
        raise PreconditionError('dom S is not contained in L')
    if inclusion_gap(subspace, krein_form.domain) > tol.gap_eq:
        raise PreconditionError('L is not contained in the domain of the Krein form')
    return relation_of_form(restrict_form(krein_form, subspace, tol), tol)


def sectorial_enlargement(relation: Relation, rng: np.random.Generator, attempts: int = 20,
                          tol: Tolerance = None):
    """
    Search for a sectorial relation whose graph is the graph of `relation`
    plus one vector. Returns the enlargement or None.

    Candidates are the graph vectors of the Friedrichs oracle (when S is
    sectorial) followed by `attempts` random vectors of C^n x C^n.
    """
    tol = tol or get_tolerance()
    n = relation.dim_from
    candidates = []
    if sectoriality(relation, tol).is_sectorial:
        candidates.extend(friedrichs_oracle(relation, tol).graph.basis.T)
    candidates.extend(rng.standard_normal((attempts, 2 * n)) + 1j * rng.standard_normal((attempts, 2 * n)))
    for vector in candidates:
        if la.norm(vector - relation.graph.project(vector)) <= tol.gap_eq * max(1.0, la.norm(vector)):
            continue
        graph = Subspace.from_columns(np.column_stack([relation.graph.basis, vector]), tol)
        enlarged = Relation(n, relation.dim_to, graph)
        if sectoriality(enlarged, tol).is_sectorial:
            logger.debug('sectorial enlargement found: graph dim %d -> %d', relation.graph.dim, graph.dim)
            return enlarged
    return None
