"""
Extensions of the sum H1 + H2 of two maximal sectorial relations.

Each H_j = A_j^(1/2)(I + iB_j)A_j^(1/2). On C^n x C^n the pieces are

    Phi = {((f1, f2), f1' + f2') : (f_j, f_j') in A_j^(1/2)}
    Psi = {(h, (A1s^(1/2) h, A2s^(1/2) h)) : h in dom H1 meet dom H2}
    K   = Phi restricted to D = (I + iB1 (+) B2) E,   E = ran Psi

and the Friedrichs, Krein and form-sum extensions are Psi*(I + iB)Psi,
K(I + iB)K* and Phi(I + iB)Phi*. At finite dimension H1 + H2 is already
maximal, so all three equal the sum; E = F holds automatically as well.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la

from .checks import (
    require, require_contains, require_same_relation, require_same_subspace,
)
from .exceptions import AssumptionNotMet, DimensionMismatch, NotMaximalSectorial, PreconditionError
from .factorized import weight
from .oracles import extremal_oracle, friedrichs_oracle, krein_oracle
from .relations import (
    Relation, adjoint, compose, compose_chain, direct_product, domain, from_matrix,
    is_operator, multivalued_part, operator_part, operator_sum, restrict,
)
from .sectorial import (
    MaxSectorialDecomposition, SesquiForm, decompose_maximal, form_of, form_sum,
    relation_of_form, sectoriality,
)
from .subspaces import (
    Subspace, Tolerance, complement, direct_sum, gap, get_tolerance, image,
    inclusion_gap, join, meet,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SumAssembly:
    H1: Relation
    H2: Relation
    D1: MaxSectorialDecomposition
    D2: MaxSectorialDecomposition
    B_oplus: np.ndarray
    Phi: Relation
    Psi: Relation
    Ksum: Relation
    E: Subspace
    F: Subspace
    D: Subspace

    @property
    def n(self) -> int:
        return self.H1.dim_from

    @property
    def weight(self) -> np.ndarray:
        return weight(self.B_oplus)

    @cached_property
    def sum(self) -> Relation:
        return operator_sum(self.H1, self.H2)


@dataclass(frozen=True)
class ExtremalityReport:
    E_eq_F: bool
    E_eq_D: bool
    formsum_extremal: bool
    equivalence_holds: bool
    gap_E_D: float
    # E = F always holds at finite dimension; the biconditional is only
    # confirmed in its consistent direction
    finite_dimensional_collapse: bool = True

    def as_dict(self) -> dict:
        return {
            'E_eq_F': self.E_eq_F,
            'E_eq_D': self.E_eq_D,
            'formsum_extremal': self.formsum_extremal,
            'equivalence_holds': self.equivalence_holds,
            'gap_E_D': self.gap_E_D,
            'finite_dimensional_collapse': self.finite_dimensional_collapse,
        }


def assemble(H1: Relation, H2: Relation, tol: Tolerance = None) -> SumAssembly:
    """
    Build Phi, Psi, K and the subspaces E, F, D for two maximal sectorial
    relations on the same space, asserting their structural identities.
    """
    tol = tol or get_tolerance()
    if (H1.dim_from, H1.dim_to) != (H2.dim_from, H2.dim_to) or not H1.is_endo:
        raise DimensionMismatch('Summands must be relations on one common space')
    for name, relation in (('H1', H1), ('H2', H2)):
        if not sectoriality(relation, tol).is_maximal:
            raise NotMaximalSectorial(f'{name} is not maximal sectorial')
    n = H1.dim_from
    D1, D2 = decompose_maximal(H1, tol), decompose_maximal(H2, tol)
    B_oplus = la.block_diag(D1.B, D2.B)
    W = weight(B_oplus)

    roots = direct_product(D1.sqrt_real, D2.sqrt_real)
    Phi = compose(from_matrix(np.hstack([np.eye(n), np.eye(n)])), roots, tol)
    Phi_adj = adjoint(Phi)
    require_same_relation(Phi_adj, compose(roots, from_matrix(np.vstack([np.eye(n), np.eye(n)])), tol),
                          'Phi* = {(h, (h1\', h2\')) : (h, h_j\') in A_j^(1/2)}', tol)

    stacked = np.vstack([D1.sqrt_matrix, D2.sqrt_matrix])
    common = meet(domain(H1, tol), domain(H2, tol), tol)
    root_domain_1, root_domain_2 = domain(D1.sqrt_real, tol), domain(D2.sqrt_real, tol)
    root_common = meet(root_domain_1, root_domain_2, tol)
    Psi = restrict(from_matrix(stacked), common, tol)
    E = image(common, stacked, tol)
    F = image(root_common, stacked, tol)
    D = image(E, W, tol)
    Ksum = restrict(Phi, D, tol)

    mul_1, mul_2 = multivalued_part(H1, tol), multivalued_part(H2, tol)
    require_same_subspace(domain(Phi, tol), direct_sum(root_domain_1, root_domain_2), 'dom Phi', tol)
    require_same_subspace(multivalued_part(Phi, tol), join(mul_1, mul_2, tol), 'mul Phi = mul H1 + mul H2', tol)
    require_same_subspace(domain(Phi_adj, tol), root_common, 'dom Phi*', tol)
    require_same_subspace(multivalued_part(Phi_adj, tol), direct_sum(mul_1, mul_2), 'mul Phi* = mul H1 x mul H2', tol)
    require(is_operator(Psi, tol), 'Psi is an operator')
    require_contains(operator_part(Phi_adj, tol), Psi, 'Psi inside (Phi*)_s', tol)
    require_contains(Phi, Ksum, 'K inside Phi', tol)
    require_contains(adjoint(Psi), Phi, 'Phi inside Psi*', tol)
    require_contains(Phi_adj, Psi, 'Psi inside Phi*', tol)
    require_contains(adjoint(Ksum), Phi_adj, 'Phi* inside K*', tol)
    require_same_subspace(domain(Ksum, tol), D, 'dom K = D', tol)
    require_same_subspace(multivalued_part(Ksum, tol), multivalued_part(operator_sum(H1, H2, tol), tol),
                          'mul K = mul(H1 + H2)', tol)
    require_same_subspace(E, F, 'E = F', tol)
    logger.debug('assemble: dom H1 meet dom H2 has dim %d, gap(E, D) = %.3e', common.dim, gap(E, D))
    return SumAssembly(H1=H1, H2=H2, D1=D1, D2=D2, B_oplus=B_oplus,
                       Phi=Phi, Psi=Psi, Ksum=Ksum, E=E, F=F, D=D)


def _check_sum_extension(result: Relation, assembly: SumAssembly, tol: Tolerance):
    total = assembly.sum
    require(total.graph.dim == assembly.n, 'H1 + H2 has graph dimension n')
    require_contains(result, total, 'extension contains H1 + H2', tol)
    require(sectoriality(result, tol).is_maximal, 'extension is maximal sectorial')


def friedrichs_sum(assembly: SumAssembly, tol: Tolerance = None) -> Relation:
    """(H1 + H2)_F = Psi*(I + iB)Psi."""
    tol = tol or get_tolerance()
    result = compose_chain(adjoint(assembly.Psi), from_matrix(assembly.weight), assembly.Psi, tol=tol)
    _check_sum_extension(result, assembly, tol)
    require_same_relation(result, friedrichs_oracle(assembly.sum, tol), '(H1 + H2)_F agrees with the form oracle', tol)
    common = meet(domain(assembly.H1, tol), domain(assembly.H2, tol), tol)
    require_same_subspace(multivalued_part(result, tol), complement(common),
                          'mul (H1 + H2)_F = (dom H1 meet dom H2)^perp', tol)
    return result


def krein_sum(assembly: SumAssembly, tol: Tolerance = None) -> Relation:
    """(H1 + H2)_K = K(I + iB)K*."""
    tol = tol or get_tolerance()
    K = assembly.Ksum
    K_adj = adjoint(K)
    result = compose_chain(K, from_matrix(assembly.weight), K_adj, tol=tol)
    _check_sum_extension(result, assembly, tol)
    require_same_relation(result, krein_oracle(assembly.sum, tol), '(H1 + H2)_K agrees with the inverse oracle', tol)
    require_same_subspace(multivalued_part(result, tol), multivalued_part(K, tol), 'mul (H1 + H2)_K = mul K', tol)
    require(is_operator(result, tol) == (domain(K_adj, tol).dim == assembly.n),
            '(H1 + H2)_K is an operator iff K* is densely defined')
    return result


def krein_sum_form(assembly: SumAssembly, tol: Tolerance = None):
    """
    The form ((I + iB)(K*)_s f, (K*)_s g) on dom K*, or None when E != D.
    """
    tol = tol or get_tolerance()
    separation = gap(assembly.E, assembly.D)
    if separation > tol.gap_eq:
        logger.warning('E != D (gap %.3e): Krein form description withheld', separation)
        return None
    K_adj = adjoint(assembly.Ksum)
    part = operator_part(K_adj, tol)
    dom = domain(K_adj, tol)
    if dom.dim:
        coeffs = la.lstsq(part.first, dom.basis, cond=tol.rank_rel)[0]
        images = part.second @ coeffs
    else:
        images = np.zeros((2 * assembly.n, 0), dtype=complex)
    form = SesquiForm(dom, images.conj().T @ assembly.weight @ images)
    require_same_relation(relation_of_form(form, tol), krein_sum(assembly, tol),
                          'Krein form represents (H1 + H2)_K', tol)
    return form


def formsum_extension(assembly: SumAssembly, tol: Tolerance = None) -> Relation:
    """Phi(I + iB)Phi*, the relation of the form sum t1 + t2."""
    tol = tol or get_tolerance()
    result = compose_chain(assembly.Phi, from_matrix(assembly.weight), adjoint(assembly.Phi), tol=tol)
    _check_sum_extension(result, assembly, tol)
    summed = form_sum(form_of(assembly.H1, tol), form_of(assembly.H2, tol), tol)
    oracle = relation_of_form(summed, tol)
    require_same_relation(result, oracle, 'Phi(I + iB)Phi* is the relation of t1 + t2', tol)
    require_same_relation(operator_part(result, tol), restrict(operator_part(oracle, tol), summed.domain, tol),
                          'operator part of the form-sum extension', tol)
    root_common = meet(domain(assembly.D1.sqrt_real, tol), domain(assembly.D2.sqrt_real, tol), tol)
    require_same_subspace(multivalued_part(result, tol), complement(root_common),
                          'mul of the form-sum extension', tol)
    return result


def extremal_sum_family(assembly: SumAssembly, subspace: Subspace, tol: Tolerance = None) -> Relation:
    """
    T_L*(I + iB)T_L with T_L = (K*)_s restricted to L,
    dom(H1 + H2) <= L <= dom K*. Needs E = D.
    """
    tol = tol or get_tolerance()
    if gap(assembly.E, assembly.D) > tol.gap_eq:
        raise AssumptionNotMet('The extremal family needs E = D')
    K_adj = adjoint(assembly.Ksum)
    if inclusion_gap(domain(assembly.sum, tol), subspace) > tol.gap_eq:
        raise PreconditionError('dom(H1 + H2) is not contained in L')
    if inclusion_gap(subspace, domain(K_adj, tol)) > tol.gap_eq:
        raise PreconditionError('L is not contained in dom K*')
    T_L = restrict(operator_part(K_adj, tol), subspace, tol)
    result = compose_chain(adjoint(T_L), from_matrix(assembly.weight), T_L, tol=tol)
    _check_sum_extension(result, assembly, tol)
    require(extremal_oracle(result, assembly.sum, tol).extremal, 'extension from L is extremal')
    return result


def extremality_report(assembly: SumAssembly, tol: Tolerance = None) -> ExtremalityReport:
    tol = tol or get_tolerance()
    e_eq_f = gap(assembly.E, assembly.F) <= tol.gap_eq
    separation = gap(assembly.E, assembly.D)
    e_eq_d = separation <= tol.gap_eq
    formsum_extremal = extremal_oracle(formsum_extension(assembly, tol), assembly.sum, tol).extremal
    return ExtremalityReport(
        E_eq_F=e_eq_f,
        E_eq_D=e_eq_d,
        formsum_extremal=formsum_extremal,
        equivalence_holds=(not e_eq_d) or (formsum_extremal == e_eq_f),
        gap_E_D=separation,
    )
