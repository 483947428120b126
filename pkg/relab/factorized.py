"""
Factorized sectorial relations S = T*(I + iB)T and their extensions.

Covers the product itself and the right-sided variant T(I + iB)T*, the
unique middle vector alpha behind every pair of S, the Q/J construction on
the middle space M0 = ran T meet (I + iB)^-1 dom T*, the Friedrichs, Krein
and extremal extensions built from Q and J, the recovery of a factorization
from S, and the model of S on ran S with the inner product <.,.>_S.

At finite dimension T is closed, so S is already maximal sectorial and all
extensions coincide with S. The constructions are still carried out in full
and checked against the oracles.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .checks import (
    IDENTITY_SLACK, require, require_contains, require_same_relation,
    require_same_subspace,
)
from .exceptions import (
    DimensionMismatch, NotFactorizable, PreconditionError, UnsupportedSide,
)
from .oracles import extremal_oracle, friedrichs_oracle, krein_oracle
from .relations import (
    Relation, adjoint, compose, compose_chain, domain, from_matrix, inverse,
    is_operator, kernel, multivalued_part, operator_part, range_of, restrict,
)
from .sectorial import decompose_maximal, psd_sqrt, sectoriality
from .subspaces import (
    Subspace, Tolerance, complement, gap, get_tolerance, image, inclusion_gap,
    meet, orth,
)

logger = logging.getLogger(__name__)

SIDE_CHOICES = ('left', 'right')
MODE_CHOICES = ('friedrichs', 'krein')
SECTOR_BOUND_SLACK = 1e-8  # tan_min(S) <= ||B|| + slack


def weight(B) -> np.ndarray:
    """I + iB."""
    B = np.asarray(B, dtype=complex)
    return np.eye(B.shape[0]) + 1j * B


@dataclass(frozen=True, eq=False)
class FactorizedSectorial:
    """S = T*(I + iB)T (left) or S = T(I + iB)T* (right)."""

    T: Relation
    B: np.ndarray
    side: str
    S: Relation

    @property
    def weight(self) -> np.ndarray:
        return weight(self.B)

    @property
    def factor(self) -> Relation:
        """The relation F with S = F*(I + iB)F."""
        return self.T if self.side == 'left' else adjoint(self.T)


@dataclass(frozen=True, eq=False)
class QJData:
    """Middle space M (as a subspace of K), compression B_m, and Q: H -> M, J: M -> H."""

    M: Subspace
    B_m: np.ndarray
    Q: Relation
    J: Relation

    @property
    def weight(self) -> np.ndarray:
        return weight(self.B_m)


@dataclass(frozen=True)
class AlphaWitness:
    alpha: np.ndarray
    phi: np.ndarray
    nullity: int
    residual: float


@dataclass(frozen=True, eq=False)
class AbstractModel:
    """
    ran S with <phi', psi'>_S, its isotropic part R0, the operator B_S on
    ran S / R0 and the isometry iota: M -> ran S / R0.

    B_S and iota are written in a <.,.>_S-orthonormal basis of the quotient.
    """

    gram_S: np.ndarray
    R0: Subspace
    B_S: np.ndarray
    iota: np.ndarray
    quotient: Subspace
    isometry_residual: float
    compression_residual: float

    def as_dict(self) -> dict:
        return {
            'range_dim': int(self.gram_S.shape[0]),
            'isotropic_dim': self.R0.dim,
            'quotient_dim': self.quotient.dim,
            'isometry_residual': self.isometry_residual,
            'compression_residual': self.compression_residual,
        }


def _check_hermitian(B: np.ndarray, dim: int, tol: Tolerance):
    if B.shape != (dim, dim):
        raise DimensionMismatch(f'B of shape {B.shape} on a middle space of dimension {dim}')
    if B.size and la.norm(B - B.conj().T, 2) > tol.gap_eq * max(1.0, la.norm(B, 2)):
        raise PreconditionError('B must be Hermitian')


def _left_product(factor: Relation, B: np.ndarray, tol: Tolerance) -> Relation:
    return compose_chain(adjoint(factor), from_matrix(weight(B)), factor, tol=tol)


def factorize_product(T: Relation, B, side: str = 'left', tol: Tolerance = None) -> FactorizedSectorial:
    """
    Compose S = T*(I + iB)T, or T(I + iB)T* for side='right', and assert the
    identities every such product satisfies.

    The right side is the left product of T*, since T** = T.

    Args:
        T: relation H -> K (left) or K -> H (right)
        B: Hermitian matrix on K
        side: 'left' or 'right'

    Returns:
        FactorizedSectorial
    """
    tol = tol or get_tolerance()
    if side not in SIDE_CHOICES:
        raise UnsupportedSide(f'Unknown side {side!r}, expected one of {SIDE_CHOICES}')
    B = np.asarray(B, dtype=complex)
    factor = T if side == 'left' else adjoint(T)
    _check_hermitian(B, factor.dim_to, tol)
    S = _left_product(factor, B, tol)

    report = sectoriality(S, tol)
    require(report.is_sectorial, 'factorized product is sectorial')
    b_norm = float(la.norm(B, 2)) if B.size else 0.0
    require(report.tan_min <= b_norm + SECTOR_BOUND_SLACK,
            f'semi-angle bound tan {report.tan_min:.6g} <= ||B|| {b_norm:.6g}')
    require(report.is_maximal, 'factorized product is maximal sectorial')
    factor_adjoint = adjoint(factor)
    require_same_subspace(multivalued_part(S, tol), multivalued_part(factor_adjoint, tol),
                          'mul S = mul T*' if side == 'left' else 'mul S = mul T', tol)
    require_same_subspace(kernel(S, tol), kernel(factor, tol),
                          'ker S = ker T' if side == 'left' else 'ker S = ker T*', tol)
    require_same_relation(adjoint(S), _left_product(factor, -B, tol), 'S* = product with I - iB', tol)
    logger.debug('factorize_product(%s): graph dim %d, tan %.6g', side, S.graph.dim, report.tan_min)
    return FactorizedSectorial(T=T, B=B, side=side, S=S)


def _require_left(factorized: FactorizedSectorial, what: str):
    if factorized.side != 'left':
        raise UnsupportedSide(f'{what} is built for left factorizations; use the inverse dual for the right side')


def lemma_alpha(factorized: FactorizedSectorial, phi_prime, tol: Tolerance = None) -> AlphaWitness:
    """
    Solve {phi, alpha} in T, {(I + iB)alpha, phi'} in T* for phi' in ran S.

    Returns alpha, a matching phi, the dimension of the alpha-part of the
    homogeneous solutions (0: alpha is unique) and the relative residual of
    (phi', phi) = ((I + iB)alpha, alpha).
    """
    tol = tol or get_tolerance()
    _require_left(factorized, 'lemma_alpha')
    T = factorized.T
    T_adj = adjoint(T)
    phi_prime = np.asarray(phi_prime, dtype=complex).reshape(-1)
    n, m = T.dim_from, T.dim_to
    if phi_prime.shape[0] != n:
        raise DimensionMismatch(f'phi\' of length {phi_prime.shape[0]} for S on C^{n}')
    g, h = T.graph.dim, T_adj.graph.dim
    system = np.zeros((m + n, g + h), dtype=complex)
    system[:m, :g] = -factorized.weight @ T.second
    system[:m, g:] = T_adj.first
    system[m:, g:] = T_adj.second
    rhs = np.concatenate([np.zeros(m, dtype=complex), phi_prime])
    solution = la.lstsq(system, rhs, cond=tol.rank_rel)[0]
    if la.norm(system @ solution - rhs) > tol.gap_eq * IDENTITY_SLACK * max(1.0, la.norm(phi_prime)):
        raise PreconditionError("phi' is not in ran S")
    coeffs = solution[:g]
    alpha, phi = T.second @ coeffs, T.first @ coeffs

    null = la.null_space(system, rcond=tol.rank_rel) if system.size else np.zeros((g + h, 0))
    nullity = orth(T.second @ null[:g], tol).shape[1] if null.size else 0

    lhs = np.vdot(phi, phi_prime)
    rhs_value = np.vdot(alpha, factorized.weight @ alpha)
    residual = float(abs(lhs - rhs_value) / max(1.0, abs(lhs)))
    return AlphaWitness(alpha=alpha, phi=phi, nullity=nullity, residual=residual)


def _retarget(relation: Relation, basis: np.ndarray, tol: Tolerance) -> Relation:
    """Express the targets of a relation (all inside span(basis)) in coordinates of `basis`."""
    columns = np.vstack([relation.first, basis.conj().T @ relation.second])
    return Relation(relation.dim_from, basis.shape[1], Subspace(columns.shape[0], orth(columns, tol)))


def qj_construction(factorized: FactorizedSectorial, tol: Tolerance = None) -> QJData:
    """
    Q = {(phi, alpha) in T : alpha in M0} and
    J = {((I + iB_m)alpha, phi') : alpha in M0, ((I + iB)alpha, phi') in T*},
    with B_m the compression of B to M0.
    """
    tol = tol or get_tolerance()
    _require_left(factorized, 'qj_construction')
    T = factorized.T
    T_adj = adjoint(T)
    C = factorized.weight
    middle = meet(range_of(T, tol), image(domain(T_adj, tol), la.inv(C), tol), tol)
    basis = middle.basis
    B_m = basis.conj().T @ factorized.B @ basis
    C_m = weight(B_m)

    Q = _retarget(inverse(restrict(inverse(T), middle, tol)), basis, tol)

    pulled = restrict(compose(T_adj, from_matrix(C), tol), middle, tol)
    sources = C_m @ (basis.conj().T @ pulled.first)
    J = Relation(basis.shape[1], T.dim_from,
                 Subspace.from_columns(np.vstack([sources, pulled.second]), tol))

    qj = QJData(M=middle, B_m=B_m, Q=Q, J=J)
    k = middle.dim
    require_contains(adjoint(J), Q, 'Q inside J*', tol)
    require(is_operator(Q, tol), 'Q is an operator')
    require_same_subspace(range_of(Q, tol), Subspace.full(k), 'ran Q is all of M', tol)
    require_same_subspace(multivalued_part(J, tol), multivalued_part(T_adj, tol), 'mul J = mul T*', tol)
    require_same_relation(compose_chain(J, from_matrix(C_m), Q, tol=tol), factorized.S,
                          'J(I + iB_m)Q = S', tol)
    logger.debug('qj_construction: dim M0 = %d', k)
    return qj


def friedrichs_factorized(factorized: FactorizedSectorial, tol: Tolerance = None,
                          qj: QJData = None) -> Relation:
    """S_F = Q*(I + iB_m)Q**."""
    tol = tol or get_tolerance()
    _require_left(factorized, 'friedrichs_factorized')
    qj = qj or qj_construction(factorized, tol)
    result = compose_chain(adjoint(qj.Q), from_matrix(qj.weight), qj.Q, tol=tol)
    _check_extension(result, factorized.S, tol)
    require_same_relation(result, friedrichs_oracle(factorized.S, tol), 'S_F agrees with the form oracle', tol)
    return result


def krein_factorized(factorized: FactorizedSectorial, tol: Tolerance = None,
                     qj: QJData = None) -> Relation:
    """S_K = J**(I + iB_m)J*."""
    tol = tol or get_tolerance()
    _require_left(factorized, 'krein_factorized')
    qj = qj or qj_construction(factorized, tol)
    result = compose_chain(qj.J, from_matrix(qj.weight), adjoint(qj.J), tol=tol)
    _check_extension(result, factorized.S, tol)
    require_same_relation(result, krein_oracle(factorized.S, tol), 'S_K agrees with the inverse oracle', tol)
    densely_defined = domain(factorized.T, tol).dim == factorized.T.dim_from
    require(is_operator(result, tol) == densely_defined, 'S_K is an operator iff T is densely defined')
    return result


def _check_extension(result: Relation, relation: Relation, tol: Tolerance):
    require_contains(result, relation, 'extension contains S', tol)
    require(sectoriality(result, tol).is_maximal, 'extension is maximal sectorial')


def extremal_factorized(factorized: FactorizedSectorial, subspace: Subspace, tol: Tolerance = None,
                        qj: QJData = None) -> Relation:
    """
    K*(I + iB_m)K for K = J* restricted to L, dom Q <= L <= dom J*.
    """
    tol = tol or get_tolerance()
    _require_left(factorized, 'extremal_factorized')
    qj = qj or qj_construction(factorized, tol)
    J_adj = adjoint(qj.J)
    if inclusion_gap(domain(qj.Q, tol), subspace) > tol.gap_eq:
        raise PreconditionError('dom Q is not contained in L')
    if inclusion_gap(subspace, domain(J_adj, tol)) > tol.gap_eq:
        raise PreconditionError('L is not contained in dom J*')
    K = restrict(J_adj, subspace, tol)
    require_contains(K, qj.Q, 'Q inside K', tol)
    require_contains(J_adj, K, 'K inside J*', tol)
    result = compose_chain(adjoint(K), from_matrix(qj.weight), K, tol=tol)
    _check_extension(result, factorized.S, tol)
    require(extremal_oracle(result, factorized.S, tol).extremal, 'extension from L is extremal')
    return result


def recover_factorization(relation: Relation, mode: str = 'friedrichs', tol: Tolerance = None) -> FactorizedSectorial:
    """
    Find T and B with S = T*(I + iB)T (friedrichs) or S = T(I + iB)T* (krein).

    friedrichs needs mul S = mul S*; T is the operator part of (S_F)_r^(1/2)
    restricted to dom S. krein needs ker S = ker S* and goes through S^-1:
    T = T~^-1 (I + B~^2)^(-1/2), B = -B~.
    """
    tol = tol or get_tolerance()
    if mode == 'friedrichs':
        mul, mul_adj = multivalued_part(relation, tol), multivalued_part(adjoint(relation), tol)
        if gap(mul, mul_adj) > tol.gap_eq:
            raise NotFactorizable(
                f'mul S != mul S* (dimensions {mul.dim} and {mul_adj.dim})',
                condition='mul S = mul S*',
            )
        friedrichs = friedrichs_oracle(relation, tol)
        decomposition = decompose_maximal(friedrichs, tol)
        T = restrict(operator_part(decomposition.sqrt_real, tol), domain(relation, tol), tol)
        factorized = factorize_product(T, decomposition.B, 'left', tol)
        require_same_relation(factorized.S, relation, 'T*(I + iB)T = S', tol)
        require_same_relation(factorized.S, friedrichs, 'T*(I + iB)T = S_F', tol)
        return factorized
    if mode == 'krein':
        ker, ker_adj = kernel(relation, tol), kernel(adjoint(relation), tol)
        if gap(ker, ker_adj) > tol.gap_eq:
            raise NotFactorizable(
                f'ker S != ker S* (dimensions {ker.dim} and {ker_adj.dim})',
                condition='ker S = ker S*',
            )
        dual = recover_factorization(inverse(relation), 'friedrichs', tol)
        n = dual.B.shape[0]
        scaling = la.inv(psd_sqrt(np.eye(n) + dual.B @ dual.B, tol))
        T = compose(inverse(dual.T), from_matrix(scaling), tol)
        factorized = factorize_product(T, -dual.B, 'right', tol)
        require_same_relation(factorized.S, relation, 'T(I + iB)T* = S', tol)
        require_same_relation(factorized.S, krein_oracle(relation, tol), 'T(I + iB)T* = S_K', tol)
        return factorized
    raise PreconditionError(f'Unknown mode {mode!r}, expected one of {MODE_CHOICES}')


def _first_entries(relation: Relation, targets: np.ndarray, tol: Tolerance) -> np.ndarray:
    """For each column rho (in ran R) some phi with (phi, rho) in R."""
    if targets.shape[1] == 0:
        return np.zeros((relation.dim_from, 0), dtype=complex)
    coeffs = la.lstsq(relation.second, targets, cond=tol.rank_rel)[0]
    return relation.first @ coeffs


def _inverse_sqrt(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return matrix.copy()
    w, v = la.eigh((matrix + matrix.conj().T) / 2)
    return (v / np.sqrt(w)) @ v.conj().T


def abstract_model(factorized: FactorizedSectorial, tol: Tolerance = None, qj: QJData = None) -> AbstractModel:
    """
    Model of S on ran S.

    <phi', psi'>_S = ((phi', psi) + (phi, psi')) / 2 has null space
    R0 = ran S meet mul S*; on the quotient, b[phi', psi'] =
    (i/2)((phi, psi') - (phi', psi)) defines B_S, and alpha -> [phi'] is an
    isometry from M0 compressing B_S to B_m.
    """
    tol = tol or get_tolerance()
    _require_left(factorized, 'abstract_model')
    qj = qj or qj_construction(factorized, tol)
    S = factorized.S
    ran = range_of(S, tol)
    gram = _semi_inner(S, ran.basis, tol)

    isotropic = meet(ran, multivalued_part(adjoint(S), tol), tol)
    require_same_subspace(isotropic, multivalued_part(S, tol), 'isotropic part of ran S = mul S', tol)
    quotient = meet(ran, complement(isotropic), tol)
    w = quotient.basis
    phi_w = _first_entries(S, w, tol)
    inner = _semi_inner(S, w, tol, phi_w)
    b = 0.5j * (w.conj().T @ phi_w - phi_w.conj().T @ w)
    half = _inverse_sqrt(inner)
    B_S = half @ b @ half

    T_adj = adjoint(factorized.T)
    targets = factorized.weight @ qj.M.basis
    images = _first_entries(inverse(T_adj), targets, tol) if targets.shape[1] else np.zeros((S.dim_to, 0))
    iota = psd_sqrt(inner, tol) @ (w.conj().T @ images) if w.shape[1] else np.zeros((0, qj.M.dim))

    k = qj.M.dim
    isometry_residual = float(np.max(np.abs(iota.conj().T @ iota - np.eye(k)))) if k else 0.0
    compression_residual = float(la.norm(qj.B_m - iota.conj().T @ B_S @ iota, 2)) if k else 0.0
    require(isometry_residual <= tol.gap_eq * IDENTITY_SLACK, f'iota is isometric ({isometry_residual:.3e})')
    require(compression_residual <= tol.gap_eq * IDENTITY_SLACK, f'B_m = iota* B_S iota ({compression_residual:.3e})')
    return AbstractModel(
        gram_S=gram,
        R0=isotropic,
        B_S=B_S,
        iota=iota,
        quotient=quotient,
        isometry_residual=isometry_residual,
        compression_residual=compression_residual,
    )


def _semi_inner(relation: Relation, targets: np.ndarray, tol: Tolerance, firsts: np.ndarray = None) -> np.ndarray:
    """Gram matrix of <.,.>_S on the columns of `targets`, entry [j, i] = <t_i, t_j>_S."""
    firsts = _first_entries(relation, targets, tol) if firsts is None else firsts
    return (firsts.conj().T @ targets + targets.conj().T @ firsts) / 2
