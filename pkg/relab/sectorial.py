"""
Sectoriality, sesquilinear forms and the real-part decomposition.

With an orthonormal graph basis G = [X; Y] every pair of a relation is
(Xc, Yc), so <h', h> = c^H (X^H Y) c. Sectoriality, the semi-angle and the
form of a relation are all read off small Gram matrices of this kind.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la

from .exceptions import (
    DimensionMismatch, IllDefinedForm, NotMaximalSectorial, NotSectorial, PreconditionError,
)
from .relations import (
    Relation, adjoint, compose_chain, domain, from_matrix, kernel, multivalued_part,
    operator_part, same_relation,
)
from .subspaces import (
    Subspace, Tolerance, complement, gap, get_tolerance, inclusion_gap, join, meet,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SectorReport:
    is_sectorial: bool
    tan_min: float
    is_maximal: bool

    def as_dict(self) -> dict:
        return {
            'is_sectorial': self.is_sectorial,
            'tan_min': self.tan_min,
            'is_maximal': self.is_maximal,
        }


def hermitian_parts(matrix) -> tuple:
    """(M_r, M_i) with M = M_r + i M_i, both Hermitian."""
    matrix = np.asarray(matrix, dtype=complex)
    return (matrix + matrix.conj().T) / 2, (matrix - matrix.conj().T) / 2j


def psd_sqrt(matrix, tol: Tolerance = None) -> np.ndarray:
    """
    Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues at or below tol.gap_eq * max(1, max |w|) count as zero.
    """
    tol = tol or get_tolerance()
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.size == 0:
        return matrix.copy()
    w, v = la.eigh((matrix + matrix.conj().T) / 2)
    floor = tol.gap_eq * max(1.0, float(np.max(np.abs(w))))
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def _sector(matrix, tol: Tolerance) -> tuple:
    """
    (is_sectorial, tan_min) for the quadratic form z -> z^H M z.

    Sectorial means M_r >= 0 and M_i vanishes on ker M_r; tan_min is the
    largest |generalized eigenvalue| of (M_i, M_r) on ran M_r.
    """
    if matrix.shape[0] == 0:
        return True, 0.0
    real, imag = hermitian_parts(matrix)
    w, v = la.eigh(real)
    floor = tol.gap_eq * max(1.0, float(np.max(np.abs(matrix))))
    if w[0] < -floor:
        return False, float('inf')
    positive = w > floor
    if not positive.all() and la.norm(imag @ v[:, ~positive], 2) > floor:
        return False, float('inf')
    if not positive.any():
        return True, 0.0
    scaled = v[:, positive] / np.sqrt(w[positive])
    pencil = scaled.conj().T @ imag @ scaled
    return True, float(np.max(np.abs(la.eigvalsh((pencil + pencil.conj().T) / 2))))


def graph_gram(relation: Relation) -> np.ndarray:
    """X^H Y for the stored graph basis [X; Y]."""
    return relation.first.conj().T @ relation.second


def sectoriality(relation: Relation, tol: Tolerance = None) -> SectorReport:
    """
    Sectoriality verdict with vertex 0.

    A relation on C^n is maximal sectorial iff it is sectorial and its graph
    has dimension n.
    """
    tol = tol or get_tolerance()
    if not relation.is_endo:
        raise DimensionMismatch(
            f'Sectoriality needs a relation on one space, got C^{relation.dim_from} -> C^{relation.dim_to}'
        )
    is_sectorial, tan_min = _sector(graph_gram(relation), tol)
    return SectorReport(
        is_sectorial=is_sectorial,
        tan_min=tan_min,
        is_maximal=is_sectorial and relation.graph.dim == relation.dim_from,
    )


# ============================================================================
# Forms
# ============================================================================

@dataclass(frozen=True, eq=False)
class SesquiForm:
    """
    t[h, k] = c_k^H M c_h on `domain`, where c_h = domain.basis^H h.
    """

    domain: Subspace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (self.domain.dim, self.domain.dim):
            raise DimensionMismatch(
                f'Form matrix of shape {matrix.shape} on a {self.domain.dim}-dimensional domain'
            )
        matrix.flags.writeable = False
        object.__setattr__(self, 'matrix', matrix)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def ambient_dim(self) -> int:
        return self.domain.ambient_dim

    def coordinates(self, h) -> np.ndarray:
        return self.domain.basis.conj().T @ np.asarray(h, dtype=complex).reshape(-1)

    def evaluate(self, h, k) -> complex:
        return complex(self.coordinates(k).conj() @ self.matrix @ self.coordinates(h))

    @cached_property
    def real_part(self) -> 'SesquiForm':
        return SesquiForm(self.domain, hermitian_parts(self.matrix)[0])

    @cached_property
    def imaginary_part(self) -> 'SesquiForm':
        return SesquiForm(self.domain, hermitian_parts(self.matrix)[1])

    def restrict(self, subspace: Subspace, tol: Tolerance = None) -> 'SesquiForm':
        return restrict_form(self, subspace, tol)

    def __repr__(self):
        return f'SesquiForm(dim={self.dim}, ambient_dim={self.ambient_dim})'


def form_sector(form: SesquiForm, tol: Tolerance = None) -> tuple:
    """(is_sectorial, tan_min) of a form."""
    return _sector(form.matrix, tol or get_tolerance())


def restrict_form(form: SesquiForm, subspace: Subspace, tol: Tolerance = None) -> SesquiForm:
    tol = tol or get_tolerance()
    if inclusion_gap(subspace, form.domain) > tol.gap_eq:
        raise PreconditionError('Restriction subspace is not inside the form domain')
    change = form.domain.basis.conj().T @ subspace.basis
    return SesquiForm(subspace, change.conj().T @ form.matrix @ change)


def form_sum(first: SesquiForm, second: SesquiForm, tol: Tolerance = None) -> SesquiForm:
    """t1 + t2 on the intersection of the domains."""
    common = meet(first.domain, second.domain, tol)
    return SesquiForm(
        common,
        restrict_form(first, common, tol).matrix + restrict_form(second, common, tol).matrix,
    )


def form_distance(first: SesquiForm, second: SesquiForm) -> float:
    """
    max(domain gap, matrix mismatch after aligning bases); inf for domains of
    different dimension.
    """
    if first.dim != second.dim or first.ambient_dim != second.ambient_dim:
        return float('inf')
    if first.dim == 0:
        return 0.0
    domain_gap = gap(first.domain, second.domain)
    change = second.domain.basis.conj().T @ first.domain.basis
    aligned = change.conj().T @ second.matrix @ change
    return max(domain_gap, float(la.norm(first.matrix - aligned, 2)))


def forms_equal(first: SesquiForm, second: SesquiForm, tol: Tolerance = None) -> bool:
    tol = tol or get_tolerance()
    scale = max(1.0, float(la.norm(first.matrix, 2)) if first.dim else 1.0)
    return form_distance(first, second) <= tol.gap_eq * scale


def form_of(relation: Relation, tol: Tolerance = None) -> SesquiForm:
    """
    The form t[phi, psi] = <phi', psi> on dom R.

    Well defined only if mul R is orthogonal to dom R, which holds for every
    sectorial relation.
    """
    tol = tol or get_tolerance()
    if not relation.is_endo:
        raise DimensionMismatch('Forms are defined for relations on one space')
    dom = domain(relation, tol)
    mul = multivalued_part(relation, tol)
    if dom.dim and mul.dim:
        overlap = float(la.norm(dom.basis.conj().T @ mul.basis, 2))
        if overlap > tol.gap_eq:
            raise IllDefinedForm(f'mul R is not orthogonal to dom R (overlap {overlap:.3e})')
    if dom.dim == 0:
        return SesquiForm(dom, np.zeros((0, 0), dtype=complex))
    coefficients = la.lstsq(relation.first, dom.basis, cond=tol.rank_rel)[0]
    images = relation.second @ coefficients
    return SesquiForm(dom, dom.basis.conj().T @ images)


def relation_of_form(form: SesquiForm, tol: Tolerance = None) -> Relation:
    """
    The maximal sectorial relation of a sectorial form:
    {(h, Q M c_h + m) : h in dom t, m orthogonal to dom t}.
    """
    tol = tol or get_tolerance()
    is_sectorial, _ = form_sector(form, tol)
    if not is_sectorial:
        raise NotSectorial('Form is not sectorial')
    n, d = form.ambient_dim, form.dim
    q = form.domain.basis
    rest = complement(form.domain).basis
    columns = np.zeros((2 * n, n), dtype=complex)
    columns[:n, :d] = q
    columns[n:, :d] = q @ form.matrix
    columns[n:, d:] = rest
    return Relation(n, n, Subspace.from_columns(columns, tol))


def sqrt_nonneg(relation: Relation, tol: Tolerance = None) -> Relation:
    """
    Square root of a nonnegative selfadjoint relation.

    The operator part on (mul A)^perp gets its principal PSD root and the
    multivalued part {0} x mul A is kept.
    """
    tol = tol or get_tolerance()
    report = sectoriality(relation, tol)
    if not report.is_sectorial or report.tan_min > tol.gap_eq:
        raise NotSectorial('Square roots need a nonnegative relation')
    if not same_relation(adjoint(relation), relation, tol):
        raise NotSectorial('Square roots need a selfadjoint relation')
    form = form_of(relation, tol)
    return relation_of_form(SesquiForm(form.domain, psd_sqrt(form.real_part.matrix, tol)), tol)


# ============================================================================
# Real-part decomposition of maximal sectorial relations
# ============================================================================

@dataclass(frozen=True, eq=False)
class MaxSectorialDecomposition:
    """
    H = (H_r)^(1/2) (I + iB) (H_r)^(1/2).

    `sqrt_matrix` is the n x n matrix of the operator part of (H_r)^(1/2),
    zero on mul H_r.
    """

    real_part: Relation
    sqrt_real: Relation
    B: np.ndarray
    form: SesquiForm
    sqrt_matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.real_part.dim_from

    @property
    def weight(self) -> np.ndarray:
        return np.eye(self.n) + 1j * self.B

    def recompose(self, tol: Tolerance = None) -> Relation:
        return compose_chain(self.sqrt_real, from_matrix(self.weight), self.sqrt_real, tol=tol)

    def recompose_operator_part(self, tol: Tolerance = None) -> Relation:
        root = operator_part(self.sqrt_real, tol)
        return compose_chain(root, from_matrix(self.weight), root, tol=tol)

    def kernel_residual(self, tol: Tolerance = None) -> float:
        """||B P|| with P the projector onto ker H_r + mul H_r."""
        null = join(kernel(self.real_part, tol), multivalued_part(self.real_part, tol), tol)
        return float(la.norm(self.B @ null.projector, 2)) if null.dim else 0.0


def decompose_maximal(relation: Relation, tol: Tolerance = None) -> MaxSectorialDecomposition:
    """
    Split a maximal sectorial relation into its real part and the bounded
    Hermitian B with ||B|| = tan_min, B zero on ker H_r + mul H_r.

    Args:
        relation: maximal sectorial relation on C^n
        tol: tolerances

    Returns:
        MaxSectorialDecomposition
    """
    tol = tol or get_tolerance()
    if not sectoriality(relation, tol).is_maximal:
        raise NotMaximalSectorial('decompose_maximal needs a maximal sectorial relation')
    form = form_of(relation, tol)
    q = form.domain.basis
    real, imag = hermitian_parts(form.matrix)
    real_part = relation_of_form(SesquiForm(form.domain, real), tol)
    sqrt_real = sqrt_nonneg(real_part, tol)

    n = relation.dim_from
    b_coords = np.zeros_like(real)
    if form.dim:
        w, v = la.eigh(real)
        positive = w > tol.gap_eq * max(1.0, float(np.max(np.abs(form.matrix))))
        # pseudo-inverse of the square root, restricted to ran M_r
        root_pinv = (v[:, positive] / np.sqrt(w[positive])) @ v[:, positive].conj().T
        b_coords = root_pinv @ imag @ root_pinv
        b_coords = (b_coords + b_coords.conj().T) / 2
    B = q @ b_coords @ q.conj().T if form.dim else np.zeros((n, n), dtype=complex)
    logger.debug('decompose_maximal: dom %d, ||B|| = %.6g', form.dim, la.norm(B, 2) if n else 0.0)
    return MaxSectorialDecomposition(
        real_part=real_part,
        sqrt_real=sqrt_real,
        B=B,
        form=form,
        sqrt_matrix=q @ psd_sqrt(real, tol) @ q.conj().T,
    )
