"""
Property suites, one per instance profile.

A suite never raises on a failed identity: every check is recorded with its
measured value so a report can show what failed and by how much.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .checks import IDENTITY_SLACK
from .exceptions import InstanceError, RelabError
from .factorized import (
    abstract_model, extremal_factorized, factorize_product, friedrichs_factorized,
    krein_factorized, lemma_alpha, qj_construction, recover_factorization,
)
from .formsum import (
    assemble, extremal_sum_family, extremality_report, formsum_extension,
    friedrichs_sum, krein_sum, krein_sum_form,
)
from .instances import PROFILE_CHOICES
from .oracles import (
    extension_family_general, extremal_oracle, form_order_holds, friedrichs_oracle,
    krein_oracle, sectorial_enlargement,
)
from .relations import (
    Relation, adjoint, containment_gap, domain, kernel, multivalued_part, operator_part,
    operator_sum, range_of, relation_gap,
)
from .sectorial import decompose_maximal, form_of, sectoriality
from .subspaces import Tolerance, gap, get_tolerance, join

logger = logging.getLogger(__name__)

KERNEL_LIMIT = 1e-10      # ||B P_(ker + mul)||
WITNESS_LIMIT = 1e-9      # extremal_oracle witness gap on passing extensions
ENLARGEMENT_SEED = 0
PROFILE_OBJECTS = {
    'factorized-left': ('T', 'B'),
    'maximal-pair': ('H1', 'H2'),
    'general-sectorial': ('S',),
    'nonnegative-symmetric': ('S',),
}


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    value: float = 0.0
    message: str = ''

    def as_dict(self) -> dict:
        return {'name': self.name, 'passed': self.passed, 'value': self.value, 'message': self.message}


@dataclass
class VerificationResult:
    profile: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list:
        return [check for check in self.checks if not check.passed]

    def value(self, name: str) -> float:
        return next(check.value for check in self.checks if check.name == name)

    def as_dict(self) -> dict:
        return {
            'profile': self.profile,
            'passed': self.passed,
            'checks': {check.name: check.passed for check in self.checks},
            'failures': [check.as_dict() for check in self.failures],
        }


class _Recorder:
    """Collects check outcomes for one suite."""

    def __init__(self, profile: str, tol: Tolerance):
        self.result = VerificationResult(profile)
        self.tol = tol
        self.limit = tol.gap_eq * IDENTITY_SLACK

    def measure(self, name: str, value: float, limit: float = None):
        limit = self.limit if limit is None else limit
        value = float(value)
        self.result.checks.append(CheckOutcome(name, value <= limit, value))

    def flag(self, name: str, ok: bool, message: str = ''):
        self.result.checks.append(CheckOutcome(name, bool(ok), 0.0 if ok else 1.0, message))

    def attempt(self, name: str, build):
        """Run a construction that asserts internally; None on failure."""
        try:
            value = build()
        except RelabError as exc:
            logger.info('%s failed: %s', name, exc)
            self.result.checks.append(CheckOutcome(name, False, getattr(exc, 'gap', None) or 1.0, str(exc)))
            return None
        self.flag(name, True)
        return value


def check_factorized(T: Relation, B, tol: Tolerance = None) -> VerificationResult:
    """Product identities, alpha uniqueness, Q/J, extensions and the model on ran S."""
    tol = tol or get_tolerance()
    rec = _Recorder('factorized-left', tol)
    F = rec.attempt('factorize_product', lambda: factorize_product(T, B, 'left', tol))
    if F is None:
        return rec.result
    S, T_adj = F.S, adjoint(T)
    rec.measure('mul S = mul T*', gap(multivalued_part(S, tol), multivalued_part(T_adj, tol)))
    rec.measure('ker S = ker T', gap(kernel(S, tol), kernel(T, tol)))
    report = sectoriality(S, tol)
    b_norm = float(la.norm(F.B, 2)) if F.B.size else 0.0
    rec.measure('tan_min <= ||B||', max(0.0, report.tan_min - b_norm))
    rec.flag('S maximal', report.is_maximal)
    conjugate = rec.attempt('product with I - iB', lambda: factorize_product(T, -F.B, 'left', tol))
    if conjugate is not None:
        rec.measure('S* = T*(I - iB)T', relation_gap(adjoint(S), conjugate.S))

    witnesses = rec.attempt("alpha for every phi' in ran S",
                            lambda: [lemma_alpha(F, column, tol) for column in range_of(S, tol).basis.T])
    if witnesses:
        nullity = max(witness.nullity for witness in witnesses)
        rec.flag('alpha unique', nullity == 0, f'nullity {nullity}')
        rec.measure("(phi', phi) = ((I + iB)alpha, alpha)", max(witness.residual for witness in witnesses))

    qj = rec.attempt('Q/J construction', lambda: qj_construction(F, tol))
    if qj is None:
        return rec.result
    friedrichs = rec.attempt('friedrichs_factorized', lambda: friedrichs_factorized(F, tol, qj))
    krein = rec.attempt('krein_factorized', lambda: krein_factorized(F, tol, qj))
    if friedrichs is not None and krein is not None:
        rec.measure('S_F = S', relation_gap(friedrichs, S))
        rec.measure('S_K = S', relation_gap(krein, S))
        rec.measure('S_F = S_K', relation_gap(friedrichs, krein))
    rec.measure('friedrichs oracle = S', relation_gap(friedrichs_oracle(S, tol), S))
    rec.measure('krein oracle = S', relation_gap(krein_oracle(S, tol), S))
    rec.attempt('extremal_factorized(dom Q)', lambda: extremal_factorized(F, domain(qj.Q, tol), tol, qj))
    model = rec.attempt('abstract model', lambda: abstract_model(F, tol, qj))
    if model is not None:
        rec.measure('iota isometric', model.isometry_residual, KERNEL_LIMIT)
        rec.measure('B_m = iota* B_S iota', model.compression_residual, WITNESS_LIMIT)
    return rec.result


def check_maximal(H: Relation, tol: Tolerance = None) -> VerificationResult:
    """Real-part decomposition and both recovery factorizations."""
    tol = tol or get_tolerance()
    rec = _Recorder('maximal', tol)
    decomposition = rec.attempt('decompose_maximal', lambda: decompose_maximal(H, tol))
    if decomposition is None:
        return rec.result
    report = sectoriality(H, tol)
    rec.measure('recomposition', relation_gap(decomposition.recompose(tol), H))
    rec.measure('B zero on ker + mul', decomposition.kernel_residual(tol), KERNEL_LIMIT)
    b_norm = float(la.norm(decomposition.B, 2))
    rec.measure('||B|| = tan_min', abs(b_norm - report.tan_min))
    rec.measure('operator part identity',
                relation_gap(decomposition.recompose_operator_part(tol), operator_part(H, tol)))
    rec.measure('friedrichs oracle fixes H', relation_gap(friedrichs_oracle(H, tol), H))
    rec.measure('krein oracle fixes H', relation_gap(krein_oracle(H, tol), H))
    enlarged = sectorial_enlargement(H, np.random.default_rng(ENLARGEMENT_SEED), tol=tol)
    rec.flag('no sectorial enlargement', enlarged is None)
    for mode in ('friedrichs', 'krein'):
        recovered = rec.attempt(f'recover_factorization({mode})', lambda mode=mode: recover_factorization(H, mode, tol))
        if recovered is not None:
            rec.measure(f'{mode} round trip', relation_gap(recovered.S, H))
    return rec.result


def check_pair(H1: Relation, H2: Relation, tol: Tolerance = None) -> VerificationResult:
    """Assembly identities and the three extensions of H1 + H2."""
    tol = tol or get_tolerance()
    rec = _Recorder('maximal-pair', tol)
    assembly = rec.attempt('assemble', lambda: assemble(H1, H2, tol))
    if assembly is None:
        return rec.result
    total = operator_sum(H1, H2, tol)
    rec.measure('K inside Phi', containment_gap(assembly.Ksum, assembly.Phi))
    rec.measure('Phi inside Psi*', containment_gap(assembly.Phi, adjoint(assembly.Psi)))
    rec.measure('Psi inside Phi*', containment_gap(assembly.Psi, adjoint(assembly.Phi)))
    rec.measure('Phi* inside K*', containment_gap(adjoint(assembly.Phi), adjoint(assembly.Ksum)))
    rec.measure('mul(H1 + H2) = mul H1 + mul H2',
                gap(multivalued_part(total, tol),
                    join(multivalued_part(H1, tol), multivalued_part(H2, tol), tol)))
    rec.flag('H1 + H2 has graph dimension n', total.graph.dim == H1.dim_from)
    extensions = {
        'friedrichs_sum': lambda: friedrichs_sum(assembly, tol),
        'krein_sum': lambda: krein_sum(assembly, tol),
        'formsum_extension': lambda: formsum_extension(assembly, tol),
    }
    for name, build in extensions.items():
        result = rec.attempt(name, build)
        if result is not None:
            rec.measure(f'{name} = H1 + H2', relation_gap(result, total))
    e_eq_d = gap(assembly.E, assembly.D) <= tol.gap_eq
    form = rec.attempt('krein_sum_form', lambda: krein_sum_form(assembly, tol))
    rec.flag('Krein form emitted iff E = D', (form is not None) == e_eq_d)
    if e_eq_d:
        rec.attempt('extremal_sum_family(dom sum)', lambda: extremal_sum_family(assembly, domain(total, tol), tol))
    report = rec.attempt('extremality_report', lambda: extremality_report(assembly, tol))
    if report is not None:
        rec.flag('E = F', report.E_eq_F)
        rec.flag('equivalence holds', report.equivalence_holds)
    return rec.result


def check_general(S: Relation, tol: Tolerance = None) -> VerificationResult:
    """Oracle properties on a (usually non-maximal) sectorial relation."""
    tol = tol or get_tolerance()
    rec = _Recorder('general-sectorial', tol)
    friedrichs = rec.attempt('friedrichs_oracle', lambda: friedrichs_oracle(S, tol))
    krein = rec.attempt('krein_oracle', lambda: krein_oracle(S, tol))
    if friedrichs is None or krein is None:
        return rec.result
    rec.measure('friedrichs oracle idempotent', relation_gap(friedrichs_oracle(friedrichs, tol), friedrichs))
    rec.measure('krein oracle idempotent', relation_gap(krein_oracle(krein, tol), krein))
    for name, extension in (('S_F', friedrichs), ('S_K', krein)):
        verdict = extremal_oracle(extension, S, tol)
        rec.flag(f'{name} extends S', verdict.extends)
        rec.flag(f'{name} maximal', verdict.maximal)
        rec.flag(f'{name} extremal', verdict.extremal)
        rec.measure(f'{name} witness gap', verdict.witness_gap, WITNESS_LIMIT)
    krein_form = form_of(krein, tol)
    lower = rec.attempt('family at dom S', lambda: extension_family_general(S, domain(S, tol), tol))
    upper = rec.attempt('family at dom t_SK', lambda: extension_family_general(S, krein_form.domain, tol))
    if lower is not None:
        rec.measure('family at dom S = S_F', relation_gap(lower, friedrichs))
    if upper is not None:
        rec.measure('family at dom t_SK = S_K', relation_gap(upper, krein))
    report = sectoriality(S, tol)
    if report.tan_min <= tol.gap_eq:
        rec.flag('form order t_SK <= t_SF',
                 form_order_holds(krein_form.real_part, form_of(friedrichs, tol).real_part, tol))
    return rec.result


def run_profile_suite(profile: str, objects: dict, tol: Tolerance = None) -> VerificationResult:
    """Dispatch on profile name with the objects of a generated instance."""
    if profile not in PROFILE_CHOICES:
        raise InstanceError(f'Unknown profile {profile!r}, expected one of {PROFILE_CHOICES}',
                            kind='precondition')
    if profile == 'factorized-left':
        return check_factorized(objects['T'], objects['B'], tol)
    if profile == 'maximal-pair':
        return check_pair(objects['H1'], objects['H2'], tol)
    return check_general(objects['S'], tol)
