"""
Execute instance files and collect reports.

Commands run in file order against a namespace of the instance's objects;
a command may `store` its result under a new name for later commands.
Reports contain no timing unless requested, so two runs of one file give
byte-identical JSON.
"""
import dataclasses
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from . import factorized, formsum, oracles, relations, sectorial, verification
from .checks import IDENTITY_SLACK
from .exceptions import DimensionMismatch, InstanceError, RelabError
from .instances import (
    Instance, build_object, encode_matrix, encode_relation, encode_subspace,
    instance_tolerance, load_instance,
)
from .relations import Relation, fingerprint, relation_gap
from .subspaces import Subspace, Tolerance, gap

logger = logging.getLogger(__name__)

REPORT_DECIMALS = 12
DEFAULT_WORKERS = 4


@dataclass(frozen=True)
class Operation:
    name: str
    func: object
    refs: tuple
    literals: tuple = ()


OPERATIONS = {}


def operation(name: str, refs: tuple, literals: tuple = ()):
    """Register an op callable as func(tol, **args)."""
    def register(func):
        OPERATIONS[name] = Operation(name, func, refs, literals)
        return func
    return register


# ============================================================================
# Operations
# ============================================================================

@operation('sectoriality', ('R',))
def _sectoriality(tol, R):
    return sectorial.sectoriality(R, tol)


@operation('parts', ('R',))
def _parts(tol, R):
    return relations.parts(R, tol)


@operation('adjoint', ('R',))
def _adjoint(tol, R):
    return relations.adjoint(R)


@operation('inverse', ('R',))
def _inverse(tol, R):
    return relations.inverse(R)


@operation('compose', ('outer', 'inner'))
def _compose(tol, outer, inner):
    return relations.compose(outer, inner, tol)


@operation('operator_sum', ('first', 'second'))
def _operator_sum(tol, first, second):
    return relations.operator_sum(first, second, tol)


@operation('direct_product', ('first', 'second'))
def _direct_product(tol, first, second):
    return relations.direct_product(first, second)


@operation('operator_part', ('R',))
def _operator_part(tol, R):
    return relations.operator_part(R, tol)


@operation('restrict', ('R', 'L'))
def _restrict(tol, R, L):
    return relations.restrict(R, L, tol)


@operation('form', ('R',))
def _form(tol, R):
    return sectorial.form_of(R, tol)


@operation('decompose', ('H',))
def _decompose(tol, H):
    return sectorial.decompose_maximal(H, tol)


@operation('friedrichs_oracle', ('S',))
def _friedrichs_oracle(tol, S):
    return oracles.friedrichs_oracle(S, tol)


@operation('krein_oracle', ('S',))
def _krein_oracle(tol, S):
    return oracles.krein_oracle(S, tol)


@operation('extremal_oracle', ('H', 'S'))
def _extremal_oracle(tol, H, S):
    return oracles.extremal_oracle(H, S, tol)


@operation('extension_family', ('S', 'L'))
def _extension_family(tol, S, L):
    return oracles.extension_family_general(S, L, tol)


@operation('oracle_gap', ('S',))
def _oracle_gap(tol, S):
    return relation_gap(oracles.friedrichs_oracle(S, tol), oracles.krein_oracle(S, tol))


@operation('factorize', ('T', 'B'), ('side',))
def _factorize(tol, T, B, side='left'):
    return factorized.factorize_product(T, B, side, tol)


@operation('friedrichs_factorized', ('T', 'B'))
def _friedrichs_factorized(tol, T, B):
    return factorized.friedrichs_factorized(factorized.factorize_product(T, B, 'left', tol), tol)


@operation('krein_factorized', ('T', 'B'))
def _krein_factorized(tol, T, B):
    return factorized.krein_factorized(factorized.factorize_product(T, B, 'left', tol), tol)


@operation('extremal_factorized', ('T', 'B', 'L'))
def _extremal_factorized(tol, T, B, L):
    return factorized.extremal_factorized(factorized.factorize_product(T, B, 'left', tol), L, tol)


@operation('qj', ('T', 'B'))
def _qj(tol, T, B):
    return factorized.qj_construction(factorized.factorize_product(T, B, 'left', tol), tol)


@operation('recover_factorization', ('S',), ('mode',))
def _recover_factorization(tol, S, mode='friedrichs'):
    return factorized.recover_factorization(S, mode, tol)


@operation('abstract_model', ('T', 'B'))
def _abstract_model(tol, T, B):
    return factorized.abstract_model(factorized.factorize_product(T, B, 'left', tol), tol)


@operation('assemble', ('H1', 'H2'))
def _assemble(tol, H1, H2):
    return formsum.assemble(H1, H2, tol)


@operation('friedrichs_sum', ('H1', 'H2'))
def _friedrichs_sum(tol, H1, H2):
    return formsum.friedrichs_sum(formsum.assemble(H1, H2, tol), tol)


@operation('krein_sum', ('H1', 'H2'))
def _krein_sum(tol, H1, H2):
    return formsum.krein_sum(formsum.assemble(H1, H2, tol), tol)


@operation('krein_sum_form', ('H1', 'H2'))
def _krein_sum_form(tol, H1, H2):
    form = formsum.krein_sum_form(formsum.assemble(H1, H2, tol), tol)
    return {'emitted': form is not None, 'form': form}


@operation('formsum_extension', ('H1', 'H2'))
def _formsum_extension(tol, H1, H2):
    return formsum.formsum_extension(formsum.assemble(H1, H2, tol), tol)


@operation('extremal_sum', ('H1', 'H2', 'L'))
def _extremal_sum(tol, H1, H2, L):
    return formsum.extremal_sum_family(formsum.assemble(H1, H2, tol), L, tol)


@operation('extremality_report', ('H1', 'H2'))
def _extremality_report(tol, H1, H2):
    return formsum.extremality_report(formsum.assemble(H1, H2, tol), tol)


@operation('gap', ('first', 'second'))
def _gap(tol, first, second):
    if isinstance(first, Relation) and isinstance(second, Relation):
        return relation_gap(first, second)
    if isinstance(first, Subspace) and isinstance(second, Subspace):
        return gap(first, second)
    raise InstanceError('gap compares two relations or two subspaces', kind='dimension-mismatch')


@operation('verify_factorized', ('T', 'B'))
def _verify_factorized(tol, T, B):
    return verification.check_factorized(T, B, tol)


@operation('verify_maximal', ('H',))
def _verify_maximal(tol, H):
    return verification.check_maximal(H, tol)


@operation('verify_pair', ('H1', 'H2'))
def _verify_pair(tol, H1, H2):
    return verification.check_pair(H1, H2, tol)


@operation('verify_general', ('S',))
def _verify_general(tol, S):
    return verification.check_general(S, tol)


# ============================================================================
# Reports
# ============================================================================

@dataclass(frozen=True)
class RunOptions:
    tol_gap: float = None
    tol_rank: float = None
    timing: bool = False


@dataclass
class CommandReport:
    index: int
    op: str
    status: str
    result: object = None
    gap: float = None
    message: str = ''
    fingerprints: dict = field(default_factory=dict)
    timing: float = None

    def to_dict(self) -> dict:
        data = {
            'index': self.index,
            'op': self.op,
            'status': self.status,
            'result': self.result,
            'gap': _round(self.gap),
            'message': self.message,
            'fingerprints': self.fingerprints,
        }
        if self.timing is not None:
            data['timing'] = self.timing
        return data


@dataclass
class Report:
    instance: str
    commands: list = field(default_factory=list)
    error: dict = None

    @property
    def status(self) -> str:
        if self.error is not None or any(c.status == 'error' for c in self.commands):
            return 'error'
        if any(c.status == 'fail' for c in self.commands):
            return 'fail'
        return 'pass'

    @property
    def exit_code(self) -> int:
        """0 pass, 1 failed or errored command, 2 unusable input."""
        if self.error is not None:
            return 2
        return 0 if self.status == 'pass' else 1

    def to_dict(self) -> dict:
        data = {
            'instance': self.instance,
            'status': self.status,
            'commands': [command.to_dict() for command in self.commands],
        }
        if self.error is not None:
            data['error'] = self.error
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _round(value):
    if value is None:
        return None
    value = float(value)
    if not np.isfinite(value):
        return str(value)
    return round(value, REPORT_DECIMALS) + 0.0


def summarize(value, tol: Tolerance):
    """JSON-ready form of an op result."""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, (float, np.floating)):
        return _round(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Relation):
        data = encode_relation(value)
        data['dim'] = value.graph.dim
        return data
    if isinstance(value, Subspace):
        data = encode_subspace(value)
        data['dim'] = value.dim
        return data
    if isinstance(value, np.ndarray):
        return encode_matrix(np.round(value, REPORT_DECIMALS))
    if isinstance(value, sectorial.SesquiForm):
        return {'domain': summarize(value.domain, tol), 'matrix': summarize(value.matrix, tol)}
    if isinstance(value, formsum.SumAssembly):
        return {
            'E_dim': value.E.dim,
            'F_dim': value.F.dim,
            'D_dim': value.D.dim,
            'E_eq_F': gap(value.E, value.F) <= tol.gap_eq,
            'E_eq_D': gap(value.E, value.D) <= tol.gap_eq,
            'gap_E_D': _round(gap(value.E, value.D)),
            'Ksum': summarize(value.Ksum, tol),
        }
    if isinstance(value, dict):
        return {key: summarize(item, tol) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [summarize(item, tol) for item in value]
    if hasattr(value, 'as_dict'):
        return summarize(value.as_dict(), tol)
    if dataclasses.is_dataclass(value):
        return {f.name: summarize(getattr(value, f.name), tol) for f in dataclasses.fields(value)}
    raise TypeError(f'Cannot summarize {type(value).__name__}')


def _relation_of(value):
    """The relation a result stands for, if any."""
    if isinstance(value, Relation):
        return value
    if isinstance(value, factorized.FactorizedSectorial):
        return value.S
    return None


def _scalar(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, float, np.floating, np.integer)):
        return float(value)
    return None


def _close(expected, actual, limit: float) -> bool:
    if isinstance(expected, bool) or expected is None or isinstance(expected, str):
        return expected == actual
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)) and not isinstance(actual, bool):
        return abs(expected - actual) <= limit * max(1.0, abs(expected))
    if isinstance(expected, dict) and isinstance(actual, dict):
        return all(key in actual and _close(item, actual[key], limit) for key, item in expected.items())
    return expected == actual


# ============================================================================
# Execution
# ============================================================================

class _Execution:
    """State of one instance run: tolerance, namespace and command reports."""

    def __init__(self, instance: Instance, options: RunOptions):
        self.instance = instance
        self.options = options
        self.tol = instance_tolerance(instance, options.tol_gap, options.tol_rank)
        self.limit = self.tol.gap_eq * IDENTITY_SLACK
        self.namespace = {}
        self.report = Report(instance.name)

    def validate(self):
        """Unknown ops and undefined references are input errors, found before anything runs."""
        defined = set(self.instance.objects)
        for index, command in enumerate(self.instance.commands):
            op = OPERATIONS.get(command.op)
            if op is None:
                raise InstanceError(f'commands[{index}]: unknown op {command.op!r}', kind='unknown-op')
            if not isinstance(command.args, dict):
                raise InstanceError(f'commands[{index}].args: expected an object')
            missing = [ref for ref in op.refs if ref not in command.args]
            unknown = set(command.args) - set(op.refs) - set(op.literals)
            if missing or unknown:
                raise InstanceError(
                    f'commands[{index}] ({command.op}): expects {list(op.refs)}'
                    f'{" and optionally " + str(list(op.literals)) if op.literals else ""}'
                )
            for ref in op.refs:
                if command.args[ref] not in defined:
                    raise InstanceError(f'commands[{index}] ({command.op}): {ref} refers to '
                                        f'undefined object {command.args[ref]!r}')
            expect = command.expect or {}
            if 'same_as' in expect and expect['same_as'] not in defined:
                raise InstanceError(f'commands[{index}]: same_as refers to undefined object {expect["same_as"]!r}')
            if command.store:
                defined.add(command.store)

    def build(self):
        self.namespace = {}
        for name in self.instance.objects:
            self.namespace[name] = build_object(self.instance, name, self.tol)

    def execute(self, index: int, command):
        op = OPERATIONS[command.op]
        args = {ref: self.namespace[command.args[ref]] for ref in op.refs}
        args.update({key: command.args[key] for key in op.literals if key in command.args})
        fingerprints = {ref: fingerprint(value) for ref, value in args.items() if isinstance(value, Relation)}
        entry = CommandReport(index=index, op=command.op, status='pass', fingerprints=fingerprints)
        expect = command.expect or {}

        started = time.perf_counter()
        try:
            result = op.func(self.tol, **args)
        except (RelabError, ValueError, TypeError) as exc:
            self._finish(entry, started)
            kind = getattr(exc, 'kind', 'precondition')
            if isinstance(exc, DimensionMismatch) and kind != expect.get('error'):
                names = ', '.join(f'{ref}={command.args[ref]!r}' for ref in op.refs)
                raise InstanceError(f'commands[{index}] ({command.op}) on {names}: {exc}',
                                    kind='dimension-mismatch') from exc
            entry.message = f'{kind}: {exc}'
            if kind != expect.get('error'):
                entry.status = 'error'
            return entry
        self._finish(entry, started)

        if command.store:
            self.namespace[command.store] = result
        relation = _relation_of(result)
        if relation is not None:
            entry.fingerprints['result'] = fingerprint(relation)
        entry.result = summarize(result, self.tol)
        if isinstance(result, verification.VerificationResult) and not result.passed:
            worst = max(result.failures, key=lambda check: check.value)
            entry.status, entry.gap = 'fail', worst.value
            entry.message = ', '.join(check.name for check in result.failures)
        self._compare(entry, expect, result, relation)
        return entry

    def _finish(self, entry: CommandReport, started: float):
        if self.options.timing:
            entry.timing = round(time.perf_counter() - started, 6)

    def _fail(self, entry: CommandReport, message: str, measured: float = None):
        entry.status = 'fail'
        entry.message = '; '.join(filter(None, [entry.message, message]))
        if measured is not None:
            entry.gap = measured if entry.gap is None else max(entry.gap, measured)

    def _compare(self, entry: CommandReport, expect: dict, result, relation):
        if 'error' in expect:
            self._fail(entry, f'expected a {expect["error"]} error')
        for key in ('relation', 'same_as'):
            if key not in expect:
                continue
            if key == 'relation':
                target = build_object(Instance('expect', self.instance.dims, {'expected': expect[key]}),
                                      'expected', self.tol)
            else:
                target = _relation_of(self.namespace[expect[key]])
            if relation is None or target is None:
                self._fail(entry, f'{key}: result is not a relation')
                continue
            entry.fingerprints['expected'] = fingerprint(target)
            if (relation.dim_from, relation.dim_to) != (target.dim_from, target.dim_to):
                self._fail(entry, f'{key}: C^{target.dim_from} -> C^{target.dim_to} expected', 1.0)
                continue
            measured = relation_gap(relation, target)
            entry.gap = measured if entry.gap is None else max(entry.gap, measured)
            if measured > self.limit:
                self._fail(entry, f'{key}: gap {measured:.3e}')
        scalar = _scalar(result)
        for key in ('value', 'max', 'min'):
            if key not in expect:
                continue
            if scalar is None:
                self._fail(entry, f'{key}: result is not a scalar')
                continue
            bound = expect[key]
            if key == 'value':
                ok = _close(bound, scalar if not isinstance(bound, bool) else bool(scalar), self.limit)
            elif key == 'max':
                ok = scalar <= bound
            else:
                ok = scalar >= bound
            if not ok:
                self._fail(entry, f'{key}: {bound!r}, got {scalar!r}')
        if 'fields' in expect:
            summary = entry.result if isinstance(entry.result, dict) else {}
            wrong = [key for key, item in expect['fields'].items()
                     if key not in summary or not _close(item, summary[key], self.limit)]
            if wrong:
                self._fail(entry, 'fields differ: ' + ', '.join(
                    f'{key} = {summary.get(key)!r}' for key in wrong))


def run(source, options: RunOptions = None) -> Report:
    """
    Run every command of an instance (a path or a parsed Instance).

    Raises:
        InstanceError: parse error, unknown op, undefined reference or
            dimension mismatch in the declared objects
    """
    options = options or RunOptions()
    instance = source if isinstance(source, Instance) else load_instance(source)
    execution = _Execution(instance, options)
    execution.validate()
    try:
        execution.build()
    except InstanceError:
        raise
    except RelabError as exc:
        raise InstanceError(str(exc), kind='dimension-mismatch') from exc
    for index, command in enumerate(instance.commands):
        entry = execution.execute(index, command)
        logger.info('%s[%d] %s: %s', instance.name, index, command.op, entry.status)
        execution.report.commands.append(entry)
    return execution.report


def _run_safely(source, options: RunOptions) -> Report:
    try:
        return run(source, options)
    except InstanceError as exc:
        name = source.name if isinstance(source, Instance) else str(source)
        logger.warning('%s: %s', name, exc)
        return Report(name, error={'kind': exc.kind, 'message': str(exc)})


def run_many(sources, options: RunOptions = None, workers: int = None) -> list:
    """Run several instances in worker threads; reports come back in input order."""
    options = options or RunOptions()
    workers = workers or getattr(settings, 'RELAB_WORKERS', DEFAULT_WORKERS)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda source: _run_safely(source, options), sources))
