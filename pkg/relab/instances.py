"""
Instance files: parsing, validation, serialization and seeded generation.

An instance names its spaces, declares relations, matrices and subspaces by
generators (complex numbers as [re, im] pairs) and lists the commands to run
on them.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings

from .ensembles import (
    random_general_sectorial, random_left_factorization, random_maximal_sectorial,
    random_nonnegative_symmetric,
)
from .exceptions import DimensionMismatch, InstanceError
from .oracles import friedrichs_oracle, krein_oracle
from .relations import Relation, make_relation, relation_gap
from .subspaces import Subspace, Tolerance, get_tolerance, span

logger = logging.getLogger(__name__)

OBJECT_KINDS = ('relation', 'matrix', 'subspace')
EXPECT_KINDS = ('relation', 'same_as', 'value', 'max', 'min', 'fields', 'error')
PROFILE_CHOICES = ('factorized-left', 'maximal-pair', 'general-sectorial', 'nonnegative-symmetric')
STRICT_ORACLE_GAP = 0.1   # general-sectorial instances need gap(S_F, S_K) above this
MAX_REGENERATIONS = 100
DEFAULT_MAX_DIM = 32


@dataclass
class Command:
    op: str
    args: dict = field(default_factory=dict)
    store: str = None
    expect: dict = None

    def to_dict(self) -> dict:
        data = {'op': self.op, 'args': self.args}
        if self.store is not None:
            data['store'] = self.store
        if self.expect is not None:
            data['expect'] = self.expect
        return data


@dataclass
class Instance:
    name: str
    dims: dict = field(default_factory=dict)
    objects: dict = field(default_factory=dict)
    commands: list = field(default_factory=list)
    tolerance: dict = None
    meta: dict = None

    def to_dict(self) -> dict:
        data = {
            'name': self.name,
            'dims': self.dims,
            'objects': self.objects,
            'commands': [command.to_dict() for command in self.commands],
        }
        if self.tolerance is not None:
            data['tolerance'] = self.tolerance
        if self.meta is not None:
            data['meta'] = self.meta
        return data


# ============================================================================
# Complex values
# ============================================================================

def encode_complex(value) -> list:
    value = complex(value)
    # + 0.0 turns -0.0 into 0.0 so equal values serialize identically
    return [float(value.real) + 0.0, float(value.imag) + 0.0]


def encode_vector(vector) -> list:
    return [encode_complex(entry) for entry in np.asarray(vector).reshape(-1)]


def encode_matrix(matrix) -> list:
    return [encode_vector(row) for row in np.atleast_2d(np.asarray(matrix))]


def encode_relation(relation: Relation) -> dict:
    """Generator list of a relation (its graph basis columns split into pairs)."""
    return {
        'kind': 'relation',
        'from': relation.dim_from,
        'to': relation.dim_to,
        'generators': [
            [encode_vector(column[:relation.dim_from]), encode_vector(column[relation.dim_from:])]
            for column in relation.graph.basis.T
        ],
    }


def encode_subspace(space: Subspace) -> dict:
    return {
        'kind': 'subspace',
        'space': space.ambient_dim,
        'generators': [encode_vector(column) for column in space.basis.T],
    }


def decode_complex(raw, where: str) -> complex:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return complex(raw)
    if (isinstance(raw, list) and len(raw) == 2
            and all(isinstance(part, (int, float)) and not isinstance(part, bool) for part in raw)):
        return complex(raw[0], raw[1])
    raise InstanceError(f'{where}: expected a number or an [re, im] pair, got {raw!r}')


def decode_vector(raw, length: int, where: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise InstanceError(f'{where}: expected a list of complex entries')
    if len(raw) != length:
        raise InstanceError(
            f'{where}: vector of length {len(raw)} where C^{length} is expected',
            kind='dimension-mismatch',
        )
    return np.array([decode_complex(entry, f'{where}[{i}]') for i, entry in enumerate(raw)], dtype=complex)


# ============================================================================
# Parsing
# ============================================================================

def _require_keys(raw: dict, keys: tuple, where: str):
    if not isinstance(raw, dict):
        raise InstanceError(f'{where}: expected an object')
    missing = [key for key in keys if key not in raw]
    if missing:
        raise InstanceError(f'{where}: missing {", ".join(missing)}')


def parse_instance(text: str) -> Instance:
    """
    Parse instance JSON. Syntax errors report line and column; schema
    errors report the offending path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f'line {exc.lineno} column {exc.colno}: {exc.msg}') from exc
    _require_keys(raw, ('name', 'objects', 'commands'), 'instance')
    if not isinstance(raw['commands'], list):
        raise InstanceError('commands: expected a list')
    if not isinstance(raw['objects'], dict):
        raise InstanceError('objects: expected an object')

    commands = []
    for index, entry in enumerate(raw['commands']):
        where = f'commands[{index}]'
        _require_keys(entry, ('op',), where)
        unknown = set(entry) - {'op', 'args', 'store', 'expect'}
        if unknown:
            raise InstanceError(f'{where}: unknown keys {sorted(unknown)}')
        expect = entry.get('expect')
        if expect is not None:
            if not isinstance(expect, dict) or not expect or set(expect) - set(EXPECT_KINDS):
                raise InstanceError(f'{where}.expect: keys must be among {EXPECT_KINDS}')
        commands.append(Command(op=entry['op'], args=entry.get('args', {}),
                                store=entry.get('store'), expect=expect))

    for name, spec in raw['objects'].items():
        _require_keys(spec, ('kind',), f'objects.{name}')
        if spec['kind'] not in OBJECT_KINDS:
            raise InstanceError(f'objects.{name}: unknown kind {spec["kind"]!r}')

    return Instance(
        name=raw['name'],
        dims=raw.get('dims', {}),
        objects=raw['objects'],
        commands=commands,
        tolerance=raw.get('tolerance'),
        meta=raw.get('meta'),
    )


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise InstanceError(f'{path}: {exc.strerror}') from exc
    try:
        return parse_instance(text)
    except InstanceError as exc:
        raise InstanceError(f'{path.name}: {exc}', kind=exc.kind) from exc


def serialize_instance(instance: Instance) -> str:
    return json.dumps(instance.to_dict(), indent=2, sort_keys=True) + '\n'


def write_instance(instance: Instance, path) -> Path:
    path = Path(path)
    path.write_text(serialize_instance(instance), encoding='utf-8')
    return path


def instance_tolerance(instance: Instance, gap_eq: float = None, rank_rel: float = None) -> Tolerance:
    """CLI values win over the file's tolerance block, which wins over settings."""
    block = instance.tolerance or {}
    return get_tolerance(
        gap_eq=gap_eq if gap_eq is not None else block.get('gap'),
        rank_rel=rank_rel if rank_rel is not None else block.get('rank'),
    )


# ============================================================================
# Building objects
# ============================================================================

def _dimension(instance: Instance, value, where: str) -> int:
    if isinstance(value, str):
        if value not in instance.dims:
            raise InstanceError(f'{where}: unknown space {value!r}')
        value = instance.dims[value]
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InstanceError(f'{where}: dimension must be a non-negative integer, got {value!r}')
    max_dim = getattr(settings, 'RELAB_MAX_DIM', DEFAULT_MAX_DIM)
    if value > max_dim:
        raise InstanceError(f'{where}: dimension {value} exceeds RELAB_MAX_DIM = {max_dim}',
                            kind='dimension-mismatch')
    return value


def build_object(instance: Instance, name: str, tol: Tolerance = None):
    """Relation, matrix (ndarray) or Subspace for one declared object."""
    spec = instance.objects[name]
    where = f'objects.{name}'
    kind = spec['kind']
    if kind == 'relation':
        _require_keys(spec, ('from', 'to', 'generators'), where)
        n = _dimension(instance, spec['from'], f'{where}.from')
        m = _dimension(instance, spec['to'], f'{where}.to')
        pairs = []
        for i, pair in enumerate(spec['generators']):
            if not isinstance(pair, list) or len(pair) != 2:
                raise InstanceError(f'{where}.generators[{i}]: expected an [f, g] pair')
            pairs.append((decode_vector(pair[0], n, f'{where}.generators[{i}][0]'),
                          decode_vector(pair[1], m, f'{where}.generators[{i}][1]')))
        return make_relation(n, m, pairs, tol)
    if kind == 'matrix':
        _require_keys(spec, ('from', 'to', 'entries'), where)
        n = _dimension(instance, spec['from'], f'{where}.from')
        m = _dimension(instance, spec['to'], f'{where}.to')
        rows = spec['entries']
        if not isinstance(rows, list) or len(rows) != m:
            raise InstanceError(f'{where}.entries: expected {m} rows', kind='dimension-mismatch')
        if m == 0:
            return np.zeros((0, n), dtype=complex)
        return np.vstack([decode_vector(row, n, f'{where}.entries[{i}]') for i, row in enumerate(rows)])
    _require_keys(spec, ('space', 'generators'), where)
    n = _dimension(instance, spec['space'], f'{where}.space')
    vectors = [decode_vector(v, n, f'{where}.generators[{i}]') for i, v in enumerate(spec['generators'])]
    return span(vectors, n, tol)


def build_objects(instance: Instance, tol: Tolerance = None) -> dict:
    objects = {}
    for name in instance.objects:
        try:
            objects[name] = build_object(instance, name, tol)
        except DimensionMismatch as exc:
            raise InstanceError(f'objects.{name}: {exc}', kind='dimension-mismatch') from exc
    return objects


# ============================================================================
# Seeded generation
# ============================================================================

def _matrix_spec(matrix: np.ndarray) -> dict:
    return {'kind': 'matrix', 'from': matrix.shape[1], 'to': matrix.shape[0], 'entries': encode_matrix(matrix)}


def _commands(profile: str) -> list:
    if profile == 'factorized-left':
        return [
            Command('verify_factorized', {'T': 'T', 'B': 'B'}),
            Command('factorize', {'T': 'T', 'B': 'B'}, store='F'),
            Command('friedrichs_factorized', {'T': 'T', 'B': 'B'}, expect={'same_as': 'F'}),
            Command('krein_factorized', {'T': 'T', 'B': 'B'}, expect={'same_as': 'F'}),
        ]
    if profile == 'maximal-pair':
        return [
            Command('verify_maximal', {'H': 'H1'}),
            Command('verify_maximal', {'H': 'H2'}),
            Command('verify_pair', {'H1': 'H1', 'H2': 'H2'}),
            Command('operator_sum', {'first': 'H1', 'second': 'H2'}, store='sum'),
            Command('formsum_extension', {'H1': 'H1', 'H2': 'H2'}, expect={'same_as': 'sum'}),
        ]
    return [
        Command('verify_general', {'S': 'S'}),
        Command('oracle_gap', {'S': 'S'}, expect={'min': STRICT_ORACLE_GAP}),
    ]


def gen_random(seed: int, n: int, profile: str) -> Instance:
    """
    Deterministic random instance for a profile, with the full verification
    command list of that profile.

    general-sectorial and nonnegative-symmetric instances are regenerated
    with seed + 1, seed + 2, ... until the Friedrichs and Krein oracles are
    at least STRICT_ORACLE_GAP apart; the seed used is recorded in meta.
    """
    if profile not in PROFILE_CHOICES:
        raise InstanceError(f'Unknown profile {profile!r}, expected one of {PROFILE_CHOICES}',
                            kind='precondition')
    max_dim = getattr(settings, 'RELAB_MAX_DIM', DEFAULT_MAX_DIM)
    if not 1 <= n <= max_dim:
        raise InstanceError(f'n must be between 1 and {max_dim}, got {n}', kind='precondition')
    meta = {'seed': seed, 'n': n, 'profile': profile}

    if profile == 'factorized-left':
        T, B = random_left_factorization(np.random.default_rng(seed), n)
        objects = {'T': encode_relation(T), 'B': _matrix_spec(B)}
    elif profile == 'maximal-pair':
        rng = np.random.default_rng(seed)
        H1, H2 = random_maximal_sectorial(rng, n), random_maximal_sectorial(rng, n)
        objects = {'H1': encode_relation(H1), 'H2': encode_relation(H2)}
    else:
        if n < 2:
            raise InstanceError(f'{profile} needs n >= 2', kind='precondition')
        build = random_general_sectorial if profile == 'general-sectorial' else random_nonnegative_symmetric
        for used_seed in range(seed, seed + MAX_REGENERATIONS):
            S = build(np.random.default_rng(used_seed), n)
            separation = relation_gap(friedrichs_oracle(S), krein_oracle(S))
            if separation > STRICT_ORACLE_GAP:
                break
            logger.warning('seed %d: oracle gap %.3g too small, regenerating', used_seed, separation)
        else:
            raise InstanceError(f'No strict instance within {MAX_REGENERATIONS} seeds from {seed}',
                                kind='precondition')
        meta.update(used_seed=used_seed, oracle_gap=round(separation, 12))
        objects = {'S': encode_relation(S)}

    return Instance(
        name=f'{profile}-n{n}-seed{seed}',
        dims={'H': n},
        objects=objects,
        commands=_commands(profile),
        meta=meta,
    )
