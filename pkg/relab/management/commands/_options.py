"""Flags and helpers shared by the relab management commands."""
import json
from pathlib import Path

from django.core.management.base import CommandError

from relab.exceptions import InstanceError
from relab.instances import build_objects, instance_tolerance, load_instance


def add_tolerance_arguments(parser):
    parser.add_argument(
        '--tol-gap',
        type=float,
        default=None,
        help='Gap threshold for subspace equality (default: RELAB_TOL_GAP)',
    )
    parser.add_argument(
        '--tol-rank',
        type=float,
        default=None,
        help='Relative singular-value cutoff (default: RELAB_TOL_RANK)',
    )


def add_json_out(parser):
    parser.add_argument(
        '--json-out',
        default=None,
        help='Write the JSON result to this file ("-" for stdout)',
    )


def add_seed(parser, default=0):
    parser.add_argument('--seed', type=int, default=default, help='Random seed')


def load_or_fail(path, options):
    """(instance, tolerance, objects) or CommandError with exit status 2."""
    try:
        instance = load_instance(path)
        tol = instance_tolerance(instance, options['tol_gap'], options['tol_rank'])
        return instance, tol, build_objects(instance, tol)
    except InstanceError as exc:
        raise CommandError(f'{exc.kind}: {exc}', returncode=2) from exc


def pick(objects: dict, name: str, path):
    if name not in objects:
        raise CommandError(f'{path}: no object named {name!r} (have {", ".join(sorted(objects))})', returncode=2)
    return objects[name]


def write_json(command, payload, path):
    """Write payload as sorted, indented JSON to a file or to the command's stdout."""
    if path is None:
        return
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path == '-':
        command.stdout.write(text)
    else:
        Path(path).write_text(text + '\n', encoding='utf-8')
        command.stdout.write(f'Wrote {path}')
