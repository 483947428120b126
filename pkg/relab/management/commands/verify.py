from django.core.management.base import BaseCommand, CommandError

from relab.exceptions import InstanceError
from relab.instances import PROFILE_CHOICES, build_objects, gen_random, instance_tolerance
from relab.verification import PROFILE_OBJECTS, run_profile_suite

from ._options import add_json_out, add_seed, add_tolerance_arguments, load_or_fail, pick, write_json


class Command(BaseCommand):
    help = 'Run the full property list of a profile on instance files or on freshly generated instances'

    def add_arguments(self, parser):
        parser.add_argument('paths', nargs='*', help='Instance JSON files (omit to generate)')
        parser.add_argument(
            '--profile',
            choices=PROFILE_CHOICES,
            default=None,
            help='Profile (default: the one recorded in each file)',
        )
        parser.add_argument('--n', type=int, default=3, help='Dimension of generated instances')
        parser.add_argument('--count', type=int, default=1, help='Number of generated instances')
        add_seed(parser)
        add_tolerance_arguments(parser)
        add_json_out(parser)

    def handle(self, *args, **options):
        cases = []
        if options['paths']:
            for path in options['paths']:
                instance, tol, objects = load_or_fail(path, options)
                profile = options['profile'] or (instance.meta or {}).get('profile')
                if profile not in PROFILE_OBJECTS:
                    raise CommandError(f'{path}: no usable profile recorded ({profile!r}), pass --profile',
                                       returncode=2)
                for name in PROFILE_OBJECTS[profile]:
                    pick(objects, name, path)
                cases.append((instance.name, profile, objects, tol))
        else:
            if options['profile'] is None:
                raise CommandError('--profile is required when generating instances', returncode=2)
            for offset in range(options['count']):
                try:
                    instance = gen_random(options['seed'] + offset, options['n'], options['profile'])
                    tol = instance_tolerance(instance, options['tol_gap'], options['tol_rank'])
                    objects = build_objects(instance, tol)
                except InstanceError as exc:
                    raise CommandError(f'{exc.kind}: {exc}', returncode=2) from exc
                cases.append((instance.name, options['profile'], objects, tol))

        results = {}
        failed = 0
        for name, profile, objects, tol in cases:
            result = run_profile_suite(profile, objects, tol)
            results[name] = result.as_dict()
            if result.passed:
                self.stdout.write(self.style.SUCCESS(f'{name}: {len(result.checks)} checks passed'))
                continue
            failed += 1
            self.stdout.write(self.style.ERROR(f'{name}: {len(result.failures)} of {len(result.checks)} checks failed'))
            for check in result.failures:
                self.stdout.write(f'  {check.name}: {check.value:.3e} {check.message}'.rstrip())

        write_json(self, results, options['json_out'])
        if failed:
            raise CommandError(f'{failed} of {len(cases)} instance(s) failed verification', returncode=1)
