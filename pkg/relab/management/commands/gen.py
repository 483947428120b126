from django.core.management.base import BaseCommand, CommandError

from relab.exceptions import InstanceError
from relab.instances import PROFILE_CHOICES, gen_random, serialize_instance, write_instance

from ._options import add_seed


class Command(BaseCommand):
    help = 'Generate a seeded random instance file with the verification commands of its profile'

    def add_arguments(self, parser):
        parser.add_argument('--profile', choices=PROFILE_CHOICES, required=True)
        parser.add_argument('--n', type=int, default=3, help='Space dimension')
        add_seed(parser)
        parser.add_argument(
            '--json-out',
            default='-',
            help='Instance file to write ("-" for stdout, the default)',
        )

    def handle(self, *args, **options):
        try:
            instance = gen_random(options['seed'], options['n'], options['profile'])
        except InstanceError as exc:
            raise CommandError(f'{exc.kind}: {exc}', returncode=2) from exc

        if options['json_out'] == '-':
            self.stdout.write(serialize_instance(instance), ending='')
            return
        path = write_instance(instance, options['json_out'])
        self.stdout.write(self.style.SUCCESS(f'Wrote {instance.name} to {path}'))
