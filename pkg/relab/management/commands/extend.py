from django.core.management.base import BaseCommand, CommandError

from relab.exceptions import RelabError
from relab.oracles import extension_family_general, extremal_oracle, friedrichs_oracle, krein_oracle
from relab.runner import summarize
from relab.relations import fingerprint

from ._options import add_json_out, add_tolerance_arguments, load_or_fail, pick, write_json

KIND_CHOICES = ('friedrichs', 'krein', 'extremal')


class Command(BaseCommand):
    help = 'Friedrichs, Krein or extremal (with --subspace L) extension of a sectorial relation'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Instance JSON file')
        parser.add_argument('--object', default='S', help='Sectorial relation to extend (default: S)')
        parser.add_argument('--kind', choices=KIND_CHOICES, default='friedrichs')
        parser.add_argument(
            '--subspace',
            default=None,
            help='Subspace object L with dom S <= L <= dom of the Krein form (for --kind extremal)',
        )
        add_tolerance_arguments(parser)
        add_json_out(parser)

    def handle(self, *args, **options):
        instance, tol, objects = load_or_fail(options['path'], options)
        relation = pick(objects, options['object'], options['path'])
        kind = options['kind']
        if kind == 'extremal' and not options['subspace']:
            raise CommandError('--kind extremal needs --subspace', returncode=2)

        try:
            if kind == 'friedrichs':
                extension = friedrichs_oracle(relation, tol)
            elif kind == 'krein':
                extension = krein_oracle(relation, tol)
            else:
                subspace = pick(objects, options['subspace'], options['path'])
                extension = extension_family_general(relation, subspace, tol)
            verdict = extremal_oracle(extension, relation, tol)
        except RelabError as exc:
            raise CommandError(f'{exc.kind}: {exc}', returncode=2) from exc

        self.stdout.write(self.style.SUCCESS(
            f'{kind} extension of {options["object"]}: graph dim {extension.graph.dim}, '
            f'fingerprint {fingerprint(extension)}'
        ))
        self.stdout.write(
            f'  extends={verdict.extends} maximal={verdict.maximal} extremal={verdict.extremal}'
        )
        write_json(self, {
            'instance': instance.name,
            'kind': kind,
            'extension': summarize(extension, tol),
            'verdict': summarize(verdict, tol),
        }, options['json_out'])
