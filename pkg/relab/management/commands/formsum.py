from django.core.management.base import BaseCommand, CommandError

from relab.exceptions import RelabError
from relab.formsum import (
    assemble, extremality_report, formsum_extension, friedrichs_sum, krein_sum, krein_sum_form,
)
from relab.relations import relation_gap
from relab.runner import summarize

from ._options import add_json_out, add_tolerance_arguments, load_or_fail, pick, write_json


class Command(BaseCommand):
    help = 'Friedrichs, Krein and form-sum extensions of H1 + H2 with the extremality report'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Instance JSON file')
        parser.add_argument('--first', default='H1', help='First maximal sectorial relation (default: H1)')
        parser.add_argument('--second', default='H2', help='Second maximal sectorial relation (default: H2)')
        add_tolerance_arguments(parser)
        add_json_out(parser)

    def handle(self, *args, **options):
        instance, tol, objects = load_or_fail(options['path'], options)
        H1 = pick(objects, options['first'], options['path'])
        H2 = pick(objects, options['second'], options['path'])

        try:
            assembly = assemble(H1, H2, tol)
            extensions = {
                'friedrichs': friedrichs_sum(assembly, tol),
                'krein': krein_sum(assembly, tol),
                'formsum': formsum_extension(assembly, tol),
            }
            form = krein_sum_form(assembly, tol)
            report = extremality_report(assembly, tol)
        except RelabError as exc:
            raise CommandError(f'{exc.kind}: {exc}', returncode=1 if exc.kind == 'internal-inconsistency' else 2) from exc

        total = assembly.sum
        for name, extension in extensions.items():
            self.stdout.write(f'{name}: gap to H1 + H2 = {relation_gap(extension, total):.3e}')
        self.stdout.write(f'Krein form emitted: {form is not None}')
        for key, value in report.as_dict().items():
            self.stdout.write(f'  {key}: {value}')
        self.stdout.write(self.style.SUCCESS('All sum identities hold.'))

        write_json(self, {
            'instance': instance.name,
            'assembly': summarize(assembly, tol),
            'extensions': summarize(extensions, tol),
            'krein_form': summarize(form, tol),
            'report': summarize(report, tol),
        }, options['json_out'])
