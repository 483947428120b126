from django.core.management.base import BaseCommand

from relab.exceptions import RelabError
from relab.relations import Relation, parts
from relab.sectorial import sectoriality

from ._options import add_json_out, add_tolerance_arguments, load_or_fail, pick, write_json


class Command(BaseCommand):
    help = 'Sectoriality report (semi-angle, maximality) and parts of the relations in an instance'

    def add_arguments(self, parser):
        parser.add_argument('path', help='Instance JSON file')
        parser.add_argument(
            '--object',
            action='append',
            default=None,
            help='Relation to analyze (repeatable, default: all relations)',
        )
        add_tolerance_arguments(parser)
        add_json_out(parser)

    def handle(self, *args, **options):
        instance, tol, objects = load_or_fail(options['path'], options)
        names = options['object'] or [name for name, value in objects.items() if isinstance(value, Relation)]

        results = {}
        for name in names:
            relation = pick(objects, name, options['path'])
            relation_parts = parts(relation, tol)
            entry = {
                'from': relation.dim_from,
                'to': relation.dim_to,
                'graph_dim': relation.graph.dim,
                'dom': relation_parts.dom.dim,
                'ran': relation_parts.ran.dim,
                'ker': relation_parts.ker.dim,
                'mul': relation_parts.mul.dim,
            }
            try:
                entry.update(sectoriality(relation, tol).as_dict())
            except RelabError as exc:
                entry['sectoriality'] = f'{exc.kind}: {exc}'
            results[name] = entry

            if 'is_sectorial' not in entry:
                self.stdout.write(f'{name}: {entry["sectoriality"]}')
            elif entry['is_sectorial']:
                label = 'maximal sectorial' if entry['is_maximal'] else 'sectorial'
                self.stdout.write(self.style.SUCCESS(f'{name}: {label}, tan = {entry["tan_min"]:.6g}'))
            else:
                self.stdout.write(self.style.WARNING(f'{name}: not sectorial'))
            self.stdout.write(
                f'  dim dom/ran/ker/mul = {entry["dom"]}/{entry["ran"]}/{entry["ker"]}/{entry["mul"]}'
            )

        write_json(self, {'instance': instance.name, 'relations': results}, options['json_out'])
