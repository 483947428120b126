from django.core.management.base import BaseCommand, CommandError

from relab.runner import RunOptions, run_many

from ._options import add_json_out, add_tolerance_arguments, write_json


class Command(BaseCommand):
    help = 'Run the commands of one or more instance files and report pass/fail per command'

    def add_arguments(self, parser):
        parser.add_argument('paths', nargs='+', help='Instance JSON files')
        add_tolerance_arguments(parser)
        add_json_out(parser)
        parser.add_argument(
            '--timing',
            action='store_true',
            help='Include per-command wall time in the report',
        )
        parser.add_argument(
            '--workers',
            type=int,
            default=None,
            help='Worker threads for several files (default: RELAB_WORKERS)',
        )

    def handle(self, *args, **options):
        run_options = RunOptions(
            tol_gap=options['tol_gap'],
            tol_rank=options['tol_rank'],
            timing=options['timing'],
        )
        reports = run_many(options['paths'], run_options, options['workers'])

        for report in reports:
            if report.error is not None:
                self.stdout.write(self.style.ERROR(
                    f'{report.instance}: {report.error["kind"]}: {report.error["message"]}'
                ))
                continue
            for entry in report.commands:
                line = f'{report.instance}[{entry.index}] {entry.op}: {entry.status}'
                if entry.message:
                    line += f' ({entry.message})'
                style = self.style.SUCCESS if entry.status == 'pass' else self.style.ERROR
                self.stdout.write(style(line))

        payload = [report.to_dict() for report in reports]
        write_json(self, payload[0] if len(payload) == 1 else payload, options['json_out'])

        exit_code = max(report.exit_code for report in reports)
        if exit_code == 2:
            raise CommandError('Some instances could not be run', returncode=2)
        if exit_code == 1:
            raise CommandError('Some commands failed', returncode=1)
        self.stdout.write(self.style.SUCCESS(f'All commands passed in {len(reports)} instance(s).'))
