from qnet.experiments import compare_runs
from qnet.management.base import QNetCommand
from qnet.metrics import format_table


class Command(QNetCommand):
    help = 'Collect run summaries into a comparison table (accuracy, runtime, matrix size)'

    def add_arguments(self, parser):
        parser.add_argument('--runs', nargs='+', required=True)
        parser.add_argument('--out', required=True, help='CSV path; a .txt rendering is written next to it')

    def run(self, **options):
        rows = compare_runs(options['runs'], options['out'])
        self.stdout.write(format_table(rows), ending='')
