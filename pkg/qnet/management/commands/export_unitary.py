from qnet.experiments import export_unitaries
from qnet.management.base import QNetCommand


class Command(QNetCommand):
    help = 'Write the dense matrices of both trained meshes as CSV'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True)
        parser.add_argument('--out', required=True)

    def run(self, **options):
        paths = export_unitaries(options['checkpoint'], options['out'])
        self.success('Wrote ' + ', '.join(str(p) for p in paths))
