from qnet.artifacts import read_json
from qnet.experiments import run_experiment
from qnet.management.base import QNetCommand


class Command(QNetCommand):
    help = 'Run a full experiment from a flat JSON config: train, baseline and comparison table'

    def add_arguments(self, parser):
        parser.add_argument('config', help='Flat JSON config file')
        parser.add_argument('--out', help='Overrides "out" from the config file')
        parser.add_argument('--data', help='Overrides "data" from the config file')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--iters', '--iterations', dest='iterations', type=int)
        parser.add_argument('--eta', type=float)
        parser.add_argument('--no-baseline', dest='baseline', action='store_false', default=None)

    def run(self, **options):
        values = read_json(options['config'])
        values.update({name: options[name] for name in ('out', 'data', 'seed', 'iterations', 'eta', 'baseline')
                       if options.get(name) is not None})
        summary = run_experiment(values)
        message = (f'accuracy {summary["accuracy_percent"]:.2f}%, min L_C {summary["min_L_C"]:.6g}, '
                   f'min L_R {summary["min_L_R"]:.6g}')
        if 'baseline' in summary:
            message += f'; baseline accuracy {summary["baseline"]["accuracy_percent"]:.2f}%'
        self.success(message)
