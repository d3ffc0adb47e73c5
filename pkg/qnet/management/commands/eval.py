from qnet.artifacts import write_json
from qnet.conf import qnet_setting
from qnet.datasets import load_dataset
from qnet.experiments import evaluate
from qnet.losses import LOSS_NORMS
from qnet.management.base import QNetCommand
from qnet.metrics import POSTPROCESS_MODES


class Command(QNetCommand):
    help = 'Score a saved checkpoint on a dataset'

    def add_arguments(self, parser):
        parser.add_argument('--checkpoint', required=True, help='model.json or the run directory holding it')
        parser.add_argument('--data', required=True)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--postprocess', choices=POSTPROCESS_MODES, default=None)
        parser.add_argument('--loss-norm', dest='loss_norm', choices=LOSS_NORMS, default=None)
        parser.add_argument('--out', help='Optional JSON file for the scores')

    def run(self, **options):
        tol = options['tol'] if options['tol'] is not None else qnet_setting('PIXEL_TOLERANCE')
        scores = evaluate(
            options['checkpoint'],
            load_dataset(options['data']),
            tol,
            options['postprocess'] or qnet_setting('POSTPROCESS'),
            options['loss_norm'] or qnet_setting('LOSS_NORM'),
        )
        if options['out']:
            write_json(options['out'], scores)
        self.success(f'accuracy {scores["accuracy_percent"]:.2f}% (tol {tol}), '
                     f'L_C {scores["L_C"]:.6g}, L_R {scores["L_R"]:.6g}')
