from qnet.conf import qnet_setting
from qnet.experiments import baseline_run, resolve_dataset
from qnet.losses import LOSS_NORMS
from qnet.management.base import QNetCommand, add_dataset_arguments


class Command(QNetCommand):
    help = 'Fit the K-SVD sparse-coding baseline on the same encoded dataset'

    def add_arguments(self, parser):
        add_dataset_arguments(parser)
        parser.add_argument('--sparsity', type=int, default=None)
        parser.add_argument('--iters', '--iterations', dest='iterations', type=int, default=None)
        parser.add_argument('--loss-norm', dest='loss_norm', choices=LOSS_NORMS, default=None)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--out', required=True)

    def run(self, **options):
        dataset = resolve_dataset(
            options['data'],
            options['m'] or qnet_setting('DATASET_SIZE'),
            options['side'] or qnet_setting('DATASET_SIDE'),
            options['kind'] or qnet_setting('DATASET_KIND'),
            options['data_seed'] if options['data_seed'] is not None else qnet_setting('DATASET_SEED'),
        )
        summary = baseline_run(
            dataset,
            options['sparsity'] or qnet_setting('BASELINE_SPARSITY'),
            options['iterations'] if options['iterations'] is not None else qnet_setting('BASELINE_ITERATIONS'),
            options['out'],
            options['loss_norm'] or qnet_setting('LOSS_NORM'),
            options['tol'] if options['tol'] is not None else qnet_setting('PIXEL_TOLERANCE'),
            qnet_setting('POSTPROCESS'),
        )
        self.success(f'Baseline {summary["matrix_size"]} dictionary: accuracy {summary["accuracy_percent"]:.2f}%, '
                     f'loss {summary["final_loss"]:.6g}, {summary["reseeded_atoms"]} atoms re-seeded')
