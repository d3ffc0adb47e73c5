from qnet.conf import qnet_setting
from qnet.datasets import FORMATS, KINDS, generate_dataset, save_dataset
from qnet.management.base import QNetCommand


class Command(QNetCommand):
    help = 'Generate a seeded dataset of square images and write it with its manifest'

    def add_arguments(self, parser):
        parser.add_argument('--m', type=int, default=None)
        parser.add_argument('--side', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--kind', choices=KINDS, default=None)
        parser.add_argument('--format', dest='fmt', choices=FORMATS, default='csv',
                            help='Per-sample image files written next to images.csv')
        parser.add_argument('--out', required=True)

    def run(self, **options):
        m = options['m'] or qnet_setting('DATASET_SIZE')
        side = options['side'] or qnet_setting('DATASET_SIDE')
        seed = options['seed'] if options['seed'] is not None else qnet_setting('DATASET_SEED')
        kind = options['kind'] or qnet_setting('DATASET_KIND')
        dataset = generate_dataset(m, side, seed, kind)
        path = save_dataset(dataset, options['out'], options['fmt'])
        self.success(f'Wrote {dataset.M} {kind} {side}x{side} images to {path}')
