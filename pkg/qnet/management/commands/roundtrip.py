from django.core.management.base import CommandError

from qnet.conf import qnet_setting
from qnet.experiments import resolve_dataset, roundtrip_error
from qnet.management.base import QNetCommand, add_dataset_arguments


class Command(QNetCommand):
    help = 'Encode and decode every sample and check the pixels come back'

    def add_arguments(self, parser):
        add_dataset_arguments(parser)
        parser.add_argument('--tol', type=float, default=1e-12)

    def run(self, **options):
        dataset = resolve_dataset(
            options['data'],
            options['m'] or qnet_setting('DATASET_SIZE'),
            options['side'] or qnet_setting('DATASET_SIDE'),
            options['kind'] or qnet_setting('DATASET_KIND'),
            options['data_seed'] if options['data_seed'] is not None else qnet_setting('DATASET_SEED'),
        )
        error = roundtrip_error(dataset)
        if error > options['tol']:
            raise CommandError(f'Roundtrip error {error:.3g} exceeds {options["tol"]}')
        self.success(f'{dataset.M} samples roundtrip within {error:.3g}')
