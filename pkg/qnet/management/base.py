"""Shared plumbing for the qnet management commands."""
import argparse

from django.core.exceptions import ValidationError as DjangoValidationError
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from ..artifacts import read_json
from ..exceptions import QNetError
from ..serializers import TrainConfigSerializer

INVALID_INPUT = 2


def add_dataset_arguments(parser):
    parser.add_argument('--data', help='Dataset directory or image file; generated when omitted')
    parser.add_argument('--m', type=int, help='Number of images to generate')
    parser.add_argument('--side', type=int, help='Image side length D')
    parser.add_argument('--kind', choices=['binary', 'grayscale'])
    parser.add_argument('--data-seed', dest='data_seed', type=int, help='Seed for dataset generation')


def add_train_arguments(parser):
    """Flags named after TrainConfig fields; every default is None so files and settings show through."""
    parser.add_argument('--eta', type=float)
    parser.add_argument('--iters', '--iterations', dest='iterations', type=int)
    parser.add_argument('--delta', type=float)
    parser.add_argument('--lc', '--l-c', dest='l_C', type=int)
    parser.add_argument('--lr-layers', '--l-r', dest='l_R', type=int)
    parser.add_argument('--d', type=int)
    parser.add_argument('--grad-mode', dest='grad_mode')
    parser.add_argument('--loss-norm', dest='loss_norm')
    parser.add_argument('--schedule')
    parser.add_argument('--update')
    parser.add_argument('--target-mode', dest='target_mode')
    parser.add_argument('--seed', type=int)
    parser.add_argument('--init-scheme', dest='init_scheme')
    parser.add_argument('--init-theta', dest='init_theta', type=float)
    parser.add_argument('--init-r', dest='init_r')
    parser.add_argument('--order-c', dest='order_c')
    parser.add_argument('--order-r', dest='order_r')
    parser.add_argument('--retained', type=int, nargs='+')
    parser.add_argument('--convergence-tol', dest='convergence_tol', type=float)
    parser.add_argument('--postprocess')
    parser.add_argument('--tol', type=float)
    parser.add_argument('--record-elapsed', dest='record_elapsed', action=argparse.BooleanOptionalAction)
    parser.add_argument('--log-every', dest='log_every', type=int)
    parser.add_argument('--config', help='Flat JSON file of settings; flags override it')
    parser.add_argument('--targets', help='CSV of explicit compression targets, one row per sample')
    parser.add_argument('--trace-theta', dest='trace_theta', action='store_true')


def merged_options(options, names) -> dict:
    """Config file values overlaid with the flags that were actually given."""
    merged = read_json(options['config']) if options.get('config') else {}
    merged.update({name: options[name] for name in names if options.get(name) is not None})
    return merged


def train_option_names():
    return list(TrainConfigSerializer().fields)


def describe(errors) -> str:
    if isinstance(errors, dict):
        return '; '.join(f'{field}: {describe(value)}' for field, value in errors.items())
    if isinstance(errors, (list, tuple)):
        return ', '.join(describe(value) for value in errors)
    return str(errors)


class QNetCommand(BaseCommand):
    """Runs ``run`` and turns domain and validation errors into CommandError with a named status."""

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except QNetError as exc:
            raise CommandError(f'{type(exc).__name__}: {exc}', returncode=exc.exit_code)
        except ValidationError as exc:
            raise CommandError(f'Invalid configuration: {describe(exc.detail)}', returncode=INVALID_INPUT)
        except DjangoValidationError as exc:
            raise CommandError(f'Invalid input: {"; ".join(exc.messages)}', returncode=INVALID_INPUT)

    def run(self, **options):
        raise NotImplementedError

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))
