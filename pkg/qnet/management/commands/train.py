from pathlib import Path

from qnet.experiments import load_targets, resolve_dataset, train_run
from qnet.management.base import (QNetCommand, add_dataset_arguments, add_train_arguments, merged_options,
                                  train_option_names)
from qnet.serializers import ExperimentConfigSerializer


class Command(QNetCommand):
    help = 'Train the compression and reconstruction meshes and write the run artifacts'

    def add_arguments(self, parser):
        add_dataset_arguments(parser)
        add_train_arguments(parser)
        parser.add_argument('--out', required=True)

    def run(self, **options):
        names = train_option_names() + ['data', 'm', 'side', 'kind', 'data_seed', 'out', 'targets']
        serializer = ExperimentConfigSerializer(data=merged_options(options, names))
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        config = serializer.to_config()

        dataset = resolve_dataset(data['data'], data['m'], data['side'], data['kind'], data['data_seed'])
        target = None
        if data['targets']:
            target = load_targets(data['targets'], config.projector(dataset.N), dataset.M)
        trace = options['trace_theta'] or data['trace_theta']
        summary = train_run(dataset, config, data['out'], target, trace, data['data'])
        self.success(
            f'Trained {summary["n_params_C"]}+{summary["n_params_R"]} angles for {config.iterations} iterations: '
            f'accuracy {summary["accuracy_percent"]:.2f}%, L_C {summary["final_L_C"]:.6g}, '
            f'L_R {summary["final_L_R"]:.6g}; artifacts in {Path(data["out"])}'
        )
