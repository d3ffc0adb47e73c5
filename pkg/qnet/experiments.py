"""Experiment orchestration: train, evaluate, baseline and compare runs on disk."""
from __future__ import annotations

import logging
import time
from pathlib import Path

import numpy as np

from . import artifacts, losses, metrics
from .baseline import fit_dictionary
from .codec import decode_batch
from .datasets import ImageDataset, generate_dataset, load_dataset, save_dataset, save_images
from .exceptions import DimensionMismatch, MalformedFile, MissingArtifact
from .mesh import mesh_matrix, propagate
from .serializers import ExperimentConfigSerializer
from .trainer import TrainConfig, TrainResult, compressed_states, reconstruct_pixels, train

logger = logging.getLogger(__name__)

QNN_METHOD = 'QNN'
BASELINE_METHOD = 'CSC'


def resolve_dataset(data=None, m: int = 25, side: int = 4, kind: str = 'binary', seed: int | None = 42) -> ImageDataset:
    """Load ``data`` when given, otherwise generate a seeded dataset."""
    if data:
        return load_dataset(data)
    return generate_dataset(m, side, seed, kind)


def load_targets(path, projector, M: int) -> losses.CompressionTarget:
    """Explicit compression targets from a CSV with one N-length target per sample row."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f'No such targets file: {path}')
    try:
        rows = np.loadtxt(path, delimiter=',', ndmin=2)
    except ValueError as exc:
        raise MalformedFile(f'{path}: {exc}')
    target = losses.CompressionTarget(losses.EXPLICIT, rows.T.copy())
    target.validate(projector, M)
    return target


def snapshot(dataset, result: TrainResult, sample: int = -1) -> dict:
    """Compressed and reconstructed amplitudes of one sample under the final meshes."""
    compressed = compressed_states(dataset, result.U_C, result.projector)
    index = sample % dataset.M
    return {
        'sample': index,
        'compressed': compressed[:, index].tolist(),
        'reconstructed': propagate(compressed[:, index], result.U_R).tolist(),
    }


def train_run(dataset: ImageDataset, config: TrainConfig, out, target=None, trace_theta: bool = False,
              data_path=None) -> dict:
    """Train, then write the config echo, checkpoint, loss curve, reconstructions and summary.

    Explicit targets are copied into the run directory and the echo points at
    the copy, so the echo alone reproduces the run.
    """
    if config.d > dataset.N:
        raise DimensionMismatch(f'Compressed dimension d={config.d} exceeds N={dataset.N}')
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    targets_path = None
    if target is not None and target.mode == losses.EXPLICIT:
        targets_path = artifacts.write_targets(out / artifacts.TARGETS_NAME, target.b)
    artifacts.write_json(out / artifacts.CONFIG_NAME, {
        **config.as_dict(),
        'data': None if data_path is None else str(data_path),
        'targets': None if targets_path is None else str(targets_path),
        'dataset': dataset.manifest(),
    })

    started = time.perf_counter()
    result = train(dataset, config, target, trace_theta)
    elapsed = time.perf_counter() - started

    artifacts.save_checkpoint(out / artifacts.CHECKPOINT_NAME, result.U_C, result.U_R, result.projector,
                              config.seed, config.as_dict())
    artifacts.write_losses(out / artifacts.LOSSES_NAME, result.records)
    if trace_theta:
        artifacts.write_theta_trace(out / artifacts.THETA_TRACE_NAME, result.theta_trace, result.U_C.n_params)
        artifacts.write_amplitude_trace(out / artifacts.AMPLITUDE_TRACE_NAME, result.amplitude_trace)

    raw = reconstruct_pixels(dataset, result.U_C, result.projector, result.U_R)
    processed = metrics.postprocess(raw, config.postprocess)
    save_images(raw, out, 'csv', prefix=artifacts.RECONSTRUCTIONS_PREFIX)
    save_images(processed, out, 'csv', prefix=artifacts.PROCESSED_PREFIX)
    save_images(processed, out, 'pgm', prefix=artifacts.PREVIEW_PREFIX)

    report = metrics.accuracy_report(dataset.pixels, processed, config.tol)
    summary = {
        'method': QNN_METHOD,
        'accuracy_percent': report.mean,
        'per_sample_accuracy': report.accuracies.tolist(),
        'max_accuracy_percent': result.max_accuracy,
        'final_L_C': result.final.L_C,
        'final_L_R': result.final.L_R,
        'min_L_C': result.min_L_C,
        'min_L_R': result.min_L_R,
        'L_C_bound': losses.leakage_bound(dataset, config.d, config.loss_norm),
        'iterations_run': result.final.iteration,
        'elapsed_s': elapsed,
        'matrix_size': f'{dataset.N}*{dataset.N}',
        'n_params_C': result.U_C.n_params,
        'n_params_R': result.U_R.n_params,
        'snapshot': snapshot(dataset, result),
    }
    artifacts.write_json(out / artifacts.SUMMARY_NAME, summary)
    logger.info('Run in %s finished: accuracy=%.2f%% L_C=%.6g L_R=%.6g',
                out, report.mean, result.final.L_C, result.final.L_R)
    return summary


def evaluate(checkpoint, dataset: ImageDataset, tol: float = metrics.DEFAULT_TOLERANCE,
             postprocess: str = metrics.CLAMP, loss_norm: str = losses.MEAN) -> dict:
    """Score a saved checkpoint against a dataset."""
    ckpt = checkpoint if isinstance(checkpoint, artifacts.Checkpoint) else artifacts.load_checkpoint(checkpoint)
    if ckpt.N != dataset.N:
        raise MalformedFile(f'Checkpoint has N={ckpt.N} but the dataset has N={dataset.N}')
    L_C = losses.compression_loss(dataset, ckpt.U_C, ckpt.projector, loss_norm=loss_norm)
    L_R = losses.reconstruction_loss(dataset, ckpt.U_C, ckpt.projector, ckpt.U_R, loss_norm)
    processed = metrics.postprocess(reconstruct_pixels(dataset, ckpt.U_C, ckpt.projector, ckpt.U_R), postprocess)
    report = metrics.accuracy_report(dataset.pixels, processed, tol)
    return {
        'accuracy_percent': report.mean,
        'per_sample_accuracy': report.accuracies.tolist(),
        'L_C': L_C,
        'L_R': L_R,
        'tol': tol,
    }


def baseline_run(dataset: ImageDataset, sparsity: int, iterations: int, out=None,
                 loss_norm: str = losses.MEAN, tol: float = metrics.DEFAULT_TOLERANCE,
                 postprocess: str = metrics.CLAMP) -> dict:
    started = time.perf_counter()
    fit = fit_dictionary(dataset, sparsity, iterations, loss_norm)
    elapsed = time.perf_counter() - started

    processed = metrics.postprocess(decode_batch(fit.reconstruct(), dataset.sum_sq), postprocess)
    report = metrics.accuracy_report(dataset.pixels, processed, tol)
    summary = {
        'method': BASELINE_METHOD,
        'accuracy_percent': report.mean,
        'final_loss': fit.losses[-1],
        'min_loss': min(fit.losses),
        'elapsed_s': elapsed,
        'matrix_size': fit.dictionary.size,
        'sparsity': sparsity,
        'iterations': iterations,
        'reseeded_atoms': fit.reseeded,
    }
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        artifacts.write_loss_curve(out / artifacts.BASELINE_LOSSES_NAME, fit.losses)
        artifacts.write_matrix(out / artifacts.DICTIONARY_NAME, fit.dictionary.atoms)
        artifacts.write_json(out / artifacts.BASELINE_SUMMARY_NAME, summary)
    logger.info('Baseline finished: accuracy=%.2f%% loss=%.6g', report.mean, fit.losses[-1])
    return summary


def comparison_rows(run_dir) -> list[metrics.ComparisonRow]:
    """Rows for every summary found in a run directory."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise MissingArtifact(f'Run directory does not exist: {run_dir}')
    rows = []
    qnn = run_dir / artifacts.SUMMARY_NAME
    if qnn.exists():
        data = artifacts.read_json(qnn)
        rows.append(metrics.ComparisonRow(data['method'], data['accuracy_percent'], data['elapsed_s'],
                                          data['matrix_size'], data['final_L_R']))
    csc = run_dir / artifacts.BASELINE_SUMMARY_NAME
    if csc.exists():
        data = artifacts.read_json(csc)
        rows.append(metrics.ComparisonRow(data['method'], data['accuracy_percent'], data['elapsed_s'],
                                          data['matrix_size'], data['final_loss']))
    if not rows:
        raise MissingArtifact(f'No summaries found in {run_dir}')
    return rows


def compare_runs(run_dirs, out) -> list[metrics.ComparisonRow]:
    rows = [row for run_dir in run_dirs for row in comparison_rows(run_dir)]
    artifacts.write_comparison(out, rows)
    return rows


def export_unitaries(checkpoint, out) -> tuple[Path, Path]:
    ckpt = artifacts.load_checkpoint(checkpoint)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return (artifacts.write_matrix(out / 'unitary_C.csv', mesh_matrix(ckpt.U_C)),
            artifacts.write_matrix(out / 'unitary_R.csv', mesh_matrix(ckpt.U_R)))


def roundtrip_error(dataset: ImageDataset) -> float:
    """Largest pixel error of decode(encode(x)) over the dataset."""
    return float(np.max(np.abs(decode_batch(dataset.states, dataset.sum_sq) - dataset.pixels)))


def run_experiment(options: dict) -> dict:
    """Validate a flat option mapping, then train, optionally fit the baseline, and compare.

    Returns the training summary, with the baseline summary under ``baseline``.
    """
    serializer = ExperimentConfigSerializer(data=options)
    serializer.is_valid(raise_exception=True)
    data = serializer.validated_data
    config = serializer.to_config()

    dataset = resolve_dataset(data['data'], data['m'], data['side'], data['kind'], data['data_seed'])
    if data['data'] is None:
        save_dataset(dataset, Path(data['out']) / 'data')
    target = None
    if data['targets']:
        target = load_targets(data['targets'], config.projector(dataset.N), dataset.M)

    summary = train_run(dataset, config, data['out'], target, data['trace_theta'], data['data'])
    if data['baseline']:
        summary['baseline'] = baseline_run(dataset, data['sparsity'], data['baseline_iterations'], data['out'],
                                           config.loss_norm, config.tol, config.postprocess)
        compare_runs([data['out']], Path(data['out']) / artifacts.TABLE_NAME)
    return summary
