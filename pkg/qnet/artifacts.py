"""Reading and writing run artifacts: JSON documents, checkpoints and CSV tables.

JSON goes through REST framework's renderer and parser so every document is
validated by a serializer on the way in.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from .conf import qnet_setting
from .datasets import CSV_FORMAT
from .exceptions import MalformedFile, MissingArtifact
from .mesh import GivensMesh, Projector
from .metrics import COMPARISON_HEADER, ComparisonRow, format_table
from .serializers import CheckpointSerializer

logger = logging.getLogger(__name__)

CONFIG_NAME = 'config.json'
CHECKPOINT_NAME = 'model.json'
LOSSES_NAME = 'losses.csv'
SUMMARY_NAME = 'summary.json'
RECONSTRUCTIONS_PREFIX = 'reconstructions'
PROCESSED_PREFIX = 'reconstructions_processed'
PREVIEW_PREFIX = 'recon'
TARGETS_NAME = 'targets.csv'
THETA_TRACE_NAME = 'theta_trace.csv'
AMPLITUDE_TRACE_NAME = 'amplitude_trace.csv'
BASELINE_LOSSES_NAME = 'baseline_losses.csv'
DICTIONARY_NAME = 'dictionary.csv'
BASELINE_SUMMARY_NAME = 'baseline_summary.json'
TABLE_NAME = 'table1.csv'

LOSS_HEADER = 'iteration,L_C,L_R,accuracy_percent,elapsed_s'
LOSS_FORMAT = ['%d', CSV_FORMAT, CSV_FORMAT, CSV_FORMAT, CSV_FORMAT]


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(JSONRenderer().render(_plain(data), renderer_context={'indent': 2}) + b'\n')
    logger.info('Wrote %s', path)
    return path


def read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f'No such file: {path}')
    try:
        data = JSONParser().parse(io.BytesIO(path.read_bytes()))
    except ParseError as exc:
        raise MalformedFile(f'{path}: {exc.detail}')
    if not isinstance(data, dict):
        raise MalformedFile(f'{path} does not hold a JSON object')
    return data


@dataclass
class Checkpoint:
    U_C: GivensMesh
    U_R: GivensMesh
    projector: Projector
    seed: int | None = None
    config: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.projector.N


def save_checkpoint(path, U_C: GivensMesh, U_R: GivensMesh, projector: Projector,
                    seed: int | None = None, config: dict | None = None) -> Path:
    payload = {
        'version': qnet_setting('CHECKPOINT_VERSION'),
        'N': projector.N,
        'd': projector.d,
        'retained': list(projector.retained),
        'l_C': U_C.n_layers,
        'l_R': U_R.n_layers,
        'order_c': U_C.order,
        'order_r': U_R.order,
        'theta_C': U_C.thetas.ravel().tolist(),
        'theta_R': U_R.thetas.ravel().tolist(),
        'seed': seed,
        'config': config or {},
    }
    return write_json(path, payload)


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_NAME
    serializer = CheckpointSerializer(data=read_json(path))
    if not serializer.is_valid():
        raise MalformedFile(f'{path}: {serializer.errors}')
    data = serializer.validated_data
    if data['version'] > qnet_setting('CHECKPOINT_VERSION'):
        raise MalformedFile(f'{path}: checkpoint version {data["version"]} is newer than this simulator')
    N = data['N']
    U_C = GivensMesh(N, np.array(data['theta_C']).reshape(data['l_C'], N - 1), data['order_c'])
    U_R = GivensMesh(N, np.array(data['theta_R']).reshape(data['l_R'], N - 1), data['order_r'])
    return Checkpoint(U_C, U_R, Projector(N, tuple(data['retained'])), data.get('seed'), dict(data['config']))


def write_losses(path, records) -> Path:
    rows = np.array([[r.iteration, r.L_C, r.L_R, r.accuracy, r.elapsed] for r in records], dtype=np.float64)
    np.savetxt(path, rows.reshape(-1, 5), delimiter=',', fmt=LOSS_FORMAT, header=LOSS_HEADER, comments='')
    logger.info('Wrote %d loss records to %s', len(records), path)
    return Path(path)


def read_losses(path) -> np.ndarray:
    """(T, 5) array in the column order of LOSS_HEADER."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f'No such file: {path}')
    with path.open() as fh:
        header = fh.readline().strip()
    if header != LOSS_HEADER:
        raise MalformedFile(f'{path}: unexpected header {header!r}')
    try:
        return np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except ValueError as exc:
        raise MalformedFile(f'{path}: {exc}')


def write_matrix(path, matrix, header: str = '') -> Path:
    np.savetxt(path, np.atleast_2d(matrix), delimiter=',', fmt=CSV_FORMAT, header=header, comments='')
    logger.info('Wrote %s', path)
    return Path(path)


def write_theta_trace(path, trace: list[np.ndarray], n_c: int) -> Path:
    n_r = len(trace[0]) - n_c if trace else 0
    header = ','.join(['iteration'] + [f'C{i}' for i in range(n_c)] + [f'R{i}' for i in range(n_r)])
    rows = np.array([np.concatenate([[t], thetas]) for t, thetas in enumerate(trace)])
    return write_matrix(path, rows, header)


def write_amplitude_trace(path, trace: list[np.ndarray]) -> Path:
    """Per-iteration compressed (a) and reconstructed (B) amplitudes of one sample."""
    N = len(trace[0]) // 2 if trace else 0
    header = ','.join(['iteration'] + [f'a{i}' for i in range(N)] + [f'B{i}' for i in range(N)])
    rows = np.array([np.concatenate([[t], amplitudes]) for t, amplitudes in enumerate(trace)])
    return write_matrix(path, rows, header)


def write_targets(path, b: np.ndarray) -> Path:
    """Explicit compression targets, one sample per row as ``--targets`` reads them."""
    return write_matrix(path, np.asarray(b).T)


def write_loss_curve(path, values) -> Path:
    rows = np.column_stack([np.arange(len(values)), np.asarray(values, dtype=np.float64)])
    np.savetxt(path, rows, delimiter=',', fmt=['%d', CSV_FORMAT], header='iteration,loss', comments='')
    logger.info('Wrote %s', path)
    return Path(path)


def write_comparison(path, rows: list[ComparisonRow]) -> tuple[Path, Path]:
    """Write the comparison table as CSV plus an aligned text rendering next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [','.join(COMPARISON_HEADER)] + [','.join(row.as_list()) for row in rows]
    path.write_text('\n'.join(lines) + '\n')
    text_path = path.with_suffix('.txt')
    text_path.write_text(format_table(rows))
    logger.info('Wrote comparison of %d methods to %s', len(rows), path)
    return path, text_path
