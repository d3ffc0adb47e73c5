"""Coordinate-sweep gradient descent over the compression and reconstruction meshes."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import losses, metrics
from .codec import decode_batch
from .conf import DEFAULTS, qnet_setting
from .exceptions import NonFiniteLoss
from .mesh import ORDERS, INIT_SCHEMES, GivensMesh, Projector, init_mesh, propagate

logger = logging.getLogger(__name__)

ALTERNATING = 'alternating'
SEQUENTIAL = 'sequential'
SCHEDULES = (ALTERNATING, SEQUENTIAL)

LITERAL = 'literal'
BATCH = 'batch'
EXACT = 'exact'
UPDATES = (LITERAL, BATCH, EXACT)

INIT_RECONSTRUCTION = ('random', 'inverse')

SETTING_NAMES = {
    'eta': 'ETA',
    'iterations': 'ITERATIONS',
    'delta': 'DELTA',
    'l_C': 'COMPRESSION_LAYERS',
    'l_R': 'RECONSTRUCTION_LAYERS',
    'd': 'COMPRESSED_DIM',
    'grad_mode': 'GRAD_MODE',
    'loss_norm': 'LOSS_NORM',
    'schedule': 'SCHEDULE',
    'update': 'UPDATE',
    'target_mode': 'TARGET_MODE',
    'seed': 'SEED',
    'init_scheme': 'INIT_SCHEME',
    'init_theta': 'INIT_THETA',
    'init_r': 'INIT_RECONSTRUCTION',
    'order_c': 'COMPRESSION_ORDER',
    'order_r': 'RECONSTRUCTION_ORDER',
    'convergence_tol': 'CONVERGENCE_TOL',
    'postprocess': 'POSTPROCESS',
    'tol': 'PIXEL_TOLERANCE',
    'record_elapsed': 'RECORD_ELAPSED',
    'log_every': 'LOG_EVERY',
}


@dataclass(frozen=True)
class TrainConfig:
    eta: float = DEFAULTS['ETA']
    iterations: int = DEFAULTS['ITERATIONS']
    delta: float = DEFAULTS['DELTA']
    l_C: int = DEFAULTS['COMPRESSION_LAYERS']
    l_R: int = DEFAULTS['RECONSTRUCTION_LAYERS']
    d: int = DEFAULTS['COMPRESSED_DIM']
    grad_mode: str = DEFAULTS['GRAD_MODE']
    loss_norm: str = DEFAULTS['LOSS_NORM']
    schedule: str = DEFAULTS['SCHEDULE']
    update: str = DEFAULTS['UPDATE']
    target_mode: str = DEFAULTS['TARGET_MODE']
    seed: int = DEFAULTS['SEED']
    init_scheme: str = DEFAULTS['INIT_SCHEME']
    init_theta: float = DEFAULTS['INIT_THETA']
    init_r: str = DEFAULTS['INIT_RECONSTRUCTION']
    order_c: str = DEFAULTS['COMPRESSION_ORDER']
    order_r: str = DEFAULTS['RECONSTRUCTION_ORDER']
    retained: tuple[int, ...] | None = None
    convergence_tol: float | None = DEFAULTS['CONVERGENCE_TOL']
    postprocess: str = DEFAULTS['POSTPROCESS']
    tol: float = DEFAULTS['PIXEL_TOLERANCE']
    record_elapsed: bool = DEFAULTS['RECORD_ELAPSED']
    log_every: int = DEFAULTS['LOG_EVERY']

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError('eta must be positive')
        if self.delta <= 0:
            raise ValueError('delta must be positive')
        if self.d <= 0:
            raise ValueError('d must be positive')
        if self.iterations < 0:
            raise ValueError('iterations must be nonnegative')
        if self.l_C < 1 or self.l_R < 1:
            raise ValueError('Both meshes need at least one layer')
        choices = {
            'grad_mode': losses.GRAD_MODES,
            'loss_norm': losses.LOSS_NORMS,
            'schedule': SCHEDULES,
            'update': UPDATES,
            'target_mode': losses.TARGET_MODES,
            'init_scheme': INIT_SCHEMES,
            'init_r': INIT_RECONSTRUCTION,
            'order_c': ORDERS,
            'order_r': ORDERS,
            'postprocess': metrics.POSTPROCESS_MODES,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f'{name} must be one of {allowed}, got {getattr(self, name)!r}')
        if self.init_r == 'inverse' and (self.l_R != self.l_C or self.order_r == self.order_c):
            raise ValueError('init_r=inverse needs l_R == l_C and opposite gate orders')
        if self.retained is not None:
            object.__setattr__(self, 'retained', tuple(sorted(int(i) for i in self.retained)))

    @classmethod
    def from_settings(cls, **overrides) -> TrainConfig:
        values = {name: qnet_setting(key) for name, key in SETTING_NAMES.items()}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def projector(self, N: int) -> Projector:
        if self.retained is not None:
            if len(self.retained) != self.d:
                raise ValueError(f'Retained set has {len(self.retained)} indices but d={self.d}')
            return Projector(N, self.retained)
        return Projector.top(N, self.d)

    def as_dict(self) -> dict:
        data = asdict(self)
        data['retained'] = None if self.retained is None else list(self.retained)
        return data


@dataclass(frozen=True)
class LossRecord:
    iteration: int
    L_C: float
    L_R: float
    accuracy: float
    elapsed: float


@dataclass
class TrainResult:
    U_C: GivensMesh
    U_R: GivensMesh
    projector: Projector
    config: TrainConfig
    records: list[LossRecord] = field(default_factory=list)
    theta_trace: list[np.ndarray] = field(default_factory=list)
    amplitude_trace: list[np.ndarray] = field(default_factory=list)

    @property
    def final(self) -> LossRecord:
        return self.records[-1]

    @property
    def min_L_C(self) -> float:
        return min(r.L_C for r in self.records)

    @property
    def min_L_R(self) -> float:
        return min(r.L_R for r in self.records)

    @property
    def max_accuracy(self) -> float:
        return max(r.accuracy for r in self.records)


def initial_meshes(N: int, config: TrainConfig) -> tuple[GivensMesh, GivensMesh]:
    seq_c, seq_r = np.random.SeedSequence(config.seed).spawn(2)
    U_C = init_mesh(config.l_C, N, config.init_scheme, seq_c, config.init_theta, config.order_c)
    if config.init_r == 'inverse':
        return U_C, U_C.inverse()
    U_R = init_mesh(config.l_R, N, config.init_scheme, seq_r, config.init_theta, config.order_r)
    return U_C, U_R


def reconstruct_pixels(dataset, U_C: GivensMesh, projector: Projector, U_R: GivensMesh) -> np.ndarray:
    """Full pipeline on every sample, decoded back to (M, N) pixels with the stored squared sums."""
    context = losses.reconstruction_context(dataset, U_C, projector)
    return decode_batch(propagate(context.inputs, U_R), dataset.sum_sq)


def compressed_states(dataset, U_C: GivensMesh, projector: Projector) -> np.ndarray:
    return losses.reconstruction_context(dataset, U_C, projector).inputs


def _step(mesh: GivensMesh, context: losses.PipelineContext, config: TrainConfig) -> GivensMesh:
    if config.update == EXACT:
        return losses.minimize_sweep(mesh, context)
    if config.update == LITERAL:
        mesh, _ = losses.sweep(mesh, context, config.loss_norm, config.grad_mode, config.delta, config.eta)
        return mesh
    gradient = losses.loss_gradient(context, mesh, config.loss_norm, config.grad_mode, config.delta)
    thetas = losses.gd_step(mesh.thetas, gradient.values, config.eta)
    if not np.all(np.isfinite(thetas)):
        raise NonFiniteLoss(f'Angles diverged in a batch step (eta={config.eta})')
    return mesh.with_thetas(thetas)


class Trainer:
    """Runs the training schedule and keeps one LossRecord per iteration."""

    def __init__(self, dataset, config: TrainConfig, target: losses.CompressionTarget | None = None,
                 trace_theta: bool = False):
        self.dataset = dataset
        self.config = config
        self.N = dataset.states.shape[0]
        self.M = dataset.states.shape[1]
        self.projector = config.projector(self.N)
        if target is None:
            if config.target_mode == losses.EXPLICIT:
                target = losses.CompressionTarget.uniform(self.projector, self.M)
            else:
                target = losses.CompressionTarget(losses.LEAKAGE)
        self.compression = losses.compression_context(dataset, self.projector, target)
        self.trace_theta = trace_theta
        self._clock = None

    def record(self, t: int, U_C: GivensMesh, U_R: GivensMesh) -> LossRecord:
        cfg = self.config
        L_C = losses.context_loss(self.compression, U_C, cfg.loss_norm)
        L_R = losses.reconstruction_loss(self.dataset, U_C, self.projector, U_R, cfg.loss_norm)
        if not (math.isfinite(L_C) and math.isfinite(L_R)):
            raise NonFiniteLoss(f'Iteration {t}: L_C={L_C}, L_R={L_R} (eta={cfg.eta})')
        recon = metrics.postprocess(reconstruct_pixels(self.dataset, U_C, self.projector, U_R), cfg.postprocess)
        accuracy = metrics.accuracy_report(self.dataset.pixels, recon, cfg.tol).mean
        elapsed = time.perf_counter() - self._clock if cfg.record_elapsed else 0.0
        return LossRecord(t, L_C, L_R, accuracy, elapsed)

    def _converged(self, records: list[LossRecord], phase: str) -> bool:
        tol = self.config.convergence_tol
        if tol is None or len(records) < 2:
            return False
        prev, last = records[-2], records[-1]
        if phase == 'C':
            change = abs(last.L_C - prev.L_C)
        elif phase == 'R':
            change = abs(last.L_R - prev.L_R)
        else:
            change = abs(last.L_C + last.L_R - prev.L_C - prev.L_R)
        return change < tol

    def run(self, U_C: GivensMesh | None = None, U_R: GivensMesh | None = None) -> TrainResult:
        cfg = self.config
        if U_C is None or U_R is None:
            U_C, U_R = initial_meshes(self.N, cfg)
        self._clock = time.perf_counter()
        result = TrainResult(U_C, U_R, self.projector, cfg)
        self._append(result, self.record(0, U_C, U_R))

        if cfg.schedule == ALTERNATING:
            phases = [('CR', cfg.iterations)]
        else:
            phases = [('C', cfg.iterations), ('R', cfg.iterations)]

        t = 0
        for phase, count in phases:
            for _ in range(count):
                t += 1
                if 'C' in phase:
                    result.U_C = _step(result.U_C, self.compression, cfg)
                if 'R' in phase:
                    context = losses.reconstruction_context(self.dataset, result.U_C, self.projector)
                    result.U_R = _step(result.U_R, context, cfg)
                record = self.record(t, result.U_C, result.U_R)
                self._append(result, record)
                if cfg.log_every and t % cfg.log_every == 0:
                    logger.info('iteration %d: L_C=%.6g L_R=%.6g accuracy=%.2f%%',
                                t, record.L_C, record.L_R, record.accuracy)
                if self._converged(result.records, phase):
                    logger.info('Converged after %d iterations (phase %s)', t, phase)
                    break
        return result

    def _append(self, result: TrainResult, record: LossRecord) -> None:
        result.records.append(record)
        if self.trace_theta:
            result.theta_trace.append(np.concatenate([result.U_C.thetas.ravel(), result.U_R.thetas.ravel()]))
            # last sample: compressed amplitudes, then reconstructed ones
            compressed = compressed_states(self.dataset, result.U_C, self.projector)[:, -1]
            result.amplitude_trace.append(np.concatenate([compressed, propagate(compressed, result.U_R)]))
        logger.debug('record %s', record)


def train(dataset, config: TrainConfig, target: losses.CompressionTarget | None = None,
          trace_theta: bool = False) -> TrainResult:
    return Trainer(dataset, config, target, trace_theta).run()
