"""Compression and reconstruction losses, per-gate partials and gradients.

Both losses are sums of squared residuals over the observed coordinates of
one network's output. A ``PipelineContext`` fixes the states entering the
network, the observed coordinates and the target; every loss, partial and
gradient in this module is computed against one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, InvalidTarget, NonFiniteLoss, TargetShapeMismatch
from .mesh import (
    GivensMesh, Projector, gate_derivative, gate_matrix, propagate, rotate_rows,
)

LEAKAGE = 'leakage'
EXPLICIT = 'explicit'
TARGET_MODES = (LEAKAGE, EXPLICIT)

MEAN = 'mean'
SUM = 'sum'
LOSS_NORMS = (MEAN, SUM)

FORWARD = 'finite-difference'
CENTRAL = 'central'
ANALYTIC = 'analytic'
GRAD_MODES = (FORWARD, CENTRAL, ANALYTIC)

TARGET_TOLERANCE = 1e-12


def _states(dataset) -> np.ndarray:
    states = getattr(dataset, 'states', dataset)
    states = np.asarray(states, dtype=np.float64)
    return states.reshape(-1, 1) if states.ndim == 1 else states


@dataclass(frozen=True)
class CompressionTarget:
    mode: str = LEAKAGE
    b: np.ndarray | None = None

    @classmethod
    def uniform(cls, projector: Projector, M: int) -> CompressionTarget:
        """Equal amplitude 1/sqrt(d) on every retained coordinate for every sample."""
        column = np.where(projector.mask, 1.0 / math.sqrt(projector.d), 0.0)
        return cls(EXPLICIT, np.tile(column[:, None], (1, M)))

    def validate(self, projector: Projector, M: int) -> None:
        if self.mode not in TARGET_MODES:
            raise ValueError(f'Unknown target mode {self.mode!r}')
        if self.mode == LEAKAGE:
            return
        if self.b is None or self.b.shape != (projector.N, M):
            shape = None if self.b is None else self.b.shape
            raise TargetShapeMismatch(f'Expected targets of shape {(projector.N, M)}, got {shape}')
        norms = np.linalg.norm(self.b, axis=0)
        if np.any(np.abs(norms - 1.0) > TARGET_TOLERANCE):
            raise InvalidTarget('Every target vector must have unit norm')
        if np.any(self.b[~projector.mask] != 0.0):
            raise InvalidTarget('Targets must vanish outside the retained coordinates')


@dataclass(frozen=True)
class PipelineContext:
    """States entering a network plus the observed outputs and their targets."""
    inputs: np.ndarray
    observed: np.ndarray
    target: np.ndarray

    @property
    def M(self) -> int:
        return self.inputs.shape[1]

    @property
    def N(self) -> int:
        return self.inputs.shape[0]

    def residual(self, outputs: np.ndarray) -> np.ndarray:
        return np.where(self.observed[:, None], outputs - self.target, 0.0)

    def mask(self, partials: np.ndarray) -> np.ndarray:
        return np.where(self.observed[:, None], partials, 0.0)


def compression_context(dataset, projector: Projector, target: CompressionTarget) -> PipelineContext:
    """Leakage observes the discarded coordinates against zero; explicit observes
    the retained ones against the given targets."""
    states = _states(dataset)
    if states.shape[0] != projector.N:
        raise DimensionMismatch(f'States of length {states.shape[0]} do not fit a {projector.N}-mode projector')
    target.validate(projector, states.shape[1])
    if target.mode == LEAKAGE:
        return PipelineContext(states, ~projector.mask, np.zeros_like(states))
    return PipelineContext(states, projector.mask, np.asarray(target.b, dtype=np.float64))


def reconstruction_context(dataset, U_C: GivensMesh, projector: Projector) -> PipelineContext:
    states = _states(dataset)
    compressed = np.where(projector.mask[:, None], propagate(states, U_C), 0.0)
    return PipelineContext(compressed, np.ones(projector.N, dtype=bool), states)


def normalizer(context: PipelineContext, loss_norm: str) -> float:
    if loss_norm == MEAN:
        return float(context.M * context.N)
    if loss_norm == SUM:
        return 1.0
    raise ValueError(f'Unknown loss normalization {loss_norm!r}')


def context_loss(context: PipelineContext, mesh: GivensMesh, loss_norm: str = MEAN) -> float:
    residual = context.residual(propagate(context.inputs, mesh))
    return float(np.sum(residual * residual)) / normalizer(context, loss_norm)


def compression_loss(dataset, U_C: GivensMesh, projector: Projector,
                     target: CompressionTarget | None = None, loss_norm: str = MEAN) -> float:
    context = compression_context(dataset, projector, target or CompressionTarget())
    return context_loss(context, U_C, loss_norm)


def reconstruction_loss(dataset, U_C: GivensMesh, projector: Projector, U_R: GivensMesh,
                        loss_norm: str = MEAN) -> float:
    return context_loss(reconstruction_context(dataset, U_C, projector), U_R, loss_norm)


def leakage_bound(dataset, d: int, loss_norm: str = MEAN) -> float:
    """Least leakage any orthogonal compression can reach: the energy of the
    states outside their top-d principal subspace. Also bounds the
    reconstruction loss from below, since reconstructions span d dimensions."""
    states = _states(dataset)
    sigma = np.linalg.svd(states, compute_uv=False)
    total = float(np.sum(sigma[d:] ** 2))
    if loss_norm == MEAN:
        return total / float(states.size)
    if loss_norm == SUM:
        return total
    raise ValueError(f'Unknown loss normalization {loss_norm!r}')


def fd_partial(mesh: GivensMesh, p: int, k: int, delta: float, context: PipelineContext) -> np.ndarray:
    """Forward difference of the observed network outputs with respect to angle (p, k)."""
    if delta <= 0:
        raise ValueError('delta must be positive')
    theta = mesh.thetas[p, k - 1]
    shifted = propagate(context.inputs, mesh.with_theta(p, k, theta + delta))
    base = propagate(context.inputs, mesh)
    return context.mask((shifted - base) / delta)


def analytic_partial(mesh: GivensMesh, p: int, k: int, context: PipelineContext) -> np.ndarray:
    """Closed-form derivative: gate (p, k) is replaced by its derivative block, all
    other coordinates at that position are zeroed, and the chain is re-applied."""
    x = np.array(context.inputs, dtype=np.float64, copy=True)
    sequence = list(mesh.gate_sequence())
    position = sequence.index((p, k))
    for q, j in sequence[:position]:
        rotate_rows(x, j, mesh.thetas[q, j - 1])
    i = k - 1
    derived = np.zeros_like(x)
    derived[i:i + 2] = gate_derivative(mesh.thetas[p, k - 1]) @ x[i:i + 2]
    for q, j in sequence[position + 1:]:
        rotate_rows(derived, j, mesh.thetas[q, j - 1])
    return context.mask(derived)


@dataclass(frozen=True)
class GradientVector:
    values: np.ndarray

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def at(self, p: int, k: int) -> float:
        return float(self.values[p, k - 1])

    def __len__(self):
        return self.values.size


class MeshSweep:
    """Walks a mesh gate by gate in application order.

    Keeps the batch of states entering the current gate and, for every
    position, the matrix of all later gates. A partial then costs one 2-row
    update and one (N, 2) product. Later gates must not change while sweeping;
    earlier ones may, through ``advance``.
    """

    def __init__(self, mesh: GivensMesh, inputs: np.ndarray):
        self.mesh = mesh
        self.sequence = list(mesh.gate_sequence())
        self.thetas = mesh.thetas.copy()
        self.state = np.array(inputs, dtype=np.float64, copy=True)
        N = mesh.N
        self.suffix = np.empty((len(self.sequence), N, N))
        acc = np.eye(N)
        for s in range(len(self.sequence) - 1, -1, -1):
            self.suffix[s] = acc
            p, k = self.sequence[s]
            i = k - 1
            acc = acc.copy()
            acc[:, i:i + 2] = acc[:, i:i + 2] @ gate_matrix(self.thetas[p, k - 1])

    def output(self, s: int) -> np.ndarray:
        p, k = self.sequence[s]
        i = k - 1
        x = self.state.copy()
        x[i:i + 2] = gate_matrix(self.thetas[p, k - 1]) @ x[i:i + 2]
        return self.suffix[s] @ x

    def partial(self, s: int, grad_mode: str = FORWARD, delta: float = 1e-8) -> np.ndarray:
        p, k = self.sequence[s]
        i = k - 1
        theta = self.thetas[p, k - 1]
        if grad_mode == ANALYTIC:
            block = gate_derivative(theta)
        elif grad_mode == FORWARD:
            block = (gate_matrix(theta + delta) - gate_matrix(theta)) / delta
        elif grad_mode == CENTRAL:
            block = (gate_matrix(theta + delta) - gate_matrix(theta - delta)) / (2.0 * delta)
        else:
            raise ValueError(f'Unknown gradient mode {grad_mode!r}')
        return self.suffix[s][:, i:i + 2] @ (block @ self.state[i:i + 2])

    def coefficients(self, s: int, context: PipelineContext) -> np.ndarray:
        """Unnormalised loss as a function of the angle at position ``s``.

        Only one 2x2 block depends on the angle t, so the residual is
        r0 + cos(t) u + sin(t) v and the loss is the degree-2 trigonometric
        polynomial a0 + a1 cos t + b1 sin t + a2 cos 2t + b2 sin 2t.
        Returns (a0, a1, b1, a2, b2).
        """
        p, k = self.sequence[s]
        i = k - 1
        rest = self.state.copy()
        rest[i:i + 2] = 0.0
        r0 = context.residual(self.suffix[s] @ rest)
        pair = self.suffix[s][:, i:i + 2]
        x = self.state[i:i + 2]
        u = context.mask(pair @ x)
        v = context.mask(pair @ np.stack([-x[1], x[0]]))
        uu, vv, uv = np.sum(u * u), np.sum(v * v), np.sum(u * v)
        return np.array([np.sum(r0 * r0) + (uu + vv) / 2.0, 2.0 * np.sum(r0 * u), 2.0 * np.sum(r0 * v),
                         (uu - vv) / 2.0, uv])

    def advance(self, s: int, theta: float | None = None) -> None:
        p, k = self.sequence[s]
        if theta is not None:
            self.thetas[p, k - 1] = theta
        rotate_rows(self.state, k, self.thetas[p, k - 1])

    def result(self) -> GivensMesh:
        return self.mesh.with_thetas(self.thetas)


def gd_step(theta, gradient, eta: float):
    if eta <= 0:
        raise ValueError('eta must be positive')
    return theta - eta * gradient


def sweep(mesh: GivensMesh, context: PipelineContext, loss_norm: str = MEAN,
          grad_mode: str = FORWARD, delta: float = 1e-8,
          eta: float | None = None) -> tuple[GivensMesh, GradientVector]:
    """One pass over every gate of ``mesh``.

    With ``eta`` set, each angle is stepped right after its gradient is taken,
    so later gradients see the updated earlier gates. Without it the mesh is
    left untouched and the returned gradient is the full gradient at the
    current angles.
    """
    walker = MeshSweep(mesh, context.inputs)
    scale = 2.0 / normalizer(context, loss_norm)
    grads = np.zeros_like(mesh.thetas)
    for s, (p, k) in enumerate(walker.sequence):
        residual = context.residual(walker.output(s))
        g = scale * float(np.sum(residual * walker.partial(s, grad_mode, delta)))
        grads[p, k - 1] = g
        theta = None
        if eta is not None:
            theta = gd_step(walker.thetas[p, k - 1], g, eta)
            if not math.isfinite(theta):
                raise NonFiniteLoss(f'Angle of gate ({p}, {k}) diverged with gradient {g} (eta={eta})')
        walker.advance(s, theta)
    return walker.result(), GradientVector(grads)


TRIG_GRID = 64
NEWTON_STEPS = 8


def trig_value(coefficients, theta):
    _, a1, b1, a2, b2 = coefficients
    return a1 * np.cos(theta) + b1 * np.sin(theta) + a2 * np.cos(2.0 * theta) + b2 * np.sin(2.0 * theta)


def _newton(coefficients, t: float) -> float:
    _, a1, b1, a2, b2 = coefficients
    for _ in range(NEWTON_STEPS):
        c, s, c2, s2 = math.cos(t), math.sin(t), math.cos(2.0 * t), math.sin(2.0 * t)
        d1 = -a1 * s + b1 * c - 2.0 * a2 * s2 + 2.0 * b2 * c2
        d2 = -a1 * c - b1 * s - 4.0 * a2 * c2 - 4.0 * b2 * s2
        if d2 <= 0.0:
            break
        candidate = t - d1 / d2
        if trig_value(coefficients, candidate) > trig_value(coefficients, t):
            break
        t = candidate
        if abs(d1 / d2) < 1e-15:
            break
    return t


def trig_minimum(coefficients, theta: float) -> float:
    """Global minimiser of a degree-2 trigonometric polynomial, or ``theta`` itself
    when no angle does strictly better.

    Every local minimum of a grid centred on ``theta`` is refined by Newton
    steps that must keep lowering the value; the best refinement wins.
    """
    if not np.any(coefficients[1:]):
        return float(theta)
    grid = theta + np.linspace(-math.pi, math.pi, TRIG_GRID, endpoint=False)
    values = trig_value(coefficients, grid)
    dips = np.flatnonzero((values <= np.roll(values, 1)) & (values <= np.roll(values, -1)))
    best = float(theta)
    for i in dips:
        t = _newton(coefficients, float(grid[i]))
        if trig_value(coefficients, t) < trig_value(coefficients, best):
            best = t
    return best


def minimize_sweep(mesh: GivensMesh, context: PipelineContext) -> GivensMesh:
    """One pass over every gate, setting each angle to the exact minimiser of the
    loss with all other angles held. The loss never increases."""
    walker = MeshSweep(mesh, context.inputs)
    for s, (p, k) in enumerate(walker.sequence):
        theta = trig_minimum(walker.coefficients(s, context), float(walker.thetas[p, k - 1]))
        walker.advance(s, theta)
    return walker.result()


def loss_gradient(context: PipelineContext, mesh: GivensMesh, loss_norm: str = MEAN,
                  grad_mode: str = FORWARD, delta: float = 1e-8) -> GradientVector:
    return sweep(mesh, context, loss_norm, grad_mode, delta)[1]

