"""Layered meshes of real two-mode beam-splitter gates and subspace projectors.

A mesh of ``L`` layers on ``N`` modes holds an (L, N-1) array of angles.
Gate (p, k) couples modes k and k+1 (1-indexed) with the rotation
[[cos t, -sin t], [sin t, cos t]]. Within a layer, gates are applied in
ascending or descending k; layers are applied first to last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .codec import StateVector
from .exceptions import DimensionMismatch, ZeroProjection

ASCENDING = 'ascending'
DESCENDING = 'descending'
ORDERS = (ASCENDING, DESCENDING)

RANDOM = 'random'
UNIFORM = 'uniform'
INIT_SCHEMES = (RANDOM, UNIFORM)

TWO_PI = 2.0 * math.pi


def gate_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def gate_derivative(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[-s, -c], [c, -s]])


@dataclass(frozen=True)
class BeamSplitterGate:
    k: int
    theta: float

    @property
    def matrix(self) -> np.ndarray:
        return gate_matrix(self.theta)

    @property
    def reported_theta(self) -> float:
        return self.theta % TWO_PI


@dataclass(frozen=True)
class MeshLayer:
    gates: tuple[BeamSplitterGate, ...]

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True)
class GivensMesh:
    N: int
    thetas: np.ndarray
    order: str = ASCENDING

    def __post_init__(self):
        if self.N < 2:
            raise DimensionMismatch(f'A mesh needs at least two modes, got {self.N}')
        thetas = np.array(self.thetas, dtype=np.float64, copy=True)
        if thetas.ndim == 1:
            thetas = thetas.reshape(-1, self.N - 1)
        if thetas.ndim != 2 or thetas.shape[1] != self.N - 1:
            raise DimensionMismatch(f'Angle array of shape {thetas.shape} does not fit a {self.N}-mode mesh')
        if self.order not in ORDERS:
            raise ValueError(f'Unknown gate order {self.order!r}')
        thetas.flags.writeable = False
        object.__setattr__(self, 'thetas', thetas)

    @property
    def n_layers(self) -> int:
        return self.thetas.shape[0]

    @property
    def n_params(self) -> int:
        return self.thetas.size

    @property
    def layers(self) -> list[MeshLayer]:
        return [
            MeshLayer(tuple(BeamSplitterGate(k, float(row[k - 1])) for k in range(1, self.N)))
            for row in self.thetas
        ]

    def gate_sequence(self) -> Iterator[tuple[int, int]]:
        """Yield (layer p, gate k) pairs in application order; p is 0-indexed, k 1-indexed."""
        ks = range(1, self.N) if self.order == ASCENDING else range(self.N - 1, 0, -1)
        for p in range(self.n_layers):
            for k in ks:
                yield p, k

    def flat_index(self, p: int, k: int) -> int:
        return p * (self.N - 1) + (k - 1)

    def with_thetas(self, thetas) -> GivensMesh:
        return GivensMesh(self.N, np.asarray(thetas).reshape(self.thetas.shape), self.order)

    def with_theta(self, p: int, k: int, theta: float) -> GivensMesh:
        thetas = self.thetas.copy()
        thetas[p, k - 1] = theta
        return GivensMesh(self.N, thetas, self.order)

    def inverse(self) -> GivensMesh:
        """Mesh applying the same gates in exactly reversed order with negated angles."""
        flipped = DESCENDING if self.order == ASCENDING else ASCENDING
        return GivensMesh(self.N, -self.thetas[::-1], flipped)


@dataclass(frozen=True)
class Projector:
    N: int
    retained: tuple[int, ...] = field(default=())

    def __post_init__(self):
        retained = tuple(sorted(int(i) for i in self.retained))
        if not retained or len(set(retained)) != len(retained):
            raise ValueError('Retained set must be a nonempty set of distinct indices')
        if retained[0] < 0 or retained[-1] >= self.N:
            raise DimensionMismatch(f'Retained indices {retained} fall outside 0..{self.N - 1}')
        object.__setattr__(self, 'retained', retained)

    @classmethod
    def top(cls, N: int, d: int) -> Projector:
        """Keep the last d coordinates, {N-d, ..., N-1}."""
        if d <= 0:
            raise ValueError(f'Compressed dimension must be positive, got d={d}')
        if d > N:
            raise DimensionMismatch(f'Compressed dimension d={d} exceeds N={N}')
        return cls(N, tuple(range(N - d, N)))

    @property
    def d(self) -> int:
        return len(self.retained)

    @property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.N, dtype=bool)
        mask[list(self.retained)] = True
        return mask

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.mask.astype(np.float64))

    def complement(self) -> Projector | None:
        kept = set(self.retained)
        rest = tuple(i for i in range(self.N) if i not in kept)
        return Projector(self.N, rest) if rest else None


def _as_array(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.amplitudes
    return np.asarray(state, dtype=np.float64)


def _wrap(state, result: np.ndarray):
    return StateVector(result) if isinstance(state, StateVector) else result


def rotate_rows(x: np.ndarray, k: int, theta: float) -> None:
    """Apply gate k in place to the leading axis of x."""
    c, s = math.cos(theta), math.sin(theta)
    i = k - 1
    upper = x[i].copy()
    lower = x[i + 1]
    x[i] = c * upper - s * lower
    x[i + 1] = s * upper + c * lower


def apply_gate(state, gate: BeamSplitterGate):
    x = _as_array(state).copy()
    N = x.shape[0]
    if not 1 <= gate.k <= N - 1:
        raise DimensionMismatch(f'Gate k={gate.k} does not fit a {N}-mode state')
    rotate_rows(x, gate.k, gate.theta)
    return _wrap(state, x)


def propagate(x: np.ndarray, mesh: GivensMesh) -> np.ndarray:
    """Apply mesh to an (N,) vector or an (N, M) batch of column states."""
    if x.shape[0] != mesh.N:
        raise DimensionMismatch(f'State of length {x.shape[0]} does not fit a {mesh.N}-mode mesh')
    out = np.array(x, dtype=np.float64, copy=True)
    for p, k in mesh.gate_sequence():
        rotate_rows(out, k, mesh.thetas[p, k - 1])
    return out


def apply_mesh(state, mesh: GivensMesh):
    return _wrap(state, propagate(_as_array(state), mesh))


def mesh_matrix(mesh: GivensMesh) -> np.ndarray:
    # column j is the image of basis vector e_j
    return propagate(np.eye(mesh.N), mesh)


def apply_projector(state, projector: Projector, renormalize: bool = False):
    x = _as_array(state)
    if x.shape[0] != projector.N:
        raise DimensionMismatch(f'State of length {x.shape[0]} does not fit a {projector.N}-mode projector')
    out = np.where(projector.mask.reshape((-1,) + (1,) * (x.ndim - 1)), x, 0.0)
    if renormalize:
        norm = np.linalg.norm(out, axis=0)
        if np.any(norm == 0.0):
            raise ZeroProjection()
        out = out / norm
    return _wrap(state, out)


def compress(state, U_C: GivensMesh, projector: Projector):
    return apply_projector(apply_mesh(state, U_C), projector)


def reconstruct(compressed, U_R: GivensMesh):
    return apply_mesh(compressed, U_R)


def pipeline(state, U_C: GivensMesh, projector: Projector, U_R: GivensMesh):
    return reconstruct(compress(state, U_C, projector), U_R)


def init_mesh(layers: int, N: int, scheme: str = RANDOM, seed=None,
              theta: float = math.pi / 4, order: str = ASCENDING) -> GivensMesh:
    """Build a mesh with angles drawn uniformly from [0, 2pi) or all equal to ``theta``.

    ``seed`` may be an int, a SeedSequence or a Generator.
    """
    if layers < 1:
        raise ValueError(f'A mesh needs at least one layer, got {layers}')
    if N < 2:
        raise ValueError(f'A mesh needs at least two modes, got {N}')
    if scheme == RANDOM:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        thetas = rng.uniform(0.0, TWO_PI, size=(layers, N - 1))
    elif scheme == UNIFORM:
        thetas = np.full((layers, N - 1), float(theta))
    else:
        raise ValueError(f'Unknown initialization scheme {scheme!r}')
    return GivensMesh(N, thetas, order)


def identity_mesh(layers: int, N: int, order: str = ASCENDING) -> GivensMesh:
    return init_mesh(layers, N, UNIFORM, theta=0.0, order=order)
