"""Amplitude encoding of images into real state vectors and back.

Images are flattened row-major. Encoding divides by the Euclidean norm and
keeps the squared sum so decoding can restore the original scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ZeroVector


@dataclass(frozen=True)
class ImageSample:
    pixels: np.ndarray
    id: int = 0

    @property
    def side(self) -> int:
        return int(round(np.sqrt(self.pixels.size)))


@dataclass(frozen=True)
class NormContext:
    sum_sq: float


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self):
        return self.amplitudes.size


def flatten(image, sample_id: int = 0) -> ImageSample:
    pixels = np.asarray(image, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[0] != pixels.shape[1]:
        raise ValueError(f'Expected a square image, got shape {pixels.shape}')
    return ImageSample(pixels=pixels.reshape(-1).copy(), id=sample_id)


def unflatten(pixels) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64)
    side = int(round(np.sqrt(pixels.size)))
    return pixels.reshape(side, side)


def encode(sample: ImageSample | np.ndarray) -> tuple[StateVector, NormContext]:
    """Normalize pixels into unit-norm amplitudes.

    Raises ZeroVector for an all-zero sample; the encoding is undefined there.
    """
    pixels = sample.pixels if isinstance(sample, ImageSample) else np.asarray(sample, dtype=np.float64)
    sum_sq = float(np.dot(pixels, pixels))
    if sum_sq == 0.0:
        raise ZeroVector(f'Sample {getattr(sample, "id", "?")} has no nonzero pixel')
    return StateVector(pixels / np.sqrt(sum_sq)), NormContext(sum_sq)


def decode(state: StateVector | np.ndarray, ctx: NormContext | float) -> np.ndarray:
    # sqrt(|B|^2 * sum_sq) drops the sign of every amplitude
    amplitudes = state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=np.float64)
    sum_sq = ctx.sum_sq if isinstance(ctx, NormContext) else float(ctx)
    return np.abs(amplitudes) * np.sqrt(sum_sq)


def encode_batch(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Encode an (M, N) pixel matrix; returns (N, M) amplitudes and (M,) squared sums."""
    pixels = np.asarray(pixels, dtype=np.float64)
    sum_sq = np.einsum('ij,ij->i', pixels, pixels)
    zero = np.flatnonzero(sum_sq == 0.0)
    if zero.size:
        raise ZeroVector(f'Samples {zero.tolist()} have no nonzero pixel')
    return (pixels / np.sqrt(sum_sq)[:, None]).T, sum_sq


def decode_batch(amplitudes: np.ndarray, sum_sq: np.ndarray) -> np.ndarray:
    """Inverse of encode_batch: (N, M) amplitudes to (M, N) pixels."""
    return (np.abs(amplitudes) * np.sqrt(np.asarray(sum_sq, dtype=np.float64))[None, :]).T
