"""Pixel accuracy, threshold post-processing and the method comparison table."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch

NONE = 'none'
CLAMP = 'clamp'
BINARY = 'binary'
POSTPROCESS_MODES = (NONE, CLAMP, BINARY)

DEFAULT_TOLERANCE = 0.01
# absorbs float noise so a difference of exactly the tolerance counts as similar
BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class AccuracyReport:
    similar: np.ndarray
    accuracies: np.ndarray
    tol: float = DEFAULT_TOLERANCE

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies))


def _pair(x, xhat) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise DimensionMismatch(f'Cannot compare images of shapes {x.shape} and {xhat.shape}')
    return x, xhat


def accuracy(x, xhat, tol: float = DEFAULT_TOLERANCE) -> tuple[int, float]:
    """Return (similar pixel count, percentage of similar pixels)."""
    x, xhat = _pair(x, xhat)
    similar = int(np.count_nonzero(np.abs(xhat - x) <= tol + BOUNDARY_SLACK))
    return similar, 100.0 * similar / x.size


def accuracy_report(X, Xhat, tol: float = DEFAULT_TOLERANCE) -> AccuracyReport:
    """Per-sample accuracy for (M, N) pixel matrices."""
    X, Xhat = _pair(X, Xhat)
    X, Xhat = np.atleast_2d(X), np.atleast_2d(Xhat)
    similar = np.count_nonzero(np.abs(Xhat - X) <= tol + BOUNDARY_SLACK, axis=1)
    return AccuracyReport(similar, 100.0 * similar / X.shape[1], tol)


def threshold_pixels(xhat, low: float = 0.01, high: float = 0.99) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=np.float64)
    out = xhat.copy()
    out[xhat <= low] = 0.0
    out[xhat >= high] = 1.0
    return out


def binarize_amplitudes(xhat, cutoff: float = 0.5) -> np.ndarray:
    return (np.asarray(xhat, dtype=np.float64) >= cutoff).astype(np.float64)


def postprocess(xhat, mode: str = CLAMP) -> np.ndarray:
    if mode == NONE:
        return np.asarray(xhat, dtype=np.float64)
    if mode == CLAMP:
        return threshold_pixels(xhat)
    if mode == BINARY:
        return binarize_amplitudes(xhat)
    raise ValueError(f'Unknown post-processing mode {mode!r}')


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    accuracy: float
    elapsed: float
    matrix_size: str
    final_loss: float | None = None

    def as_list(self) -> list[str]:
        loss = '' if self.final_loss is None else f'{self.final_loss:.6g}'
        return [self.method, f'{self.accuracy:.2f}', f'{self.elapsed:.2f}', self.matrix_size, loss]


COMPARISON_HEADER = ['method', 'accuracy_percent', 'elapsed_s', 'matrix_size', 'final_loss']


def format_table(rows: list[ComparisonRow]) -> str:
    """Aligned plain-text rendering of the comparison table."""
    cells = [COMPARISON_HEADER] + [row.as_list() for row in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(COMPARISON_HEADER))]
    lines = ['  '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in cells]
    lines.insert(1, '  '.join('-' * width for width in widths))
    return '\n'.join(lines) + '\n'
