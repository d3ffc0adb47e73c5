"""Sparse-coding baseline: K-SVD dictionary learning with OMP coding.

Signals are the encoded amplitude vectors, one per column, so the baseline
and the quantum network are fitted to the same targets.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.linear_model import orthogonal_mp

from .exceptions import DimensionMismatch

logger = logging.getLogger(__name__)


@dataclass
class Dictionary:
    atoms: np.ndarray
    sparsity: int

    @property
    def N(self) -> int:
        return self.atoms.shape[0]

    @property
    def size(self) -> str:
        return f'{self.atoms.shape[0]}*{self.atoms.shape[1]}'


@dataclass
class DictionaryFit:
    dictionary: Dictionary
    codes: np.ndarray
    losses: list[float] = field(default_factory=list)
    reseeded: int = 0

    def reconstruct(self) -> np.ndarray:
        return self.dictionary.atoms @ self.codes


def _omp(atoms: np.ndarray, Y: np.ndarray, sparsity: int) -> np.ndarray:
    # zero or already-exact signals stop OMP early with a RuntimeWarning
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        return orthogonal_mp(atoms, Y, n_nonzero_coefs=sparsity)


def sparse_code(y, dictionary: Dictionary) -> np.ndarray:
    """Code with at most ``dictionary.sparsity`` nonzeros by orthogonal matching pursuit."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != dictionary.N:
        raise DimensionMismatch(f'Signal of length {y.shape[0]} does not fit a {dictionary.N}-row dictionary')
    if not np.any(y):
        return np.zeros(dictionary.atoms.shape[1:] + y.shape[1:])
    codes = _omp(dictionary.atoms, y, dictionary.sparsity)
    return codes.reshape(dictionary.atoms.shape[1:] + y.shape[1:])


def _column_errors(Y: np.ndarray, atoms: np.ndarray, codes: np.ndarray) -> np.ndarray:
    residual = Y - atoms @ codes
    return np.einsum('ij,ij->j', residual, residual)


def _recode(Y: np.ndarray, dictionary: Dictionary, codes: np.ndarray) -> np.ndarray:
    """Fresh OMP codes, keeping the previous code wherever OMP would do worse."""
    fresh = sparse_code(Y, dictionary)
    better = _column_errors(Y, dictionary.atoms, fresh) <= _column_errors(Y, dictionary.atoms, codes)
    return np.where(better[None, :], fresh, codes)


def _update_atoms(Y: np.ndarray, dictionary: Dictionary, codes: np.ndarray) -> int:
    atoms = dictionary.atoms
    reseeded = 0
    taken: set[int] = set()
    for j in range(atoms.shape[1]):
        users = np.flatnonzero(codes[j])
        if users.size == 0:
            errors = _column_errors(Y, atoms, codes)
            order = [i for i in np.argsort(-errors, kind='stable') if i not in taken]
            if order and errors[order[0]] > 0.0:
                worst = order[0]
                taken.add(worst)
                residual = Y[:, worst] - atoms @ codes[:, worst]
                atoms[:, j] = residual / np.linalg.norm(residual)
                reseeded += 1
                logger.warning('Atom %d unused; re-seeded from sample %d', j, worst)
            continue
        error = Y[:, users] - atoms @ codes[:, users] + np.outer(atoms[:, j], codes[j, users])
        u, s, vt = np.linalg.svd(error, full_matrices=False)
        atoms[:, j] = u[:, 0]
        codes[j, users] = s[0] * vt[0]
    return reseeded


def fit_dictionary(dataset, sparsity: int, iterations: int, loss_norm: str = 'sum') -> DictionaryFit:
    """K-SVD starting from the left singular vectors of the data matrix.

    ``losses[t]`` is the reconstruction loss after iteration t, with
    ``losses[0]`` belonging to the initial dictionary and its OMP codes.
    """
    Y = np.asarray(getattr(dataset, 'states', dataset), dtype=np.float64)
    N, M = Y.shape
    if M < 1:
        raise ValueError('Dataset is empty')
    if not 1 <= sparsity <= N:
        raise ValueError(f'Sparsity must lie in 1..{N}, got {sparsity}')
    scale = float(M * N) if loss_norm == 'mean' else 1.0

    u, _, _ = np.linalg.svd(Y, full_matrices=True)
    dictionary = Dictionary(u[:, :N].copy(), sparsity)
    codes = sparse_code(Y, dictionary)
    fit = DictionaryFit(dictionary, codes)
    fit.losses.append(float(np.sum(_column_errors(Y, dictionary.atoms, codes))) / scale)

    for t in range(1, iterations + 1):
        codes = _recode(Y, dictionary, codes)
        fit.reseeded += _update_atoms(Y, dictionary, codes)
        fit.losses.append(float(np.sum(_column_errors(Y, dictionary.atoms, codes))) / scale)
        logger.debug('K-SVD iteration %d: loss=%.6g', t, fit.losses[-1])
    fit.codes = codes
    return fit
