"""Image datasets: generation, validation and file IO.

A dataset directory holds ``images.csv`` (one flattened image per row, the
canonical full-precision copy), ``manifest.json`` with the per-sample squared
sums needed for decoding, and optionally one PBM or PGM file per sample.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from PIL import Image

from .codec import ImageSample, NormContext, encode_batch, unflatten
from .exceptions import MalformedFile, MissingArtifact, Unsatisfiable, UnsupportedFormat
from .validators import validate_image_file, validate_pixels, validate_side

logger = logging.getLogger(__name__)

BINARY = 'binary'
GRAYSCALE = 'grayscale'
KINDS = (BINARY, GRAYSCALE)

FORMATS = ('pbm', 'pgm', 'csv')
CSV_NAME = 'images.csv'
MANIFEST_NAME = 'manifest.json'
CSV_FORMAT = '%.17g'


@dataclass(frozen=True)
class ImageDataset:
    samples: tuple[ImageSample, ...]
    side: int
    contexts: tuple[NormContext, ...]
    kind: str = GRAYSCALE
    seed: int | None = None
    provenance: dict = field(default_factory=dict)

    @classmethod
    def from_pixels(cls, pixels, kind: str = GRAYSCALE, seed: int | None = None,
                    provenance: dict | None = None, sum_sq=None) -> ImageDataset:
        """Validate an (M, N) pixel matrix and attach squared sums.

        ``sum_sq`` comes from a manifest when the dataset is reloaded; otherwise
        it is computed from the pixels at ingestion.
        """
        pixels = np.atleast_2d(np.asarray(pixels, dtype=np.float64))
        M, N = pixels.shape
        if M < 1:
            raise ValueError('A dataset needs at least one sample')
        side = int(round(np.sqrt(N)))
        if side * side != N:
            raise ValidationError(f'Rows of length {N} are not square images')
        validate_side(side)
        validate_pixels(pixels)
        _, computed = encode_batch(pixels)
        if sum_sq is None:
            sum_sq = computed
        sum_sq = np.asarray(sum_sq, dtype=np.float64)
        if sum_sq.shape != (M,) or np.any(sum_sq <= 0.0):
            raise MalformedFile(f'Expected {M} positive squared sums, got {sum_sq.tolist()}')
        samples = tuple(ImageSample(row.copy(), i) for i, row in enumerate(pixels))
        contexts = tuple(NormContext(float(v)) for v in sum_sq)
        return cls(samples, side, contexts, kind, seed, dict(provenance or {}))

    @property
    def M(self) -> int:
        return len(self.samples)

    @property
    def N(self) -> int:
        return self.side * self.side

    @property
    def pixels(self) -> np.ndarray:
        return np.stack([s.pixels for s in self.samples])

    @property
    def sum_sq(self) -> np.ndarray:
        return np.array([c.sum_sq for c in self.contexts])

    @property
    def states(self) -> np.ndarray:
        """(N, M) amplitude matrix, one encoded sample per column."""
        states, _ = encode_batch(self.pixels)
        return states

    def manifest(self, fmt: str = 'csv') -> dict:
        return {
            'side': self.side,
            'M': self.M,
            'kind': self.kind,
            'seed': self.seed,
            'format': fmt,
            'sum_sq': [c.sum_sq for c in self.contexts],
            'provenance': self.provenance,
        }


def generate_dataset(M: int, side: int, seed: int | None = None, kind: str = BINARY) -> ImageDataset:
    """Seeded surrogate images.

    Binary pixels are fair coin flips; all-zero draws and exact duplicates are
    rejected. Grayscale pixels are uniform on [0, 1].
    """
    if M < 1:
        raise ValueError('M must be at least 1')
    validate_side(side)
    if kind not in KINDS:
        raise ValueError(f'Unknown dataset kind {kind!r}')
    N = side * side
    if kind == BINARY and M > (1 << N) - 1:
        raise Unsatisfiable(f'Only {(1 << N) - 1} distinct nonzero {side}x{side} binary images exist; asked for {M}')

    rng = np.random.default_rng(seed)
    seen: set[bytes] = set()
    rows = []
    while len(rows) < M:
        if kind == BINARY:
            row = rng.integers(0, 2, size=N).astype(np.float64)
        else:
            row = rng.uniform(0.0, 1.0, size=N)
        key = row.tobytes()
        if not row.any() or key in seen:
            continue
        seen.add(key)
        rows.append(row)
    provenance = {'generator': 'generate_dataset', 'M': M, 'side': side, 'kind': kind, 'seed': seed}
    return ImageDataset.from_pixels(np.stack(rows), kind, seed, provenance)


def _pixel_matrix(images) -> np.ndarray:
    return images.pixels if isinstance(images, ImageDataset) else np.atleast_2d(np.asarray(images, dtype=np.float64))


def save_images(images, path, fmt: str = 'csv', prefix: str = 'sample') -> list[Path]:
    """Write a dataset or an (M, N) pixel matrix; returns the files written.

    CSV is lossless. PGM quantizes to 1/255 steps. PBM only holds binary pixels.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    pixels = _pixel_matrix(images)
    if fmt == 'csv':
        target = path / CSV_NAME if prefix == 'sample' else path / f'{prefix}.csv'
        np.savetxt(target, pixels, delimiter=',', fmt=CSV_FORMAT)
        return [target]
    if fmt not in ('pbm', 'pgm'):
        raise UnsupportedFormat(f'Unsupported image format {fmt!r}; choose one of {FORMATS}')
    if fmt == 'pbm' and not np.all((pixels == 0.0) | (pixels == 1.0)):
        raise UnsupportedFormat('PBM holds binary pixels only; use pgm or csv')

    written = []
    for i, row in enumerate(pixels):
        image = unflatten(row)
        if fmt == 'pbm':
            img = Image.fromarray(image == 1.0)
        else:
            img = Image.fromarray(np.rint(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8))
        target = path / f'{prefix}_{i:03d}.{fmt}'
        img.save(target, format='PPM')
        written.append(target)
    return written


def _read_image(path: Path, fmt: str) -> np.ndarray:
    try:
        validate_image_file(path, fmt)
    except ValidationError as exc:
        raise MalformedFile('; '.join(exc.messages))
    with Image.open(path) as img:
        return np.asarray(img.convert('L'), dtype=np.float64).reshape(-1) / 255.0


def _detect_format(path: Path) -> str:
    if not path.is_dir():
        return path.suffix.lstrip('.').lower() or 'csv'
    if (path / CSV_NAME).exists():
        return 'csv'
    for fmt in ('pbm', 'pgm'):
        if any(path.glob(f'*.{fmt}')):
            return fmt
    return 'csv'


def load_images(path, fmt: str | None = None) -> np.ndarray:
    """Read an (M, N) pixel matrix from a CSV file or a directory of images."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f'No such file or directory: {path}')
    if fmt is None:
        fmt = _detect_format(path)
    if fmt not in FORMATS:
        raise UnsupportedFormat(f'Unsupported image format {fmt!r}; choose one of {FORMATS}')

    if fmt == 'csv':
        target = path / CSV_NAME if path.is_dir() else path
        if not target.exists():
            raise MissingArtifact(f'No such file: {target}')
        try:
            pixels = np.loadtxt(target, delimiter=',', ndmin=2)
        except ValueError as exc:
            raise MalformedFile(f'{target}: {exc}')
        if pixels.size == 0:
            raise MalformedFile(f'{target} holds no images')
        return pixels

    files = sorted(path.glob(f'*.{fmt}')) if path.is_dir() else [path]
    if not files:
        raise MissingArtifact(f'No .{fmt} files in {path}')
    rows = [_read_image(f, fmt) for f in files]
    if len({row.size for row in rows}) != 1:
        raise MalformedFile(f'Images in {path} have different sizes')
    return np.stack(rows)


def save_dataset(dataset: ImageDataset, path, fmt: str = 'csv') -> Path:
    from .artifacts import write_json
    from .serializers import DatasetManifestSerializer

    path = Path(path)
    save_images(dataset, path, 'csv')
    if fmt != 'csv':
        save_images(dataset, path, fmt)
    manifest = DatasetManifestSerializer(data=dataset.manifest(fmt))
    manifest.is_valid(raise_exception=True)
    write_json(path / MANIFEST_NAME, manifest.validated_data)
    logger.info('Wrote %d-sample dataset to %s', dataset.M, path)
    return path


def load_dataset(path, fmt: str | None = None) -> ImageDataset:
    """Load a dataset directory (manifest plus images) or a bare image file.

    Squared sums come from the manifest when one exists.
    """
    from .artifacts import read_json
    from .serializers import DatasetManifestSerializer

    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f'Dataset path does not exist: {path}')
    manifest_path = path / MANIFEST_NAME if path.is_dir() else None
    if manifest_path is None or not manifest_path.exists():
        pixels = load_images(path, fmt)
        kind = BINARY if np.all((pixels == 0.0) | (pixels == 1.0)) else GRAYSCALE
        return ImageDataset.from_pixels(pixels, kind, provenance={'source': str(path)})

    serializer = DatasetManifestSerializer(data=read_json(manifest_path))
    if not serializer.is_valid():
        raise MalformedFile(f'{manifest_path}: {serializer.errors}')
    manifest = serializer.validated_data
    pixels = load_images(path, fmt or 'csv')
    if pixels.shape != (manifest['M'], manifest['side'] ** 2):
        raise MalformedFile(f'{path} holds images of shape {pixels.shape}, manifest says '
                            f'{(manifest["M"], manifest["side"] ** 2)}')
    return ImageDataset.from_pixels(pixels, manifest['kind'], manifest.get('seed'),
                                    manifest.get('provenance'), manifest['sum_sq'])
