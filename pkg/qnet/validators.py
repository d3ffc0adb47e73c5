from django.core.exceptions import ValidationError
from PIL import Image, UnidentifiedImageError

IMAGE_FORMATS = {'pbm': 'PPM', 'pgm': 'PPM'}
IMAGE_MODES = {'pbm': ('1',), 'pgm': ('L',)}


def validate_side(side):
    """Images are D x D with D*D a power of two, so they fill an n-qubit register."""
    pixels = side * side
    if side < 1 or pixels & (pixels - 1):
        raise ValidationError(f'Side {side} gives {pixels} pixels, which is not a power of two')


def validate_pixels(pixels):
    if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
        raise ValidationError('Pixel values must lie in [0, 1]')


def validate_image_file(path, fmt):
    """Open a PBM/PGM file and return its (width, height, mode).

    Raises ValidationError when the file is unreadable, truncated, of the
    wrong kind, or not square.
    """
    try:
        with Image.open(path) as img:
            img.load()
            width, height = img.size
            mode = img.mode
            kind = img.format
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ValidationError(f'Invalid image file {path}: {exc}')

    if kind != IMAGE_FORMATS[fmt] or mode not in IMAGE_MODES[fmt]:
        raise ValidationError(f'{path} is a {kind} image in mode {mode}, expected {fmt}')
    if width != height:
        raise ValidationError(f'{path} is {width}x{height}; images must be square')
    validate_side(width)
    return width, height, mode
