import math

from django.conf import settings

DEFAULTS = {
    'ETA': 0.01,
    'ITERATIONS': 150,
    'DELTA': 1e-8,
    'COMPRESSION_LAYERS': 12,
    'RECONSTRUCTION_LAYERS': 14,
    'COMPRESSED_DIM': 4,
    'GRAD_MODE': 'finite-difference',
    'LOSS_NORM': 'mean',
    'SCHEDULE': 'alternating',
    'UPDATE': 'literal',
    'TARGET_MODE': 'leakage',
    'INIT_SCHEME': 'random',
    'INIT_THETA': math.pi / 4,
    'INIT_RECONSTRUCTION': 'random',
    'COMPRESSION_ORDER': 'ascending',
    'RECONSTRUCTION_ORDER': 'descending',
    'PIXEL_TOLERANCE': 0.01,
    'POSTPROCESS': 'clamp',
    'SEED': 7,
    'CONVERGENCE_TOL': None,
    'RECORD_ELAPSED': True,
    'LOG_EVERY': 10,
    'BASELINE_SPARSITY': 4,
    'BASELINE_ITERATIONS': 150,
    'CHECKPOINT_VERSION': 1,
    'DATASET_SIZE': 25,
    'DATASET_SIDE': 4,
    'DATASET_SEED': 42,
    'DATASET_KIND': 'binary',
}


def qnet_setting(name):
    """Read one key of ``settings.QNET``, falling back to the built-in default."""
    return getattr(settings, 'QNET', {}).get(name, DEFAULTS[name])


# Overrides for d = N. Nothing leaks, so only the reconstruction mesh learns, and
# the default 14 layers stall near 60% accuracy. Sixty layers swept gate by gate
# with the exact minimiser reach 100%.
FULL_DIMENSION = {
    'RECONSTRUCTION_LAYERS': 60,
    'UPDATE': 'exact',
}
