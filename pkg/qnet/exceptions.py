"""Domain errors raised by the simulator.

Each error carries a stable ``exit_code`` so management commands can
terminate with a named nonzero status.
"""


class QNetError(Exception):
    exit_code = 1
    default_message = 'Quantum network simulator error'

    def __init__(self, message=None):
        super().__init__(message or self.default_message)


class ZeroVector(QNetError):
    exit_code = 10
    default_message = 'Cannot encode an all-zero sample'


class DimensionMismatch(QNetError):
    exit_code = 11
    default_message = 'Dimensions do not match'


class ZeroProjection(QNetError):
    exit_code = 12
    default_message = 'Projected state is zero and cannot be renormalized'


class TargetShapeMismatch(QNetError):
    exit_code = 13
    default_message = 'Compression targets do not match the dataset shape'


class InvalidTarget(QNetError):
    exit_code = 14
    default_message = 'Compression targets must be unit vectors inside the retained subspace'


class NonFiniteLoss(QNetError):
    exit_code = 20
    default_message = 'Loss became non-finite; lower the learning rate'


class Unsatisfiable(QNetError):
    exit_code = 21
    default_message = 'Requested dataset cannot be generated'


class MalformedFile(QNetError):
    exit_code = 30
    default_message = 'File is malformed'


class UnsupportedFormat(QNetError):
    exit_code = 31
    default_message = 'Unsupported file format'


class MissingArtifact(QNetError):
    exit_code = 32
    default_message = 'Required file or directory does not exist'
