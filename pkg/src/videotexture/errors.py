"""Domain exceptions. Each class carries a distinct process exit code so the
CLI and the HTTP service can report failures uniformly."""


class VideoTextureError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(VideoTextureError):
    exit_code = 2


# --- input / output -------------------------------------------------------

class MissingInput(VideoTextureError):
    exit_code = 10


class DecodeFailure(VideoTextureError):
    exit_code = 11


class DimensionMismatch(VideoTextureError):
    exit_code = 12


class TooFewFrames(VideoTextureError):
    exit_code = 13


class EncodeFailure(VideoTextureError):
    exit_code = 14


class IoFailure(VideoTextureError):
    exit_code = 15


class NonFiniteEntry(VideoTextureError):
    exit_code = 16


# --- preprocessing --------------------------------------------------------

class DegenerateHistogram(VideoTextureError):
    exit_code = 20


# --- analysis -------------------------------------------------------------

class MissingClustering(VideoTextureError):
    exit_code = 30


class MatrixTooSmall(VideoTextureError):
    exit_code = 31


class AllZeroDistances(VideoTextureError):
    exit_code = 32


class NonPositiveSigmaMultiple(VideoTextureError):
    exit_code = 33


# --- wavelet / clustering -------------------------------------------------

class FrameTooSmall(VideoTextureError):
    exit_code = 40


class InvalidK(VideoTextureError):
    exit_code = 41


class EmptyInput(VideoTextureError):
    exit_code = 42


# --- synthesis ------------------------------------------------------------

class IndexOutOfRange(VideoTextureError):
    exit_code = 50


class NoFeasibleLoop(VideoTextureError):
    exit_code = 51


class InsufficientClusters(VideoTextureError):
    exit_code = 52


class EmptyCluster(VideoTextureError):
    exit_code = 53


# --- transitions ----------------------------------------------------------

class InvalidN(VideoTextureError):
    exit_code = 60


def _collect():
    classes = {}
    for obj in list(globals().values()):
        if isinstance(obj, type) and issubclass(obj, VideoTextureError):
            classes[obj.__name__] = obj
    return classes


#: name -> exception class, used to map service error payloads back to exit codes
ERROR_CLASSES = _collect()


def exit_code_for(name: str) -> int:
    """Exit code for an error class name; 1 for anything unknown."""
    cls = ERROR_CLASSES.get(name)
    return cls.exit_code if cls is not None else 1
