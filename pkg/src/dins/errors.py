"""Exception hierarchy.

Every error raised by the engine derives from :class:`DinsError`.  The CLI
maps the three families below to its exit codes (config 2, data 3, model 4).
"""


class DinsError(Exception):
    """Base class for all engine errors."""


class ConfigError(DinsError):
    """Invalid configuration value or geometry."""


class DataError(DinsError):
    """Problem with an input image or dataset file."""


class ModelError(DinsError):
    """Problem with a model file or a model/config mismatch."""


# -- contour ingest ---------------------------------------------------------


class EmptyImage(DataError):
    pass


# -- spatial index ----------------------------------------------------------


class BadGeometry(ConfigError):
    pass


class NoWindow(DinsError):
    """No single window of the hierarchy contains all requested points."""


# -- detector / analyzers ---------------------------------------------------


class CaptureWithoutSignal(DinsError):
    pass


class EmptyField(DinsError):
    """Competition over an empty set of reactions."""


class TooFewPoints(DataError):
    pass


class ScaleMismatch(DinsError):
    pass


class UnknownLabel(DataError):
    pass


# -- pipeline ---------------------------------------------------------------


class BadMagic(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class TruncatedFile(DataError):
    pass


class BadHeader(ModelError):
    pass


class VersionUnsupported(ModelError):
    pass


class Corrupt(ModelError):
    pass


class ModelMismatch(ModelError):
    pass
