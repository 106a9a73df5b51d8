"""Exception hierarchy shared across the package."""


class SignSearchError(Exception):
    """Base class for every error raised by signsearch."""


class ParseError(SignSearchError):
    pass


class EmptyFrameError(SignSearchError):
    """A frame file listed no people."""


class EmptySequenceError(SignSearchError):
    pass


class TooManyGapsError(SignSearchError):
    pass


class DegenerateSkeletonError(SignSearchError):
    """Shoulders coincide, so no scale can be derived."""


class ShapeError(SignSearchError, ValueError):
    pass


class JointSetMismatchError(SignSearchError):
    pass


class EigenConvergenceError(SignSearchError):
    pass


class DegenerateDataError(SignSearchError):
    pass


class ParamError(SignSearchError, ValueError):
    pass


class LabelError(SignSearchError, KeyError):
    pass


class EmptyLexiconError(SignSearchError):
    pass


class VersionError(SignSearchError):
    pass


class FormatError(SignSearchError):
    pass


class ConfigError(SignSearchError):
    pass
