"""Exception hierarchy shared across the toolkit."""


class GumdropError(Exception):
    """Base class for all toolkit errors."""


class ParseError(GumdropError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


class ConfigError(GumdropError):
    """Bad configuration, e.g. a schema naming an unknown feature."""


class SchemaMismatchError(GumdropError):
    """Records do not match the schema a model was trained against."""


class ModelVersionError(GumdropError):
    """A serialized model was written by an incompatible format version."""


class AlignmentError(GumdropError):
    """Gold and predicted corpora do not line up token by token."""


class CoverageError(GumdropError):
    """An external prediction file does not cover the corpus exactly."""


class FoldError(GumdropError):
    def __init__(self, fold, cause):
        self.fold = fold
        super().__init__("base module training failed on fold %d: %s" % (fold, cause))


class MissingSyntaxError(GumdropError):
    """Input lacks the dependency trees (or sentence splits) a task needs."""
