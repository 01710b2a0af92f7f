class BirkhoffLabError(Exception):
    """Base class for all library errors."""


class DimensionError(BirkhoffLabError, ValueError):
    pass


class NotHermitianError(BirkhoffLabError, ValueError):
    pass


class InvalidStateError(BirkhoffLabError, ValueError):
    pass


class InvalidChannelError(BirkhoffLabError, ValueError):
    pass


class PreconditionError(BirkhoffLabError, ValueError):
    """An operation was called outside its domain (e.g. non-coplanar input)."""


class IntegratorError(BirkhoffLabError, RuntimeError):
    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class IntegrityError(BirkhoffLabError, RuntimeError):
    """A computed object violates an invariant it must satisfy by construction."""


class OptimizerError(BirkhoffLabError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class ConfigError(BirkhoffLabError, ValueError):
    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key
