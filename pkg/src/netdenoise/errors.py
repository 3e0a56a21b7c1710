"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid numeric or structural parameter."""


class DomainError(ValueError):
    """A point does not lie on the space it is paired with."""


class FormatError(OSError):
    """Malformed input file. Carries the offending line number when known."""

    def __init__(self, path, message, lineno=None):
        self.path = str(path)
        self.lineno = lineno
        where = f"{self.path}:{lineno}" if lineno is not None else self.path
        super().__init__(f"{where}: {message}")
