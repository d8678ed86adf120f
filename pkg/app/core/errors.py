"""Exception hierarchy; the CLI maps these onto exit codes."""


class PerkhError(Exception):
    exit_code = 3


class InputError(PerkhError):
    """Bad input: malformed files, invalid parameters."""


class DiagramError(InputError):
    pass


class SymmetryError(InputError):
    pass


class FieldError(InputError):
    pass


class IndexBoundError(InputError):
    pass


class ParameterError(InputError):
    pass


class InconsistencyError(PerkhError):
    """A state the theory rules out; always a bug or a corrupted input."""
    exit_code = 1


class ResourceCapError(PerkhError):
    exit_code = 2

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []
