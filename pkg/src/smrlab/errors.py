"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter violates a stated admissibility constraint.

    The message names the constraint that failed so callers (and the CLI)
    can report it verbatim.
    """


class LatticeMismatchError(ValueError):
    """Two fields or objects built on different lattices were combined."""


class BlowUpError(RuntimeError):
    """A trajectory produced a non-finite value.

    Carries enough context (seed, path index, time) to reproduce the path.
    """

    def __init__(self, message, *, path_seed=None, path_index=None, time=None):
        super().__init__(message)
        self.path_seed = path_seed
        self.path_index = path_index
        self.time = time
