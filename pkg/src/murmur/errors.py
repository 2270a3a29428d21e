"""Exception types shared across the package."""


class MurmurError(Exception):
    """Base class for all package errors."""


class DomainError(MurmurError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(MurmurError, RuntimeError):
    """A precomputed table or sieve is too small for the request.

    ``required`` and ``available`` carry the sizes so callers (the CLI in
    particular) can report what needs to be rebuilt.
    """

    def __init__(self, message, required=None, available=None):
        super().__init__(message)
        self.required = required
        self.available = available


class StateError(MurmurError, RuntimeError):
    """An object was used before it was initialised."""


class FixtureParseError(MurmurError, ValueError):
    """A fixture file is malformed. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
