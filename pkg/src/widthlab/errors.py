"""Exception hierarchy shared by all lab modules."""


class LabError(Exception):
    """Base class for all lab errors."""


class InputError(LabError):
    """Malformed input or violated operation precondition (CLI exit 1)."""


class CapacityError(LabError):
    """A configured size or evaluation budget was exceeded."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantFailure(LabError):
    """A verified identity or certificate failed to hold (CLI exit 2)."""
