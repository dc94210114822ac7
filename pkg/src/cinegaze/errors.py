"""Exception types shared across the toolkit."""


class CinegazeError(Exception):
    """Base class for all toolkit errors."""


class InputError(CinegazeError):
    """An argument or piece of input data violates a precondition."""


class FormatError(CinegazeError):
    """A document or stream could not be parsed against its expected schema."""


class ValidationError(FormatError):
    """A document parsed structurally but violates a semantic invariant."""


class UndefinedValueError(CinegazeError):
    """The requested quantity is mathematically undefined for this input."""
