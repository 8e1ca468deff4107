"""Validation errors with stable machine-readable codes."""


class MeasureLabError(ValueError):
    """Raised on any precondition or validation failure.

    The ``code`` attribute is a stable identifier (e.g. ``"ODD_N"``,
    ``"NOT_IN_SPAN"``) that callers and tests can dispatch on without
    parsing the message.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class DependentSetError(MeasureLabError):
    """A vector set failed the rational-independence check.

    ``witness`` holds an integer relation (tuple of ints, not all zero)
    when the bounded search found one, else None.
    """

    def __init__(self, message: str, witness=None):
        super().__init__("DEPENDENT_SET", message)
        self.witness = witness
