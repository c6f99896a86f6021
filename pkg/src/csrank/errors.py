"""Error types shared across the library.

Invalid arguments raise the builtin ValueError; the classes here cover the
two failure modes that deserve distinct CLI exit codes.
"""


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to produce a usable result."""


class ResourceLimit(RuntimeError):
    """The requested problem size exceeds the supported desk-scale limits."""
