"""Exception hierarchy for sbt_ilc.

Every error raised on purpose by the library derives from :class:`IlcError`.
Subclasses that describe bad input also derive from :class:`ValueError`, so
callers that only know about builtins keep working.
"""


class IlcError(Exception):
    """Base class for all sbt_ilc errors."""


class DimensionError(IlcError, ValueError):
    """Vector or matrix dimensions do not agree."""


class UnstablePlantError(IlcError, ValueError):
    """A plant that must be stable has a pole on or outside the unit circle."""

    def __init__(self, root, message=None):
        self.root = complex(root)
        self.modulus = abs(self.root)
        if message is None:
            message = "unstable pole {:.6g}{:+.6g}j (|p| = {:.6g})".format(
                self.root.real, self.root.imag, self.modulus)
        super().__init__(message)


class FactorizationError(IlcError):
    """The plant numerator could not be split into invertible parts."""


class StructureError(IlcError):
    """A closed-form band does not match the dense matrix it describes."""


class AsymmetryError(IlcError, ValueError):
    """A symmetric eigensolver was given a non-symmetric matrix."""


class ConvergenceError(IlcError):
    """An iterative eigensolver did not converge."""


class ConfigError(IlcError, ValueError):
    """A config file failed to parse or validate.

    ``lineno`` is 1-based and may be None when the problem is not tied to
    a single line (for example a required key that is missing).
    """

    def __init__(self, message, lineno=None, path=None):
        self.message = message
        self.lineno = lineno
        self.path = path
        super().__init__(message)

    def __str__(self):
        where = self.path or "<config>"
        if self.lineno is not None:
            where = "{}:{}".format(where, self.lineno)
        return "{}: {}".format(where, self.message)
