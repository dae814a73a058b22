"""Exception types shared across the package.

ConfigError signals a bad user-supplied configuration; everything under
NumericalHealthError signals that a computation left its validated regime
(truncation tails, grid boundary leakage, lost norm in a basis projection,
parity violations).  The CLI maps ConfigError to exit code 1,
NumericalHealthError to exit code 2 and I/O failures to exit code 3.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalHealthError(RuntimeError):
    """Base class for violated numerical-health invariants."""


class TruncationError(NumericalHealthError):
    """Fock-space truncation cannot represent the requested state."""


class BoundaryLeakError(NumericalHealthError):
    """Probability reached the edge of the spatial grid."""


class TailLeakError(NumericalHealthError):
    """Probability reached the top of the Fock ladder during propagation."""


class ProjectionError(NumericalHealthError):
    """A basis projection lost more norm than the configured bound."""


class StepSizeError(NumericalHealthError):
    """Halving dt moved the result more than the configured tolerance."""


class ParityError(NumericalHealthError):
    """State does not have the photon-number parity the operation requires."""


class TruncationWarning(UserWarning):
    """An operation reaches past the Fock truncation; results lose tail mass."""
