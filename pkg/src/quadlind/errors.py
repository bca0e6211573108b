"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`QuadlindError`. The ``exit_code`` attribute is what the command
line front end returns when the error escapes a subcommand.
"""


class QuadlindError(Exception):
    exit_code = 1


class ConfigurationError(QuadlindError, ValueError):
    """Malformed input: wrong shapes, bad parameters, schema violations."""

    exit_code = 2


class PhysicsError(QuadlindError):
    """The requested physical setup is not well defined."""

    exit_code = 3


class InstabilityError(PhysicsError):
    """Bosonic Hamiltonian that is not positive definite."""


class DivergenceError(PhysicsError):
    """Bose-Einstein occupation evaluated at or below the chemical potential."""


class CapabilityError(QuadlindError):
    """The closed-form path does not cover this model (use the oracle)."""

    exit_code = 4


class UnsupportedError(CapabilityError):
    """Model class outside the library's scope (e.g. bosonic soft modes)."""


class NumericalFailure(QuadlindError):
    exit_code = 5
