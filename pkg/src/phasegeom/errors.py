"""Exception types. Each carries the CLI exit code it maps to."""


class PhaseGeomError(Exception):
    exit_code = 1


class DimensionError(PhaseGeomError, ValueError):
    exit_code = 1


class InvalidInputError(PhaseGeomError, ValueError):
    """Malformed matrix, body or state (asymmetric, not positive definite, ...)."""

    exit_code = 1


class NotSymplecticError(PhaseGeomError, ValueError):
    exit_code = 2


class UnsupportedDualError(PhaseGeomError, NotImplementedError):
    exit_code = 3


class AliasingError(PhaseGeomError, RuntimeError):
    exit_code = 4


class InvariantError(PhaseGeomError, AssertionError):
    exit_code = 5
