from __future__ import annotations


class CensoredRegretError(Exception):
    """Base class; `exit_code` is what the CLI returns when this escapes a subcommand."""

    exit_code = 1


class InvalidParameterError(CensoredRegretError, ValueError):
    exit_code = 2


class InvalidInputError(CensoredRegretError, ValueError):
    exit_code = 2


class LiteralParseError(InvalidInputError):
    pass


class UnsupportedRegimeError(InvalidParameterError):
    pass


class CapacityError(CensoredRegretError):
    exit_code = 3


class SolverError(CensoredRegretError):
    pass
