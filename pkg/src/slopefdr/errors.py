"""Exception hierarchy shared by the library and the command line."""


class SlopeError(Exception):
    """Base class for all errors raised by slopefdr."""


class DomainError(SlopeError, ValueError):
    """A parameter lies outside the domain of an operation."""


class ShapeError(SlopeError, ValueError):
    """Array dimensions are inconsistent."""


class DataError(SlopeError, ValueError):
    """Input data is non-finite or lacks a required field."""


class CertificateError(SlopeError, RuntimeError):
    """A solution lacks the optimality certificate an operation requires."""


class ConvergenceError(CertificateError):
    """Too many solves in a simulation cell failed to converge."""
