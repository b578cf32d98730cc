from __future__ import annotations


class LinespecError(Exception):
    """Base class for errors raised by the linespec library."""


class DomainError(LinespecError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UnsupportedOrderError(DomainError):
    """The model order is larger than an operation supports."""


class SingularFisherError(LinespecError, ArithmeticError):
    """The Fisher information matrix cannot be inverted."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair
