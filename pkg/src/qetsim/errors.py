"""Exception taxonomy shared by all qetsim modules.

Exit-code mapping used by the CLI: ValidationError -> 2, NumericError -> 3.
"""


class QetError(Exception):
    """Base class for all qetsim errors."""


class ValidationError(QetError):
    """Rejected input: bad dimensions, non-finite values, parameter ranges."""


class NumericError(QetError):
    """Numeric failure: non-convergence, lost hermiticity, exhausted budgets.

    May carry the best value found so far in ``best``.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ProtocolError(ValidationError):
    """Wire-protocol failure: handshake mismatch or malformed frame."""
