# zstability/exceptions.py
from .constants import EXIT_NUMERIC, EXIT_PARSE, EXIT_PRECONDITION


class ZStabilityError(Exception):
    """Erro base do aplicativo; cada subclasse carrega o código de saída da CLI."""
    exit_code = EXIT_PRECONDITION


class DimensionMismatch(ZStabilityError, ValueError):
    pass


class PreconditionError(ZStabilityError):
    pass


class InvalidGradedPoint(PreconditionError):
    pass


class PhaseDomainError(PreconditionError):
    pass


class WeylClosureError(ZStabilityError):
    pass


class NumericFailure(ZStabilityError):
    exit_code = EXIT_NUMERIC


class ScenarioParseError(ZStabilityError):
    exit_code = EXIT_PARSE

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column
