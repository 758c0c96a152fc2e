"""Exception hierarchy shared by the library and the CLI.

Every error carries a JSON-friendly ``payload`` (``code`` + ``message`` plus
context fields) and the process exit code the CLI should use for it.
"""

from typing import Optional


class ShaError(Exception):
    code = "SHA_ERROR"
    exit_code = 1

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.payload = {"code": self.code, "message": message, **context}

    @property
    def message(self) -> str:
        return self.payload["message"]


class ZeroInput(ShaError):
    code = "ZERO_INPUT"


class IncompatibleModulus(ShaError):
    code = "INCOMPATIBLE_MODULUS"


class ResidueNotOne(ShaError):
    code = "RESIDUE_NOT_ONE"


class WildCharacteristic(ShaError):
    code = "WILD_CHARACTERISTIC"


class PrecisionExhausted(ShaError):
    code = "PRECISION_EXHAUSTED"
    exit_code = 3


class NormNotOne(ShaError):
    code = "NORM_NOT_ONE"


class TowerMismatch(ShaError):
    code = "TOWER_MISMATCH"


class DependentGenerators(ShaError):
    code = "DEPENDENT_GENERATORS"


class UnsupportedShape(ShaError):
    code = "UNSUPPORTED_SHAPE"


class PoleAtPoint(ShaError):
    code = "POLE_AT_POINT"


class UnknownComponent(ShaError):
    code = "UNKNOWN_COMPONENT"


class EmptyModel(ShaError):
    code = "EMPTY_MODEL"


class NotATree(ShaError):
    code = "NOT_A_TREE"


class MissingEdgeValue(ShaError):
    code = "MISSING_EDGE_VALUE"


class DimensionMismatch(ShaError):
    code = "DIMENSION_MISMATCH"


class EvidenceFailed(ShaError):
    code = "EVIDENCE_FAILED"


class VerificationMismatch(ShaError):
    code = "VERIFICATION_MISMATCH"
    exit_code = 2


class ParseError(ShaError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, **context):
        super().__init__(message, line=line, column=column, **context)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.message} (line {self.line}, column {self.column})"
