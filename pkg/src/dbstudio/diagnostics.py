"""Diagnostic records shared by the parser, registry, topology and engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple


class Severity(Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


# Stable diagnostic codes; these are part of the CLI contract.
SYNTAX_ERROR = "SyntaxError"
DUPLICATE_RECORD_NAME = "DuplicateRecordName"
DUPLICATE_FIELD = "DuplicateField"
UNCLOSED_RECORD = "UnclosedRecord"
UNKNOWN_RECORD_TYPE = "UnknownRecordType"
UNKNOWN_FIELD = "UnknownField"
BROKEN_LINK = "BrokenLink"
MALFORMED_DIRECTIVE = "MalformedDirective"
UNKNOWN_DIRECTIVE = "UnknownDirective"
DANGLING_CHAIN = "DanglingChain"
CYCLIC_CHAIN = "CyclicChain"
UNRESOLVED_MENU = "UnresolvedMenu"
INCLUDE_CYCLE = "IncludeCycle"
UNKNOWN_MODIFIER = "UnknownModifier"
SKIPPED_CONSTRUCT = "SkippedConstruct"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    # (line, column), 1-based, when the problem maps to a source position
    location: Optional[Tuple[int, int]] = None
    # record or record.field path, when the problem maps to the model
    path: Optional[str] = None

    def __post_init__(self):
        if self.severity is Severity.ERROR and self.location is None and self.path is None:
            raise ValueError("Error diagnostics must carry a location or path")

    def render(self, source: str = "") -> str:
        where = source
        if self.location is not None:
            line, col = self.location
            where = f"{source}:{line}:{col}" if col else f"{source}:{line}"
        elif self.path:
            where = f"{source}:{self.path}" if source else self.path
        return f"{self.severity.value} {self.code} {where} {self.message}".rstrip()


def error(code: str, message: str, location=None, path=None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, location, path)


def warning(code: str, message: str, location=None, path=None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, location, path)


def has_errors(diags) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)
