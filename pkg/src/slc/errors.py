from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    severity: str = "error"

    def render(self, path: str = "<input>") -> str:
        return f"{path}:{self.line}:{self.col}: {self.severity}: {self.message}"


class SLError(Exception):
    """Raised with one or more located diagnostics."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.render() for d in self.diagnostics))


class SLSyntaxError(SLError):
    pass


class SLTypeError(SLError):
    pass


class SLRuntimeError(Exception):
    """A genuine fault during meta-evaluation (not a match failure)."""
