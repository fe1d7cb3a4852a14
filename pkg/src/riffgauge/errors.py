"""Exception types shared across the package.

Structural problems in token streams are reported as Diagnostic values, not
exceptions (see riffgauge.tokens). Exceptions are reserved for operations
that cannot return a partial result.
"""

from __future__ import annotations


class RiffgaugeError(Exception):
    """Base class; carries a stable error code like 'E020'."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class BuildError(RiffgaugeError):
    """Score construction or export failed (E020, E021, E030, E040)."""


class InvalidStreamError(RiffgaugeError):
    """A token stream with error diagnostics was passed where a clean one is required."""

    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        detail = f"first: {first}" if first else "no detail"
        super().__init__("E000", f"stream has {len(self.diagnostics)} error diagnostic(s); {detail}")


class CorpusError(RiffgaugeError):
    """Corpus aggregation or comparison failed (E050-E054)."""


class GeneratorError(RiffgaugeError):
    """N-gram training or generation failed (E060-E062)."""
