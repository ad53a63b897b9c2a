"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Any


class ArtifactError(Exception):
    """Base class. ``operation`` names the public function that failed."""

    operation: str = ""

    def __init__(self, message: str, *, operation: str | None = None) -> None:
        super().__init__(message)
        if operation is not None:
            self.operation = operation


class GrammarError(ArtifactError, ValueError):
    """Malformed grammar (undeclared symbol, bad start rule, ...)."""


class EmptyLanguage(ArtifactError):
    """No complete derivation or computation exists."""


class UncoveredRule(ArtifactError):
    """A corpus leaves some rules with zero count."""

    def __init__(self, rules: list[str]) -> None:
        self.rules = list(rules)
        super().__init__("rules without occurrences: " + ", ".join(self.rules), operation="mle_estimate")


class NonConvergence(ArtifactError, ArithmeticError):
    """Fixed-point iteration hit its iteration cap."""

    def __init__(self, message: str, last_iterate: dict[Any, Any]) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate


class NotReduced(ArtifactError):
    """A construction received a grammar that is not reduced."""


class NullablePrefixInStart(ArtifactError):
    """eps-LC needs a start rule free of nullable symbols."""


class MalformedOutput(ArtifactError):
    """An output string does not decode to a derivation."""


class SppRequired(ArtifactError):
    """The automaton lacks the strong predictiveness property."""

    def __init__(self, message: str, witnesses: list[Any] | None = None) -> None:
        super().__init__(message)
        self.witnesses = witnesses or []


class CppRequired(ArtifactError):
    """The automaton lacks the correct-prefix property."""


class BoundExceeded(ArtifactError):
    """A bounded search stopped before it could answer."""

    def __init__(self, message: str, partial_count: int = 0) -> None:
        super().__init__(message)
        self.partial_count = partial_count


class AmbiguousProbe(ArtifactError):
    """A probe string has more than one complete computation."""


class ScanUniformityViolation(ArtifactError):
    """Some stack symbol mixes epsilon swaps and terminal scans."""

    def __init__(self, symbols: list[Any]) -> None:
        self.symbols = list(symbols)
        super().__init__("mixed swap symbols: " + ", ".join(map(str, self.symbols)))


class FormatError(ArtifactError, ValueError):
    """Input file could not be parsed."""


class NotVerifiedConsistent(UserWarning):
    """Prefix probabilities were computed without a consistency check."""
