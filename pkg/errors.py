"""
errors.py — Exception hierarchy for vpn-verify.

Everything raised on purpose by the library derives from VpnError so the
CLI can catch one type and map it to an exit code. Diagnostics that are
plain data (net validation, parse diagnostics) are returned, not raised.
"""

from dataclasses import dataclass
from typing import Optional


class VpnError(Exception):
    """Base class for all vpn-verify errors."""


# ────────────────────────────────────────────────────────────
#  Kernel
# ────────────────────────────────────────────────────────────

class UnboundVariable(VpnError):
    def __init__(self, variable: str):
        super().__init__(f"variable {variable!r} is not bound")
        self.variable = variable


class UnknownTransition(VpnError):
    def __init__(self, transition: str):
        super().__init__(f"unknown transition {transition!r}")
        self.transition = transition


class UnknownVariable(VpnError):
    def __init__(self, variable: str):
        super().__init__(f"unknown variable {variable!r}")
        self.variable = variable


class UnknownConfiguration(VpnError):
    pass


class NotEnabled(VpnError):
    def __init__(self, transition: str, binding):
        super().__init__(f"{transition} is not enabled under [{binding}]")
        self.transition = transition
        self.binding = binding


class ConflictingBinding(VpnError, ValueError):
    """A binding maps one variable to two different constants."""


class InvalidTrace(VpnError):
    pass


class InvalidNet(VpnError):
    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"net is invalid ({len(self.violations)} violation(s)): {summary}")


# ────────────────────────────────────────────────────────────
#  Composition
# ────────────────────────────────────────────────────────────

class KindConflict(VpnError):
    pass


class ClassConflict(VpnError):
    pass


class ClassificationError(VpnError):
    def __init__(self, component: str, subject: str, message: str):
        super().__init__(f"{component}: {subject}: {message}")
        self.component = component
        self.subject = subject


class SharedPlace(VpnError):
    pass


class SharedTransition(VpnError):
    pass


class MissingTransition(VpnError):
    pass


# ────────────────────────────────────────────────────────────
#  Analysis
# ────────────────────────────────────────────────────────────

class NoInterfaceDeclared(VpnError):
    pass


class MissingFinalPlaces(VpnError):
    pass


class MissingInterfaceSet(VpnError):
    pass


# ────────────────────────────────────────────────────────────
#  Model files
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Diagnostic:
    """One problem found while reading a model file."""
    line: int
    column: int
    message: str
    source: Optional[str] = None

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        return f"{where}{self.line}:{self.column}: {self.message}"


class ModelError(VpnError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
