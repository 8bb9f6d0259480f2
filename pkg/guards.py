"""
guards.py — Guard expressions and link rules.

Guards are boolean trees over equality / inequality atoms whose operands
are either variables or constants. A LinkRule pairs a guard-shaped
condition with the γ updates a transition performs when it fires.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from errors import UnboundVariable


# ────────────────────────────────────────────────────────────
#  Terms
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Var:
    name: str

    def resolve(self, binding: Mapping[str, str]) -> str:
        try:
            return binding[self.name]
        except KeyError:
            raise UnboundVariable(self.name) from None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def resolve(self, binding: Mapping[str, str]) -> str:
        return self.name

    def __str__(self) -> str:
        return self.name


Term = Var | Const


def _term_vars(term: Term) -> frozenset[str]:
    return frozenset({term.name}) if isinstance(term, Var) else frozenset()


def _term_consts(term: Term) -> frozenset[str]:
    return frozenset({term.name}) if isinstance(term, Const) else frozenset()


# ────────────────────────────────────────────────────────────
#  Guard tree
# ────────────────────────────────────────────────────────────

class Guard:
    """Base class of every guard node."""

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def constants(self) -> frozenset[str]:
        raise NotImplementedError

    def render(self, parent_prec: int = 0) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class TrueGuard(Guard):
    def evaluate(self, binding: Mapping[str, str]) -> bool:
        return True

    def variables(self) -> frozenset[str]:
        return frozenset()

    def constants(self) -> frozenset[str]:
        return frozenset()

    def render(self, parent_prec: int = 0) -> str:
        return "true"


@dataclass(frozen=True)
class Eq(Guard):
    left: Term
    right: Term

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        return self.left.resolve(binding) == self.right.resolve(binding)

    def variables(self) -> frozenset[str]:
        return _term_vars(self.left) | _term_vars(self.right)

    def constants(self) -> frozenset[str]:
        return _term_consts(self.left) | _term_consts(self.right)

    def render(self, parent_prec: int = 0) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Neq(Guard):
    left: Term
    right: Term

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        return self.left.resolve(binding) != self.right.resolve(binding)

    def variables(self) -> frozenset[str]:
        return _term_vars(self.left) | _term_vars(self.right)

    def constants(self) -> frozenset[str]:
        return _term_consts(self.left) | _term_consts(self.right)

    def render(self, parent_prec: int = 0) -> str:
        return f"{self.left} != {self.right}"


# Precedence: or < and < not < atom
_PREC_OR, _PREC_AND, _PREC_NOT = 1, 2, 3


@dataclass(frozen=True)
class And(Guard):
    left: Guard
    right: Guard

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        # Both sides are evaluated so an unbound variable is never masked.
        left = self.left.evaluate(binding)
        right = self.right.evaluate(binding)
        return left and right

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def constants(self) -> frozenset[str]:
        return self.left.constants() | self.right.constants()

    def render(self, parent_prec: int = 0) -> str:
        text = f"{self.left.render(_PREC_AND)} and {self.right.render(_PREC_AND + 1)}"
        return f"({text})" if parent_prec > _PREC_AND else text


@dataclass(frozen=True)
class Or(Guard):
    left: Guard
    right: Guard

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        left = self.left.evaluate(binding)
        right = self.right.evaluate(binding)
        return left or right

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def constants(self) -> frozenset[str]:
        return self.left.constants() | self.right.constants()

    def render(self, parent_prec: int = 0) -> str:
        text = f"{self.left.render(_PREC_OR)} or {self.right.render(_PREC_OR + 1)}"
        return f"({text})" if parent_prec > _PREC_OR else text


@dataclass(frozen=True)
class Not(Guard):
    operand: Guard

    def evaluate(self, binding: Mapping[str, str]) -> bool:
        return not self.operand.evaluate(binding)

    def variables(self) -> frozenset[str]:
        return self.operand.variables()

    def constants(self) -> frozenset[str]:
        return self.operand.constants()

    def render(self, parent_prec: int = 0) -> str:
        return f"not {self.operand.render(_PREC_NOT)}"


TRUE = TrueGuard()


def conjoin(left: Guard, right: Guard) -> Guard:
    """Return left ∧ right, dropping trivially true sides."""
    if isinstance(left, TrueGuard):
        return right
    if isinstance(right, TrueGuard):
        return left
    return And(left, right)


def eval_guard(guard: Guard, binding: Mapping[str, str]) -> bool:
    """
    Evaluate a guard under a binding.

    Raises:
        UnboundVariable: if the guard mentions a variable the binding lacks.
    """
    return guard.evaluate(binding)


# ────────────────────────────────────────────────────────────
#  Link rules (ρ)
# ────────────────────────────────────────────────────────────

class LinkOp(str, Enum):
    ADD = "+"
    REMOVE = "-"


@dataclass(frozen=True)
class LinkAction:
    variable: str
    op: LinkOp

    def __str__(self) -> str:
        return f"{self.op.value}{self.variable}"


@dataclass(frozen=True)
class LinkRule:
    condition: Guard = TRUE
    actions: tuple[LinkAction, ...] = ()

    @property
    def is_noop(self) -> bool:
        return not self.actions

    def variables(self) -> frozenset[str]:
        names = {a.variable for a in self.actions}
        return self.condition.variables() | frozenset(names)

    def __str__(self) -> str:
        if self.is_noop:
            return "-"
        actions = ", ".join(str(a) for a in self.actions)
        return f"if {self.condition} then {actions}"


NO_RULE = LinkRule()
