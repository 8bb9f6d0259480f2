"""
model_format.py — The `.vpn` text format: parser, serializer and the
ModelDocument that ties a net to its component grouping and finals.

Files are line-oriented with one header line per section:

    universe      const a b c / var x y
    places        NAME ARITY CLASS
    transitions   NAME CLASS, optionally followed by
                    guard <expr>
                    rho if <expr> then +v, -w
    arcs          SRC -> DST : <x, y> <z>   (or {} for the empty expression)
    gamma         VAR : c1 c2
    marking       PLACE : <a, b> <c, d>
    interfaces    c1 c2 ...
    components    component NAME places ... transitions ...
                  isn NAME places ... transitions ... references ...
    finals        COMPONENT : PLACE ...   /   mode independent

`#` starts a comment. Place names are constants implicitly; every other
constant must be declared in `universe`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from composition import (
    ComponentNet,
    InteractionStructureNet,
    MultiComponentNet,
    compose_mcn,
    restrict,
)
from errors import Diagnostic, ModelError
from guards import NO_RULE, TRUE, And, Const, Eq, Guard, LinkAction, LinkOp, LinkRule, Neq, Not, Or, Var
from net import EPSILON, Arc, Multiset, Place, PlaceClass, TransClass, Transition, VpnNet

logger = logging.getLogger(__name__)

FINAL_MODES = ("simultaneous", "independent")

_GRAMMAR = r"""
start: _NL? section*
guard_only: guard

?section: universe | places | transitions | arcs | gamma | marking
        | interfaces | components | finals

universe: "universe" _NL universe_line*
?universe_line: "const" NAME+ _NL          -> const_decl
              | "var" NAME+ _NL            -> var_decl

places: "places" _NL place_line*
place_line: NAME INT NAME _NL

transitions: "transitions" _NL trans_item*
trans_item: NAME NAME _NL trans_extra*
?trans_extra: "guard" guard _NL                              -> guard_line
            | "rho" "if" guard "then" action ("," action)* _NL -> rho_line
action: SIGN NAME

arcs: "arcs" _NL arc_line*
arc_line: NAME "->" NAME ":" expr _NL

?expr: token_tuple+                        -> tuple_expr
     | "{" "}"                             -> empty_expr
token_tuple: "<" names? ">"
names: NAME ("," NAME)*

gamma: "gamma" _NL gamma_line*
gamma_line: NAME ":" NAME* _NL

marking: "marking" _NL marking_line*
marking_line: NAME ":" expr _NL

interfaces: "interfaces" _NL iface_line*
iface_line: NAME+ _NL

components: "components" _NL comp_line*
?comp_line: "component" NAME "places" NAME* "transitions" NAME* _NL   -> component_line
          | "isn" NAME "places" NAME* "transitions" NAME* refs? _NL   -> isn_line
refs: "references" NAME*

finals: "finals" _NL final_line*
?final_line: NAME ":" NAME+ _NL            -> finals_line
           | "mode" NAME _NL               -> mode_line

?guard: or_g
?or_g: and_g
     | or_g "or" and_g                     -> g_or
?and_g: not_g
      | and_g "and" not_g                  -> g_and
?not_g: "not" not_g                        -> g_not
      | atom_g
?atom_g: NAME "=" NAME                     -> g_eq
       | NAME "!=" NAME                    -> g_neq
       | "true"                            -> g_true
       | "(" guard ")"

SIGN: /[+-]/
NAME: /[A-Za-z_][A-Za-z0-9_]*/
COMMENT: /#[^\n]*/
_NL: /(\r?\n[\t ]*(#[^\n]*)?)+/

%import common.INT
%import common.WS_INLINE
%ignore WS_INLINE
%ignore COMMENT
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", start=["start", "guard_only"], propagate_positions=True)


# ────────────────────────────────────────────────────────────
#  Document
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ComponentDecl:
    name: str
    kind: str  # "component" or "isn"
    places: tuple[str, ...] = ()
    transitions: tuple[str, ...] = ()
    references: tuple[str, ...] = ()


@dataclass
class ModelDocument:
    net: VpnNet
    components: list[ComponentDecl] = field(default_factory=list)
    finals: dict[str, tuple[str, ...]] = field(default_factory=dict)
    final_mode: str = "simultaneous"
    source: Optional[str] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelDocument):
            return NotImplemented
        return (self.net == other.net and self.components == other.components
                and self.finals == other.finals and self.final_mode == other.final_mode)

    def to_mcn(self) -> MultiComponentNet:
        """
        Group the net into its declared components and ISNs. Without a
        components section the whole net is one component.
        """
        if not self.components:
            finals = frozenset(p for ps in self.finals.values() for p in ps)
            mcn = MultiComponentNet.single(self.net, finals=finals)
            mcn.final_mode = self.final_mode
            return mcn
        cns, isns = [], []
        claimed: set[str] = set()
        for decl in self.components:
            sub = restrict(self.net, decl.places, decl.transitions)
            # A shared place's initial tokens belong to its first owner only.
            sub = replace(sub, m0={p: ms for p, ms in sub.m0.items() if p not in claimed})
            claimed |= set(sub.places)
            if decl.kind == "isn":
                isns.append(InteractionStructureNet(
                    decl.name, sub, frozenset(decl.references), frozenset(decl.places),
                ))
            else:
                cns.append(ComponentNet(decl.name, sub, frozenset(self.finals.get(decl.name, ()))))
        return compose_mcn(cns, isns, self.final_mode)


def document_from_net(net: VpnNet, finals: Optional[dict[str, Iterable[str]]] = None,
                      final_mode: str = "simultaneous") -> ModelDocument:
    return ModelDocument(
        net=net,
        finals={k: tuple(sorted(v)) for k, v in (finals or {}).items()},
        final_mode=final_mode,
    )


def document_from_mcn(mcn: MultiComponentNet) -> ModelDocument:
    decls = [
        ComponentDecl(cn.name, "component", tuple(sorted(cn.net.places)), tuple(sorted(cn.net.transitions)))
        for cn in mcn.components
    ]
    decls += [
        ComponentDecl(
            isn.name, "isn",
            tuple(sorted(isn.own_places)),
            tuple(sorted(isn.net.transitions)),
            tuple(sorted(isn.references)),
        )
        for isn in mcn.interactions
    ]
    return ModelDocument(
        net=mcn.net,
        components=decls,
        finals={k: tuple(sorted(v)) for k, v in mcn.finals.items()},
        final_mode=mcn.final_mode,
    )


# ────────────────────────────────────────────────────────────
#  Tree → raw declarations
# ────────────────────────────────────────────────────────────

class _Declarations(Transformer):
    """Flattens the parse tree into (section, payload) tuples, keeping tokens for positions."""

    def start(self, sections):
        return list(sections)

    def guard_only(self, items):
        return items[0]

    # universe
    def const_decl(self, names):
        return ("const", list(names))

    def var_decl(self, names):
        return ("var", list(names))

    def universe(self, lines):
        return ("universe", list(lines))

    # places
    def place_line(self, items):
        return tuple(items)

    def places(self, lines):
        return ("places", list(lines))

    # transitions
    def action(self, items):
        return (items[0], items[1])

    def guard_line(self, items):
        return ("guard", items[0])

    def rho_line(self, items):
        return ("rho", items[0], list(items[1:]))

    def trans_item(self, items):
        return (items[0], items[1], list(items[2:]))

    def transitions(self, items):
        return ("transitions", list(items))

    # expressions
    def names(self, items):
        return list(items)

    def token_tuple(self, items):
        return tuple(items[0]) if items else ()

    def tuple_expr(self, items):
        return list(items)

    def empty_expr(self, _):
        return []

    def arc_line(self, items):
        return tuple(items)

    def arcs(self, lines):
        return ("arcs", list(lines))

    def gamma_line(self, items):
        return (items[0], list(items[1:]))

    def gamma(self, lines):
        return ("gamma", list(lines))

    def marking_line(self, items):
        return (items[0], items[1])

    def marking(self, lines):
        return ("marking", list(lines))

    def iface_line(self, names):
        return list(names)

    def interfaces(self, lines):
        return ("interfaces", [n for line in lines for n in line])

    # components
    def refs(self, names):
        return ("refs", list(names))

    def _grouping(self, kind, items):
        name, rest = items[0], list(items[1:])
        refs: list = []
        if rest and isinstance(rest[-1], tuple) and rest[-1][0] == "refs":
            refs = rest.pop()[1]
        return (kind, name, rest, refs)

    def component_line(self, items):
        return self._grouping("component", items)

    def isn_line(self, items):
        return self._grouping("isn", items)

    def components(self, lines):
        return ("components", list(lines))

    # finals
    def finals_line(self, items):
        return ("final", items[0], list(items[1:]))

    def mode_line(self, items):
        return ("mode", items[0])

    def finals(self, lines):
        return ("finals", list(lines))

    # guards (raw; names are resolved once the universe is known)
    def g_or(self, items):
        return ("or", items[0], items[1])

    def g_and(self, items):
        return ("and", items[0], items[1])

    def g_not(self, items):
        return ("not", items[0])

    def g_eq(self, items):
        return ("eq", items[0], items[1])

    def g_neq(self, items):
        return ("neq", items[0], items[1])

    def g_true(self, _):
        return ("true",)


# ────────────────────────────────────────────────────────────
#  Semantic pass
# ────────────────────────────────────────────────────────────

class _Builder:
    def __init__(self, source: Optional[str]):
        self.source = source
        self.diagnostics: list[Diagnostic] = []
        self.constants: set[str] = set()
        self.variables: set[str] = set()
        self.places: dict[str, Place] = {}
        self.transitions: dict[str, Transition] = {}
        self.arcs: list[Arc] = []
        self.gamma: dict[str, set[str]] = {}
        self.marking: dict[str, Multiset] = {}
        self.interfaces: set[str] = set()
        self.components: list[ComponentDecl] = []
        self.finals: dict[str, tuple[str, ...]] = {}
        self.final_mode = "simultaneous"
        self._component_tokens: list[tuple[Token, str]] = []
        self._final_tokens: list[Token] = []
        self.strict = True

    def error(self, tok: Any, message: str) -> None:
        line = getattr(tok, "line", None) or 0
        column = getattr(tok, "column", None) or 0
        self.diagnostics.append(Diagnostic(line, column, message, self.source))

    def is_constant(self, name: str) -> bool:
        return name in self.constants or name in self.places or name == EPSILON

    # ── sections ──

    def build(self, sections: list) -> None:
        by_kind: dict[str, list] = {}
        for kind, payload in sections:
            by_kind.setdefault(kind, []).extend(payload)
        for line in by_kind.get("universe", []):
            self._universe(line)
        for line in by_kind.get("places", []):
            self._place(line)
        for item in by_kind.get("transitions", []):
            self._transition(item)
        for line in by_kind.get("arcs", []):
            self._arc(line)
        for line in by_kind.get("gamma", []):
            self._gamma(line)
        for line in by_kind.get("marking", []):
            self._marking(line)
        for tok in by_kind.get("interfaces", []):
            if not self.is_constant(tok):
                self.error(tok, f"unresolved reference: interface {str(tok)!r} is not a constant")
            self.interfaces.add(str(tok))
        for line in by_kind.get("components", []):
            self._component(line)
        for line in by_kind.get("finals", []):
            self._final(line)
        self._check_grouping()

    def _universe(self, line) -> None:
        kind, names = line
        for tok in names:
            name = str(tok)
            if kind == "const":
                if name in self.variables:
                    self.error(tok, f"{str(name)!r} is already declared as a variable")
                self.constants.add(name)
            else:
                if name in self.constants:
                    self.error(tok, f"{str(name)!r} is already declared as a constant")
                self.variables.add(name)

    def _place(self, line) -> None:
        name, arity, klass = line
        if name in self.variables:
            self.error(name, f"place {str(name)!r} is declared as a variable")
        try:
            pclass = PlaceClass(str(klass))
        except ValueError:
            self.error(klass, f"unknown place class {str(klass)!r}")
            pclass = PlaceClass.PROCESS
        if name in self.places:
            self.error(name, f"place {str(name)!r} declared twice")
        self.places[str(name)] = Place(str(name), int(arity), pclass)

    def _term(self, tok):
        name = str(tok)
        if name in self.variables:
            return Var(name)
        if self.strict and not self.is_constant(name):
            self.error(tok, f"unresolved reference: {str(name)!r} is neither a variable nor a constant")
        return Const(name)

    def guard(self, raw) -> Guard:
        op = raw[0]
        if op == "true":
            return TRUE
        if op == "eq":
            return Eq(self._term(raw[1]), self._term(raw[2]))
        if op == "neq":
            return Neq(self._term(raw[1]), self._term(raw[2]))
        if op == "not":
            return Not(self.guard(raw[1]))
        left, right = self.guard(raw[1]), self.guard(raw[2])
        return And(left, right) if op == "and" else Or(left, right)

    def _transition(self, item) -> None:
        name, klass, extras = item
        if name in self.places:
            self.error(name, f"{str(name)!r} is both a place and a transition")
        try:
            tclass = TransClass(str(klass))
        except ValueError:
            self.error(klass, f"unknown transition class {str(klass)!r}")
            tclass = TransClass.PROCESS
        guard, rule = TRUE, NO_RULE
        for extra in extras:
            if extra[0] == "guard":
                guard = self.guard(extra[1])
            else:
                actions = []
                for sign, var in extra[2]:
                    if var not in self.variables:
                        self.error(var, f"unresolved reference: rho action on non-variable {str(var)!r}")
                    actions.append(LinkAction(str(var), LinkOp(str(sign))))
                rule = LinkRule(self.guard(extra[1]), tuple(actions))
        if name in self.transitions:
            self.error(name, f"transition {str(name)!r} declared twice")
        self.transitions[str(name)] = Transition(str(name), guard, rule, tclass)

    def _expr(self, tuples) -> Multiset:
        for tup in tuples:
            for tok in tup:
                if tok not in self.variables and not self.is_constant(tok):
                    self.error(tok, f"unresolved reference: {str(tok)!r} is neither a variable nor a constant")
        return Multiset(tuple(str(x) for x in tup) for tup in tuples)

    def _arc(self, line) -> None:
        src, dst, tuples = line
        expr = self._expr(tuples)
        src_t, dst_t = src in self.transitions, dst in self.transitions
        if src_t == dst_t:
            for end in (src, dst):
                if end not in self.transitions and end not in self.places and end not in self.variables:
                    self.error(end, f"unresolved reference: {str(end)!r} is not a place, variable or transition")
                    return
            self.error(src, f"arc {src} -> {dst} must connect a transition with a place or variable")
            return
        node = dst if src_t else src
        if node not in self.places and node not in self.variables:
            self.error(node, f"unresolved reference: {str(node)!r} is not a place or variable")
            return
        if node in self.places:
            arity = self.places[str(node)].arity
            for n in sorted(expr.arities()):
                if n != arity:
                    self.error(node, f"arity mismatch: tuple of length {n} on arc to place {node} of arity {arity}")
        self.arcs.append(Arc(str(src), str(dst), expr))

    def _gamma(self, line) -> None:
        var, consts = line
        if var not in self.variables:
            self.error(var, f"unresolved reference: gamma for non-variable {str(var)!r}")
        for tok in consts:
            if not self.is_constant(tok):
                self.error(tok, f"unresolved reference: {str(tok)!r} is not a constant")
        self.gamma.setdefault(str(var), set()).update(str(c) for c in consts)

    def _marking(self, line) -> None:
        place, tuples = line
        if place not in self.places:
            self.error(place, f"unresolved reference: marking of undeclared place {str(place)!r}")
            return
        arity = self.places[str(place)].arity
        for tup in tuples:
            if len(tup) != arity:
                self.error(tup[0] if tup else place,
                           f"arity mismatch: token of length {len(tup)} in place {place} of arity {arity}")
            for tok in tup:
                if not self.is_constant(tok):
                    self.error(tok, f"unresolved reference: token element {str(tok)!r} is not a constant")
        ms = Multiset(tuple(str(x) for x in tup) for tup in tuples)
        self.marking[str(place)] = self.marking.get(str(place), Multiset()) + ms

    def _component(self, line) -> None:
        kind, name, items, refs = line
        # Keywords are filtered out of the tree; places and transitions are told apart by name.
        places = [str(t) for t in items if t in self.places]
        transitions = [str(t) for t in items if t in self.transitions]
        for tok in items:
            if tok not in self.places and tok not in self.transitions:
                self.error(tok, f"unresolved reference: {str(tok)!r} is not a place or transition")
        for tok in refs:
            if tok not in self.transitions:
                self.error(tok, f"unresolved reference: {str(tok)!r} is not a transition")
        self.components.append(ComponentDecl(
            str(name), kind, tuple(places), tuple(transitions), tuple(str(r) for r in refs),
        ))
        self._component_tokens.append((name, kind))

    def _final(self, line) -> None:
        if line[0] == "mode":
            mode = str(line[1])
            if mode not in FINAL_MODES:
                self.error(line[1], f"final mode must be one of {', '.join(FINAL_MODES)}")
            else:
                self.final_mode = mode
            return
        _, comp, places = line
        for tok in places:
            if tok not in self.places:
                self.error(tok, f"unresolved reference: final place {str(tok)!r} is not a place")
        self.finals[str(comp)] = tuple(sorted(set(self.finals.get(str(comp), ())) | {str(p) for p in places}))
        self._final_tokens.append(comp)

    def _check_grouping(self) -> None:
        if not self.components:
            return
        names = {c.name for c in self.components}
        for tok in self._final_tokens:
            if tok not in names:
                self.error(tok, f"unresolved reference: finals for unknown component {str(tok)!r}")
        owned_t = {t for c in self.components for t in c.transitions}
        for t in sorted(set(self.transitions) - owned_t):
            tok = self._component_tokens[0][0]
            self.error(tok, f"transition {str(t)!r} is not assigned to any component")
        owned_p = {p for c in self.components for p in c.places}
        for arc in self.arcs:
            for end in (arc.source, arc.target):
                if end in self.places:
                    owned_p.add(end)
        for p in sorted(set(self.places) - owned_p):
            tok = self._component_tokens[0][0]
            self.error(tok, f"place {str(p)!r} is not assigned to any component")

    def document(self) -> ModelDocument:
        used_eps = any(EPSILON in a.expr.names() for a in self.arcs) or any(
            EPSILON in ms.names() for ms in self.marking.values()
        )
        constants = self.constants | set(self.places) | ({EPSILON} if used_eps else set())
        net = VpnNet(
            constants=frozenset(constants),
            variables=frozenset(self.variables),
            places=self.places,
            transitions=self.transitions,
            arcs=tuple(self.arcs),
            gamma0={v: frozenset(r) for v, r in self.gamma.items()},
            m0=self.marking,
            interfaces=frozenset(self.interfaces),
        )
        return ModelDocument(net, self.components, self.finals, self.final_mode, self.source)


# ────────────────────────────────────────────────────────────
#  Public API
# ────────────────────────────────────────────────────────────

@dataclass
class ParseResult:
    document: Optional[ModelDocument]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.document is not None


def _syntax_diagnostic(exc: UnexpectedInput, text: str, source: Optional[str]) -> Diagnostic:
    line = getattr(exc, "line", -1)
    column = getattr(exc, "column", -1)
    if isinstance(exc, UnexpectedCharacters):
        message = f"syntax error: unexpected character {getattr(exc, 'char', '?')!r}"
    elif isinstance(exc, UnexpectedEOF):
        message = "syntax error: unexpected end of input"
    elif isinstance(exc, UnexpectedToken):
        tok = exc.token
        if tok.type == "_NL":
            shown = "end of line"
        elif tok.type == "$END":
            shown = "end of input"
        else:
            shown = repr(str(tok))
        expected = ", ".join(sorted(exc.expected)[:6])
        message = f"syntax error: unexpected {shown}, expected one of {expected}"
        line, column = getattr(tok, "line", None), getattr(tok, "column", None)
    else:
        message = f"syntax error: {exc}"
    if line is None or line < 1:
        line, column = text.count("\n") + 1, 1
    return Diagnostic(line, column or 1, message, source)


def parse_model(text: str, source: Optional[str] = None) -> ParseResult:
    """
    Parse a model file.

    Returns:
        A ParseResult holding either a document or a non-empty list of
        diagnostics, never both.
    """
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = _PARSER.parse(text, start="start")
        sections = _Declarations().transform(tree)
    except UnexpectedInput as exc:
        return ParseResult(None, [_syntax_diagnostic(exc, text, source)])
    except VisitError as exc:
        return ParseResult(None, [Diagnostic(1, 1, f"malformed model: {exc.orig_exc}", source)])

    builder = _Builder(source)
    builder.build(sections)
    if builder.diagnostics:
        diags = sorted(builder.diagnostics, key=lambda d: (d.line, d.column))
        return ParseResult(None, diags)
    return ParseResult(builder.document(), [])


def load_model(path: str | Path) -> ModelDocument:
    """
    Read and parse a `.vpn` file.

    Raises:
        ModelError: with the parse diagnostics if the file does not parse.
    """
    path = Path(path)
    result = parse_model(path.read_text(encoding="utf-8"), source=str(path))
    if result.document is None:
        raise ModelError(result.diagnostics)
    logger.debug("Loaded %s: %d place(s), %d transition(s)",
                 path, len(result.document.net.places), len(result.document.net.transitions))
    return result.document


def parse_guard(text: str, variables: Iterable[str], constants: Iterable[str] = ()) -> Guard:
    """
    Parse a standalone guard expression. Names in `variables` become
    variables; everything else is a constant.

    Raises:
        ModelError: on a syntax error.
    """
    try:
        raw = _Declarations().transform(_PARSER.parse(text, start="guard_only"))
    except UnexpectedInput as exc:
        raise ModelError([_syntax_diagnostic(exc, text, None)]) from exc
    builder = _Builder(None)
    builder.variables = set(variables)
    builder.constants = set(constants)
    builder.strict = bool(builder.constants)
    guard = builder.guard(raw)
    if builder.diagnostics:
        raise ModelError(builder.diagnostics)
    return guard


# ────────────────────────────────────────────────────────────
#  Serializer
# ────────────────────────────────────────────────────────────

def _tuples(ms: Multiset) -> str:
    if not ms:
        return "{}"
    return " ".join("<" + ", ".join(elem) + ">" for elem in ms.elements())


def serialize_model(doc: ModelDocument) -> str:
    """Render a document in the `.vpn` format; parse_model reads it back unchanged."""
    net = doc.net
    out: list[str] = []

    out.append("universe")
    consts = sorted(net.constants - set(net.places))
    if consts:
        out.append("  const " + " ".join(consts))
    if net.variables:
        out.append("  var " + " ".join(sorted(net.variables)))

    out.append("places")
    for p in sorted(net.places):
        place = net.places[p]
        out.append(f"  {place.name} {place.arity} {place.klass.value}")

    out.append("transitions")
    for t in sorted(net.transitions):
        trans = net.transitions[t]
        out.append(f"  {trans.name} {trans.klass.value}")
        if trans.guard != TRUE:
            out.append(f"    guard {trans.guard}")
        if not trans.rule.is_noop:
            out.append(f"    rho {trans.rule}")

    out.append("arcs")
    for arc in net.arcs:
        out.append(f"  {arc.source} -> {arc.target} : {_tuples(arc.expr)}")

    out.append("gamma")
    for v in sorted(net.gamma0):
        out.append(f"  {v} :" + "".join(f" {c}" for c in sorted(net.gamma0[v])))

    out.append("marking")
    for p in sorted(net.m0):
        out.append(f"  {p} : {_tuples(net.m0[p])}")

    if net.interfaces:
        out.append("interfaces")
        out.append("  " + " ".join(sorted(net.interfaces)))

    if doc.components:
        out.append("components")
        for c in doc.components:
            line = f"  {c.kind} {c.name} places"
            line += "".join(f" {p}" for p in c.places)
            line += " transitions" + "".join(f" {t}" for t in c.transitions)
            if c.kind == "isn" and c.references:
                line += " references" + "".join(f" {r}" for r in c.references)
            out.append(line)

    if doc.finals or doc.final_mode != "simultaneous":
        out.append("finals")
        for comp in sorted(doc.finals):
            out.append(f"  {comp} : " + " ".join(doc.finals[comp]))
        if doc.final_mode != "simultaneous":
            out.append(f"  mode {doc.final_mode}")

    return "\n".join(out) + "\n"
