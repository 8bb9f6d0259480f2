"""
net.py — The VPN data model.

A net is an immutable value: places, transitions, arcs with tuple
expressions, the initial constraint function γ0 and the initial marking.
Configurations (marking, place set, γ) are hashable values too, so the
state-space code can use them directly as dictionary keys.

Names are plain strings. Whether a name is a constant or a variable is a
property of the net's universe, not of the name itself.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Optional

from errors import ConflictingBinding
from guards import NO_RULE, TRUE, Guard, LinkRule

EPSILON = "eps"

Token = tuple[str, ...]


# ────────────────────────────────────────────────────────────
#  Universe and classification
# ────────────────────────────────────────────────────────────

class SymbolKind(str, Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: SymbolKind
    arity: int = 0


class PlaceClass(str, Enum):
    INITIAL_FINAL = "initial_final"
    PROCESS = "process"
    DATA = "data"
    CONTEXTUAL = "contextual"
    INTERFACE = "interface"


class TransClass(str, Enum):
    PROCESS = "process"
    INTERACTION = "interaction"
    EXTERNAL = "external"

    @property
    def is_interaction(self) -> bool:
        return self is not TransClass.PROCESS


# ────────────────────────────────────────────────────────────
#  Multiset
# ────────────────────────────────────────────────────────────

class Multiset:
    """
    Immutable bag of hashable elements (tuples of names in practice).

    Entries never carry a zero multiplicity; subtraction below zero is an
    error rather than a silent clamp.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, elements: Iterable | Mapping | None = None):
        counts: Counter = Counter()
        if isinstance(elements, Multiset):
            counts.update(dict(elements._items))
        elif isinstance(elements, Mapping):
            for elem, n in elements.items():
                if n < 0:
                    raise ValueError(f"negative multiplicity for {elem!r}")
                counts[elem] += n
        elif elements is not None:
            counts.update(elements)
        self._items: tuple = tuple(sorted((e, n) for e, n in counts.items() if n > 0))
        self._hash = hash(self._items)

    @classmethod
    def of(cls, *elements) -> "Multiset":
        return cls(elements)

    def count(self, elem) -> int:
        for e, n in self._items:
            if e == elem:
                return n
        return 0

    def items(self) -> tuple:
        return self._items

    def distinct(self) -> list:
        return [e for e, _ in self._items]

    def elements(self) -> list:
        return [e for e, n in self._items for _ in range(n)]

    def covers(self, other: "Multiset") -> bool:
        mine = dict(self._items)
        return all(mine.get(e, 0) >= n for e, n in other._items)

    def union(self, other: "Multiset") -> "Multiset":
        merged = dict(self._items)
        for e, n in other._items:
            merged[e] = max(merged.get(e, 0), n)
        return Multiset(merged)

    def substitute(self, binding: Mapping[str, str]) -> "Multiset":
        """Replace every name bound in `binding` inside each tuple element."""
        out: Counter = Counter()
        for elem, n in self._items:
            out[tuple(binding.get(x, x) for x in elem)] += n
        return Multiset(out)

    def arities(self) -> set[int]:
        return {len(e) for e, _ in self._items}

    def names(self) -> set[str]:
        return {x for e, _ in self._items for x in e}

    def to_json(self) -> list:
        return [[list(e), n] for e, n in self._items]

    @classmethod
    def from_json(cls, data: list) -> "Multiset":
        return cls({tuple(e): n for e, n in data})

    def __add__(self, other: "Multiset") -> "Multiset":
        merged = Counter(dict(self._items))
        merged.update(dict(other._items))
        return Multiset(merged)

    def __sub__(self, other: "Multiset") -> "Multiset":
        if not self.covers(other):
            raise ValueError(f"cannot subtract {other} from {self}")
        merged = Counter(dict(self._items))
        merged.subtract(dict(other._items))
        return Multiset(merged)

    def __ge__(self, other: "Multiset") -> bool:
        return self.covers(other)

    def __le__(self, other: "Multiset") -> bool:
        return other.covers(self)

    def __len__(self) -> int:
        return sum(n for _, n in self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __iter__(self) -> Iterator:
        return iter(self.elements())

    def __contains__(self, elem) -> bool:
        return self.count(elem) > 0

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiset) and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Multiset({dict(self._items)!r})"

    def __str__(self) -> str:
        if not self._items:
            return "{}"
        parts = []
        for elem, n in self._items:
            text = "<" + ", ".join(elem) + ">"
            parts.extend([text] * n)
        return " ".join(parts)


EMPTY = Multiset()


def as_multiset(value) -> Multiset:
    if isinstance(value, Multiset):
        return value
    return Multiset(tuple(e) for e in value)


# ────────────────────────────────────────────────────────────
#  Net structure
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Place:
    name: str
    arity: int = 1
    klass: PlaceClass = PlaceClass.PROCESS


@dataclass(frozen=True)
class Transition:
    name: str
    guard: Guard = TRUE
    rule: LinkRule = NO_RULE
    klass: TransClass = TransClass.PROCESS


@dataclass(frozen=True)
class Arc:
    source: str
    target: str
    expr: Multiset = EMPTY


@dataclass(frozen=True, eq=True)
class VpnNet:
    """
    The static net: universe, structure and initial state.

    `gamma0` always has one entry per variable (possibly empty) and `m0`
    never lists an unmarked place, so structural equality is meaningful.
    """
    constants: frozenset[str] = frozenset()
    variables: frozenset[str] = frozenset()
    places: dict[str, Place] = field(default_factory=dict)
    transitions: dict[str, Transition] = field(default_factory=dict)
    arcs: tuple[Arc, ...] = ()
    gamma0: dict[str, frozenset[str]] = field(default_factory=dict)
    m0: dict[str, Multiset] = field(default_factory=dict)
    interfaces: frozenset[str] = frozenset()

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        merged: dict[tuple[str, str], Multiset] = {}
        for arc in self.arcs:
            key = (arc.source, arc.target)
            merged[key] = merged.get(key, EMPTY) + arc.expr
        object.__setattr__(self, "arcs", tuple(Arc(s, t, e) for (s, t), e in sorted(merged.items())))
        object.__setattr__(self, "constants", frozenset(self.constants))
        object.__setattr__(self, "variables", frozenset(self.variables))
        object.__setattr__(self, "interfaces", frozenset(self.interfaces))
        gamma = {v: frozenset() for v in self.variables}
        for v, rng in self.gamma0.items():
            gamma[v] = frozenset(rng)
        object.__setattr__(self, "gamma0", gamma)
        object.__setattr__(self, "m0", {p: ms for p, ms in self.m0.items() if ms})

    # ── universe ──

    def is_variable(self, name: str) -> bool:
        return name in self.variables

    def symbol(self, name: str) -> Optional[Symbol]:
        if name in self.variables:
            return Symbol(name, SymbolKind.VARIABLE)
        if name in self.constants:
            arity = self.places[name].arity if name in self.places else 0
            return Symbol(name, SymbolKind.CONSTANT, arity)
        return None

    def universe(self) -> dict[str, Symbol]:
        return {n: self.symbol(n) for n in sorted(self.constants | self.variables)}

    # ── arc indices ──

    @cached_property
    def _inputs(self) -> dict[str, tuple[Arc, ...]]:
        index: dict[str, list[Arc]] = {t: [] for t in self.transitions}
        for arc in self.arcs:
            if arc.target in index:
                index[arc.target].append(arc)
        return {t: tuple(arcs) for t, arcs in index.items()}

    @cached_property
    def _outputs(self) -> dict[str, tuple[Arc, ...]]:
        index: dict[str, list[Arc]] = {t: [] for t in self.transitions}
        for arc in self.arcs:
            if arc.source in index:
                index[arc.source].append(arc)
        return {t: tuple(arcs) for t, arcs in index.items()}

    def input_arcs(self, t: str) -> tuple[Arc, ...]:
        return self._inputs.get(t, ())

    def output_arcs(self, t: str) -> tuple[Arc, ...]:
        return self._outputs.get(t, ())

    def solid_inputs(self, t: str) -> list[Arc]:
        return [a for a in self.input_arcs(t) if a.source not in self.variables]

    def virtual_inputs(self, t: str) -> list[Arc]:
        return [a for a in self.input_arcs(t) if a.source in self.variables]

    def solid_outputs(self, t: str) -> list[Arc]:
        return [a for a in self.output_arcs(t) if a.target not in self.variables]

    def virtual_outputs(self, t: str) -> list[Arc]:
        return [a for a in self.output_arcs(t) if a.target in self.variables]

    def input_variables(self, t: str) -> frozenset[str]:
        """Variables bound by the input side: virtual pre-places and input expression variables."""
        names: set[str] = set()
        for arc in self.input_arcs(t):
            names.add(arc.source)
            names.update(arc.expr.names())
        return frozenset(names & self.variables)

    def output_variables(self, t: str) -> frozenset[str]:
        names: set[str] = set()
        for arc in self.output_arcs(t):
            names.add(arc.target)
            names.update(arc.expr.names())
        return frozenset(names & self.variables)

    def variables_of(self, t: str) -> frozenset[str]:
        trans = self.transitions[t]
        return (self.input_variables(t) | self.output_variables(t)
                | (trans.guard.variables() & self.variables)
                | (trans.rule.variables() & self.variables))

    def places_of_class(self, klass: PlaceClass) -> frozenset[str]:
        return frozenset(p.name for p in self.places.values() if p.klass is klass)

    def transitions_of_class(self, *klasses: TransClass) -> frozenset[str]:
        return frozenset(t.name for t in self.transitions.values() if t.klass in klasses)


def make_net(
    places: Iterable[Place | tuple] = (),
    transitions: Iterable[Transition | str] = (),
    arcs: Iterable[Arc | tuple] = (),
    *,
    variables: Iterable[str] = (),
    constants: Iterable[str] = (),
    gamma0: Optional[Mapping[str, Iterable[str]]] = None,
    m0: Optional[Mapping[str, Any]] = None,
    interfaces: Iterable[str] = (),
) -> VpnNet:
    """
    Build a VpnNet from loose Python values.

    Places may be given as `Place` objects or `(name, arity[, klass])`
    tuples, transitions as `Transition` objects or bare names, arcs as
    `Arc` objects or `(source, target, tuples)`. Constants are inferred
    from every name that is not a declared variable.
    """
    variables = frozenset(variables)
    place_map: dict[str, Place] = {}
    for p in places:
        place = p if isinstance(p, Place) else Place(*p)
        place_map[place.name] = place

    trans_map: dict[str, Transition] = {}
    for t in transitions:
        trans = t if isinstance(t, Transition) else Transition(t)
        trans_map[trans.name] = trans

    arc_list = []
    for a in arcs:
        arc = a if isinstance(a, Arc) else Arc(a[0], a[1], as_multiset(a[2] if len(a) > 2 else ()))
        arc_list.append(arc)

    marking = {p: as_multiset(toks) for p, toks in (m0 or {}).items()}
    gamma = {v: frozenset(rng) for v, rng in (gamma0 or {}).items()}

    names: set[str] = set(constants) | set(place_map) | set(interfaces)
    for arc in arc_list:
        names.update(arc.expr.names())
    for ms in marking.values():
        names.update(ms.names())
    for rng in gamma.values():
        names.update(rng)
    for trans in trans_map.values():
        names.update(trans.guard.constants())
        names.update(trans.rule.condition.constants())

    return VpnNet(
        constants=frozenset(names - variables),
        variables=variables,
        places=place_map,
        transitions=trans_map,
        arcs=tuple(arc_list),
        gamma0=gamma,
        m0=marking,
        interfaces=frozenset(interfaces),
    )



# ────────────────────────────────────────────────────────────
#  Bindings
# ────────────────────────────────────────────────────────────

class Binding(Mapping[str, str]):
    """An immutable, hashable assignment of variables to constants."""

    __slots__ = ("_map", "_key")

    def __init__(self, mapping: Mapping[str, str] | None = None):
        self._map: dict[str, str] = dict(mapping or {})
        self._key: tuple[tuple[str, str], ...] = tuple(sorted(self._map.items()))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "Binding":
        seen: dict[str, str] = {}
        for var, const in pairs:
            if var in seen and seen[var] != const:
                raise ConflictingBinding(
                    f"variable {var!r} bound to both {seen[var]!r} and {const!r}"
                )
            seen[var] = const
        return cls(seen)

    def extend(self, var: str, const: str) -> "Binding":
        merged = dict(self._map)
        merged[var] = const
        return Binding(merged)

    def to_dict(self) -> dict[str, str]:
        return dict(self._key)

    def __getitem__(self, key: str) -> str:
        return self._map[key]

    def __iter__(self) -> Iterator[str]:
        return (k for k, _ in self._key)

    def __len__(self) -> int:
        return len(self._key)

    def __eq__(self, other) -> bool:
        if isinstance(other, Binding):
            return self._key == other._key
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._key)

    def __lt__(self, other: "Binding") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"Binding({self._map!r})"

    def __str__(self) -> str:
        return ", ".join(f"{k}→{v}" for k, v in self._key)


# ────────────────────────────────────────────────────────────
#  Configurations
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Configuration:
    """
    Π = (M, P′, γ′) in a canonical, hashable form.

    `marking` lists only non-empty places and `gamma` only non-empty
    ranges, both sorted by name; `places` maps each current place to
    its arity.
    """
    marking: tuple[tuple[str, Multiset], ...]
    places: tuple[tuple[str, int], ...]
    gamma: tuple[tuple[str, frozenset[str]], ...]

    @classmethod
    def build(cls, marking: Mapping[str, Multiset], places: Mapping[str, int],
              gamma: Mapping[str, Iterable[str]]) -> "Configuration":
        return cls(
            marking=tuple(sorted((p, ms) for p, ms in marking.items() if ms)),
            places=tuple(sorted(places.items())),
            gamma=tuple(sorted((v, frozenset(r)) for v, r in gamma.items() if r)),
        )

    @classmethod
    def initial(cls, net: VpnNet) -> "Configuration":
        return cls.build(
            net.m0,
            {p.name: p.arity for p in net.places.values()},
            net.gamma0,
        )

    @cached_property
    def marking_map(self) -> dict[str, Multiset]:
        return dict(self.marking)

    @cached_property
    def place_map(self) -> dict[str, int]:
        return dict(self.places)

    @cached_property
    def gamma_map(self) -> dict[str, frozenset[str]]:
        return dict(self.gamma)

    def tokens(self, place: str) -> Multiset:
        return self.marking_map.get(place, EMPTY)

    def arity(self, place: str) -> Optional[int]:
        return self.place_map.get(place)

    def has_place(self, place: str) -> bool:
        return place in self.place_map

    def gamma_of(self, variable: str) -> frozenset[str]:
        return self.gamma_map.get(variable, frozenset())

    def gamma_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset((v, c) for v, rng in self.gamma for c in rng)

    def marks_all(self, places: Iterable[str]) -> bool:
        return all(self.tokens(p) for p in places)

    def to_dict(self) -> dict:
        return {
            "marking": {p: ms.to_json() for p, ms in self.marking},
            "places": {p: n for p, n in self.places},
            "gamma": {v: sorted(rng) for v, rng in self.gamma},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Configuration":
        return cls.build(
            {p: Multiset.from_json(ms) for p, ms in data.get("marking", {}).items()},
            dict(data.get("places", {})),
            {v: rng for v, rng in data.get("gamma", {}).items()},
        )

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:10]

    def describe(self) -> str:
        marked = "  ".join(f"{p}{{{ms}}}" for p, ms in self.marking) or "(empty)"
        links = "  ".join(f"{v}:{{{','.join(sorted(r))}}}" for v, r in self.gamma)
        return f"{marked}  | {links}" if links else marked


# ────────────────────────────────────────────────────────────
#  Validation
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.subject}: {self.message}"


def validate_net(net: VpnNet) -> list[Violation]:
    """
    Check the structural well-formedness rules of a net.

    Returns:
        A list of violations; an empty list means the net is valid.
    """
    out: list[Violation] = []
    known = net.constants | net.variables

    for name in sorted(set(net.places) & set(net.transitions)):
        out.append(Violation("disjoint", name, "name is both a place and a transition"))
    for name in sorted(net.constants & net.variables):
        out.append(Violation("universe", name, "name is declared both constant and variable"))
    for name in sorted(set(net.places) - net.constants):
        out.append(Violation("universe", name, "place name is not a constant"))
    for place in net.places.values():
        if place.arity < 0:
            out.append(Violation("arity", place.name, "arity must be non-negative"))

    for arc in net.arcs:
        out.extend(_check_arc(net, arc, known))

    for t in sorted(net.transitions):
        trans = net.transitions[t]
        in_vars = net.input_variables(t)
        missing = net.output_variables(t) - in_vars
        for v in sorted(missing):
            out.append(Violation(
                "variable symmetry", t,
                f"variable {v!r} appears on the output side but not on the input side",
            ))
        for v in sorted(trans.guard.variables()):
            if v not in net.variables:
                out.append(Violation("guard", t, f"guard names unknown variable {v!r}"))
            elif v not in in_vars:
                out.append(Violation("guard", t, f"guard variable {v!r} is not bound by an input"))
        for v in sorted(trans.rule.condition.variables()):
            if v not in in_vars:
                out.append(Violation("link rule", t, f"rule condition variable {v!r} is not bound by an input"))
        virtual_post = {a.target for a in net.virtual_outputs(t)}
        for action in trans.rule.actions:
            if action.variable not in virtual_post:
                out.append(Violation(
                    "link rule", t,
                    f"action on {action.variable!r} which is not a virtual post-place",
                ))

    for v, rng in sorted(net.gamma0.items()):
        if v not in net.variables:
            out.append(Violation("gamma", v, "constraint declared for a non-variable"))
        for c in sorted(rng - net.constants):
            out.append(Violation("gamma", v, f"range names unknown constant {c!r}"))

    for p, ms in sorted(net.m0.items()):
        if p not in net.places:
            out.append(Violation("marking", p, "marking of an undeclared place"))
            continue
        arity = net.places[p].arity
        for tok in ms.distinct():
            if len(tok) != arity:
                out.append(Violation(
                    "arity", p, f"token <{', '.join(tok)}> has length {len(tok)}, place arity is {arity}",
                ))
            for x in tok:
                if x not in net.constants:
                    out.append(Violation("marking", p, f"token element {x!r} is not a constant"))

    for c in sorted(net.interfaces - net.constants):
        out.append(Violation("interfaces", c, "interface is not a declared constant"))

    return out


def _check_arc(net: VpnNet, arc: Arc, known: frozenset[str]) -> list[Violation]:
    out: list[Violation] = []
    label = f"{arc.source}->{arc.target}"
    src_t = arc.source in net.transitions
    dst_t = arc.target in net.transitions
    if src_t == dst_t:
        out.append(Violation("arc", label, "arc must connect a transition with a place or variable"))
        return out
    node = arc.target if src_t else arc.source
    if node not in net.places and node not in net.variables:
        out.append(Violation("arc", label, f"endpoint {node!r} is neither a place nor a variable"))
        return out

    for x in sorted(arc.expr.names() - known):
        out.append(Violation("arc", label, f"expression names unknown symbol {x!r}"))

    lengths = arc.expr.arities()
    if node in net.places:
        arity = net.places[node].arity
        bad = sorted(n for n in lengths if n != arity)
        if bad:
            out.append(Violation("arity", label, f"expression tuple length {bad[0]} differs from arity {arity}"))
    elif len(lengths) > 1:
        out.append(Violation("arity", label, "virtual arc tuples have differing lengths"))
    return out
