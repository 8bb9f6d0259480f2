"""
composition.py — Component nets, interaction structure nets, their union
into a multi-component net, the three pairwise merge operators and the
bounded liveness check used to correlate liveness before and after a
merge.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import networkx as nx

import config
from errors import (
    ClassConflict,
    ClassificationError,
    KindConflict,
    MissingTransition,
    SharedPlace,
    SharedTransition,
)
from guards import TRUE, Guard, LinkRule, conjoin
from net import (
    EPSILON,
    Arc,
    Configuration,
    Multiset,
    Place,
    PlaceClass,
    TransClass,
    Transition,
    Violation,
    VpnNet,
)
from statespace import ExplorationBounds, build_ct, ct_to_cg

logger = logging.getLogger(__name__)


# ────────────────────────────────────────────────────────────
#  Parts
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ComponentNet:
    name: str
    net: VpnNet
    finals: frozenset[str] = frozenset()


@dataclass(frozen=True)
class InteractionStructureNet:
    """
    Interface places and external interaction transitions, plus the
    component transitions it connects (`references`). `places` lists the
    places the ISN declares itself (all of `net`'s places when None);
    `net` may also hold component places its transitions touch.
    """
    name: str
    net: VpnNet
    references: frozenset[str] = frozenset()
    places: Optional[frozenset[str]] = None

    @property
    def own_places(self) -> frozenset[str]:
        return self.places if self.places is not None else frozenset(self.net.places)


@dataclass
class MultiComponentNet:
    components: tuple[ComponentNet, ...]
    interactions: tuple[InteractionStructureNet, ...]
    net: VpnNet
    finals: dict[str, frozenset[str]] = field(default_factory=dict)
    final_mode: str = "simultaneous"

    @property
    def final_places(self) -> frozenset[str]:
        return frozenset().union(*self.finals.values()) if self.finals else frozenset()

    @property
    def interaction_transitions(self) -> frozenset[str]:
        """ISN transitions plus every component transition classified as interaction."""
        own = self.net.transitions_of_class(TransClass.INTERACTION, TransClass.EXTERNAL)
        refs = frozenset().union(*(i.references for i in self.interactions)) if self.interactions else frozenset()
        return own | refs

    @property
    def interface_variables(self) -> frozenset[str]:
        """Variables used as virtual places by interaction transitions or by the ISNs."""
        wanted = set(self.interaction_transitions)
        for isn in self.interactions:
            wanted |= set(isn.net.transitions)
        out: set[str] = set()
        for t in wanted:
            if t not in self.net.transitions:
                continue
            out |= {a.source for a in self.net.virtual_inputs(t)}
            out |= {a.target for a in self.net.virtual_outputs(t)}
        return frozenset(out)

    @classmethod
    def single(cls, net: VpnNet, name: str = "main", finals: Iterable[str] = ()) -> "MultiComponentNet":
        finals = frozenset(finals)
        return cls(
            components=(ComponentNet(name, net, finals),),
            interactions=(),
            net=net,
            finals={name: finals} if finals else {},
        )


def restrict(net: VpnNet, places: Iterable[str], transitions: Iterable[str]) -> VpnNet:
    """
    The sub-net owning `transitions`: their arcs, every place listed or
    touched by those arcs, the variables they use and the matching slices
    of γ0 and M0. The universe stays shared.
    """
    trans = {t: net.transitions[t] for t in transitions if t in net.transitions}
    arcs = [a for a in net.arcs if a.source in trans or a.target in trans]
    place_names = {p for p in places if p in net.places}
    for arc in arcs:
        for end in (arc.source, arc.target):
            if end in net.places:
                place_names.add(end)
    used_vars: set[str] = set()
    for t in trans:
        used_vars |= net.variables_of(t)
    return VpnNet(
        constants=net.constants,
        variables=net.variables,
        places={p: net.places[p] for p in sorted(place_names)},
        transitions=trans,
        arcs=tuple(arcs),
        gamma0={v: rng for v, rng in net.gamma0.items() if v in used_vars and rng},
        m0={p: ms for p, ms in net.m0.items() if p in place_names},
        interfaces=net.interfaces,
    )


# ────────────────────────────────────────────────────────────
#  Classification checks
# ────────────────────────────────────────────────────────────

def check_component(cn: ComponentNet) -> list[Violation]:
    """Classification rules of a component net; empty list means it conforms."""
    out: list[Violation] = []
    net = cn.net
    boundary = net.places_of_class(PlaceClass.INITIAL_FINAL)
    if not any(p in net.m0 for p in boundary):
        out.append(Violation("component", cn.name, "no initially marked initial/final place"))
    if not cn.finals:
        out.append(Violation("component", cn.name, "no final place declared"))
    for p in sorted(cn.finals - boundary):
        out.append(Violation("component", p, "final place is not of class initial_final"))

    for t in sorted(net.transitions):
        trans = net.transitions[t]
        if trans.klass is TransClass.EXTERNAL:
            out.append(Violation("component", t, "external interaction transition inside a component"))
        if trans.klass is not TransClass.INTERACTION:
            continue
        for arc in net.output_arcs(t):
            target = arc.target
            if net.is_variable(target):
                continue
            if net.places[target].klass is not PlaceClass.INTERFACE:
                out.append(Violation(
                    "component", t,
                    f"interaction transition outputs to non-interface place {target!r}",
                ))
    return out


def check_interaction_net(isn: InteractionStructureNet) -> list[Violation]:
    out: list[Violation] = []
    for p in sorted(isn.own_places):
        if isn.net.places[p].klass is not PlaceClass.INTERFACE:
            out.append(Violation("interaction net", p, "ISN place is not an interface place"))
    for t in sorted(isn.net.transitions):
        if isn.net.transitions[t].klass is TransClass.PROCESS:
            out.append(Violation("interaction net", t, "ISN holds a process transition"))
    return out


# ────────────────────────────────────────────────────────────
#  Union
# ────────────────────────────────────────────────────────────

def _union(parts: Sequence[tuple[str, VpnNet]]) -> VpnNet:
    constants: set[str] = set()
    variables: set[str] = set()
    places: dict[str, Place] = {}
    transitions: dict[str, Transition] = {}
    arcs: dict[tuple[str, str], Multiset] = {}
    gamma: dict[str, frozenset[str]] = {}
    marking: dict[str, Multiset] = {}
    interfaces: set[str] = set()

    for name, net in parts:
        constants |= net.constants
        variables |= net.variables
        for p in net.places.values():
            seen = places.setdefault(p.name, p)
            if seen.arity != p.arity:
                raise KindConflict(f"{name}: place {p.name!r} has arity {p.arity}, elsewhere {seen.arity}")
            if seen.klass is not p.klass:
                raise ClassConflict(
                    f"{name}: place {p.name!r} is {p.klass.value}, elsewhere {seen.klass.value}"
                )
        for t in net.transitions.values():
            seen_t = transitions.setdefault(t.name, t)
            if seen_t != t:
                raise KindConflict(f"{name}: transition {t.name!r} is defined differently elsewhere")
        for arc in net.arcs:
            key = (arc.source, arc.target)
            if key in arcs and arcs[key] != arc.expr:
                raise KindConflict(f"{name}: arc {arc.source}->{arc.target} carries a different expression elsewhere")
            arcs[key] = arc.expr
        for v, rng in net.gamma0.items():
            gamma[v] = gamma.get(v, frozenset()) | rng
        for p, ms in net.m0.items():
            marking[p] = marking[p].union(ms) if p in marking else ms
        interfaces |= net.interfaces

    clash = constants & variables
    if clash:
        raise KindConflict(f"declared both constant and variable: {', '.join(sorted(clash))}")
    both = set(places) & set(transitions)
    if both:
        raise KindConflict(f"names used for both a place and a transition: {', '.join(sorted(both))}")

    return VpnNet(
        constants=frozenset(constants),
        variables=frozenset(variables),
        places=places,
        transitions=transitions,
        arcs=tuple(Arc(s, t, e) for (s, t), e in arcs.items()),
        gamma0=gamma,
        m0=marking,
        interfaces=frozenset(interfaces),
    )


def compose_mcn(
    cns: Sequence[ComponentNet],
    isns: Sequence[InteractionStructureNet] = (),
    final_mode: Optional[str] = None,
) -> MultiComponentNet:
    """
    Fuse component and interaction nets into one multi-component net.

    Same-named places, transitions and arcs are identified; γ0 ranges are
    unioned as sets and initial markings as bags.

    Raises:
        ClassificationError: a part breaks its classification rules.
        KindConflict:        a shared name differs in kind, arity or definition.
        ClassConflict:       a shared place differs in class.
        MissingTransition:   an ISN references an unknown transition.
    """
    for cn in cns:
        problems = check_component(cn)
        if problems:
            raise ClassificationError(cn.name, problems[0].subject, problems[0].message)
    for isn in isns:
        problems = check_interaction_net(isn)
        if problems:
            raise ClassificationError(isn.name, problems[0].subject, problems[0].message)

    fused = _union([(cn.name, cn.net) for cn in cns] + [(i.name, i.net) for i in isns])
    for isn in isns:
        missing = isn.references - set(fused.transitions)
        if missing:
            raise MissingTransition(f"{isn.name} references unknown transition(s): {', '.join(sorted(missing))}")

    mode = final_mode or config.FINAL_MODE
    logger.info(
        "Composed %d component(s) and %d interaction net(s): %d place(s), %d transition(s)",
        len(cns), len(isns), len(fused.places), len(fused.transitions),
    )
    return MultiComponentNet(
        components=tuple(cns),
        interactions=tuple(isns),
        net=fused,
        finals={cn.name: cn.finals for cn in cns if cn.finals},
        final_mode=mode,
    )


# ────────────────────────────────────────────────────────────
#  Merge operators
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class AsyncMergeSpec:
    t1: str
    t2: str
    s1: str
    s2: str
    bridge: str
    expr: tuple[tuple[str, ...], ...] = ((EPSILON,),)
    guard1: Guard = TRUE
    guard2: Guard = TRUE


@dataclass(frozen=True)
class SyncMergeSpec:
    transition: str


@dataclass(frozen=True)
class SharedPlaceSpec:
    place: str
    t1: str
    t2: str
    t3: str
    t4: str


def _require(net: VpnNet, names: Iterable[str], which: str) -> None:
    missing = [t for t in names if t not in net.transitions]
    if missing:
        raise MissingTransition(f"{which} has no transition {', '.join(repr(t) for t in missing)}")


def merge_async(n1: VpnNet, n2: VpnNet, spec: AsyncMergeSpec) -> VpnNet:
    """
    Connect t1 in n1 to t2 in n2 through a buffered bridge:
    t1 → S1 → bridge → S2 → t2, where the bridge's guard is the
    conjunction of both sides' guards.

    Raises:
        SharedPlace:       n1 and n2 share a place, or a buffer name is taken.
        SharedTransition:  n1 and n2 share a transition, or the bridge name is taken.
        MissingTransition: t1 or t2 does not exist on its side.
    """
    shared = set(n1.places) & set(n2.places)
    if shared:
        raise SharedPlace(f"nets share place(s): {', '.join(sorted(shared))}")
    shared_t = set(n1.transitions) & set(n2.transitions)
    if shared_t:
        raise SharedTransition(f"nets share transition(s): {', '.join(sorted(shared_t))}")
    _require(n1, [spec.t1], "first net")
    _require(n2, [spec.t2], "second net")
    taken = set(n1.places) | set(n2.places) | set(n1.transitions) | set(n2.transitions)
    for buffer in (spec.s1, spec.s2):
        if buffer in taken:
            raise SharedPlace(f"buffer place {buffer!r} already exists")
    if spec.bridge in taken:
        raise SharedTransition(f"bridge transition {spec.bridge!r} already exists")

    expr = Multiset(spec.expr)
    arities = expr.arities() or {1}
    if len(arities) != 1:
        raise KindConflict("bridge expression tuples have differing lengths")
    (arity,) = arities
    bridge = VpnNet(
        constants=(frozenset({spec.s1, spec.s2}) | (expr.names() - n1.variables - n2.variables)
                   | spec.guard1.constants() | spec.guard2.constants()),
        variables=frozenset(expr.names() & (n1.variables | n2.variables)),
        places={
            spec.s1: Place(spec.s1, arity, PlaceClass.INTERFACE),
            spec.s2: Place(spec.s2, arity, PlaceClass.INTERFACE),
        },
        transitions={spec.bridge: Transition(spec.bridge, conjoin(spec.guard1, spec.guard2))},
        arcs=(
            Arc(spec.t1, spec.s1, expr),
            Arc(spec.s1, spec.bridge, expr),
            Arc(spec.bridge, spec.s2, expr),
            Arc(spec.s2, spec.t2, expr),
        ),
    )
    # The bridge fragment refers to t1/t2, which the union supplies.
    merged = _union([("n1", n1), ("n2", n2), ("bridge", bridge)])
    logger.info("Async merge %s -> %s via %s", spec.t1, spec.t2, spec.bridge)
    return merged


def merge_sync(n1: VpnNet, n2: VpnNet, spec: SyncMergeSpec) -> VpnNet:
    """
    Fuse the transition `spec.transition` present in both nets into one
    transition consuming and producing on both sides, guarded by the
    conjunction of the two guards.

    Raises:
        SharedPlace:       n1 and n2 share a place.
        SharedTransition:  they share a transition other than the fused one.
        MissingTransition: the fused transition is missing on either side.
    """
    t = spec.transition
    _require(n1, [t], "first net")
    _require(n2, [t], "second net")
    shared = set(n1.places) & set(n2.places)
    if shared:
        raise SharedPlace(f"nets share place(s): {', '.join(sorted(shared))}")
    shared_t = (set(n1.transitions) & set(n2.transitions)) - {t}
    if shared_t:
        raise SharedTransition(f"nets share transition(s): {', '.join(sorted(shared_t))}")

    left, right = n1.transitions[t], n2.transitions[t]
    if left.rule.is_noop:
        rule = right.rule
    elif right.rule.is_noop:
        rule = left.rule
    else:
        rule = LinkRule(conjoin(left.rule.condition, right.rule.condition), left.rule.actions + right.rule.actions)
    fused_t = Transition(t, conjoin(left.guard, right.guard), rule, left.klass)

    n1 = replace(n1, transitions={**n1.transitions, t: fused_t})
    n2 = replace(n2, transitions={**n2.transitions, t: fused_t})
    # Arcs of the two sides never collide: their places are disjoint.
    merged = _union([("n1", n1), ("n2", n2)])
    logger.info("Sync merge on %s", t)
    return merged


def merge_shared_virtual(n1: VpnNet, n2: VpnNet, spec: SharedPlaceSpec) -> VpnNet:
    """
    Fuse two nets that talk through one shared virtual place S in a
    request/response pattern: t1 sends and t2 receives on the requester
    side, t3 receives and t4 answers on the responder side. γ0(S) of the
    result is the union of both sides.

    Raises:
        SharedTransition:  n1 and n2 share a transition.
        MissingTransition: one of t1..t4 is missing on its side.
        KindConflict:      S is not a variable of both nets.
    """
    shared_t = set(n1.transitions) & set(n2.transitions)
    if shared_t:
        raise SharedTransition(f"nets share transition(s): {', '.join(sorted(shared_t))}")
    _require(n1, [spec.t1, spec.t2], "requester net")
    _require(n2, [spec.t3, spec.t4], "responder net")
    if spec.place not in n1.variables or spec.place not in n2.variables:
        raise KindConflict(f"{spec.place!r} is not a variable of both nets")
    merged = _union([("n1", n1), ("n2", n2)])
    logger.info("Shared-place merge on %s (γ0 = %s)", spec.place, sorted(merged.gamma0[spec.place]))
    return merged


# ────────────────────────────────────────────────────────────
#  Bounded liveness
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Live:
    verdict: str = "live"


@dataclass(frozen=True)
class NotLive:
    node: Configuration
    transition: str
    path: list = field(default_factory=list)
    verdict: str = "not-live"


@dataclass(frozen=True)
class Unknown:
    reason: str = ""
    verdict: str = "unknown"


LivenessResult = Live | NotLive | Unknown


def check_liveness(
    net: VpnNet,
    bounds: Optional[ExplorationBounds] = None,
    finals: Iterable[Configuration] = (),
    replenished: Iterable[str] = (),
    final_places: Iterable[str] = (),
) -> LivenessResult:
    """
    Bounded liveness over the configuration graph.

    Every run eventually settles in a bottom strongly connected component,
    so the net is live iff every bottom component fires every transition.
    Components containing a designated final configuration (or one
    marking all `final_places`) are excluded. A component with an
    unexplored node gives no verdict; if no counterexample is found and
    the exploration was truncated the result is Unknown.
    """
    ct = build_ct(net, bounds, replenished=replenished)
    cg = ct_to_cg(ct)
    finals = set(finals)
    final_places = frozenset(final_places)
    everything = set(net.transitions)

    def is_final(n: int) -> bool:
        cfg = cg.configuration(n)
        return cfg in finals or (bool(final_places) and cfg.marks_all(final_places))

    condensed = nx.condensation(cg.graph)
    bottoms = [c for c in condensed.nodes if condensed.out_degree(c) == 0]
    blocked = False
    for comp in sorted(bottoms, key=lambda c: min(condensed.nodes[c]["members"])):
        members = condensed.nodes[comp]["members"]
        if any(is_final(n) for n in members):
            continue
        if not all(cg.explored(n) for n in members):
            blocked = True
            continue
        fired = {
            data["transition"]
            for u, v, data in cg.graph.subgraph(members).edges(data=True)
        }
        missing = sorted(everything - fired)
        if missing:
            node = min(members)
            logger.info("Not live: %s never fires again from configuration %s", missing[0], cg.configuration(node).digest())
            return NotLive(
                node=cg.configuration(node),
                transition=missing[0],
                path=[e.as_step() for e in ct.path_to(node)],
            )

    if ct.truncated or blocked:
        return Unknown("exploration truncated before every bottom component was explored")
    return Live()
