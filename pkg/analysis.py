"""
analysis.py — System connectivity, interaction soundness and data validity.

Each analysis takes a multi-component net and a configuration tree built
from its fused net and returns a PropertyVerdict. Negative verdicts carry
a counterexample path of {transition, binding} steps that `firing.replay`
re-fires from the initial configuration; positive verdicts carry a
witness in their evidence.

Checks that follow runs across merged configurations (disconnection
tracking, pending sends, eventual consumption) work on the configuration
graph so that interleavings cut by deduplication are still covered.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import config
from composition import MultiComponentNet
from errors import MissingFinalPlaces, MissingInterfaceSet, NoInterfaceDeclared, NotEnabled
from firing import bound_inputs, bound_outputs, fire
from net import Binding, Configuration, PlaceClass
from statespace import (
    ConfigGraph,
    ConfigTree,
    ExplorationBounds,
    binding_function,
    build_ct,
    ct_to_cg,
    link_set,
    mapping_set,
)

logger = logging.getLogger(__name__)

_STATUS_WORDS = {
    "connectivity": ("holds", "fails"),
    "soundness": ("sound", "unsound"),
    "validity": ("valid", "invalid"),
}


# ────────────────────────────────────────────────────────────
#  Report types
# ────────────────────────────────────────────────────────────

@dataclass
class PropertyVerdict:
    name: str
    holds: bool
    reason: str = ""
    evidence: dict = field(default_factory=dict)
    counterexample: Optional[list[dict]] = None
    within_bounds: bool = False

    @property
    def status(self) -> str:
        yes, no = _STATUS_WORDS.get(self.name, ("holds", "fails"))
        word = yes if self.holds else no
        return f"{word} (within explored space)" if self.within_bounds else word

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "holds": self.holds,
            "status": self.status,
            "reason": self.reason,
            "evidence": self.evidence,
            "counterexample": self.counterexample,
            "within_bounds": self.within_bounds,
        }


@dataclass
class AnalysisReport:
    connectivity: Optional[PropertyVerdict] = None
    soundness: Optional[PropertyVerdict] = None
    validity: Optional[PropertyVerdict] = None
    truncated: bool = False
    mapping_sets: dict[str, list[str]] = field(default_factory=dict)
    binding_functions: dict[str, list[dict]] = field(default_factory=dict)
    link_set: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    def verdicts(self) -> list[PropertyVerdict]:
        return [v for v in (self.connectivity, self.soundness, self.validity) if v is not None]

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts())

    def exit_code(self) -> int:
        """0 = all hold, 1 = some property fails, 3 = bounds truncated the exploration."""
        if self.truncated:
            return 3
        return 0 if self.holds else 1

    def to_dict(self) -> dict:
        return {
            "schema_version": config.REPORT_SCHEMA_VERSION,
            "truncated": self.truncated,
            "holds": self.holds,
            "properties": {v.name: v.to_dict() for v in self.verdicts()},
            "mapping_sets": self.mapping_sets,
            "binding_functions": self.binding_functions,
            "link_set": self.link_set,
            "stats": self.stats,
        }

    def format_text(self) -> str:
        lines = []
        s = self.stats
        if s:
            lines.append(
                f"Explored {s.get('nodes', 0)} configuration(s), {s.get('edges', 0)} firing(s), "
                f"{s.get('complete_paths', 0)} complete path(s)"
                + (" [TRUNCATED]" if self.truncated else "")
            )
        for v in self.verdicts():
            lines.append(f"  {v.name:<13} {v.status}")
            if v.reason:
                lines.append(f"      {v.reason}")
            if v.counterexample:
                steps = " ; ".join(
                    f"{st['transition']}[{Binding(st['binding'])}]" for st in v.counterexample
                )
                lines.append(f"      counterexample: {steps}")
        for var, consts in sorted(self.mapping_sets.items()):
            lines.append(f"  R({var}) = {{{', '.join(consts)}}}")
        if self.link_set:
            for key in ("sustained", "created", "broken"):
                pairs = ", ".join(f"{v}→{c}" for v, c in self.link_set.get(key, []))
                lines.append(f"  {key:<10} {{{pairs}}}")
        return "\n".join(lines)


# ────────────────────────────────────────────────────────────
#  Helpers
# ────────────────────────────────────────────────────────────

def _steps(path) -> list[dict]:
    return [e.as_step() for e in path]


def _cg_step(t: str, b: Binding) -> dict:
    return {"transition": t, "binding": b.to_dict()}


def _first_node(ct: ConfigTree, predicate) -> Optional[int]:
    for node in ct.nodes:
        if predicate(node.configuration):
            return node.id
    return None


def _fallback_path(ct: ConfigTree) -> list[dict]:
    paths = ct.complete_paths()
    if paths:
        return _steps(paths[0])
    leaves = ct.leaves()
    return _steps(ct.path_to(leaves[0].id)) if leaves else []


def _bfs_product(cg: ConfigGraph, start_state, advance):
    """
    Breadth-first search over (graph node, state) pairs.

    `advance(u, v, t, b, state)` returns either ("violation", reason) or
    ("next", new_state). Returns (reason, steps) for the first violation
    found, or None.
    """
    start = (cg.root, start_state)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        u, state = current
        for _, v, t, b in sorted(cg.out_edges(u), key=lambda e: (e[2], e[3], e[1])):
            kind, value = advance(u, v, t, b, state)
            if kind == "violation":
                steps = [_cg_step(t, b)]
                node = current
                while parent[node] is not None:
                    prev, step = parent[node]
                    steps.append(step)
                    node = prev
                steps.reverse()
                return value, steps
            nxt = (v, value)
            if nxt not in parent:
                parent[nxt] = (current, _cg_step(t, b))
                queue.append(nxt)
    return None


def _is_final(mcn: MultiComponentNet, cfg: Configuration) -> bool:
    finals = mcn.final_places
    if not finals:
        return False
    if mcn.final_mode == "independent":
        return any(cfg.tokens(p) for p in finals)
    return cfg.marks_all(finals)


def interface_places(mcn: MultiComponentNet, ct: ConfigTree) -> frozenset[str]:
    """Actual interface places: interface-class places plus declared interfaces that exist as places."""
    seen: set[str] = set()
    for node in ct.nodes:
        seen.update(node.configuration.place_map)
    return mcn.net.places_of_class(PlaceClass.INTERFACE) | (mcn.net.interfaces & seen)


# ────────────────────────────────────────────────────────────
#  System connectivity
# ────────────────────────────────────────────────────────────

def analyze_connectivity(
    mcn: MultiComponentNet,
    ct: ConfigTree,
    variables: Optional[Iterable[str]] = None,
) -> PropertyVerdict:
    """
    Connectivity holds iff every interface variable is bound to some
    constant on some firing.

    Raises:
        NoInterfaceDeclared: if the net has no interface variable.
    """
    wanted = sorted(variables if variables is not None else mcn.interface_variables)
    if not wanted:
        raise NoInterfaceDeclared("no interface variable declared")

    sets = {v: sorted(mapping_set(ct, v)) for v in wanted}
    empty = [v for v in wanted if not sets[v]]
    evidence: dict = {"mapping_sets": sets}
    if empty:
        reason = f"mapping set of {', '.join(empty)} is empty"
        logger.warning("Connectivity fails: %s", reason)
        return PropertyVerdict("connectivity", False, reason, evidence, _fallback_path(ct))

    witness = {}
    for v in wanted:
        edge = next(e for e in ct.edges if v in e.binding)
        witness[v] = _steps(ct.path_to(edge.target))
    evidence["witness"] = witness
    logger.info("Connectivity holds: %s", ", ".join(f"R({v})={{{','.join(sets[v])}}}" for v in wanted))
    return PropertyVerdict("connectivity", True, "", evidence)


# ────────────────────────────────────────────────────────────
#  Interaction soundness
# ────────────────────────────────────────────────────────────

def analyze_soundness(
    mcn: MultiComponentNet,
    ct: ConfigTree,
    interfaces: Optional[Iterable[str]] = None,
    cg: Optional[ConfigGraph] = None,
) -> PropertyVerdict:
    """
    Interaction soundness in five steps:

      1. final places can be marked (all in one configuration, or each
         somewhere when the final mode is "independent");
      2. compute the link set;
      3. every constant occurring in a link is a declared interface;
      4. every created or sustained link is used by some interaction
         transition;
      5. no interaction transition binds a variable to a constant whose
         link was removed, unless that firing re-creates the link.

    Raises:
        MissingInterfaceSet: if no interface set is declared or given.
        MissingFinalPlaces:  if no component declares a final place.
    """
    declared = frozenset(interfaces if interfaces is not None else mcn.net.interfaces)
    if not declared:
        raise MissingInterfaceSet("no interface set declared")
    finals = sorted(mcn.final_places)
    if not finals:
        raise MissingFinalPlaces("no final places declared")
    evidence: dict = {"final_mode": mcn.final_mode}

    def fail(step: int, reason: str, path: list[dict]) -> PropertyVerdict:
        logger.warning("Soundness fails at step %d: %s", step, reason)
        evidence["failed_step"] = step
        return PropertyVerdict("soundness", False, f"step {step}: {reason}", evidence, path)

    # 1. final places
    if mcn.final_mode == "independent":
        reached = {}
        for p in finals:
            n = _first_node(ct, lambda c, p=p: bool(c.tokens(p)))
            if n is None:
                return fail(1, f"final place {p} is never marked", _fallback_path(ct))
            reached[p] = _steps(ct.path_to(n))
        evidence["final_reachability"] = reached
    else:
        n = _first_node(ct, lambda c: c.marks_all(finals))
        if n is None:
            return fail(1, f"no reachable configuration marks all of {', '.join(finals)}", _fallback_path(ct))
        evidence["final_reachability"] = {"all": _steps(ct.path_to(n))}

    # 2. link set
    links = link_set(ct)
    evidence["link_set"] = links.to_dict()

    # 3. links stay within the declared interfaces
    used = links.interfaces
    evidence["interfaces_used"] = sorted(used)
    evidence["interfaces_declared"] = sorted(declared)
    outside = sorted(used - declared)
    if outside:
        c = outside[0]
        n = _first_node(ct, lambda cfg: any(k == c for _, k in cfg.gamma_pairs()))
        path = _steps(ct.path_to(n)) if n is not None else []
        return fail(3, f"link to undeclared interface(s) {', '.join(outside)}", path)

    # 4. connections are usable
    interaction = mcn.interaction_transitions
    usable = {}
    for v, c in sorted(links.created | links.sustained):
        edge = next(
            (e for e in ct.edges if e.transition in interaction and e.binding.get(v) == c),
            None,
        )
        if edge is None:
            n = _first_node(ct, lambda cfg: (v, c) in cfg.gamma_pairs())
            path = _steps(ct.path_to(n)) if n is not None else []
            return fail(4, f"link {v}→{c} is never used by an interaction transition", path)
        usable[f"{v}→{c}"] = edge.transition
    evidence["usable"] = usable

    # 5. disconnected interfaces are not used until reconnected
    cg = cg or ct_to_cg(ct)

    def advance(u, v, t, b, broken):
        after = cg.configuration(v).gamma_pairs()
        if t in interaction:
            for var, const in sorted(b.items()):
                pair = (var, const)
                if pair in broken and pair not in after:
                    return "violation", f"{t} binds {var}→{const} after the link was removed"
        before = cg.configuration(u).gamma_pairs()
        return "next", frozenset((broken | (before - after)) - after)

    found = _bfs_product(cg, frozenset(), advance)
    if found:
        reason, path = found
        return fail(5, reason, path)

    evidence["disconnections"] = len(links.broken)
    logger.info("Soundness holds: interfaces used %s ⊆ declared", sorted(used))
    return PropertyVerdict("soundness", True, "", evidence)


# ────────────────────────────────────────────────────────────
#  Data validity
# ────────────────────────────────────────────────────────────

def analyze_validity(
    mcn: MultiComponentNet,
    ct: ConfigTree,
    cg: Optional[ConfigGraph] = None,
) -> PropertyVerdict:
    """
    Data validity in three clauses:

      1. every firing instantiates each of its variables exactly once
         and replays to the recorded successor;
      2. a transition never sends into an actual interface place a second
         time while its earlier data is still there and unconsumed;
      3. data put into an interface place is eventually consumed on every
         run, unless the run ends in a final configuration.
    """
    net = mcn.net
    evidence: dict = {}

    def fail(clause: int, reason: str, path: list[dict]) -> PropertyVerdict:
        logger.warning("Validity fails at clause %d: %s", clause, reason)
        evidence["failed_clause"] = clause
        return PropertyVerdict("validity", False, f"clause {clause}: {reason}", evidence, path)

    # 1. one instantiation per formal parameter, replay-checked
    for edge in ct.edges:
        parent = ct.nodes[edge.source].configuration
        child = ct.nodes[edge.target].configuration
        wanted = net.variables_of(edge.transition)
        path = _steps(ct.path_to(edge.target))
        if set(edge.binding) != set(wanted):
            return fail(1, f"{edge.transition} binding does not instantiate exactly {sorted(wanted)}", path)
        try:
            replayed = fire(net, edge.transition, edge.binding, parent)
        except NotEnabled as exc:
            return fail(1, str(exc), path)
        if replayed != child:
            return fail(1, f"{edge.transition} does not replay to the recorded configuration", path)
    evidence["replayed_firings"] = len(ct.edges)

    places = interface_places(mcn, ct)
    evidence["interface_places"] = sorted(places)
    cg = cg or ct_to_cg(ct)

    # 2. non-repeatable sends
    def advance(u, v, t, b, pending):
        marking = cg.configuration(u)
        supply = bound_outputs(net, t, b)
        demand = bound_inputs(net, t, b)
        for place in sorted(places):
            if supply.get(place) and (t, place) in pending and marking.tokens(place):
                return "violation", f"{t} sends into {place} again before its data was consumed"
        consumed = {p for p in places if demand.get(p)}
        kept = {(tt, p) for tt, p in pending if p not in consumed}
        kept |= {(t, p) for p in places if supply.get(p)}
        return "next", frozenset(kept)

    found = _bfs_product(cg, frozenset(), advance)
    if found:
        reason, path = found
        return fail(2, reason, path)

    # 3. no stranded interface data, one place at a time
    moves = {
        n: [(v, t, b, frozenset(p for p, ms in bound_inputs(net, t, b).items() if p in places and ms))
            for _, v, t, b in sorted(cg.out_edges(n), key=lambda e: (e[2], e[3], e[1]))]
        for n in cg.graph.nodes
    }
    for place in sorted(places):
        good = _eventually_consumed(mcn, cg, place, moves)
        bad = sorted(n for n in cg.graph.nodes if n not in good)
        if bad:
            n = bad[0]
            path = _steps(ct.path_to(n)) + _escape(n, place, good, moves)
            return fail(3, f"data in {place} can stay unconsumed forever", path)

    logger.info("Validity holds over %d interface place(s)", len(places))
    return PropertyVerdict("validity", True, "", evidence)


def _eventually_consumed(mcn: MultiComponentNet, cg: ConfigGraph, place: str, moves: dict) -> set[int]:
    """Nodes from which every run takes from `place`, finds it empty or stops in a final configuration."""
    graph = cg.graph
    good = {
        n for n in graph.nodes
        if not cg.explored(n)
        or not cg.configuration(n).tokens(place)
        or (not moves[n] and _is_final(mcn, cg.configuration(n)))
    }
    changed = True
    while changed:
        changed = False
        for n in graph.nodes:
            if n in good or not moves[n]:
                continue
            if all(place in taken or v in good for v, _, _, taken in moves[n]):
                good.add(n)
                changed = True
    return good


def _escape(start: int, place: str, good: set[int], moves: dict) -> list[dict]:
    """Extend a run from a bad node, never taking from `place`, until it dead-ends or loops."""
    steps = []
    seen = {start}
    node = start
    while True:
        nxt = next(((v, t, b) for v, t, b, taken in moves[node] if v not in good and place not in taken), None)
        if nxt is None:
            return steps
        v, t, b = nxt
        steps.append(_cg_step(t, b))
        if v in seen:
            return steps
        seen.add(v)
        node = v


# ────────────────────────────────────────────────────────────
#  Full report
# ────────────────────────────────────────────────────────────

PROPERTIES = ("connectivity", "soundness", "validity")


def full_report(
    mcn: MultiComponentNet,
    bounds: Optional[ExplorationBounds] = None,
    properties: Iterable[str] = PROPERTIES,
) -> AnalysisReport:
    """Build the configuration tree once and run the requested analyses over it."""
    wanted = set(properties)
    unknown = wanted - set(PROPERTIES)
    if unknown:
        raise ValueError(f"unknown propert(ies): {', '.join(sorted(unknown))}")

    ct = build_ct(mcn.net, bounds)
    cg = ct_to_cg(ct)
    report = AnalysisReport(truncated=ct.truncated, stats=ct.stats())

    if "connectivity" in wanted:
        try:
            report.connectivity = analyze_connectivity(mcn, ct)
        except NoInterfaceDeclared as exc:
            report.connectivity = PropertyVerdict("connectivity", False, str(exc), {}, _fallback_path(ct))

    if "soundness" in wanted:
        if not mcn.final_places and not mcn.net.interfaces:
            report.soundness = PropertyVerdict(
                "soundness", True, "vacuous: no final places and no interface set", {},
            )
        else:
            try:
                report.soundness = analyze_soundness(mcn, ct, cg=cg)
            except (MissingInterfaceSet, MissingFinalPlaces) as exc:
                report.soundness = PropertyVerdict("soundness", False, str(exc), {}, _fallback_path(ct))

    if "validity" in wanted:
        report.validity = analyze_validity(mcn, ct, cg=cg)

    if ct.truncated:
        for v in report.verdicts():
            v.within_bounds = True

    for var in sorted(mcn.interface_variables):
        report.mapping_sets[var] = sorted(mapping_set(ct, var))
    for t in sorted(mcn.interaction_transitions & set(mcn.net.transitions)):
        report.binding_functions[t] = [b.to_dict() for b in sorted(binding_function(ct, t))]
    report.link_set = link_set(ct).to_dict()

    logger.info(
        "Report: %s",
        ", ".join(f"{v.name}={v.status}" for v in report.verdicts()) or "no properties",
    )
    return report
