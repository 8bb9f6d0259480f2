"""
firing.py — Binding enumeration, enabledness and the firing rule.

Candidate bindings are produced by matching input-arc tuple patterns
against the tokens actually present, so the search only visits
assignments the marking can support. Every candidate is then checked
against the full enabling condition by `is_enabled`, which is also what
`fire` uses to reject a bad step.
"""

from __future__ import annotations

import logging
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence

from errors import ConflictingBinding, InvalidTrace, NotEnabled, UnboundVariable, UnknownTransition
from guards import LinkOp
from net import EMPTY, Binding, Configuration, Multiset, VpnNet

logger = logging.getLogger(__name__)

Step = tuple[str, Binding]


# ────────────────────────────────────────────────────────────
#  Bound arc expressions
# ────────────────────────────────────────────────────────────

def bound_inputs(net: VpnNet, t: str, binding: Mapping[str, str]) -> dict[str, Multiset]:
    """Per-place demand of t under a binding, solid and virtual arcs summed."""
    demand: dict[str, Multiset] = {}
    for arc in net.input_arcs(t):
        place = binding.get(arc.source, arc.source) if net.is_variable(arc.source) else arc.source
        demand[place] = demand.get(place, EMPTY) + arc.expr.substitute(binding)
    return demand


def bound_outputs(net: VpnNet, t: str, binding: Mapping[str, str]) -> dict[str, Multiset]:
    """Per-place supply of t under a binding."""
    supply: dict[str, Multiset] = {}
    for arc in net.output_arcs(t):
        place = binding.get(arc.target, arc.target) if net.is_variable(arc.target) else arc.target
        supply[place] = supply.get(place, EMPTY) + arc.expr.substitute(binding)
    return supply


# ────────────────────────────────────────────────────────────
#  Enabledness
# ────────────────────────────────────────────────────────────

def is_enabled(net: VpnNet, t: str, binding: Mapping[str, str], cfg: Configuration) -> bool:
    """
    Check every enabling clause for one (transition, binding) pair.

    The binding must be total over the transition's variables; partial
    bindings are simply not enabled.
    """
    if t not in net.transitions:
        raise UnknownTransition(t)
    trans = net.transitions[t]
    if not net.variables_of(t) <= binding.keys():
        return False

    try:
        if not trans.guard.evaluate(binding):
            return False
    except UnboundVariable:
        return False

    for arc in net.virtual_inputs(t):
        place = binding[arc.source]
        if place not in cfg.gamma_of(arc.source) or not cfg.has_place(place):
            return False
        if arc.expr and arc.expr.arities() != {cfg.arity(place)}:
            return False

    for arc in net.virtual_outputs(t):
        place = binding[arc.target]
        if place in net.transitions:
            return False
        if cfg.has_place(place):
            if arc.expr and arc.expr.arities() != {cfg.arity(place)}:
                return False
        elif not arc.expr or len(arc.expr.arities()) != 1:
            return False

    for place, need in bound_inputs(net, t, binding).items():
        if not cfg.tokens(place).covers(need):
            return False
    return True


def _unify(pattern: tuple[str, ...], token: tuple[str, ...], binding: dict[str, str],
           variables: frozenset[str]) -> Optional[dict[str, str]]:
    if len(pattern) != len(token):
        return None
    out = binding
    for x, value in zip(pattern, token):
        if x in variables:
            bound = out.get(x)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[x] = value
            elif bound != value:
                return None
        elif x != value:
            return None
    return out


def _match_patterns(patterns: Sequence[tuple[str, ...]], tokens: Multiset,
                    binding: dict[str, str], variables: frozenset[str]) -> Iterator[dict[str, str]]:
    if not patterns:
        yield binding
        return
    head, rest = patterns[0], patterns[1:]
    for token in tokens.distinct():
        unified = _unify(head, token, binding, variables)
        if unified is not None:
            yield from _match_patterns(rest, tokens, unified, variables)


def _candidates(net: VpnNet, t: str, cfg: Configuration) -> Iterator[dict[str, str]]:
    variables = net.variables
    steps: list[tuple[str, Any]] = [("solid", a) for a in net.solid_inputs(t)]
    steps += [("virtual", a) for a in net.virtual_inputs(t)]

    def walk(i: int, binding: dict[str, str]) -> Iterator[dict[str, str]]:
        if i == len(steps):
            yield binding
            return
        kind, arc = steps[i]
        patterns = arc.expr.distinct()
        if kind == "solid":
            for b in _match_patterns(patterns, cfg.tokens(arc.source), binding, variables):
                yield from walk(i + 1, b)
            return
        v = arc.source
        if v in binding:
            choices = [binding[v]]
        else:
            choices = sorted(p for p in cfg.gamma_of(v) if cfg.has_place(p))
        for place in choices:
            extended = binding if v in binding else {**binding, v: place}
            for b in _match_patterns(patterns, cfg.tokens(place), extended, variables):
                yield from walk(i + 1, b)

    yield from walk(0, {})


def _complete(binding: dict[str, str], free: list[str], constants: list[str]) -> Iterator[dict[str, str]]:
    if not free:
        yield binding
        return
    head, rest = free[0], free[1:]
    for c in constants:
        yield from _complete({**binding, head: c}, rest, constants)


def enabled_bindings(net: VpnNet, t: str, cfg: Configuration) -> list[Binding]:
    """
    All bindings under which t is enabled in cfg, sorted.

    Raises:
        UnknownTransition: if t is not a transition of the net.
    """
    if t not in net.transitions:
        raise UnknownTransition(t)
    wanted = net.variables_of(t)
    constants = sorted(net.constants)
    found: set[Binding] = set()
    for partial in _candidates(net, t, cfg):
        free = sorted(wanted - partial.keys())
        for full in _complete(partial, free, constants):
            candidate = Binding({v: full[v] for v in wanted})
            if candidate not in found and is_enabled(net, t, candidate, cfg):
                found.add(candidate)
    return sorted(found)


def successors(net: VpnNet, cfg: Configuration) -> list[tuple[str, Binding, Configuration]]:
    """Every (transition, binding, next configuration) from cfg, in a stable order."""
    out = []
    for t in sorted(net.transitions):
        for b in enabled_bindings(net, t, cfg):
            out.append((t, b, _apply(net, t, b, cfg)))
    return out


# ────────────────────────────────────────────────────────────
#  Firing
# ────────────────────────────────────────────────────────────

def fire(net: VpnNet, t: str, binding: Mapping[str, str], cfg: Configuration) -> Configuration:
    """
    Fire t under binding, returning the successor configuration.

    Raises:
        UnknownTransition: if t is not a transition of the net.
        NotEnabled: if the binding does not enable t in cfg.
    """
    if not is_enabled(net, t, binding, cfg):
        raise NotEnabled(t, binding if isinstance(binding, Binding) else Binding(binding))
    return _apply(net, t, binding, cfg)


def _apply(net: VpnNet, t: str, binding: Mapping[str, str], cfg: Configuration) -> Configuration:
    places = dict(cfg.place_map)
    for arc in net.virtual_outputs(t):
        place = binding[arc.target]
        if place not in places:
            (arity,) = arc.expr.arities()
            places[place] = arity

    gamma = {v: set(rng) for v, rng in cfg.gamma}
    rule = net.transitions[t].rule
    if rule.actions and rule.condition.evaluate(binding):
        for action in rule.actions:
            target = binding[action.variable]
            if action.op is LinkOp.ADD:
                gamma.setdefault(action.variable, set()).add(target)
            else:
                gamma.get(action.variable, set()).discard(target)

    marking = dict(cfg.marking_map)
    for place, need in bound_inputs(net, t, binding).items():
        marking[place] = marking.get(place, EMPTY) - need
    for place, give in bound_outputs(net, t, binding).items():
        marking[place] = marking.get(place, EMPTY) + give

    return Configuration.build(marking, places, gamma)


# ────────────────────────────────────────────────────────────
#  Traces
# ────────────────────────────────────────────────────────────

def _as_binding(raw: Any) -> Binding:
    if isinstance(raw, Binding):
        return raw
    if isinstance(raw, Mapping):
        return Binding(raw)
    return Binding.from_pairs(raw)


def _as_step(step: Any) -> Step:
    if isinstance(step, Mapping):
        return step["transition"], _as_binding(step.get("binding", {}))
    t, raw = step
    return t, _as_binding(raw)


def replay(net: VpnNet, path: Iterable[Any], start: Optional[Configuration] = None) -> Configuration:
    """
    Re-fire a path of steps from `start` (Π0 by default).

    Steps are `(transition, binding)` pairs or `{"transition", "binding"}`
    dicts as found in reports and exported graphs.

    Raises:
        NotEnabled: if some step cannot fire.
    """
    cfg = start if start is not None else Configuration.initial(net)
    for step in path:
        t, b = _as_step(step)
        cfg = fire(net, t, b, cfg)
    return cfg


def check_data_sync(net: VpnNet, trace: Iterable[Any], start: Optional[Configuration] = None) -> bool:
    """
    Confirm that every firing of a trace binds each variable to one constant.

    A trace step whose binding lists a variable twice with different
    values, names an unknown transition, or cannot fire is rejected.

    Raises:
        InvalidTrace: if the trace is not a valid firing trace.
    """
    cfg = start if start is not None else Configuration.initial(net)
    for i, step in enumerate(trace):
        try:
            t, b = _as_step(step)
        except ConflictingBinding as exc:
            raise InvalidTrace(f"step {i}: {exc}") from exc
        if t not in net.transitions:
            raise InvalidTrace(f"step {i}: unknown transition {t!r}")
        try:
            cfg = fire(net, t, b, cfg)
        except NotEnabled as exc:
            raise InvalidTrace(f"step {i}: {exc}") from exc
    return True
