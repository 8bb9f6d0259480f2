"""
statespace.py — Configuration tree, configuration graph and the behaviour
artefacts derived from them (languages, mapping sets, binding functions,
connectivity set, link set).

The tree is built breadth-first. Each level's successors can be computed
on a thread pool; the results are merged back in node-id order, so the
tree is identical for any worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Optional

import networkx as nx

import config
from errors import InvalidNet, UnknownConfiguration, UnknownTransition, UnknownVariable
from firing import successors
from net import Binding, Configuration, Multiset, VpnNet, validate_net

logger = logging.getLogger(__name__)

GammaPairs = frozenset[tuple[str, str]]


# ────────────────────────────────────────────────────────────
#  Bounds
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExplorationBounds:
    max_configs: int = field(default_factory=lambda: config.MAX_CONFIGS)
    max_depth: int = field(default_factory=lambda: config.MAX_DEPTH)
    max_language_len: int = field(default_factory=lambda: config.MAX_LANGUAGE_LEN)
    dedup_mode: str = field(default_factory=lambda: config.DEDUP_MODE)
    max_sequences: int = field(default_factory=lambda: config.MAX_SEQUENCES)
    workers: int = field(default_factory=lambda: config.EXPLORE_WORKERS)

    def __post_init__(self):
        errors = []
        if self.max_configs < 1:
            errors.append("max_configs must be >= 1")
        if self.max_depth < 1:
            errors.append("max_depth must be >= 1")
        if self.max_language_len < 0:
            errors.append("max_language_len must be >= 0")
        if self.max_sequences < 1:
            errors.append("max_sequences must be >= 1")
        if self.workers < 1:
            errors.append("workers must be >= 1")
        if self.dedup_mode not in ("global", "path"):
            errors.append(f"dedup_mode must be 'global' or 'path', got {self.dedup_mode!r}")
        if errors:
            raise ValueError("; ".join(errors))


# ────────────────────────────────────────────────────────────
#  Configuration tree
# ────────────────────────────────────────────────────────────

class NodeStatus(str, Enum):
    INTERIOR = "interior"
    DEADLOCK = "leaf-deadlock"
    DUPLICATE = "leaf-duplicate"
    BOUND = "leaf-bound"
    PENDING = "pending"

    @property
    def is_leaf(self) -> bool:
        return self is not NodeStatus.INTERIOR


@dataclass
class CtNode:
    id: int
    configuration: Configuration
    status: NodeStatus
    depth: int
    parent: Optional[int] = None


@dataclass(frozen=True)
class CtEdge:
    source: int
    target: int
    transition: str
    binding: Binding

    def as_step(self) -> dict:
        return {"transition": self.transition, "binding": self.binding.to_dict()}


@dataclass
class ConfigTree:
    nodes: list[CtNode]
    edges: list[CtEdge]
    truncated: bool = False
    dedup_mode: str = "global"
    variables: frozenset[str] = frozenset()
    transitions: frozenset[str] = frozenset()

    @property
    def root(self) -> CtNode:
        return self.nodes[0]

    @cached_property
    def _children(self) -> dict[int, list[CtEdge]]:
        index: dict[int, list[CtEdge]] = {n.id: [] for n in self.nodes}
        for edge in self.edges:
            index[edge.source].append(edge)
        return index

    @cached_property
    def _incoming(self) -> dict[int, CtEdge]:
        return {edge.target: edge for edge in self.edges}

    @cached_property
    def _first_explored(self) -> dict[Configuration, int]:
        first: dict[Configuration, int] = {}
        for node in self.nodes:
            if node.status is not NodeStatus.DUPLICATE:
                first.setdefault(node.configuration, node.id)
        return first

    def children(self, node_id: int) -> list[CtEdge]:
        return self._children.get(node_id, [])

    def representative(self, node_id: int) -> int:
        """The node a duplicate leaf stands for; other nodes map to themselves."""
        node = self.nodes[node_id]
        if node.status is NodeStatus.DUPLICATE:
            return self._first_explored.get(node.configuration, node_id)
        return node_id

    def path_to(self, node_id: int) -> list[CtEdge]:
        path = []
        while node_id in self._incoming:
            edge = self._incoming[node_id]
            path.append(edge)
            node_id = edge.source
        path.reverse()
        return path

    def leaves(self, status: Optional[NodeStatus] = None) -> list[CtNode]:
        return [
            n for n in self.nodes
            if n.status.is_leaf and (status is None or n.status is status)
        ]

    def complete_paths(self) -> list[list[CtEdge]]:
        """Every root-to-deadlock path."""
        return [self.path_to(n.id) for n in self.leaves(NodeStatus.DEADLOCK)]

    def stats(self) -> dict:
        counts = {s.value: 0 for s in NodeStatus if s is not NodeStatus.PENDING}
        for n in self.nodes:
            counts[n.status.value] = counts.get(n.status.value, 0) + 1
        return {
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "depth": max((n.depth for n in self.nodes), default=0),
            "complete_paths": counts[NodeStatus.DEADLOCK.value],
            "status": counts,
            "truncated": self.truncated,
        }


def _replenish(cfg: Configuration, replenished: frozenset[str]) -> Configuration:
    if not replenished:
        return cfg
    marking = dict(cfg.marking_map)
    for p in replenished:
        if p in marking:
            marking[p] = Multiset({tok: config.REPLENISH_LEVEL for tok in marking[p].distinct()})
    return Configuration.build(marking, cfg.place_map, cfg.gamma_map)


def build_ct(
    net: VpnNet,
    bounds: Optional[ExplorationBounds] = None,
    *,
    replenished: Iterable[str] = (),
) -> ConfigTree:
    """
    Expand the configuration tree of a net breadth-first.

    Args:
        net:         A net that passes validate_net.
        bounds:      Size and depth limits; defaults come from config.
        replenished: Places treated as an unbounded supply. Their token
                     kinds never run out.

    Returns:
        The tree. `truncated` is set when a bound stopped the expansion.

    Raises:
        InvalidNet: if the net has structural violations.
    """
    violations = validate_net(net)
    if violations:
        raise InvalidNet(violations)
    bounds = bounds or ExplorationBounds()
    replenished = frozenset(replenished)

    root = _replenish(Configuration.initial(net), replenished)
    nodes = [CtNode(0, root, NodeStatus.PENDING, 0)]
    edges: list[CtEdge] = []
    seen: set[Configuration] = {root}
    truncated = False

    logger.info(
        "Exploring %d transition(s), %d place(s) — max_configs=%d max_depth=%d dedup=%s",
        len(net.transitions), len(net.places), bounds.max_configs, bounds.max_depth, bounds.dedup_mode,
    )

    def expand(cfg: Configuration):
        return successors(net, cfg)

    executor = ThreadPoolExecutor(max_workers=bounds.workers) if bounds.workers > 1 else None
    try:
        frontier = [0]
        while frontier:
            configs = [nodes[i].configuration for i in frontier]
            results = list(executor.map(expand, configs)) if executor else [expand(c) for c in configs]

            next_frontier: list[int] = []
            for node_id, succs in zip(frontier, results):
                node = nodes[node_id]
                if not succs:
                    node.status = NodeStatus.DEADLOCK
                    continue
                if node.depth >= bounds.max_depth or len(nodes) + len(succs) > bounds.max_configs:
                    node.status = NodeStatus.BOUND
                    truncated = True
                    continue
                node.status = NodeStatus.INTERIOR
                ancestors = _ancestors(nodes, node_id) if bounds.dedup_mode == "path" else None

                for t, b, succ in succs:
                    succ = _replenish(succ, replenished)
                    child_id = len(nodes)
                    duplicate = succ in seen if ancestors is None else succ in ancestors
                    status = NodeStatus.DUPLICATE if duplicate else NodeStatus.PENDING
                    nodes.append(CtNode(child_id, succ, status, node.depth + 1, node_id))
                    edges.append(CtEdge(node_id, child_id, t, b))
                    if not duplicate:
                        seen.add(succ)
                        next_frontier.append(child_id)

            logger.debug("Level done: %d node(s), frontier %d", len(nodes), len(next_frontier))
            frontier = next_frontier
    finally:
        if executor:
            executor.shutdown()

    tree = ConfigTree(
        nodes=nodes,
        edges=edges,
        truncated=truncated,
        dedup_mode=bounds.dedup_mode,
        variables=net.variables,
        transitions=frozenset(net.transitions),
    )
    stats = tree.stats()
    logger.info(
        "CT built: %d node(s), %d edge(s), depth %d, %d complete path(s)",
        stats["nodes"], stats["edges"], stats["depth"], stats["complete_paths"],
    )
    if truncated:
        logger.warning("Exploration truncated by bounds; results hold within the explored space only")
    return tree


def _ancestors(nodes: list[CtNode], node_id: int) -> set[Configuration]:
    out = set()
    current: Optional[int] = node_id
    while current is not None:
        out.add(nodes[current].configuration)
        current = nodes[current].parent
    return out


# ────────────────────────────────────────────────────────────
#  Configuration graph
# ────────────────────────────────────────────────────────────

_EXPLORED = (NodeStatus.INTERIOR, NodeStatus.DEADLOCK)


@dataclass
class ConfigGraph:
    """
    The CT quotiented by configuration equality.

    Graph nodes are the id of the first CT node carrying a configuration;
    node attributes hold the configuration and whether any CT node for it
    was fully expanded.
    """
    graph: nx.MultiDiGraph
    root: int
    truncated: bool = False

    @cached_property
    def _index(self) -> dict[Configuration, int]:
        return {data["configuration"]: n for n, data in self.graph.nodes(data=True)}

    def node_for(self, cfg: Configuration) -> int:
        try:
            return self._index[cfg]
        except KeyError:
            raise UnknownConfiguration(f"configuration {cfg.digest()} is not in the graph") from None

    def configuration(self, node: int) -> Configuration:
        return self.graph.nodes[node]["configuration"]

    def explored(self, node: int) -> bool:
        return self.graph.nodes[node]["explored"]

    def out_edges(self, node: int) -> Iterator[tuple[int, int, str, Binding]]:
        for u, v, data in self.graph.out_edges(node, data=True):
            yield u, v, data["transition"], data["binding"]

    def __len__(self) -> int:
        return self.graph.number_of_nodes()


def ct_to_cg(ct: ConfigTree) -> ConfigGraph:
    """Merge CT nodes that carry equal configurations."""
    graph = nx.MultiDiGraph()
    rep: dict[Configuration, int] = {}
    for node in ct.nodes:
        n = rep.setdefault(node.configuration, node.id)
        if n not in graph:
            graph.add_node(n, configuration=node.configuration, explored=False)
        if node.status in _EXPLORED:
            graph.nodes[n]["explored"] = True
    for edge in ct.edges:
        u = rep[ct.nodes[edge.source].configuration]
        v = rep[ct.nodes[edge.target].configuration]
        graph.add_edge(u, v, transition=edge.transition, binding=edge.binding)
    logger.debug("CG: %d node(s) from %d CT node(s)", graph.number_of_nodes(), len(ct.nodes))
    return ConfigGraph(graph=graph, root=0, truncated=ct.truncated)


def reachability_set(cg: ConfigGraph, start: Configuration) -> frozenset[Configuration]:
    """
    R(Π): every configuration reachable from `start`, itself included.

    Raises:
        UnknownConfiguration: if `start` is not a node of the graph.
    """
    node = cg.node_for(start)
    reach = nx.descendants(cg.graph, node) | {node}
    return frozenset(cg.configuration(n) for n in reach)


# ────────────────────────────────────────────────────────────
#  Languages
# ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Languages:
    control: frozenset[tuple[str, ...]]
    data: frozenset[tuple[Binding, ...]]
    connectivity: frozenset[tuple[GammaPairs, ...]]
    new_link: frozenset[tuple[GammaPairs, ...]]
    broken_link: frozenset[tuple[GammaPairs, ...]]
    truncated: bool = False


def _paths_from(ct: ConfigTree, start: int, max_len: int) -> Iterator[tuple[CtEdge, ...]]:
    stack: list[tuple[int, tuple[CtEdge, ...]]] = [(start, ())]
    while stack:
        node_id, path = stack.pop()
        yield path
        if len(path) >= max_len:
            continue
        for edge in reversed(ct.children(ct.representative(node_id))):
            stack.append((edge.target, path + (edge,)))


def languages(
    ct: ConfigTree,
    max_len: int,
    anchor: Optional[str] = None,
    max_sequences: Optional[int] = None,
) -> Languages:
    """
    Bounded control, data, connectivity, new-link and broken-link languages.

    Paths continue through duplicate leaves via the node they duplicate,
    so sequences are not cut short by deduplication. Every language is
    prefix-closed. The walk stops after `max_sequences` paths and flags
    the result as truncated.
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    anchor = anchor or config.LANGUAGE_ANCHOR
    cap = max_sequences or config.MAX_SEQUENCES
    if anchor == "root":
        starts = [ct.root.id]
    elif anchor == "any":
        starts = sorted({ct.representative(n.id) for n in ct.nodes})
    else:
        raise ValueError(f"anchor must be 'root' or 'any', got {anchor!r}")

    control, data, conn, new, broken = set(), set(), set(), set(), set()
    visited = 0
    truncated = False
    for start in starts:
        for path in _paths_from(ct, start, max_len):
            if visited >= cap:
                truncated = True
                break
            visited += 1
            before = ct.nodes[start].configuration.gamma_pairs()
            gammas, plus, minus = [], [], []
            for edge in path:
                after = ct.nodes[edge.target].configuration.gamma_pairs()
                gammas.append(after)
                plus.append(after - before)
                minus.append(before - after)
                before = after
            control.add(tuple(e.transition for e in path))
            data.add(tuple(e.binding for e in path))
            conn.add(tuple(gammas))
            new.add(tuple(plus))
            broken.add(tuple(minus))
        if truncated:
            logger.warning("Language enumeration capped at %d sequence(s)", cap)
            break

    return Languages(
        control=frozenset(control),
        data=frozenset(data),
        connectivity=frozenset(conn),
        new_link=frozenset(new),
        broken_link=frozenset(broken),
        truncated=truncated,
    )


def project_language(language: Iterable[tuple], keep: Iterable) -> frozenset[tuple]:
    """Erase every symbol outside `keep` from each sequence."""
    keep = set(keep)
    return frozenset(tuple(x for x in seq if x in keep) for seq in language)


def extend_language(
    language: Iterable[tuple],
    x_alphabet: Iterable,
    y_alphabet: Iterable,
    max_len: int,
) -> frozenset[tuple]:
    """
    Bounded inverse image of a projection: all sequences over X of length
    at most `max_len` whose projection onto Y is in `language`.
    """
    y_set = set(y_alphabet)
    extra = sorted(set(x_alphabet) - y_set)
    out: set[tuple] = set()

    def grow(target: tuple, i: int, prefix: tuple) -> None:
        if len(prefix) > max_len:
            return
        if i == len(target):
            out.add(prefix)
        else:
            grow(target, i + 1, prefix + (target[i],))
        for x in extra:
            grow(target, i, prefix + (x,))

    for seq in language:
        if len(seq) <= max_len and all(x in y_set for x in seq):
            grow(tuple(seq), 0, ())
    return frozenset(out)


# ────────────────────────────────────────────────────────────
#  Mapping sets, binding functions, links
# ────────────────────────────────────────────────────────────

def mapping_set(ct: ConfigTree, q: str) -> frozenset[str]:
    """
    ℛ(q): every constant q is bound to on some CT edge.

    Raises:
        UnknownVariable: if q is not a variable of the explored net.
    """
    if q not in ct.variables:
        raise UnknownVariable(q)
    return frozenset(e.binding[q] for e in ct.edges if q in e.binding)


def binding_function(ct: ConfigTree, t: str) -> frozenset[Binding]:
    """
    𝒱(t): every binding t fires under in the CT.

    Raises:
        UnknownTransition: if t is not a transition of the explored net.
    """
    if t not in ct.transitions:
        raise UnknownTransition(t)
    return frozenset(e.binding for e in ct.edges if e.transition == t)


def connectivity_set(ct: ConfigTree) -> frozenset[GammaPairs]:
    """Γ(N): the initial γ together with γ′ of every reachable configuration."""
    return frozenset(n.configuration.gamma_pairs() for n in ct.nodes)


@dataclass(frozen=True)
class LinkSet:
    sustained: GammaPairs
    created: GammaPairs
    broken: GammaPairs

    @property
    def interfaces(self) -> frozenset[str]:
        """Constants occurring in any link."""
        return frozenset(c for _, c in self.sustained | self.created | self.broken)

    def to_dict(self) -> dict:
        def pairs(s: GammaPairs) -> list[list[str]]:
            return [list(p) for p in sorted(s)]
        return {
            "sustained": pairs(self.sustained),
            "created": pairs(self.created),
            "broken": pairs(self.broken),
        }


def link_set(ct: ConfigTree) -> LinkSet:
    """
    𝕃 = {𝔸, ℂ, 𝕂} over the explored tree.

    ℂ holds pairs seen in some γ′ but not in the initial γ; 𝕂 holds pairs
    removed by at least one firing; 𝔸 holds pairs seen somewhere and
    never removed.
    """
    initial = ct.root.configuration.gamma_pairs()
    seen: set[tuple[str, str]] = set()
    for node in ct.nodes:
        seen |= node.configuration.gamma_pairs()
    broken: set[tuple[str, str]] = set()
    for edge in ct.edges:
        before = ct.nodes[edge.source].configuration.gamma_pairs()
        after = ct.nodes[edge.target].configuration.gamma_pairs()
        broken |= before - after
    return LinkSet(
        sustained=frozenset(seen - broken),
        created=frozenset(seen - initial),
        broken=frozenset(broken),
    )
