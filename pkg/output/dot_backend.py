"""
output/dot_backend.py — Graphviz DOT exporter.

Nodes are labelled with the configuration digest and their status;
edges with "t [β]". Only the DOT source is produced, so no Graphviz
binaries are needed to export.
"""

import logging

import graphviz

from output.base import GraphExporter
from statespace import ConfigGraph, ConfigTree, NodeStatus

logger = logging.getLogger(__name__)

_NODE_STYLE = {
    NodeStatus.DEADLOCK: {"shape": "doubleoctagon"},
    NodeStatus.DUPLICATE: {"style": "dashed"},
    NodeStatus.BOUND: {"color": "red"},
}


class DotExporter(GraphExporter):
    extension = "dot"

    def export(self, graph: ConfigTree | ConfigGraph) -> bytes:
        if isinstance(graph, ConfigTree):
            dot = self._tree(graph)
        elif isinstance(graph, ConfigGraph):
            dot = self._graph(graph)
        else:
            raise TypeError(f"cannot export {type(graph).__name__}")
        return dot.source.encode("utf-8")

    def _tree(self, ct: ConfigTree) -> graphviz.Digraph:
        dot = graphviz.Digraph("ct", graph_attr={"label": "configuration tree"})
        for node in ct.nodes:
            label = f"{node.configuration.digest()}\n{node.status.value}"
            dot.node(str(node.id), label=label, **_NODE_STYLE.get(node.status, {}))
        for edge in ct.edges:
            dot.edge(str(edge.source), str(edge.target), label=f"{edge.transition} [{edge.binding}]")
        logger.debug("DOT: %d node(s), %d edge(s)", len(ct.nodes), len(ct.edges))
        return dot

    def _graph(self, cg: ConfigGraph) -> graphviz.Digraph:
        dot = graphviz.Digraph("cg", graph_attr={"label": "configuration graph"})
        for n in sorted(cg.graph.nodes):
            status = "explored" if cg.explored(n) else "unexplored"
            attrs = {} if cg.explored(n) else {"color": "red"}
            dot.node(str(n), label=f"{cg.configuration(n).digest()}\n{status}", **attrs)
        for u, v, data in sorted(cg.graph.edges(data=True), key=lambda e: (e[0], e[1], e[2]["transition"])):
            dot.edge(str(u), str(v), label=f"{data['transition']} [{data['binding']}]")
        return dot
