"""
output/json_backend.py — Lossless JSON exporter and loader.

Documents carry `schema_version` and `kind` ("ct" or "cg"). Node ids are
the tree's own ids (graph nodes keep the id of the first tree node they
merge), listed in ascending order; every node stores its full
configuration so `load_graph` can rebuild the structure exactly.
"""

import json
import logging

import networkx as nx

import config
from net import Binding, Configuration
from output.base import GraphExporter
from statespace import ConfigGraph, ConfigTree, CtEdge, CtNode, NodeStatus

logger = logging.getLogger(__name__)


class JsonExporter(GraphExporter):
    extension = "json"

    def export(self, graph: ConfigTree | ConfigGraph) -> bytes:
        if isinstance(graph, ConfigTree):
            doc = tree_to_dict(graph)
        elif isinstance(graph, ConfigGraph):
            doc = graph_to_dict(graph)
        else:
            raise TypeError(f"cannot export {type(graph).__name__}")
        return json.dumps(doc, indent=2, ensure_ascii=False).encode("utf-8")


def tree_to_dict(ct: ConfigTree) -> dict:
    return {
        "schema_version": config.GRAPH_SCHEMA_VERSION,
        "kind": "ct",
        "root": ct.root.id,
        "truncated": ct.truncated,
        "dedup_mode": ct.dedup_mode,
        "variables": sorted(ct.variables),
        "transitions": sorted(ct.transitions),
        "complete_paths": len(ct.complete_paths()),
        "nodes": [
            {
                "id": n.id,
                "status": n.status.value,
                "depth": n.depth,
                "parent": n.parent,
                "digest": n.configuration.digest(),
                "configuration": n.configuration.to_dict(),
            }
            for n in ct.nodes
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "transition": e.transition,
                "binding": e.binding.to_dict(),
            }
            for e in ct.edges
        ],
    }


def graph_to_dict(cg: ConfigGraph) -> dict:
    edges = sorted(
        cg.graph.edges(data=True),
        key=lambda e: (e[0], e[1], e[2]["transition"], e[2]["binding"]),
    )
    return {
        "schema_version": config.GRAPH_SCHEMA_VERSION,
        "kind": "cg",
        "root": cg.root,
        "truncated": cg.truncated,
        "nodes": [
            {
                "id": n,
                "explored": cg.explored(n),
                "digest": cg.configuration(n).digest(),
                "configuration": cg.configuration(n).to_dict(),
            }
            for n in sorted(cg.graph.nodes)
        ],
        "edges": [
            {
                "source": u,
                "target": v,
                "transition": data["transition"],
                "binding": data["binding"].to_dict(),
            }
            for u, v, data in edges
        ],
    }


def load_graph(data: bytes | str) -> ConfigTree | ConfigGraph:
    """
    Rebuild a tree or graph from an exported JSON document.

    Raises:
        ValueError: if the document's kind or schema version is not supported.
    """
    doc = json.loads(data)
    version = doc.get("schema_version")
    if version != config.GRAPH_SCHEMA_VERSION:
        raise ValueError(f"unsupported graph schema_version {version!r}")
    kind = doc.get("kind")

    if kind == "ct":
        nodes = [
            CtNode(
                id=n["id"],
                configuration=Configuration.from_dict(n["configuration"]),
                status=NodeStatus(n["status"]),
                depth=n["depth"],
                parent=n["parent"],
            )
            for n in doc["nodes"]
        ]
        edges = [
            CtEdge(e["source"], e["target"], e["transition"], Binding(e["binding"]))
            for e in doc["edges"]
        ]
        return ConfigTree(
            nodes=nodes,
            edges=edges,
            truncated=doc["truncated"],
            dedup_mode=doc.get("dedup_mode", "global"),
            variables=frozenset(doc.get("variables", [])),
            transitions=frozenset(doc.get("transitions", [])),
        )

    if kind == "cg":
        graph = nx.MultiDiGraph()
        for n in doc["nodes"]:
            graph.add_node(
                n["id"],
                configuration=Configuration.from_dict(n["configuration"]),
                explored=n["explored"],
            )
        for e in doc["edges"]:
            graph.add_edge(e["source"], e["target"], transition=e["transition"], binding=Binding(e["binding"]))
        return ConfigGraph(graph=graph, root=doc["root"], truncated=doc["truncated"])

    raise ValueError(f"unknown graph kind {kind!r}")
