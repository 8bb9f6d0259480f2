import json

import pytest

import config
from net import make_net
from output import FORMATS, export_graph, get_exporter
from output.json_backend import load_graph
from statespace import ConfigGraph, ConfigTree, build_ct, ct_to_cg, link_set, mapping_set


@pytest.fixture
def single_node_ct():
    net = make_net(places=[("P", 1)], transitions=["t"], arcs=[("P", "t", [("eps",)])])
    return build_ct(net)


@pytest.fixture(scope="module")
def e2_ct(e2_doc):
    return build_ct(e2_doc.net)


class TestFactory:
    @pytest.mark.parametrize("fmt", FORMATS)
    def test_known_formats(self, fmt):
        assert get_exporter(fmt).extension == fmt
        assert get_exporter(f".{fmt.upper()}").extension == fmt

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="Unknown export format"):
            get_exporter("svg")

    @pytest.mark.parametrize("fmt", FORMATS)
    def test_rejects_other_objects(self, fmt):
        with pytest.raises(TypeError):
            export_graph({"nodes": []}, fmt)


class TestDot:
    def test_single_node_tree(self, single_node_ct):
        source = export_graph(single_node_ct, "dot").decode()
        assert source.startswith("digraph ct {")
        assert "->" not in source
        assert single_node_ct.root.configuration.digest() in source
        assert "leaf-deadlock" in source

    def test_graph_edges_are_labelled(self, send_receive_net):
        cg = ct_to_cg(build_ct(send_receive_net))
        source = export_graph(cg, "dot").decode()
        assert source.startswith("digraph cg {")
        assert "0 -> 1" in source
        assert "send [S→Box]" in source


class TestJson:
    def test_e2_tree_has_four_complete_paths(self, e2_ct):
        doc = json.loads(export_graph(e2_ct, "json"))
        assert doc["kind"] == "ct"
        assert doc["schema_version"] == config.GRAPH_SCHEMA_VERSION
        assert doc["complete_paths"] == 4
        assert sum(n["status"] == "leaf-deadlock" for n in doc["nodes"]) == 4

    def test_tree_reloads_exactly(self, e2_ct):
        again = load_graph(export_graph(e2_ct, "json"))
        assert isinstance(again, ConfigTree)
        assert [(n.configuration, n.status, n.depth, n.parent) for n in again.nodes] == \
               [(n.configuration, n.status, n.depth, n.parent) for n in e2_ct.nodes]
        assert again.edges == e2_ct.edges
        assert mapping_set(again, "I") == mapping_set(e2_ct, "I")
        assert link_set(again) == link_set(e2_ct)

    def test_graph_reloads_exactly(self, e1_doc):
        cg = ct_to_cg(build_ct(e1_doc.net))
        again = load_graph(export_graph(cg, "json").decode())
        assert isinstance(again, ConfigGraph)
        assert sorted(again.graph.nodes) == sorted(cg.graph.nodes)
        assert all(again.configuration(n) == cg.configuration(n) for n in cg.graph.nodes)
        assert again.graph.number_of_edges() == cg.graph.number_of_edges()

    def test_rejects_other_schema_versions(self, single_node_ct):
        doc = json.loads(export_graph(single_node_ct, "json"))
        doc["schema_version"] = config.GRAPH_SCHEMA_VERSION + 1
        with pytest.raises(ValueError, match="schema_version"):
            load_graph(json.dumps(doc))

    def test_rejects_unknown_kind(self, single_node_ct):
        doc = json.loads(export_graph(single_node_ct, "json"))
        doc["kind"] = "petri"
        with pytest.raises(ValueError, match="kind"):
            load_graph(json.dumps(doc))
