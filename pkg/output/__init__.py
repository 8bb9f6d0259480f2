"""
output/__init__.py — Exporter factory for vpn-verify.

Usage:
    from output import export_graph, get_exporter
    data = export_graph(ct, "json")
    Path("ct.dot").write_bytes(get_exporter("dot").export(ct))
"""

from output.base import GraphExporter

FORMATS = ("dot", "json")


def get_exporter(fmt: str) -> GraphExporter:
    """
    Return the exporter for a format name.
    Add new formats here as elif branches.
    """
    name = fmt.lower().strip().lstrip(".")

    if name == "dot":
        from output.dot_backend import DotExporter
        return DotExporter()

    elif name == "json":
        from output.json_backend import JsonExporter
        return JsonExporter()

    else:
        raise ValueError(
            f"Unknown export format '{fmt}'. "
            f"Valid options: {', '.join(repr(f) for f in FORMATS)}"
        )


def export_graph(graph, fmt: str) -> bytes:
    """Render a ConfigTree or ConfigGraph in the given format."""
    return get_exporter(fmt).export(graph)
