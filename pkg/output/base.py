"""
output/base.py — Abstract base class for graph exporters.

Implement this interface to add new export formats.
Current implementations:
  - DotExporter  (output/dot_backend.py)
  - JsonExporter (output/json_backend.py)

The CLI calls exporter.export() without knowing which format is active,
so `explore --out` picks the format from the file extension alone.
"""

from abc import ABC, abstractmethod

from statespace import ConfigGraph, ConfigTree


class GraphExporter(ABC):
    """
    Abstract base class all graph exporters must implement.

    Each exporter receives a configuration tree or graph and renders it
    to bytes ready to be written to disk.
    """

    #: File extension (without the dot) this exporter writes.
    extension: str = ""

    @abstractmethod
    def export(self, graph: ConfigTree | ConfigGraph) -> bytes:
        """
        Render a configuration tree or graph.

        Args:
            graph: The tree from build_ct or the graph from ct_to_cg.

        Returns:
            The encoded document (UTF-8).

        Raises:
            TypeError: if `graph` is neither a ConfigTree nor a ConfigGraph.
        """
