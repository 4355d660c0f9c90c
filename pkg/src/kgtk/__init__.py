"""Streaming toolkit for knowledge graphs stored as KGTK tab-separated edge files."""

__version__ = "0.1.0"

from .errors import KgtkError  # noqa: E402
from .values import (Kind, parse_value, serialize_value, normalize_value,  # noqa: E402
                     value_kind)
from .edges import EdgeStream, Header, open_reader, write_edges  # noqa: E402

__all__ = ["__version__", "KgtkError", "Kind", "parse_value", "serialize_value",
           "normalize_value", "value_kind", "EdgeStream", "Header", "open_reader", "write_edges"]
