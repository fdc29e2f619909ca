"""dbstudio: an EPICS record-database engineering toolkit.

Lossless .db parsing with visual layout data stored in ``#!`` comments,
a .dbd type registry, link-graph analysis with hierarchical grouping,
an undoable editing engine, a CLI and an HTTP editing service.
"""

from .db import Document, RecordBlock, FieldEntry, parse_db, serialize_db, get_record, effective_field_value
from .dbd import DbfType, FieldKind, TypeRegistry, parse_dbd, classify_field
from .diagnostics import Diagnostic, Severity
from .layout import LayoutTable, decode_layout, encode_layout, resolve_chain, auto_layout
from .topology import LinkGraph, LinkTarget, parse_link_value, build_graph, group_of, group_view
from .engine import Session, open_session, apply, undo, redo, save

__version__ = "0.1.0"

__all__ = [
    "Document", "RecordBlock", "FieldEntry", "parse_db", "serialize_db",
    "get_record", "effective_field_value",
    "DbfType", "FieldKind", "TypeRegistry", "parse_dbd", "classify_field",
    "Diagnostic", "Severity",
    "LayoutTable", "decode_layout", "encode_layout", "resolve_chain", "auto_layout",
    "LinkGraph", "LinkTarget", "parse_link_value", "build_graph", "group_of", "group_view",
    "Session", "open_session", "apply", "undo", "redo", "save",
    "__version__",
]
