"""ViewModel construction: everything a rendering client needs for one group.

The view is a pure function of (document, layout, registry, separator), so
clients never have to interpret links, defaults or grouping themselves.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from .db import Document
from .dbd import FieldKind, TypeRegistry, classify_field
from .diagnostics import Diagnostic
from .engine import Session
from .layout import LayoutTable, auto_layout, resolve_chain, ChainError
from .topology import GroupPath, build_graph, group_view

DEFAULT_NODE_COLORS = {
    FieldKind.VARIABLE: 0x33CC33,
    FieldKind.INPUT: 0x3366FF,
    FieldKind.OUTPUT: 0xFF6633,
    FieldKind.FORWARD: 0xCC33CC,
}


def _field_kind(registry: TypeRegistry, record_type: str, field_name: str) -> FieldKind:
    fdef = registry.lookup_field(record_type, field_name)
    return classify_field(fdef) if fdef is not None else FieldKind.VARIABLE


def _non_default_fields(rec, registry: TypeRegistry) -> List[Dict[str, str]]:
    out = []
    seen = {}
    order = []
    for entry in rec.fields():
        if entry.field_name not in seen:
            order.append(entry.field_name)
        seen[entry.field_name] = entry.value  # last occurrence wins
    for name in order:
        value = seen[name]
        fdef = registry.lookup_field(rec.record_type, name)
        default = fdef.default_value if fdef is not None else ""
        if value != default:
            out.append({"name": name, "value": value})
    return out


def diagnostics_json(diags: List[Diagnostic]) -> List[dict]:
    out = []
    for d in diags:
        entry = {"severity": d.severity.value, "code": d.code, "message": d.message}
        if d.location is not None:
            entry["line"], entry["column"] = d.location
        if d.path is not None:
            entry["path"] = d.path
        out.append(entry)
    return out


def build_view_model(
    doc: Document,
    table: LayoutTable,
    registry: TypeRegistry,
    separator: str = ":",
    group_path: str = "",
    diagnostics: Optional[List[Diagnostic]] = None,
) -> dict:
    segments = tuple(group_path.split(separator)) if group_path else ()
    path = GroupPath(segments, separator)

    placed = auto_layout(doc, table, separator)
    graph, graph_diags = build_graph(doc, registry, separator)
    records, subgroups = group_view(doc, path, separator)
    member_names = {r.name for r in records}

    rec_views = []
    for rec in records:
        lay = placed.records[rec.name]
        node_fields = set()
        for node_id in table.field_nodes:
            r, _, f = node_id.partition(".")
            if r == rec.name:
                node_fields.add(f)
        for edge in graph.edges:
            src_rec, _, src_fld = edge.source_field.partition(".")
            if src_rec == rec.name:
                node_fields.add(src_fld)
            if edge.target.kind == "RecordLink" and edge.target.record_name == rec.name:
                node_fields.add(edge.target.field_name)
        nodes = []
        for fld in sorted(node_fields):
            kind = _field_kind(registry, rec.record_type, fld)
            node = table.field_nodes.get(f"{rec.name}.{fld}")
            color = node.color if node is not None else DEFAULT_NODE_COLORS[kind]
            nodes.append({"field": fld, "kind": kind.value, "color": color})
        rec_views.append({
            "name": rec.name,
            "type": rec.record_type,
            "x": lay.x,
            "y": lay.y,
            "nonDefaultFields": _non_default_fields(rec, registry),
            "fieldNodes": nodes,
        })

    links = []
    for edge in graph.edges:
        src_rec = edge.source_field.partition(".")[0]
        if src_rec not in member_names:
            continue
        waypoints = []
        if edge.source_field in table.links:
            try:
                _, conns = resolve_chain(table, edge.source_field)
                waypoints = [{"id": c.id, "x": c.x, "y": c.y} for c in conns]
            except ChainError:
                pass
        links.append({
            "source": edge.source_field,
            "targetLabel": edge.target.target_id,
            "broken": edge.broken,
            "interGroup": edge.inter_group,
            "waypoints": waypoints,
        })

    sub_views = []
    for name, count in subgroups:
        prefix = (group_path + separator if group_path else "") + name + separator
        xs, ys = [], []
        for rec in doc.records():
            if rec.name.startswith(prefix) and rec.name in placed.records:
                xs.append(placed.records[rec.name].x)
                ys.append(placed.records[rec.name].y)
        bbox = None
        if xs:
            bbox = {"x": min(xs), "y": min(ys),
                    "w": max(xs) - min(xs), "h": max(ys) - min(ys)}
        sub_views.append({"name": name, "memberCount": count, "boundingBox": bbox})

    all_diags = list(diagnostics or []) + graph_diags
    return {
        "groupPath": group_path,
        "records": rec_views,
        "links": links,
        "subgroups": sub_views,
        "diagnostics": diagnostics_json(all_diags),
    }


def session_view(session: Session, group_path: str = "") -> dict:
    return build_view_model(
        session.document,
        session.layout,
        session.registry,
        session.separator,
        group_path,
        diagnostics=session.parse_diagnostics + session.layout_diagnostics,
    )
