"""Link interpretation, dataflow graph construction and naming hierarchy."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .db import Document, RecordBlock
from .dbd import FieldKind, TypeRegistry, classify_field
from .diagnostics import (
    BROKEN_LINK,
    UNKNOWN_FIELD,
    UNKNOWN_MODIFIER,
    UNKNOWN_RECORD_TYPE,
    Diagnostic,
    error,
    warning,
)

KNOWN_MODIFIERS = ("PP", "NPP", "CA", "CP", "CPP", "MS", "NMS", "MSS", "MSI")

_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


@dataclass(frozen=True)
class LinkTarget:
    kind: str  # Constant | Hardware | RecordLink | Empty
    record_name: str = ""
    field_name: str = ""
    tokens: Tuple[str, ...] = ()  # modifier tokens in original order
    raw: str = ""

    @property
    def modifiers(self) -> List[str]:
        return [t for t in self.tokens if t in KNOWN_MODIFIERS]

    @property
    def unknown_modifiers(self) -> List[str]:
        return [t for t in self.tokens if t not in KNOWN_MODIFIERS]

    @property
    def target_id(self) -> str:
        return f"{self.record_name}.{self.field_name}"

    def render(self) -> str:
        if self.kind != "RecordLink":
            return self.raw
        head = self.record_name
        if self._explicit_field:
            head = f"{self.record_name}.{self.field_name}"
        return " ".join([head, *self.tokens])

    @property
    def _explicit_field(self) -> bool:
        first = self.raw.split()[0] if self.raw.strip() else ""
        return "." in first

    def with_record(self, new_name: str) -> "LinkTarget":
        """Same link retargeted at a renamed record."""
        head = new_name
        if self._explicit_field:
            head = f"{new_name}.{self.field_name}"
        raw = " ".join([head, *self.tokens])
        return LinkTarget("RecordLink", new_name, self.field_name, self.tokens, raw)


def parse_link_value(value: str) -> LinkTarget:
    """Classify a link field value. Total: never raises."""
    stripped = value.strip()
    if stripped == "":
        return LinkTarget("Empty", raw=value)
    if stripped[0] in "#@":
        return LinkTarget("Hardware", raw=value)
    if _NUMBER_RE.match(stripped):
        return LinkTarget("Constant", raw=value)
    parts = stripped.split()
    head, mods = parts[0], parts[1:]
    if "." in head:
        rec, fld = head.split(".", 1)
    else:
        rec, fld = head, "VAL"
    return LinkTarget("RecordLink", rec, fld, tuple(mods), raw=value)


@dataclass
class LinkEdge:
    source_field: str  # "rec.FLD"
    target: LinkTarget
    source_kind: FieldKind
    resolved: bool = False
    broken: bool = False
    inter_group: bool = False

    def to_json(self) -> dict:
        return {
            "sourceField": self.source_field,
            "target": self.target.target_id,
            "targetValue": self.target.raw,
            "modifiers": self.target.modifiers,
            "sourceKind": self.source_kind.value,
            "resolved": self.resolved,
            "broken": self.broken,
            "interGroup": self.inter_group,
        }


@dataclass
class LinkGraph:
    edges: List[LinkEdge] = field(default_factory=list)

    def edges_from(self, record_name: str) -> List[LinkEdge]:
        prefix = record_name + "."
        return [e for e in self.edges if e.source_field.startswith(prefix)]

    def edges_to(self, record_name: str) -> List[LinkEdge]:
        return [e for e in self.edges
                if e.target.kind == "RecordLink" and e.target.record_name == record_name]


@dataclass(frozen=True)
class GroupPath:
    segments: Tuple[str, ...] = ()
    separator: str = ":"

    def __str__(self) -> str:
        return self.separator.join(self.segments)


def group_of(record_name: str, separator: str = ":") -> GroupPath:
    parts = record_name.split(separator)
    return GroupPath(tuple(parts[:-1]), separator)


def group_view(
    doc: Document, path: GroupPath, separator: str = ":"
) -> Tuple[List[RecordBlock], List[Tuple[str, int]]]:
    """Records directly in ``path`` plus immediate subgroups with counts."""
    records: List[RecordBlock] = []
    counts: Dict[str, int] = {}
    want = path.segments
    depth = len(want)
    for rec in doc.records():
        segs = tuple(rec.name.split(separator))
        if segs[:-1] == want:
            records.append(rec)
        elif len(segs) - 1 > depth and segs[:depth] == want:
            child = segs[depth]
            counts[child] = counts.get(child, 0) + 1
    return records, sorted(counts.items())


def build_graph(
    doc: Document, registry: TypeRegistry, separator: str = ":"
) -> Tuple[LinkGraph, List[Diagnostic]]:
    """Resolve every link-kind field value into a LinkEdge with diagnostics."""
    graph = LinkGraph()
    diags: List[Diagnostic] = []
    by_name = {}
    for rec in doc.records():
        by_name.setdefault(rec.name, rec)  # first block wins, like get_record

    for rec in doc.records():
        rtype = registry.record_types.get(rec.record_type)
        if rtype is None:
            diags.append(error(
                UNKNOWN_RECORD_TYPE,
                f"record {rec.name!r} has unknown type {rec.record_type!r}",
                location=(rec.line or 1, 1), path=rec.name))
            continue
        seen = set()
        for entry in rec.fields():
            if entry.field_name in seen:
                continue
            seen.add(entry.field_name)
            fdef = rtype.fields.get(entry.field_name)
            if fdef is None:
                diags.append(error(
                    UNKNOWN_FIELD,
                    f"field {entry.field_name!r} is not defined for "
                    f"record type {rec.record_type!r}",
                    location=(rec.line or 1, 1),
                    path=f"{rec.name}.{entry.field_name}"))
                continue
            kind = classify_field(fdef)
            if kind is FieldKind.VARIABLE:
                continue
            value = rec.field_value(entry.field_name)
            target = parse_link_value(value)
            if target.kind != "RecordLink":
                continue
            for mod in target.unknown_modifiers:
                diags.append(warning(
                    UNKNOWN_MODIFIER,
                    f"unknown link modifier {mod!r}",
                    path=f"{rec.name}.{entry.field_name}"))
            edge = LinkEdge(
                source_field=f"{rec.name}.{entry.field_name}",
                target=target,
                source_kind=kind,
            )
            edge.resolved, edge.broken = _resolve(target, by_name, registry)
            edge.inter_group = (
                group_of(rec.name, separator).segments
                != group_of(target.record_name, separator).segments
            )
            if edge.broken:
                diags.append(warning(
                    BROKEN_LINK,
                    f"link target {target.target_id!r} does not exist",
                    path=edge.source_field))
            graph.edges.append(edge)
    return graph, diags


def _resolve(target, by_name, registry) -> Tuple[bool, bool]:
    dest = by_name.get(target.record_name)
    if dest is None:
        return False, True
    dest_type = registry.record_types.get(dest.record_type)
    if dest_type is not None and target.field_name not in dest_type.fields:
        return False, True
    # unknown destination type: existence of the field cannot be checked
    return True, False


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(doc: Document, graph: LinkGraph) -> str:
    lines = ["digraph db {"]
    for rec in doc.records():
        lines.append(
            f'  {_dot_quote(rec.name)} [label="{rec.name}\\n({rec.record_type})"];')
    for edge in graph.edges:
        src = edge.source_field.split(".", 1)[0]
        fld = edge.source_field.split(".", 1)[1]
        style = ' style=dashed' if edge.broken else ""
        lines.append(
            f'  {_dot_quote(src)} -> {_dot_quote(edge.target.record_name)} '
            f'[label="{fld}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(doc: Document, graph: LinkGraph) -> str:
    payload = {
        "records": [
            {"name": r.name, "type": r.record_type} for r in doc.records()
        ],
        "edges": [e.to_json() for e in graph.edges],
    }
    return json.dumps(payload, indent=2) + "\n"
