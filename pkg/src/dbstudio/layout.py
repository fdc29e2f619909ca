"""Codec for the ``#!`` visual-composition directives embedded in .db files.

Recognized directives: Record/6, Field/4, Link/2, Connector/6. Anything
else (including the generator header and the marker line) is preserved
verbatim so defective layout data can never corrupt a database.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .db import Document, LayoutLine, escape_value, unescape_value
from .diagnostics import (
    DANGLING_CHAIN,
    CYCLIC_CHAIN,
    MALFORMED_DIRECTIVE,
    UNKNOWN_DIRECTIVE,
    Diagnostic,
    warning,
)

HEADER_TEXT = "Generated by dbstudio (VisualDCT-compatible layout v1)"
MARKER_TEXT = "Further lines contain layout data"

# Default auto-layout grid
GRID_ORIGIN = (100, 100)
GRID_PITCH = (160, 100)
GRID_COLUMNS = 8


@dataclass
class RecordLayout:
    x: int
    y: int
    flag_a: int = 0
    flag_b: int = 1
    label: str = ""
    line_ref: Optional[LayoutLine] = field(default=None, compare=False, repr=False)
    dirty: bool = field(default=False, compare=False)


@dataclass
class FieldNodeLayout:
    color: int
    flag: int = 0
    label: str = ""
    line_ref: Optional[LayoutLine] = field(default=None, compare=False, repr=False)
    dirty: bool = field(default=False, compare=False)


@dataclass
class LinkLayout:
    chain: str  # connector id or terminal "rec.FLD"
    line_ref: Optional[LayoutLine] = field(default=None, compare=False, repr=False)
    dirty: bool = field(default=False, compare=False)


@dataclass
class ConnectorLayout:
    id: str
    next: str  # connector id or terminal "rec.FLD"
    x: int
    y: int
    mode: int = 0
    label: str = ""
    line_ref: Optional[LayoutLine] = field(default=None, compare=False, repr=False)
    dirty: bool = field(default=False, compare=False)


@dataclass
class LayoutTable:
    records: Dict[str, RecordLayout] = field(default_factory=dict)
    field_nodes: Dict[str, FieldNodeLayout] = field(default_factory=dict)
    links: Dict[str, LinkLayout] = field(default_factory=dict)
    connectors: Dict[str, ConnectorLayout] = field(default_factory=dict)
    # header/marker text is cosmetic; excluded from table equality
    header_lines: List[str] = field(default_factory=list, compare=False)
    marker_line: Optional[str] = field(default=None, compare=False)
    unknown_directives: List[str] = field(default_factory=list)
    # layout lines kept verbatim (headers, markers, unparseable directives)
    preserved_refs: List[LayoutLine] = field(default_factory=list, compare=False, repr=False)

    def copy(self) -> "LayoutTable":
        return LayoutTable(
            records={k: replace(v) for k, v in self.records.items()},
            field_nodes={k: replace(v) for k, v in self.field_nodes.items()},
            links={k: replace(v) for k, v in self.links.items()},
            connectors={k: replace(v) for k, v in self.connectors.items()},
            header_lines=list(self.header_lines),
            marker_line=self.marker_line,
            unknown_directives=list(self.unknown_directives),
            preserved_refs=list(self.preserved_refs),
        )


_DIRECTIVE_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*$")
_ARG_RE = re.compile(r'"(?:\\.|[^"\\])*"|[^,\s][^,]*?(?=\s*(?:,|$))')


@dataclass(frozen=True)
class _Arg:
    text: str
    quoted: bool

    def as_int(self) -> Optional[int]:
        if self.quoted:
            return None
        try:
            return int(self.text, 10)
        except ValueError:
            return None

    def as_str(self) -> str:
        return unescape_value(self.text[1:-1]) if self.quoted else self.text


def _split_args(argtext: str) -> Optional[List[_Arg]]:
    args: List[_Arg] = []
    pos = 0
    n = len(argtext)
    if argtext.strip() == "":
        return args
    while True:
        while pos < n and argtext[pos].isspace():
            pos += 1
        if pos < n and argtext[pos] == '"':
            m = re.match(r'"(?:\\.|[^"\\])*"', argtext[pos:])
            if m is None:
                return None
            args.append(_Arg(m.group(0), True))
            pos += m.end()
        else:
            comma = _find_comma(argtext, pos)
            token = argtext[pos: n if comma == -1 else comma].strip()
            args.append(_Arg(token, False))
            pos = n if comma == -1 else comma
        while pos < n and argtext[pos].isspace():
            pos += 1
        if pos >= n:
            return args
        if argtext[pos] != ",":
            return None
        pos += 1


def _find_comma(text: str, start: int) -> int:
    return text.find(",", start)


def _quote(s: str) -> str:
    return f'"{escape_value(s)}"'


def decode_layout(doc: Document) -> Tuple[LayoutTable, List[Diagnostic]]:
    """Build a LayoutTable from the document's ``#!`` lines. Never raises."""
    table = LayoutTable()
    diags: List[Diagnostic] = []
    for item in doc.layout_lines():
        content = item.content.strip()
        if content == "":
            table.preserved_refs.append(item)
            continue
        if content.startswith("Generated by"):
            table.header_lines.append(content)
            table.preserved_refs.append(item)
            continue
        if MARKER_TEXT in content:
            if table.marker_line is None:
                table.marker_line = content
            table.preserved_refs.append(item)
            continue
        m = _DIRECTIVE_RE.match(content)
        args = _split_args(m.group(2)) if m else None
        if m is None or args is None:
            diags.append(warning(MALFORMED_DIRECTIVE,
                                 f"unparseable layout directive: {content[:60]!r}"))
            table.unknown_directives.append(content)
            table.preserved_refs.append(item)
            continue
        name = m.group(1)
        if not _decode_directive(table, name, args, item):
            code = MALFORMED_DIRECTIVE if name in ("Record", "Field", "Link", "Connector") \
                else UNKNOWN_DIRECTIVE
            diags.append(warning(code, f"layout directive kept verbatim: {content[:60]!r}"))
            table.unknown_directives.append(content)
            table.preserved_refs.append(item)
    return table, diags


def _decode_directive(table: LayoutTable, name: str, args: List[_Arg],
                      item: Optional[LayoutLine]) -> bool:
    if name == "Record" and len(args) == 6:
        x, y, fa, fb = (a.as_int() for a in args[1:5])
        if None in (x, y, fa, fb) or args[0].quoted:
            return False
        table.records[args[0].as_str()] = RecordLayout(
            x, y, fa, fb, args[5].as_str(), line_ref=item)
        return True
    if name == "Field" and len(args) == 4:
        color, flag = args[1].as_int(), args[2].as_int()
        if color is None or flag is None or not (0 <= color <= 0xFFFFFF):
            return False
        table.field_nodes[args[0].as_str()] = FieldNodeLayout(
            color, flag, args[3].as_str(), line_ref=item)
        return True
    if name == "Link" and len(args) == 2:
        table.links[args[0].as_str()] = LinkLayout(args[1].as_str(), line_ref=item)
        return True
    if name == "Connector" and len(args) == 6:
        x, y, mode = args[2].as_int(), args[3].as_int(), args[4].as_int()
        cid, nxt = args[0].as_str(), args[1].as_str()
        if None in (x, y, mode) or cid == nxt:
            return False
        table.connectors[cid] = ConnectorLayout(
            cid, nxt, x, y, mode, args[5].as_str(), line_ref=item)
        return True
    return False


def format_record_directive(name: str, lay: RecordLayout) -> str:
    return (f"Record({name},{lay.x},{lay.y},{lay.flag_a},{lay.flag_b},"
            f"{_quote(lay.label)})")


def format_field_directive(node_id: str, lay: FieldNodeLayout) -> str:
    return f"Field({_quote(node_id)},{lay.color},{lay.flag},{_quote(lay.label)})"


def format_link_directive(source: str, link: LinkLayout) -> str:
    return f"Link({_quote(source)},{_quote(link.chain)})"


def format_connector_directive(conn: ConnectorLayout) -> str:
    return (f"Connector({_quote(conn.id)},{_quote(conn.next)},"
            f"{conn.x},{conn.y},{conn.mode},{_quote(conn.label)})")


def _record_of_node(node_id: str) -> str:
    # record names cannot contain '.', so the first dot splits rec from FLD
    return node_id.split(".", 1)[0]


def encode_layout(table: LayoutTable) -> List[str]:
    """Emit ``#!`` lines for the whole table in deterministic order."""
    lines: List[str] = []
    headers = table.header_lines or [HEADER_TEXT]
    for h in headers:
        lines.append(f"#! {h}")
    lines.append(f"#! {table.marker_line or MARKER_TEXT}")

    emitted_nodes = set()
    emitted_links = set()
    emitted_conns = set()
    for name, lay in table.records.items():
        lines.append(f"#! {format_record_directive(name, lay)}")
        for node_id, node in table.field_nodes.items():
            if _record_of_node(node_id) == name:
                lines.append(f"#! {format_field_directive(node_id, node)}")
                emitted_nodes.add(node_id)
        for src, link in table.links.items():
            if _record_of_node(src) != name:
                continue
            lines.append(f"#! {format_link_directive(src, link)}")
            emitted_links.add(src)
            cur = link.chain
            while cur in table.connectors and cur not in emitted_conns:
                lines.append(f"#! {format_connector_directive(table.connectors[cur])}")
                emitted_conns.add(cur)
                cur = table.connectors[cur].next
    for node_id, node in table.field_nodes.items():
        if node_id not in emitted_nodes:
            lines.append(f"#! {format_field_directive(node_id, node)}")
    for src, link in table.links.items():
        if src not in emitted_links:
            lines.append(f"#! {format_link_directive(src, link)}")
    for cid, conn in table.connectors.items():
        if cid not in emitted_conns:
            lines.append(f"#! {format_connector_directive(conn)}")
    for content in table.unknown_directives:
        lines.append(f"#! {content}")
    return lines


class ChainError(Exception):
    code = ""


class DanglingChainError(ChainError):
    code = DANGLING_CHAIN


class CyclicChainError(ChainError):
    code = CYCLIC_CHAIN


def resolve_chain(table: LayoutTable, source_field_id: str) -> Tuple[str, List[ConnectorLayout]]:
    """Follow a link's connector chain to its terminal "rec.FLD" id."""
    link = table.links.get(source_field_id)
    if link is None:
        raise DanglingChainError(f"no link chain for {source_field_id!r}")
    waypoints: List[ConnectorLayout] = []
    seen = set()
    cur = link.chain
    while cur in table.connectors:
        if cur in seen:
            raise CyclicChainError(f"connector {cur!r} repeats in chain")
        seen.add(cur)
        conn = table.connectors[cur]
        waypoints.append(conn)
        cur = conn.next
    if "." not in cur:
        raise DanglingChainError(
            f"chain from {source_field_id!r} ends at missing id {cur!r}")
    return cur, waypoints


def _unqualified(name: str, separator: str) -> str:
    return name.rsplit(separator, 1)[-1] if separator else name


def _group_key(name: str, separator: str) -> str:
    parts = name.split(separator)
    return separator.join(parts[:-1])


def auto_layout(
    doc: Document,
    table: LayoutTable,
    separator: str = ":",
    origin: Tuple[int, int] = GRID_ORIGIN,
    pitch: Tuple[int, int] = GRID_PITCH,
    columns: int = GRID_COLUMNS,
) -> LayoutTable:
    """Place every record that has no layout entry on a per-group grid.

    Existing entries are never touched; the input table is not modified.
    """
    missing = [r.name for r in doc.records() if r.name not in table.records]
    if not missing:
        return table
    result = table.copy()
    ox, oy = origin
    px, py = pitch

    occupied: Dict[str, set] = {}
    for rec in doc.records():
        lay = result.records.get(rec.name)
        if lay is None:
            continue
        group = _group_key(rec.name, separator)
        col = (lay.x - ox) // px
        row = (lay.y - oy) // py
        if 0 <= col < columns and row >= 0:
            occupied.setdefault(group, set()).add(row * columns + col)

    next_cell: Dict[str, int] = {}
    for rec in doc.records():
        if rec.name in result.records:
            continue
        group = _group_key(rec.name, separator)
        cells = occupied.setdefault(group, set())
        k = next_cell.get(group, 0)
        while k in cells:
            k += 1
        cells.add(k)
        next_cell[group] = k + 1
        result.records[rec.name] = RecordLayout(
            x=ox + (k % columns) * px,
            y=oy + (k // columns) * py,
            flag_a=0,
            flag_b=1,
            label=_unqualified(rec.name, separator),
            dirty=True,
        )
    return result
