"""Undoable editing engine.

A Session owns a Document plus its LayoutTable and applies Command objects
sequentially (single-writer). Every command validates before mutating, so a
ValidationError leaves the session untouched. Undo/redo walk a command log;
save() re-emits the file, rewriting only the layout directives that actually
changed so untouched bytes survive verbatim.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Optional, Tuple

from . import db as dbmod
from . import layout as laymod
from . import topology
from .db import (
    BlankLine,
    CommentLine,
    Document,
    FieldEntry,
    LayoutLine,
    OpaqueLine,
    RecordBlock,
    is_valid_record_name,
    parse_db,
    serialize_record,
)
from .dbd import FieldKind, TypeRegistry, classify_field
from .diagnostics import Diagnostic
from .layout import (
    ConnectorLayout,
    FieldNodeLayout,
    LayoutTable,
    LinkLayout,
    RecordLayout,
    auto_layout,
    decode_layout,
    format_connector_directive,
    format_field_directive,
    format_link_directive,
    format_record_directive,
)


class ValidationError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class NothingToUndo(Exception):
    pass


class NothingToRedo(Exception):
    pass


@dataclass
class Clipboard:
    """Deep copies of records plus their layout entries; immune to later edits."""
    records: List[RecordBlock] = dc_field(default_factory=list)
    layouts: Dict[str, RecordLayout] = dc_field(default_factory=dict)
    field_nodes: Dict[str, FieldNodeLayout] = dc_field(default_factory=dict)
    links: Dict[str, LinkLayout] = dc_field(default_factory=dict)
    connectors: Dict[str, ConnectorLayout] = dc_field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.records)


@dataclass
class CommandLog:
    applied: List["Command"] = dc_field(default_factory=list)
    cursor: int = 0


@dataclass
class Session:
    document: Document
    layout: LayoutTable
    registry: TypeRegistry
    separator: str = ":"
    log: CommandLog = dc_field(default_factory=CommandLog)
    clipboard: Clipboard = dc_field(default_factory=Clipboard)
    saved_mark: int = 0
    ever_modified: bool = False
    parse_diagnostics: List[Diagnostic] = dc_field(default_factory=list)
    layout_diagnostics: List[Diagnostic] = dc_field(default_factory=list)

    @property
    def dirty(self) -> bool:
        return self.log.cursor != self.saved_mark

    def graph(self):
        return topology.build_graph(self.document, self.registry, self.separator)

    def diagnostics(self) -> List[Diagnostic]:
        _, graph_diags = self.graph()
        return list(self.parse_diagnostics) + list(self.layout_diagnostics) + graph_diags


def open_session(db_text: str, registry: TypeRegistry, separator: str = ":",
                 source_name: str = "") -> Session:
    doc, parse_diags = parse_db(db_text, source_name)
    table, layout_diags = decode_layout(doc)
    return Session(
        document=doc,
        layout=table,
        registry=registry,
        separator=separator,
        parse_diagnostics=parse_diags,
        layout_diagnostics=layout_diags,
    )


# ---------------------------------------------------------------------------
# Commands


class Command:
    kind = "Command"

    def validate(self, s: Session) -> None:
        """Raise ValidationError without touching the session."""

    def do(self, s: Session) -> None:
        raise NotImplementedError

    def undo(self, s: Session) -> None:
        raise NotImplementedError


def _require_record(s: Session, name: str) -> RecordBlock:
    rec = s.document.get_record(name)
    if rec is None:
        raise ValidationError("UnknownRecord", f"no record named {name!r}")
    return rec


def _require_new_name(s: Session, name: str) -> None:
    if not is_valid_record_name(name):
        raise ValidationError("InvalidName", f"invalid record name {name!r}")
    if s.document.get_record(name) is not None:
        raise ValidationError("NameCollision", f"record {name!r} already exists")


def _record_insert_index(doc: Document) -> int:
    """Position before the trailing layout block, else end of document."""
    i = len(doc.items)
    while i > 0 and isinstance(doc.items[i - 1], (LayoutLine, BlankLine)):
        i -= 1
    # keep trailing blanks with the body, not the layout block
    while i < len(doc.items) and isinstance(doc.items[i], BlankLine):
        i += 1
    return i


def _unqualified(name: str, separator: str) -> str:
    return name.split(separator)[-1]


class CreateRecord(Command):
    kind = "CreateRecord"

    def __init__(self, record_type: str, name: str, x: int = 0, y: int = 0):
        self.record_type = record_type
        self.name = name
        self.x = int(x)
        self.y = int(y)
        self._index: Optional[int] = None

    def validate(self, s: Session) -> None:
        if not s.registry.has_record_type(self.record_type):
            raise ValidationError("UnknownRecordType",
                                  f"unknown record type {self.record_type!r}")
        _require_new_name(s, self.name)

    def do(self, s: Session) -> None:
        self._index = _record_insert_index(s.document)
        s.document.items.insert(self._index, RecordBlock(self.record_type, self.name))
        s.layout.records[self.name] = RecordLayout(
            self.x, self.y, 0, 1, _unqualified(self.name, s.separator), dirty=True)

    def undo(self, s: Session) -> None:
        s.document.items.pop(self._index)
        del s.layout.records[self.name]


def _chain_connectors(table: LayoutTable, source: str) -> List[str]:
    link = table.links.get(source)
    if link is None:
        return []
    ids = []
    cur = link.chain
    while cur in table.connectors and cur not in ids:
        ids.append(cur)
        cur = table.connectors[cur].next
    return ids


class DeleteRecord(Command):
    kind = "DeleteRecord"

    def __init__(self, name: str):
        self.name = name
        self._snapshot = None

    def validate(self, s: Session) -> None:
        _require_record(s, self.name)

    def do(self, s: Session) -> None:
        doc, lay = s.document, s.layout
        index = next(i for i, it in enumerate(doc.items)
                     if isinstance(it, RecordBlock) and it.name == self.name)
        block = doc.items[index]
        prefix = self.name + "."
        nodes = {k: v for k, v in lay.field_nodes.items() if k.startswith(prefix)}
        links = {k: v for k, v in lay.links.items() if k.startswith(prefix)}
        conns = {}
        for src in links:
            for cid in _chain_connectors(lay, src):
                conns[cid] = lay.connectors[cid]
        self._snapshot = (index, block, lay.records.get(self.name), nodes, links, conns)

        doc.items.pop(index)
        lay.records.pop(self.name, None)
        for k in nodes:
            del lay.field_nodes[k]
        for k in links:
            del lay.links[k]
        for k in conns:
            del lay.connectors[k]

    def undo(self, s: Session) -> None:
        index, block, rec_lay, nodes, links, conns = self._snapshot
        s.document.items.insert(index, block)
        if rec_lay is not None:
            s.layout.records[self.name] = rec_lay
        s.layout.field_nodes.update(nodes)
        s.layout.links.update(links)
        s.layout.connectors.update(conns)


def _rename_everywhere(s: Session, old: str, new: str) -> None:
    doc, lay = s.document, s.layout
    rec = doc.get_record(old)
    rec.name = new
    rec.header_dirty = True

    # rewrite link field values that target the old name
    for other in doc.records():
        rtype = s.registry.record_types.get(other.record_type)
        if rtype is None:
            continue
        for entry in other.fields():
            fdef = rtype.fields.get(entry.field_name)
            if fdef is None or classify_field(fdef) is FieldKind.VARIABLE:
                continue
            target = topology.parse_link_value(entry.value)
            if target.kind == "RecordLink" and target.record_name == old:
                entry.value = target.with_record(new).raw
                entry.dirty = True

    def swap_id(node_id: str) -> str:
        rec_part, dot, fld = node_id.partition(".")
        return new + dot + fld if rec_part == old else node_id

    def swap_conn_id(cid: str) -> str:
        rec_part, slash, rest = cid.partition("/")
        return new + slash + rest if rec_part == old else cid

    if old in lay.records:
        entry = lay.records.pop(old)
        if entry.label == _unqualified(old, s.separator) or entry.label == old:
            entry.label = _unqualified(new, s.separator)
        entry.dirty = True
        lay.records[new] = entry

    for node_id in list(lay.field_nodes):
        new_id = swap_id(node_id)
        if new_id != node_id:
            node = lay.field_nodes.pop(node_id)
            if node.label == node_id:
                node.label = new_id
            node.dirty = True
            lay.field_nodes[new_id] = node

    for src in list(lay.links):
        link = lay.links[src]
        new_src = swap_id(src)
        new_chain = swap_id(swap_conn_id(link.chain))
        if new_src != src or new_chain != link.chain:
            del lay.links[src]
            link.chain = new_chain
            link.dirty = True
            lay.links[new_src] = link

    for cid in list(lay.connectors):
        conn = lay.connectors[cid]
        new_cid = swap_conn_id(cid)
        new_next = swap_id(swap_conn_id(conn.next))
        if new_cid != cid or new_next != conn.next:
            del lay.connectors[cid]
            conn.id = new_cid
            conn.next = new_next
            conn.dirty = True
            lay.connectors[new_cid] = conn


class RenameRecord(Command):
    kind = "RenameRecord"

    def __init__(self, old: str, new: str):
        self.old = old
        self.new = new

    def validate(self, s: Session) -> None:
        _require_record(s, self.old)
        if self.new != self.old:
            _require_new_name(s, self.new)

    def do(self, s: Session) -> None:
        _rename_everywhere(s, self.old, self.new)

    def undo(self, s: Session) -> None:
        _rename_everywhere(s, self.new, self.old)


class SetField(Command):
    kind = "SetField"

    def __init__(self, record: str, field: str, value: str):
        self.record = record
        self.field = field
        self.value = value
        self._prev: Optional[Tuple[str, bool, Optional[str]]] = None
        self._created = False

    def validate(self, s: Session) -> None:
        rec = _require_record(s, self.record)
        if s.registry.has_record_type(rec.record_type):
            if s.registry.lookup_field(rec.record_type, self.field) is None:
                raise ValidationError(
                    "UnknownField",
                    f"record type {rec.record_type!r} has no field {self.field!r}")

    def do(self, s: Session) -> None:
        rec = s.document.get_record(self.record)
        entry = rec.field_entry(self.field)
        if entry is None:
            self._created = True
            rec.body.append(FieldEntry(self.field, self.value, raw=None, dirty=True))
        else:
            self._prev = (entry.value, entry.dirty, entry.raw)
            entry.value = self.value
            entry.dirty = True

    def undo(self, s: Session) -> None:
        rec = s.document.get_record(self.record)
        if self._created:
            rec.body.pop()
        else:
            entry = rec.field_entry(self.field)
            entry.value, entry.dirty, entry.raw = self._prev


class RemoveField(Command):
    kind = "RemoveField"

    def __init__(self, record: str, field: str):
        self.record = record
        self.field = field
        self._removed: List[Tuple[int, FieldEntry]] = []

    def validate(self, s: Session) -> None:
        rec = _require_record(s, self.record)
        if rec.field_entry(self.field) is None:
            raise ValidationError("UnknownField",
                                  f"record {self.record!r} does not set {self.field!r}")

    def do(self, s: Session) -> None:
        rec = s.document.get_record(self.record)
        self._removed = [(i, it) for i, it in enumerate(rec.body)
                         if isinstance(it, FieldEntry) and it.field_name == self.field]
        for i, _ in reversed(self._removed):
            rec.body.pop(i)

    def undo(self, s: Session) -> None:
        rec = s.document.get_record(self.record)
        for i, entry in self._removed:
            rec.body.insert(i, entry)


def _ensure_record_layout(s: Session, name: str) -> Tuple[RecordLayout, bool]:
    lay = s.layout.records.get(name)
    if lay is not None:
        return lay, False
    placed = auto_layout(s.document, s.layout, s.separator).records[name]
    lay = RecordLayout(placed.x, placed.y, placed.flag_a, placed.flag_b,
                       placed.label, dirty=True)
    s.layout.records[name] = lay
    return lay, True


class MoveRecord(Command):
    kind = "MoveRecord"

    def __init__(self, name: str, dx: int, dy: int):
        self.name = name
        self.dx = int(dx)
        self.dy = int(dy)
        self._created = False
        self._prev: Optional[Tuple[int, int]] = None

    def validate(self, s: Session) -> None:
        _require_record(s, self.name)

    def do(self, s: Session) -> None:
        lay, self._created = _ensure_record_layout(s, self.name)
        self._prev = (lay.x, lay.y)
        lay.x += self.dx
        lay.y += self.dy
        lay.dirty = True

    def undo(self, s: Session) -> None:
        if self._created:
            del s.layout.records[self.name]
        else:
            lay = s.layout.records[self.name]
            lay.x, lay.y = self._prev


def _split_node_id(node_id: str) -> Tuple[str, str]:
    rec, _, fld = node_id.partition(".")
    return rec, fld


def _require_link_field(s: Session, node_id: str) -> RecordBlock:
    rec_name, fld = _split_node_id(node_id)
    rec = _require_record(s, rec_name)
    fdef = s.registry.lookup_field(rec.record_type, fld)
    if fdef is None:
        raise ValidationError("UnknownField",
                              f"record type {rec.record_type!r} has no field {fld!r}")
    if classify_field(fdef) is FieldKind.VARIABLE:
        raise ValidationError("NotALinkField", f"{node_id} is not a link field")
    return rec


class SetLink(Command):
    kind = "SetLink"

    def __init__(self, source: str, target: str):
        self.source = source
        self.target = target
        self._inner: Optional[SetField] = None

    def validate(self, s: Session) -> None:
        _require_link_field(s, self.source)

    def do(self, s: Session) -> None:
        rec_name, fld = _split_node_id(self.source)
        self._inner = SetField(rec_name, fld, self.target)
        self._inner.do(s)

    def undo(self, s: Session) -> None:
        self._inner.undo(s)


class ClearLink(Command):
    kind = "ClearLink"

    def __init__(self, source: str):
        self.source = source
        self._inner: Optional[SetField] = None
        self._link: Optional[LinkLayout] = None
        self._conns: Dict[str, ConnectorLayout] = {}

    def validate(self, s: Session) -> None:
        rec = _require_link_field(s, self.source)
        if rec.field_entry(_split_node_id(self.source)[1]) is None:
            raise ValidationError("UnknownField",
                                  f"{self.source} sets no value to clear")

    def do(self, s: Session) -> None:
        rec_name, fld = _split_node_id(self.source)
        self._inner = SetField(rec_name, fld, "")
        self._inner.do(s)
        self._conns = {cid: s.layout.connectors.pop(cid)
                       for cid in _chain_connectors(s.layout, self.source)}
        self._link = s.layout.links.pop(self.source, None)

    def undo(self, s: Session) -> None:
        self._inner.undo(s)
        if self._link is not None:
            s.layout.links[self.source] = self._link
        s.layout.connectors.update(self._conns)


def _new_connector_id(table: LayoutTable, source: str) -> str:
    base = source.replace(".", "/", 1)
    if base not in table.connectors:
        return base
    k = 2
    while f"{base}/{k}" in table.connectors:
        k += 1
    return f"{base}/{k}"


class AddConnector(Command):
    kind = "AddConnector"

    def __init__(self, source: str, x: int, y: int):
        self.source = source
        self.x = int(x)
        self.y = int(y)
        self._cid: Optional[str] = None
        self._created_link = False
        self._prev_tail: Optional[Tuple[str, str]] = None  # (kind, key)

    def validate(self, s: Session) -> None:
        rec = _require_link_field(s, self.source)
        fld = _split_node_id(self.source)[1]
        value = rec.field_value(fld) or ""
        if topology.parse_link_value(value).kind != "RecordLink":
            raise ValidationError("NotALink",
                                  f"{self.source} does not link to a record")

    def do(self, s: Session) -> None:
        lay = s.layout
        rec_name, fld = _split_node_id(self.source)
        rec = s.document.get_record(rec_name)
        target = topology.parse_link_value(rec.field_value(fld))
        terminal = target.target_id
        cid = _new_connector_id(lay, self.source)
        self._cid = cid
        link = lay.links.get(self.source)
        if link is None:
            self._created_link = True
            lay.links[self.source] = LinkLayout(cid, dirty=True)
            nxt = terminal
        else:
            chain = _chain_connectors(lay, self.source)
            if not chain:
                self._prev_tail = ("link", self.source)
                nxt = link.chain
                link.chain = cid
                link.dirty = True
            else:
                tail = lay.connectors[chain[-1]]
                self._prev_tail = ("conn", tail.id)
                nxt = tail.next
                tail.next = cid
                tail.dirty = True
        lay.connectors[cid] = ConnectorLayout(cid, nxt, self.x, self.y, 0, "", dirty=True)

    def undo(self, s: Session) -> None:
        lay = s.layout
        conn = lay.connectors.pop(self._cid)
        if self._created_link:
            del lay.links[self.source]
        elif self._prev_tail is not None:
            kind, key = self._prev_tail
            if kind == "link":
                lay.links[key].chain = conn.next
            else:
                lay.connectors[key].next = conn.next


class MoveConnector(Command):
    kind = "MoveConnector"

    def __init__(self, id: str, dx: int, dy: int):
        self.id = id
        self.dx = int(dx)
        self.dy = int(dy)
        self._prev: Optional[Tuple[int, int]] = None

    def validate(self, s: Session) -> None:
        if self.id not in s.layout.connectors:
            raise ValidationError("UnknownConnector", f"no connector {self.id!r}")

    def do(self, s: Session) -> None:
        conn = s.layout.connectors[self.id]
        self._prev = (conn.x, conn.y)
        conn.x += self.dx
        conn.y += self.dy
        conn.dirty = True

    def undo(self, s: Session) -> None:
        conn = s.layout.connectors[self.id]
        conn.x, conn.y = self._prev


class RemoveConnector(Command):
    kind = "RemoveConnector"

    def __init__(self, id: str):
        self.id = id
        self._conn: Optional[ConnectorLayout] = None
        self._pred: Optional[Tuple[str, str]] = None

    def validate(self, s: Session) -> None:
        if self.id not in s.layout.connectors:
            raise ValidationError("UnknownConnector", f"no connector {self.id!r}")

    def do(self, s: Session) -> None:
        lay = s.layout
        conn = lay.connectors.pop(self.id)
        self._conn = conn
        self._pred = None
        for src, link in lay.links.items():
            if link.chain == self.id:
                self._pred = ("link", src)
                link.chain = conn.next
                link.dirty = True
                break
        else:
            for cid, other in lay.connectors.items():
                if other.next == self.id:
                    self._pred = ("conn", cid)
                    other.next = conn.next
                    other.dirty = True
                    break

    def undo(self, s: Session) -> None:
        lay = s.layout
        lay.connectors[self.id] = self._conn
        if self._pred is not None:
            kind, key = self._pred
            if kind == "link":
                lay.links[key].chain = self.id
            else:
                lay.connectors[key].next = self.id


def copy_records(s: Session, names: List[str]) -> Clipboard:
    """Deep-copy the named records with layout entries and their link chains."""
    clip = Clipboard()
    selection = set(names)
    for rec in s.document.records():
        if rec.name not in selection:
            continue
        dup = copy.deepcopy(rec)
        dup.header_raw = None
        dup.closer_raw = None
        dup.line = 0
        for entry in dup.fields():
            entry.raw = None
        clip.records.append(dup)
        if rec.name in s.layout.records:
            clip.layouts[rec.name] = copy.deepcopy(s.layout.records[rec.name])
        prefix = rec.name + "."
        for node_id, node in s.layout.field_nodes.items():
            if node_id.startswith(prefix):
                clip.field_nodes[node_id] = copy.deepcopy(node)
        for src, link in s.layout.links.items():
            if src.startswith(prefix):
                clip.links[src] = copy.deepcopy(link)
                for cid in _chain_connectors(s.layout, src):
                    clip.connectors[cid] = copy.deepcopy(s.layout.connectors[cid])
    for entry in list(clip.layouts.values()) + list(clip.field_nodes.values()) \
            + list(clip.links.values()) + list(clip.connectors.values()):
        entry.line_ref = None
        entry.dirty = True
    return clip


def _uniquify(s: Session, name: str) -> str:
    if s.document.get_record(name) is None:
        return name
    k = 1
    while s.document.get_record(f"{name}_{k}") is not None:
        k += 1
    return f"{name}_{k}"


class Paste(Command):
    kind = "Paste"

    def __init__(self, clipboard: Clipboard, dx: int = 0, dy: int = 0):
        self.clipboard = clipboard
        self.dx = int(dx)
        self.dy = int(dy)
        self._created: List[str] = []

    def validate(self, s: Session) -> None:
        if not self.clipboard:
            raise ValidationError("EmptyClipboard", "nothing to paste")

    def do(self, s: Session) -> None:
        clip = self.clipboard
        mapping = {rec.name: _uniquify(s, rec.name) for rec in clip.records}
        self._created = list(mapping.values())
        index = _record_insert_index(s.document)

        def map_id(node_id: str) -> str:
            rec, dot, fld = node_id.partition(".")
            return mapping.get(rec, rec) + dot + fld

        def map_conn_id(cid: str) -> str:
            rec, slash, rest = cid.partition("/")
            return mapping.get(rec, rec) + slash + rest

        for rec in clip.records:
            dup = copy.deepcopy(rec)
            old_name = dup.name
            dup.name = mapping[old_name]
            rtype = s.registry.record_types.get(dup.record_type)
            for entry in dup.fields():
                fdef = rtype.fields.get(entry.field_name) if rtype else None
                if fdef is None or classify_field(fdef) is FieldKind.VARIABLE:
                    continue
                target = topology.parse_link_value(entry.value)
                if target.kind == "RecordLink" and target.record_name in mapping:
                    entry.value = target.with_record(mapping[target.record_name]).raw
                entry.dirty = True
            s.document.items.insert(index, dup)
            index += 1
            lay = clip.layouts.get(old_name)
            if lay is not None:
                s.layout.records[dup.name] = RecordLayout(
                    lay.x + self.dx, lay.y + self.dy, lay.flag_a, lay.flag_b,
                    _unqualified(dup.name, s.separator), dirty=True)
        for node_id, node in clip.field_nodes.items():
            new_id = map_id(node_id)
            s.layout.field_nodes[new_id] = FieldNodeLayout(
                node.color, node.flag, new_id, dirty=True)
        for src, link in clip.links.items():
            new_chain = link.chain
            if new_chain in clip.connectors:
                new_chain = map_conn_id(new_chain)
            elif _split_node_id(new_chain)[0] in mapping:
                new_chain = map_id(new_chain)
            s.layout.links[map_id(src)] = LinkLayout(new_chain, dirty=True)
        for cid, conn in clip.connectors.items():
            nxt = conn.next
            if nxt in clip.connectors:
                nxt = map_conn_id(nxt)
            elif _split_node_id(nxt)[0] in mapping:
                nxt = map_id(nxt)
            new_cid = map_conn_id(cid)
            s.layout.connectors[new_cid] = ConnectorLayout(
                new_cid, nxt, conn.x + self.dx, conn.y + self.dy,
                conn.mode, conn.label, dirty=True)

    def undo(self, s: Session) -> None:
        for name in self._created:
            DeleteRecord(name).do(s)


# ---------------------------------------------------------------------------
# Log operations


def apply(s: Session, cmd: Command) -> List[Diagnostic]:
    """Validate and apply; on ValidationError the session is unchanged."""
    cmd.validate(s)
    cmd.do(s)
    del s.log.applied[s.log.cursor:]
    s.log.applied.append(cmd)
    s.log.cursor += 1
    s.ever_modified = True
    _, graph_diags = s.graph()
    return list(s.parse_diagnostics) + graph_diags


def undo(s: Session) -> None:
    if s.log.cursor == 0:
        raise NothingToUndo()
    s.log.cursor -= 1
    s.log.applied[s.log.cursor].undo(s)


def redo(s: Session) -> None:
    if s.log.cursor >= len(s.log.applied):
        raise NothingToRedo()
    s.log.applied[s.log.cursor].do(s)
    s.log.cursor += 1


COMMAND_KINDS = {
    "CreateRecord": (CreateRecord, ("type", "name", "x", "y"), ("x", "y")),
    "DeleteRecord": (DeleteRecord, ("name",), ()),
    "RenameRecord": (RenameRecord, ("old", "new"), ()),
    "SetField": (SetField, ("record", "field", "value"), ()),
    "RemoveField": (RemoveField, ("record", "field"), ()),
    "MoveRecord": (MoveRecord, ("name", "dx", "dy"), ()),
    "SetLink": (SetLink, ("source", "target"), ()),
    "ClearLink": (ClearLink, ("source",), ()),
    "AddConnector": (AddConnector, ("source", "x", "y"), ()),
    "MoveConnector": (MoveConnector, ("id", "dx", "dy"), ()),
    "RemoveConnector": (RemoveConnector, ("id",), ()),
}


def command_from_json(s: Session, payload: dict) -> Command:
    """Build a Command from the wire schema used by the editor service."""
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ValidationError("MalformedCommand", "command body needs a 'kind'")
    kind = payload["kind"]
    if kind == "Paste":
        names = payload.get("names")
        if not isinstance(names, list):
            raise ValidationError("MalformedCommand", "Paste needs 'names'")
        clip = copy_records(s, [str(n) for n in names])
        return Paste(clip, payload.get("dx", 0), payload.get("dy", 0))
    spec = COMMAND_KINDS.get(kind)
    if spec is None:
        raise ValidationError("UnknownCommand", f"unknown command kind {kind!r}")
    cls, params, optional = spec
    args = []
    for p in params:
        if p in payload:
            args.append(payload[p])
        elif p in optional:
            args.append(0)
        else:
            raise ValidationError("MalformedCommand",
                                  f"{kind} is missing parameter {p!r}")
    try:
        return cls(*args)
    except (TypeError, ValueError) as exc:
        raise ValidationError("MalformedCommand", str(exc))


# ---------------------------------------------------------------------------
# Saving


def save(s: Session) -> str:
    """Serialize the session; untouched sessions reproduce the input bytes."""
    text = serialize_session(s)
    s.saved_mark = s.log.cursor
    return text


def serialize_session(s: Session) -> str:
    if not s.ever_modified:
        return dbmod.serialize_db(s.document)

    lay = s.layout
    nl = s.document.newline
    by_ref: Dict[int, Tuple[str, object, object]] = {}
    for name, entry in lay.records.items():
        if entry.line_ref is not None:
            by_ref[id(entry.line_ref)] = ("record", name, entry)
    for node_id, entry in lay.field_nodes.items():
        if entry.line_ref is not None:
            by_ref[id(entry.line_ref)] = ("field", node_id, entry)
    for src, entry in lay.links.items():
        if entry.line_ref is not None:
            by_ref[id(entry.line_ref)] = ("link", src, entry)
    for cid, entry in lay.connectors.items():
        if entry.line_ref is not None:
            by_ref[id(entry.line_ref)] = ("connector", cid, entry)
    preserved = {id(item) for item in lay.preserved_refs}

    out: List[str] = []
    has_marker = False
    for item in s.document.items:
        if isinstance(item, RecordBlock):
            out.append(serialize_record(item, nl))
            continue
        if not isinstance(item, LayoutLine):
            out.append(item.raw)
            continue
        if id(item) in preserved:
            out.append(item.raw)
            if laymod.MARKER_TEXT in item.content:
                has_marker = True
            continue
        hit = by_ref.get(id(item))
        if hit is None:
            continue  # entity deleted; drop its directive line
        kind, key, entry = hit
        if not entry.dirty:
            out.append(item.raw)
        else:
            out.append("#! " + _format_entry(kind, key, entry) + nl)

    new_lines = _new_directive_lines(s)
    if new_lines:
        if out and not out[-1].endswith("\n"):
            out.append(nl)
        if not has_marker and not any(isinstance(i, LayoutLine) for i in s.document.items):
            out.append(f"#! {laymod.HEADER_TEXT}{nl}")
            out.append(f"#! {laymod.MARKER_TEXT}{nl}")
        elif not has_marker:
            out.append(f"#! {laymod.MARKER_TEXT}{nl}")
        out.extend(line + nl for line in new_lines)
    return "".join(out)


def _format_entry(kind: str, key, entry) -> str:
    if kind == "record":
        return format_record_directive(key, entry)
    if kind == "field":
        return format_field_directive(key, entry)
    if kind == "link":
        return format_link_directive(key, entry)
    return format_connector_directive(entry)


def _new_directive_lines(s: Session) -> List[str]:
    lay = s.layout
    lines: List[str] = []
    emitted_conns = set()
    for name, entry in lay.records.items():
        if entry.line_ref is None:
            lines.append("#! " + format_record_directive(name, entry))
    for node_id, entry in lay.field_nodes.items():
        if entry.line_ref is None:
            lines.append("#! " + format_field_directive(node_id, entry))
    for src, entry in lay.links.items():
        if entry.line_ref is None:
            lines.append("#! " + format_link_directive(src, entry))
        for cid in _chain_connectors(lay, src):
            conn = lay.connectors[cid]
            if conn.line_ref is None and cid not in emitted_conns:
                lines.append("#! " + format_connector_directive(conn))
                emitted_conns.add(cid)
    for cid, conn in lay.connectors.items():
        if conn.line_ref is None and cid not in emitted_conns:
            lines.append("#! " + format_connector_directive(conn))
    return lines


# ---------------------------------------------------------------------------
# Semantic state (used by undo/equality tests)


def semantic_state(s: Session):
    records = []
    for rec in s.document.records():
        fields = tuple((e.field_name, e.value) for e in rec.fields())
        records.append((rec.name, rec.record_type, fields))
    lay = s.layout
    return (
        tuple(records),
        {k: (v.x, v.y, v.flag_a, v.flag_b, v.label) for k, v in lay.records.items()},
        {k: (v.color, v.flag, v.label) for k, v in lay.field_nodes.items()},
        {k: v.chain for k, v in lay.links.items()},
        {k: (v.next, v.x, v.y, v.mode, v.label) for k, v in lay.connectors.items()},
    )
