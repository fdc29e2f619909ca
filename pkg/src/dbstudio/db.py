"""Lossless parser and serializer for EPICS record instance (.db) files.

The parser is total: any input produces a Document whose items cover every
input character, so an unmodified Document serializes back byte-for-byte.
Unknown record-body constructs (info, alias, ...) are kept verbatim as
opaque lines. Layout directives (lines starting with ``#!``) are captured
but not interpreted here; see :mod:`dbstudio.layout`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple, Union

from .diagnostics import (
    DUPLICATE_FIELD,
    DUPLICATE_RECORD_NAME,
    SYNTAX_ERROR,
    UNCLOSED_RECORD,
    UNKNOWN_FIELD,
    Diagnostic,
    error,
    warning,
)

# Record names may contain anything except whitespace and ( ) { } " .
RECORD_HEAD_RE = re.compile(
    r'record\s*\(\s*([A-Za-z0-9_]+)\s*,\s*([^\s(){}".]+)\s*\)\s*\{'
)
FIELD_RE = re.compile(r'field\s*\(\s*([A-Za-z0-9_]+)\s*,\s*"((?:\\.|[^"\\])*)"\s*\)')
NAME_RE = re.compile(r'[^\s(){}".]+\Z')


def escape_value(value: str) -> str:
    return value.replace("\\", "\\\\").replace('"', '\\"')


def unescape_value(raw: str) -> str:
    out = []
    i = 0
    while i < len(raw):
        c = raw[i]
        if c == "\\" and i + 1 < len(raw) and raw[i + 1] in ('"', "\\"):
            out.append(raw[i + 1])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def is_valid_record_name(name: str) -> bool:
    return bool(name) and NAME_RE.match(name) is not None


@dataclass
class CommentLine:
    raw: str
    kind = "CommentLine"


@dataclass
class LayoutLine:
    raw: str
    kind = "LayoutLine"

    @property
    def content(self) -> str:
        """Directive text after the ``#!`` marker, without line ending."""
        text = self.raw.lstrip()
        return text[2:].rstrip("\r\n")


@dataclass
class BlankLine:
    raw: str
    kind = "BlankLine"


@dataclass
class OpaqueLine:
    raw: str
    kind = "OpaqueLine"


@dataclass
class FieldEntry:
    field_name: str
    value: str
    raw: Optional[str] = None  # None for entries added programmatically
    dirty: bool = False
    kind = "FieldEntry"


BodyItem = Union[FieldEntry, CommentLine, BlankLine, OpaqueLine]


@dataclass
class RecordBlock:
    record_type: str
    name: str
    body: List[BodyItem] = field(default_factory=list)
    header_raw: Optional[str] = None
    closer_raw: Optional[str] = None
    header_dirty: bool = False
    line: int = 0  # 1-based header line in the source, 0 for new records
    kind = "RecordBlock"

    @property
    def raw(self) -> str:
        parts = [self.header_raw or ""]
        parts += [item.raw or "" for item in self.body]
        parts.append(self.closer_raw or "")
        return "".join(parts)

    def fields(self) -> Iterator[FieldEntry]:
        for item in self.body:
            if isinstance(item, FieldEntry):
                yield item

    def field_entry(self, field_name: str) -> Optional[FieldEntry]:
        # last occurrence wins for value queries
        found = None
        for entry in self.fields():
            if entry.field_name == field_name:
                found = entry
        return found

    def field_value(self, field_name: str) -> Optional[str]:
        entry = self.field_entry(field_name)
        return entry.value if entry is not None else None


SourceItem = Union[RecordBlock, CommentLine, LayoutLine, BlankLine, OpaqueLine]


@dataclass
class Document:
    items: List[SourceItem] = field(default_factory=list)
    source_name: str = ""
    newline: str = "\n"

    def records(self) -> Iterator[RecordBlock]:
        for item in self.items:
            if isinstance(item, RecordBlock):
                yield item

    def record_names(self) -> List[str]:
        return [r.name for r in self.records()]

    def get_record(self, name: str) -> Optional[RecordBlock]:
        for rec in self.records():
            if rec.name == name:
                return rec
        return None

    def layout_lines(self) -> Iterator[LayoutLine]:
        for item in self.items:
            if isinstance(item, LayoutLine):
                yield item


def get_record(doc: Document, name: str) -> Optional[RecordBlock]:
    return doc.get_record(name)


def _first_unquoted_brace(seg: str) -> int:
    """Index of the first '}' outside a quoted string, or -1."""
    in_quote = False
    i = 0
    while i < len(seg):
        c = seg[i]
        if in_quote:
            if c == "\\":
                i += 1
            elif c == '"':
                in_quote = False
        elif c == '"':
            in_quote = True
        elif c == "}":
            return i
        i += 1
    return -1


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def line_end(self) -> int:
        """End index of the current line, including its terminator."""
        eol = self.text.find("\n", self.pos)
        return len(self.text) if eol == -1 else eol + 1

    def take(self, end: int) -> str:
        chunk = self.text[self.pos : end]
        self.pos = end
        self.line += chunk.count("\n")
        return chunk


def parse_db(text: str, source_name: str = "") -> Tuple[Document, List[Diagnostic]]:
    """Parse a .db file body. Never raises; problems become diagnostics."""
    crlf = text.count("\r\n")
    lf = text.count("\n") - crlf
    newline = "\r\n" if crlf > lf else "\n"

    doc = Document(source_name=source_name, newline=newline)
    diags: List[Diagnostic] = []
    sc = _Scanner(text)

    while not sc.eof():
        line_end = sc.line_end()
        line = sc.text[sc.pos : line_end]
        stripped = line.strip()
        if stripped == "":
            doc.items.append(BlankLine(sc.take(line_end)))
        elif stripped.startswith("#!"):
            doc.items.append(LayoutLine(sc.take(line_end)))
        elif stripped.startswith("#"):
            doc.items.append(CommentLine(sc.take(line_end)))
        elif stripped.startswith("record") and RECORD_HEAD_RE.match(
            sc.text, sc.pos + (len(line) - len(line.lstrip()))
        ):
            _parse_record(sc, doc, diags)
        else:
            col = len(line) - len(line.lstrip()) + 1
            diags.append(
                error(SYNTAX_ERROR, f"unrecognized construct: {stripped[:40]!r}",
                      location=(sc.line, col))
            )
            doc.items.append(OpaqueLine(sc.take(line_end)))

    _check_duplicates(doc, diags)
    return doc, diags


def _parse_record(sc: _Scanner, doc: Document, diags: List[Diagnostic]) -> None:
    start = sc.pos
    start_line = sc.line
    head_start = start + (len(sc.text[start : sc.line_end()]) -
                          len(sc.text[start : sc.line_end()].lstrip()))
    m = RECORD_HEAD_RE.match(sc.text, head_start)
    assert m is not None
    rtype, rname = m.group(1), m.group(2)
    header_end = m.end()

    # Extend the header through the line terminator when nothing but
    # whitespace follows the opening brace.
    eol = sc.text.find("\n", header_end)
    this_eol = len(sc.text) if eol == -1 else eol + 1
    if sc.text[header_end:this_eol].strip() == "":
        header_end = this_eol
    header_raw = sc.take(header_end)

    rec = RecordBlock(rtype, rname, header_raw=header_raw, line=start_line)
    seen_fields = set()

    while True:
        if sc.eof():
            diags.append(
                error(UNCLOSED_RECORD, f"record {rname!r} has no closing brace",
                      location=(start_line, 1))
            )
            rec.closer_raw = ""
            break
        line_end = sc.line_end()
        seg = sc.text[sc.pos : line_end]
        body = seg.strip()
        first = sc.pos + (len(seg) - len(seg.lstrip()))

        if body == "":
            rec.body.append(BlankLine(sc.take(line_end)))
            continue
        if sc.text[first] == "}":
            closer_end = first + 1
            rest_eol = sc.text.find("\n", closer_end)
            rest_end = len(sc.text) if rest_eol == -1 else rest_eol + 1
            if sc.text[closer_end:rest_end].strip() == "":
                closer_end = rest_end
            rec.closer_raw = sc.take(closer_end)
            break
        if body.startswith("#"):
            rec.body.append(CommentLine(sc.take(line_end)))
            continue
        fm = FIELD_RE.match(sc.text, first)
        if fm is not None:
            fend = fm.end()
            rest_eol = sc.text.find("\n", fend)
            rest_end = len(sc.text) if rest_eol == -1 else rest_eol + 1
            if sc.text[fend:rest_end].strip() == "":
                fend = rest_end
            fname = fm.group(1)
            if fname in seen_fields:
                diags.append(
                    warning(DUPLICATE_FIELD,
                            f"field {fname!r} set more than once in record {rname!r}",
                            location=(sc.line, 1), path=f"{rname}.{fname}")
                )
            seen_fields.add(fname)
            rec.body.append(
                FieldEntry(fname, unescape_value(fm.group(2)), raw=sc.take(fend))
            )
            continue
        # Opaque body content; stop before an unquoted '}' so one-line
        # records still close.
        brace = _first_unquoted_brace(seg)
        opaque_end = line_end if brace == -1 else sc.pos + brace
        if body.startswith("field"):
            diags.append(
                error(SYNTAX_ERROR,
                      f"malformed field in record {rname!r}: {body[:40]!r}",
                      location=(sc.line, first - sc.pos + 1))
            )
        rec.body.append(OpaqueLine(sc.take(opaque_end)))

    doc.items.append(rec)


def _check_duplicates(doc: Document, diags: List[Diagnostic]) -> None:
    seen = set()
    for rec in doc.records():
        if rec.name in seen:
            diags.append(
                error(DUPLICATE_RECORD_NAME,
                      f"record name {rec.name!r} already defined",
                      location=(rec.line, 1), path=rec.name)
            )
        seen.add(rec.name)


def format_field_line(entry: FieldEntry, newline: str) -> str:
    return f'  field({entry.field_name},"{escape_value(entry.value)}"){newline}'


def serialize_record(rec: RecordBlock, newline: str) -> str:
    parts = []
    if rec.header_raw is not None and not rec.header_dirty:
        parts.append(rec.header_raw)
    else:
        parts.append(f"record({rec.record_type},{rec.name}) {{{newline}")
    for item in rec.body:
        if isinstance(item, FieldEntry) and (item.dirty or item.raw is None):
            parts.append(format_field_line(item, newline))
        else:
            parts.append(item.raw or "")
    if rec.closer_raw is not None and not rec.header_dirty:
        parts.append(rec.closer_raw)
    else:
        parts.append("}" + newline)
    return "".join(parts)


def serialize_db(doc: Document) -> str:
    """Emit the document; untouched items reproduce their source bytes."""
    out = []
    for item in doc.items:
        if isinstance(item, RecordBlock):
            out.append(serialize_record(item, doc.newline))
        else:
            out.append(item.raw)
    return "".join(out)


def effective_field_value(rec: RecordBlock, field_name: str, registry) -> Tuple[str, bool]:
    """Explicit value if set, else the dbd default.

    Raises UnknownFieldError when the record type does not define the field.
    """
    fdef = registry.lookup_field(rec.record_type, field_name)
    if fdef is None:
        raise UnknownFieldError(
            f"record type {rec.record_type!r} has no field {field_name!r}"
        )
    explicit = rec.field_value(field_name)
    value = explicit if explicit is not None else fdef.default_value
    return value, value == fdef.default_value


class UnknownFieldError(KeyError):
    code = UNKNOWN_FIELD
