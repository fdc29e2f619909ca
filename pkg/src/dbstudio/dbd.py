"""Database definition (.dbd) loader.

Parses the subset of the dbd grammar needed to validate record instances:
menu blocks, recordtype blocks with field properties, device declarations
and includes. The resulting TypeRegistry is immutable in practice and safe
to share between sessions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

from .diagnostics import (
    INCLUDE_CYCLE,
    SYNTAX_ERROR,
    UNRESOLVED_MENU,
    SKIPPED_CONSTRUCT,
    Diagnostic,
    error,
    warning,
)


class DbfType(Enum):
    STRING = "STRING"
    CHAR = "CHAR"
    UCHAR = "UCHAR"
    SHORT = "SHORT"
    USHORT = "USHORT"
    LONG = "LONG"
    ULONG = "ULONG"
    FLOAT = "FLOAT"
    DOUBLE = "DOUBLE"
    ENUM = "ENUM"
    MENU = "MENU"
    DEVICE = "DEVICE"
    INLINK = "INLINK"
    OUTLINK = "OUTLINK"
    FWDLINK = "FWDLINK"
    NOACCESS = "NOACCESS"


class FieldKind(Enum):
    VARIABLE = "VARIABLE"
    INPUT = "INPUT"
    OUTPUT = "OUTPUT"
    FORWARD = "FORWARD"


def classify_field(fdef: "FieldDef") -> FieldKind:
    return classify_dbf_type(fdef.data_type)


def classify_dbf_type(data_type: DbfType) -> FieldKind:
    if data_type is DbfType.INLINK:
        return FieldKind.INPUT
    if data_type is DbfType.OUTLINK:
        return FieldKind.OUTPUT
    if data_type is DbfType.FWDLINK:
        return FieldKind.FORWARD
    return FieldKind.VARIABLE


@dataclass
class FieldDef:
    name: str
    data_type: DbfType
    default_value: str = ""
    menu_name: Optional[str] = None
    prompt: str = ""
    prompt_order: int = 0

    @property
    def kind(self) -> FieldKind:
        return classify_field(self)


@dataclass
class RecordTypeDef:
    name: str
    fields: Dict[str, FieldDef] = field(default_factory=dict)

    @property
    def no_val_field(self) -> bool:
        return "VAL" not in self.fields


@dataclass
class DeviceDef:
    record_type: str
    link_type: str
    dset: str
    choice: str


@dataclass
class TypeRegistry:
    record_types: Dict[str, RecordTypeDef] = field(default_factory=dict)
    menus: Dict[str, List[Tuple[str, str]]] = field(default_factory=dict)
    devices: List[DeviceDef] = field(default_factory=list)

    def lookup_field(self, record_type: str, field_name: str) -> Optional[FieldDef]:
        rtype = self.record_types.get(record_type)
        if rtype is None:
            return None
        return rtype.fields.get(field_name)

    def has_record_type(self, record_type: str) -> bool:
        return record_type in self.record_types


_TOKEN_RE = re.compile(
    r'"(?:\\.|[^"\\])*"'      # quoted string
    r"|[(){},]"               # punctuation
    r"|[^\s(){},\"]+"         # bare token
)

FileResolver = Callable[[str], str]


class _Tokens:
    def __init__(self, text: str):
        self.tokens: List[Tuple[str, int]] = []
        line = 1
        for raw_line in text.splitlines(keepends=True):
            body = raw_line.split("#", 1)[0] if not raw_line.lstrip().startswith("#") else ""
            for m in _TOKEN_RE.finditer(body):
                self.tokens.append((m.group(0), line))
            line += 1
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def line(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return self.tokens[-1][1] if self.tokens else 1

    def next(self) -> Optional[str]:
        tok = self.peek()
        if tok is not None:
            self.i += 1
        return tok

    def expect(self, want: str) -> bool:
        if self.peek() == want:
            self.next()
            return True
        return False


def _unquote(tok: str) -> str:
    if len(tok) >= 2 and tok.startswith('"') and tok.endswith('"'):
        inner = tok[1:-1]
        return inner.replace('\\"', '"').replace("\\\\", "\\")
    return tok


def _skip_balanced(ts: _Tokens) -> None:
    """Skip a parenthesized and/or braced tail of an unknown construct."""
    if ts.peek() == "(":
        depth = 0
        while ts.peek() is not None:
            tok = ts.next()
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0:
                    break
    if ts.peek() == "{":
        depth = 0
        while ts.peek() is not None:
            tok = ts.next()
            if tok == "{":
                depth += 1
            elif tok == "}":
                depth -= 1
                if depth == 0:
                    break


def parse_dbd(
    text: str,
    resolver: Optional[FileResolver] = None,
    source_name: str = "",
) -> Tuple[TypeRegistry, List[Diagnostic]]:
    """Parse a .dbd file into a TypeRegistry.

    ``resolver`` maps an include pathname to file contents; includes are
    skipped with a warning when no resolver is supplied.
    """
    registry = TypeRegistry()
    diags: List[Diagnostic] = []
    _parse_into(registry, diags, text, resolver, source_name, stack=[source_name or "<input>"])
    _check_menus(registry, diags)
    return registry, diags


def _parse_into(registry, diags, text, resolver, source_name, stack) -> None:
    ts = _Tokens(text)
    while ts.peek() is not None:
        tok = ts.next()
        if tok == "menu":
            _parse_menu(ts, registry, diags)
        elif tok == "recordtype":
            _parse_recordtype(ts, registry, diags)
        elif tok == "device":
            _parse_device(ts, registry, diags)
        elif tok == "include":
            path_tok = ts.next()
            if path_tok is None:
                diags.append(error(SYNTAX_ERROR, "include without a pathname",
                                   location=(ts.line(), 1)))
                continue
            path = _unquote(path_tok)
            if resolver is None:
                diags.append(warning(SKIPPED_CONSTRUCT,
                                     f"include {path!r} skipped (no resolver)"))
                continue
            if path in stack:
                diags.append(error(INCLUDE_CYCLE,
                                   f"include cycle via {path!r}",
                                   location=(ts.line(), 1)))
                continue
            try:
                included = resolver(path)
            except OSError as exc:
                diags.append(error(SYNTAX_ERROR,
                                   f"cannot resolve include {path!r}: {exc}",
                                   location=(ts.line(), 1)))
                continue
            _parse_into(registry, diags, included, resolver, path, stack + [path])
        elif tok in ("driver", "registrar", "variable", "function", "breaktable"):
            diags.append(warning(SKIPPED_CONSTRUCT, f"{tok} block skipped"))
            _skip_balanced(ts)
        else:
            diags.append(warning(SKIPPED_CONSTRUCT,
                                 f"unrecognized construct {tok!r} skipped"))
            _skip_balanced(ts)


def _parse_args(ts: _Tokens) -> Optional[List[str]]:
    if not ts.expect("("):
        return None
    args: List[str] = []
    while True:
        tok = ts.peek()
        if tok is None:
            return None
        if tok == ")":
            ts.next()
            return args
        if tok == ",":
            ts.next()
            continue
        args.append(_unquote(ts.next()))


def _parse_menu(ts, registry, diags) -> None:
    args = _parse_args(ts)
    if not args:
        diags.append(error(SYNTAX_ERROR, "menu without a name", location=(ts.line(), 1)))
        return
    name = args[0]
    choices: List[Tuple[str, str]] = []
    if ts.expect("{"):
        while ts.peek() not in (None, "}"):
            tok = ts.next()
            if tok == "choice":
                cargs = _parse_args(ts)
                if cargs and len(cargs) >= 2:
                    choices.append((cargs[0], cargs[1]))
                else:
                    diags.append(warning(SKIPPED_CONSTRUCT,
                                         f"malformed choice in menu {name!r}"))
            else:
                diags.append(warning(SKIPPED_CONSTRUCT,
                                     f"unrecognized menu property {tok!r}"))
                _skip_balanced(ts)
        ts.expect("}")
    registry.menus[name] = choices


def _parse_recordtype(ts, registry, diags) -> None:
    line = ts.line()
    args = _parse_args(ts)
    if not args:
        diags.append(error(SYNTAX_ERROR, "recordtype without a name", location=(line, 1)))
        return
    name = args[0]
    rtype = RecordTypeDef(name)
    ok = True
    if not ts.expect("{"):
        diags.append(error(SYNTAX_ERROR, f"recordtype {name!r} has no body",
                           location=(line, 1)))
        return
    order = 0
    while ts.peek() not in (None, "}"):
        tok = ts.next()
        if tok == "field":
            fline = ts.line()
            fargs = _parse_args(ts)
            if not fargs or len(fargs) < 2:
                diags.append(error(
                    SYNTAX_ERROR,
                    f"field in recordtype {name!r} is missing its data type",
                    location=(fline, 1)))
                ok = False
                _skip_balanced(ts)
                continue
            fname = fargs[0]
            type_name = fargs[1].removeprefix("DBF_")
            try:
                dtype = DbfType(type_name)
            except ValueError:
                diags.append(error(SYNTAX_ERROR,
                                   f"unknown field data type {fargs[1]!r}",
                                   location=(fline, 1)))
                ok = False
                _skip_balanced(ts)
                continue
            fdef = FieldDef(fname, dtype, prompt_order=order)
            order += 1
            _parse_field_body(ts, fdef, diags)
            rtype.fields[fname] = fdef
        else:
            diags.append(warning(SKIPPED_CONSTRUCT,
                                 f"unrecognized recordtype property {tok!r}"))
            _skip_balanced(ts)
    ts.expect("}")
    if not rtype.fields:
        diags.append(error(SYNTAX_ERROR,
                           f"recordtype {name!r} defines no fields; skipped",
                           location=(line, 1)))
        return
    if not ok:
        diags.append(error(SYNTAX_ERROR,
                           f"recordtype {name!r} skipped due to field errors",
                           location=(line, 1)))
        return
    registry.record_types[name] = rtype


def _parse_field_body(ts, fdef: FieldDef, diags) -> None:
    if not ts.expect("{"):
        return
    while ts.peek() not in (None, "}"):
        prop = ts.next()
        args = _parse_args(ts)
        if prop == "initial" and args:
            fdef.default_value = args[0]
        elif prop == "prompt" and args:
            fdef.prompt = args[0]
        elif prop == "menu" and args:
            fdef.menu_name = args[0]
        elif prop in ("promptgroup", "special", "pp", "interest", "asl",
                      "size", "extra", "base"):
            pass  # recognized but irrelevant here
        else:
            diags.append(warning(SKIPPED_CONSTRUCT,
                                 f"unrecognized field property {prop!r}"))
    ts.expect("}")


def _parse_device(ts, registry, diags) -> None:
    args = _parse_args(ts)
    if not args or len(args) < 4:
        diags.append(warning(SKIPPED_CONSTRUCT, "malformed device declaration"))
        return
    registry.devices.append(DeviceDef(args[0], args[1], args[2], args[3]))


def _check_menus(registry, diags) -> None:
    for rtype in registry.record_types.values():
        for fdef in rtype.fields.values():
            if fdef.data_type is DbfType.MENU:
                if fdef.menu_name is None or fdef.menu_name not in registry.menus:
                    diags.append(warning(
                        UNRESOLVED_MENU,
                        f"field {rtype.name}.{fdef.name} references "
                        f"unknown menu {fdef.menu_name!r}"))
