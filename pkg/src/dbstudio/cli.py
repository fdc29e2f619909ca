"""Command-line interface: lint, fmt, layout, graph, serve.

Exit codes: 0 clean, 1 Error diagnostics (or any diagnostic with --strict),
2 usage or IO failure. Diagnostics go to stderr; artifacts to stdout or -o.
"""

from __future__ import annotations

import argparse
import socket
import sys
from typing import List, Optional

from . import engine
from .db import parse_db, serialize_db
from .dbd import parse_dbd
from .diagnostics import Diagnostic, Severity
from .layout import auto_layout, decode_layout
from .topology import build_graph, export_dot, export_json


def _read(path: str) -> Optional[str]:
    try:
        with open(path, "rb") as fh:
            return fh.read().decode("latin-1")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None


def _write(text: str, out: Optional[str]) -> bool:
    if out is None:
        sys.stdout.write(text)
        return True
    try:
        with open(out, "wb") as fh:
            fh.write(text.encode("latin-1"))
        return True
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return False


def _load_registry(dbd_path: str, diags: List[Diagnostic]):
    text = _read(dbd_path)
    if text is None:
        return None

    def resolver(name: str) -> str:
        import os
        base = os.path.dirname(os.path.abspath(dbd_path))
        with open(os.path.join(base, name), "rb") as fh:
            return fh.read().decode("latin-1")

    registry, dbd_diags = parse_dbd(text, resolver, dbd_path)
    diags.extend(dbd_diags)
    return registry


def _exit_for(diags: List[Diagnostic], strict: bool) -> int:
    if any(d.severity is Severity.ERROR for d in diags):
        return 1
    if strict and diags:
        return 1
    return 0


def cmd_lint(args) -> int:
    text = _read(args.db)
    if text is None:
        return 2
    diags: List[Diagnostic] = []
    registry = _load_registry(args.dbd, diags)
    if registry is None:
        return 2
    doc, parse_diags = parse_db(text, args.db)
    diags.extend(parse_diags)
    _, layout_diags = decode_layout(doc)
    diags.extend(layout_diags)
    _, graph_diags = build_graph(doc, registry, args.separator)
    diags.extend(graph_diags)
    for d in diags:
        print(d.render(args.db), file=sys.stderr)
    return _exit_for(diags, args.strict)


def cmd_fmt(args) -> int:
    text = _read(args.db)
    if text is None:
        return 2
    doc, _ = parse_db(text, args.db)
    output = serialize_db(doc)
    if args.check:
        return 0 if output == text else 1
    return 0 if _write(output, args.output) else 2


def cmd_layout(args) -> int:
    text = _read(args.db)
    if text is None:
        return 2
    diags: List[Diagnostic] = []
    registry = _load_registry(args.dbd, diags)
    if registry is None:
        return 2
    doc, _ = parse_db(text, args.db)
    table, _ = decode_layout(doc)
    placed = auto_layout(doc, table, args.separator)
    if placed is table:
        output = text  # nothing to place; byte-level no-op
    else:
        session = engine.Session(
            document=doc, layout=placed, registry=registry,
            separator=args.separator, ever_modified=True)
        output = engine.serialize_session(session)
    return 0 if _write(output, args.output) else 2


def cmd_graph(args) -> int:
    text = _read(args.db)
    if text is None:
        return 2
    diags: List[Diagnostic] = []
    registry = _load_registry(args.dbd, diags)
    if registry is None:
        return 2
    doc, _ = parse_db(text, args.db)
    graph, _ = build_graph(doc, registry, args.separator)
    if args.format == "json":
        output = export_json(doc, graph)
    else:
        output = export_dot(doc, graph)
    return 0 if _write(output, args.output) else 2


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    registry = None
    if args.dbd:
        diags: List[Diagnostic] = []
        registry = _load_registry(args.dbd, diags)
        if registry is None:
            return 2

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return 2
    finally:
        probe.close()

    app = create_app(default_registry=registry, static_root=args.root)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbstudio",
        description="EPICS record database toolkit with VisualDCT-compatible layout data")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, dbd=True):
        p.add_argument("db", help="record instance (.db) file")
        if dbd:
            p.add_argument("--dbd", required=True, help="database definition (.dbd) file")
        p.add_argument("--separator", default=":", metavar="C",
                       help="group separator character (default ':')")

    p = sub.add_parser("lint", help="report diagnostics for a database")
    add_common(p)
    p.add_argument("--strict", action="store_true",
                   help="exit 1 on warnings as well as errors")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("fmt", help="parse and re-emit a database losslessly")
    p.add_argument("db")
    p.add_argument("--check", action="store_true",
                   help="exit 1 if re-emission would differ from the input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("layout", help="auto-place records that have no visual data")
    add_common(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("graph", help="export the link graph")
    add_common(p)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("serve", help="run the HTTP editing service")
    p.add_argument("--dbd", default=None, help="default .dbd for sessions that omit one")
    p.add_argument("--port", type=int, default=8480)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--root", default=None, help="static assets for the visual editor")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if len(getattr(args, "separator", ":")) != 1:
        print("error: --separator must be a single character", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
