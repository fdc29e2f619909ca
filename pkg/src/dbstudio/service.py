"""HTTP/JSON editing service.

One in-memory session per opened document; all mutations of a session are
serialized through a per-session lock (single-writer). Clients poll the
revision counter and re-fetch views; persistence happens only through
GET /source, matching the explicit-save model.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import engine
from .dbd import TypeRegistry, parse_dbd
from .engine import (
    NothingToRedo,
    NothingToUndo,
    Session,
    ValidationError,
    command_from_json,
    open_session,
)
from .view import diagnostics_json, session_view


@dataclass
class SessionHandle:
    id: str
    session: Session
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"code": code, "message": message}, status_code=status)


def create_app(default_registry: Optional[TypeRegistry] = None,
               static_root: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="dbstudio editor service")
    sessions: Dict[str, SessionHandle] = {}
    app.state.sessions = sessions

    def get_handle(doc_id: str) -> Optional[SessionHandle]:
        return sessions.get(doc_id)

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/documents")
    async def open_document(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "MalformedRequest", "body is not valid JSON")
        if not isinstance(body, dict) or not isinstance(body.get("db"), str):
            return _error(400, "MalformedRequest", "expected {db: text, dbd?: text}")
        separator = body.get("separator", ":")
        if not isinstance(separator, str) or len(separator) != 1:
            return _error(400, "MalformedRequest", "separator must be one character")

        if "dbd" in body:
            if not isinstance(body["dbd"], str):
                return _error(400, "MalformedRequest", "dbd must be text")
            registry, dbd_diags = parse_dbd(body["dbd"])
        elif default_registry is not None:
            registry, dbd_diags = default_registry, []
        else:
            return _error(400, "MalformedRequest", "no dbd supplied and no default loaded")
        if not registry.record_types:
            return _error(422, "EmptyDbd", "dbd defines no record types")

        session = open_session(body["db"], registry, separator)
        handle = SessionHandle(id=uuid.uuid4().hex, session=session)
        sessions[handle.id] = handle
        diags = session.parse_diagnostics + session.layout_diagnostics + dbd_diags
        return JSONResponse(
            {"id": handle.id, "revision": handle.revision,
             "diagnostics": diagnostics_json(diags)},
            status_code=201)

    @app.get("/api/documents/{doc_id}/view")
    def get_view(doc_id: str, group: str = ""):
        handle = get_handle(doc_id)
        if handle is None:
            return _error(404, "NotFound", f"no session {doc_id!r}")
        with handle.lock:
            view = session_view(handle.session, group)
            view["revision"] = handle.revision
            return view

    @app.post("/api/documents/{doc_id}/commands")
    async def post_command(doc_id: str, request: Request):
        handle = get_handle(doc_id)
        if handle is None:
            return _error(404, "NotFound", f"no session {doc_id!r}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "MalformedRequest", "body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "MalformedRequest", "command body must be an object")
        with handle.lock:
            expected = body.get("expectedRevision")
            if expected is not None and expected != handle.revision:
                return _error(409, "RevisionConflict",
                              f"expected revision {expected}, at {handle.revision}")
            try:
                cmd = command_from_json(handle.session, body)
                diags = engine.apply(handle.session, cmd)
            except ValidationError as exc:
                status = 400 if exc.code in ("MalformedCommand", "UnknownCommand") else 409
                return _error(status, exc.code, exc.message)
            handle.revision += 1
            return {"revision": handle.revision, "diagnostics": diagnostics_json(diags)}

    @app.post("/api/documents/{doc_id}/undo")
    def post_undo(doc_id: str):
        handle = get_handle(doc_id)
        if handle is None:
            return _error(404, "NotFound", f"no session {doc_id!r}")
        with handle.lock:
            try:
                engine.undo(handle.session)
            except NothingToUndo:
                return _error(409, "NothingToUndo", "command log is at its start")
            handle.revision += 1
            return {"revision": handle.revision}

    @app.post("/api/documents/{doc_id}/redo")
    def post_redo(doc_id: str):
        handle = get_handle(doc_id)
        if handle is None:
            return _error(404, "NotFound", f"no session {doc_id!r}")
        with handle.lock:
            try:
                engine.redo(handle.session)
            except NothingToRedo:
                return _error(409, "NothingToRedo", "command log is at its end")
            handle.revision += 1
            return {"revision": handle.revision}

    @app.get("/api/documents/{doc_id}/source")
    def get_source(doc_id: str):
        handle = get_handle(doc_id)
        if handle is None:
            return _error(404, "NotFound", f"no session {doc_id!r}")
        with handle.lock:
            return PlainTextResponse(engine.save(handle.session))

    if static_root and Path(static_root).is_dir():
        app.mount("/", StaticFiles(directory=static_root, html=True), name="static")

    return app
