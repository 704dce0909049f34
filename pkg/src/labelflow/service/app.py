"""FastAPI application wrapping engine sessions.

Endpoints (JSON):
  GET  /sessions                     session list with status and diagnostics
  GET  /sessions/{id}/requests       pending interaction requests + standing panels
  POST /sessions/{id}/responses      submit an annotator response
  GET  /sessions/{id}/snapshot       read-only blackboard view
  GET  /sessions/{id}/trace          execution trace entries

Status codes: 200 success, 404 unknown session/request id, 409 duplicate
or late response, 422 validation failure.
"""
from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .. import checker
from ..engine import Session
from ..gateway import AlreadyAnswered, InteractionResponse, UnknownRequest, ValidationFailure
from .schemas import (
    RequestList,
    ResponseAck,
    ResponseBody,
    SessionList,
    SessionSummary,
    TraceBody,
)


class SessionHost:
    """Registry of live sessions served over HTTP."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._diagnostics: dict[str, list[dict]] = {}
        self._threads: dict[str, threading.Thread] = {}

    def register(self, session: Session) -> None:
        self._sessions[session.session_id] = session
        diags = checker.check(session.graph)
        self._diagnostics[session.session_id] = [d.to_json() for d in diags]

    def start(self, session: Session) -> threading.Thread:
        """Register and run the session on a background thread."""
        self.register(session)

        def _run() -> None:
            try:
                session.run()
            except Exception:
                session.status = "failed"

        thread = threading.Thread(target=_run, name=f"session-{session.session_id}",
                                  daemon=True)
        self._threads[session.session_id] = thread
        thread.start()
        return thread

    def get(self, session_id: str) -> Session:
        if session_id not in self._sessions:
            raise KeyError(session_id)
        return self._sessions[session_id]

    def sessions(self) -> list[Session]:
        return list(self._sessions.values())

    def diagnostics(self, session_id: str) -> list[dict]:
        return self._diagnostics.get(session_id, [])


def create_app(host: SessionHost, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="labelflow", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _session(session_id: str) -> Session:
        try:
            return host.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/sessions", response_model=SessionList)
    def list_sessions() -> SessionList:
        summaries = []
        for session in host.sessions():
            diags = host.diagnostics(session.session_id)
            summaries.append(SessionSummary(
                id=session.session_id,
                status=session.status,
                cursor=session.cursor,
                workflow_valid=not any(d["severity"] == "error" for d in diags),
                progress=session.progress(),
                diagnostics=diags,
            ))
        return SessionList(sessions=summaries)

    @app.get("/sessions/{session_id}/requests", response_model=RequestList)
    def list_requests(session_id: str) -> RequestList:
        session = _session(session_id)
        return RequestList(
            pending=[r.to_json() for r in session.gateway.list_pending()
                     if r.session_id == session_id],
            panels=[r.to_json() for r in session.gateway.list_panels()
                    if r.session_id == session_id],
        )

    @app.post("/sessions/{session_id}/responses", response_model=ResponseAck)
    def post_response(session_id: str, body: ResponseBody) -> ResponseAck:
        session = _session(session_id)
        response = InteractionResponse(
            request_id=body.request_id,
            labels=tuple(e.to_wire() for e in body.outputs.labels)
            if body.outputs.labels is not None else None,
            categories=tuple(body.outputs.categories)
            if body.outputs.categories is not None else None,
            samples=tuple(body.outputs.samples)
            if body.outputs.samples is not None else None,
        )
        try:
            session.gateway.respond(response)
        except AlreadyAnswered:
            raise HTTPException(status_code=409,
                                detail=f"request {body.request_id!r} already answered")
        except UnknownRequest:
            raise HTTPException(status_code=404,
                                detail=f"unknown request {body.request_id!r}")
        except ValidationFailure as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ResponseAck(accepted=True, request_id=body.request_id)

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(session_id: str) -> dict:
        return _session(session_id).board.snapshot()

    @app.get("/sessions/{session_id}/trace", response_model=TraceBody)
    def get_trace(session_id: str) -> TraceBody:
        session = _session(session_id)
        return TraceBody(entries=[e.to_json() for e in session.trace.entries])

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
