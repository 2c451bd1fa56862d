"""HTTP API: import/export, async jobs, share links, and live sessions."""
from __future__ import annotations

import asyncio
import json
import os
import secrets
import time
import uuid
from contextlib import asynccontextmanager
from importlib.metadata import version

import httpx
from fastapi import FastAPI, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from netforge.collab import (
    EVENT_KINDS,
    REVERT,
    CollabHub,
    UpdateEvent,
)
from netforge.errors import (
    NetforgeError,
    NotFound,
    VersionOutOfRange,
)
from netforge.frontends import export_model
from netforge.frontends.caffe import import_caffe_detailed
from netforge.frontends.keras import import_keras_detailed
from netforge.layout import LayoutConfig, compute_layout, route_connections
from netforge.ir.model import model_to_doc
from netforge.service.jobs import DONE, FAILED, JobQueue
from netforge.service.store import InMemoryStore
from netforge.textproto import TextProtoError

__all__ = ["create_app", "DEFAULT_FETCH_CAP"]

DEFAULT_FETCH_CAP = 8 * 1024 * 1024  # bytes, applies to inline and fetched sources

_DETAILED_IMPORTERS = {"caffe": import_caffe_detailed, "keras": import_keras_detailed}
_EXPORT_NAMES = {"caffe": "model.prototxt", "keras": "model.json"}


def _error_response(status: int, error: str, detail: str, **extra):
    return JSONResponse(status_code=status, content={"error": error, "detail": detail, **extra})


def _layout_doc(model) -> dict:
    config = LayoutConfig()
    positions = compute_layout(model, config)
    paths = route_connections(model, positions, config)
    return {
        "positions": {lid: [x, y] for lid, (x, y) in positions.items()},
        "paths": [
            {"from": p.from_id, "to": p.to_id, "points": [[x, y] for x, y in p.polyline]}
            for p in paths
        ],
    }


def create_app(store=None, workers=None, fetch_cap=None) -> FastAPI:
    """Build the service with its store, hub, and worker pool wired up.

    Environment fallbacks: NETFORGE_STORE (directory enables the file
    backend), NETFORGE_WORKERS, NETFORGE_FETCH_CAP. Any state already in the
    store is recovered into the hub before the first request.
    """
    if store is None:
        store_path = os.environ.get("NETFORGE_STORE")
        if store_path:
            from netforge.service.store import FileStore

            store = FileStore(store_path)
        else:
            store = InMemoryStore()
    if workers is None:
        workers = int(os.environ.get("NETFORGE_WORKERS", "2"))
    if fetch_cap is None:
        fetch_cap = int(os.environ.get("NETFORGE_FETCH_CAP", str(DEFAULT_FETCH_CAP)))

    hub = CollabHub(
        on_event=lambda model_id, event: store.append_event(model_id, event),
        on_comment=lambda model_id, comment: store.append_comment(model_id, comment),
    )
    jobs = JobQueue(
        workers=workers,
        notify=lambda job: hub.notify(job.model_id, "job", job.to_doc()),
    )

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        jobs.shutdown()

    app = FastAPI(title="netforge", version=version("netforge"), lifespan=lifespan)

    shares_by_token = dict(store.shares())
    tokens_by_model = {mid: tok for tok, mid in shares_by_token.items()}
    for model_id in store.model_ids():
        initial, events, comments = store.load_model(model_id)
        hub.restore_model(model_id, initial, events, comments=comments)

    app.state.hub = hub
    app.state.jobs = jobs
    app.state.store = store
    app.state.shares_by_token = shares_by_token
    app.state.tokens_by_model = tokens_by_model

    # -- import ----------------------------------------------------------

    @app.post("/api/models")
    async def import_endpoint(body: dict):
        fmt = body.get("format")
        if fmt not in _DETAILED_IMPORTERS:
            return _error_response(400, "BadRequest", f"format must be caffe or keras, got {fmt!r}")
        if "url" in body:
            try:
                async with httpx.AsyncClient(follow_redirects=True, timeout=10.0) as client:
                    resp = await client.get(body["url"])
                    resp.raise_for_status()
            except httpx.HTTPError as exc:
                return _error_response(502, "BadGateway", f"could not fetch source: {exc}")
            if len(resp.content) > fetch_cap:
                return _error_response(413, "PayloadTooLarge", "fetched source exceeds the size cap")
            source = resp.text
        elif "source" in body:
            source = body["source"]
            if not isinstance(source, str):
                return _error_response(400, "BadRequest", "source must be a string")
            if len(source.encode("utf-8")) > fetch_cap:
                return _error_response(413, "PayloadTooLarge", "inline source exceeds the size cap")
        else:
            return _error_response(400, "BadRequest", "body needs either source or url")

        try:
            imported = _DETAILED_IMPORTERS[fmt](source)
        except TextProtoError as exc:
            span = getattr(exc, "span", None)
            detail = {"line": span.line, "column": span.column} if span else {}
            return _error_response(400, type(exc).__name__, str(exc), span=detail)
        except NetforgeError as exc:
            return _error_response(400, type(exc).__name__, str(exc))

        model_id = uuid.uuid4().hex[:12]
        hub.create_model(imported.model, model_id=model_id)
        store.save_model(model_id, imported.model)
        return {
            "model_id": model_id,
            "diagnostics": [{"severity": "warning", "message": w} for w in imported.warnings],
            "layout": _layout_doc(imported.model),
        }

    # -- model reads -------------------------------------------------------

    @app.get("/api/models/{model_id}")
    async def get_model(model_id: str):
        try:
            shared = hub.get(model_id)
        except NotFound as exc:
            return _error_response(404, "NotFound", str(exc))
        with shared.lock:
            return {
                "model_id": model_id,
                "version": shared.version,
                "model": model_to_doc(shared.current),
            }

    # -- export jobs -------------------------------------------------------

    @app.post("/api/models/{model_id}/export")
    async def export_endpoint(model_id: str, body: dict):
        target = body.get("target")
        if target not in _EXPORT_NAMES:
            return _error_response(400, "BadRequest", f"target must be caffe or keras, got {target!r}")
        custom_layers = frozenset(body.get("custom_layers", ()))
        try:
            shared = hub.get(model_id)
        except NotFound as exc:
            return _error_response(404, "NotFound", str(exc))
        with shared.lock:
            snapshot = shared.current
        job = jobs.submit(
            model_id, target,
            lambda: export_model(snapshot, target, custom_layers=custom_layers),
        )
        return {"job_id": job.job_id}

    @app.get("/api/jobs/{job_id}")
    async def job_status(job_id: str):
        try:
            return jobs.get(job_id).to_doc()
        except NotFound as exc:
            return _error_response(404, "NotFound", str(exc))

    @app.get("/api/jobs/{job_id}/result")
    async def job_result(job_id: str):
        try:
            job = jobs.get(job_id)
        except NotFound as exc:
            return _error_response(404, "NotFound", str(exc))
        if job.state == FAILED:
            return _error_response(409, "JobFailed", job.error or "export failed")
        if job.state != DONE:
            return _error_response(409, "JobNotDone", f"job is {job.state}")
        filename = _EXPORT_NAMES[job.target]
        return PlainTextResponse(
            job.result,
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    # -- sharing -----------------------------------------------------------

    @app.post("/api/models/{model_id}/share")
    async def share(model_id: str):
        try:
            hub.get(model_id)
        except NotFound as exc:
            return _error_response(404, "NotFound", str(exc))
        token = tokens_by_model.get(model_id)
        if token is None:
            token = secrets.token_urlsafe(16)
            tokens_by_model[model_id] = token
            shares_by_token[token] = model_id
            store.save_share(token, model_id)
        return {"token": token, "url": f"/s/{token}"}

    @app.get("/s/{token}")
    async def resolve_share(token: str):
        model_id = shares_by_token.get(token)
        if model_id is None:
            return _error_response(404, "NotFound", "unknown share token")
        return {"model_id": model_id}

    # -- live sessions -----------------------------------------------------

    @app.websocket("/ws/models/{model_id}")
    async def session_endpoint(websocket: WebSocket, model_id: str,
                               token: str = Query(""), user: str = Query("anonymous")):
        await websocket.accept()
        if shares_by_token.get(token) != model_id:
            await websocket.send_json({
                "type": "error", "version": 0,
                "payload": {"error": "Forbidden", "detail": "invalid share token"},
            })
            await websocket.close(code=1008)
            return

        loop = asyncio.get_running_loop()
        outbox: asyncio.Queue = asyncio.Queue()

        def deliver(message: dict):
            loop.call_soon_threadsafe(outbox.put_nowait, message)

        session = hub.join(model_id, user, deliver)

        async def pump():
            while True:
                await websocket.send_json(await outbox.get())

        sender = asyncio.create_task(pump())
        try:
            while True:
                doc = await websocket.receive_json()
                _handle_action(hub, session, doc, deliver)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            hub.leave(session)

    return app


def _handle_action(hub: CollabHub, session, doc: dict, deliver):
    """Dispatch one client message; errors go back to the origin only."""
    model_id = session.model_id
    try:
        action = doc.get("action")
        if action == "submit":
            event_doc = doc.get("event") or {}
            kind = event_doc.get("kind")
            if kind not in EVENT_KINDS or kind == REVERT:
                raise NetforgeError(f"cannot submit event kind {kind!r}")
            event = UpdateEvent(
                kind=kind,
                payload=dict(event_doc.get("payload") or {}),
                author=event_doc.get("author") or session.user,
                base_version=int(event_doc.get("base_version", 0)),
                timestamp=time.time(),
            )
            hub.submit_event(model_id, event)
        elif action == "comment":
            hub.add_comment(model_id, doc.get("anchor", "model"), doc.get("text", ""), session.user)
        elif action == "revert":
            hub.revert(model_id, int(doc.get("to_version", 0)), author=session.user)
        elif action == "replay_request":
            version = int(doc.get("version", 0))
            state = hub.replay(model_id, version)
            deliver({
                "type": "snapshot", "version": version,
                "payload": {"model": model_to_doc(state)},
            })
        else:
            raise NetforgeError(f"unknown action {action!r}")
    except (NetforgeError, ValueError, TypeError) as exc:
        deliver({
            "type": "error",
            "version": hub.get(model_id).version,
            "payload": {"error": type(exc).__name__, "detail": str(exc)},
        })
