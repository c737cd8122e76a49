"""HTTP face of the control center.

A thin FastAPI layer: every route body is one ControlCenter call plus
JSON shaping. Errors cross the wire as {code, message, findings[]} with
the status taken from the code. Authentication is a bearer-token stub
in which the token string is the subscriber id; ownership of handles
and archives is enforced against it.
"""

from __future__ import annotations

import json
import threading
import time
from typing import Optional

from fastapi import Depends, FastAPI, Header, Request
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from . import compiler, control, topology as topo
from .errors import (
    E_CAPACITY,
    E_CONFLICT,
    E_EXPIRED,
    E_FANIN,
    E_FANOUT,
    E_NOT_FINISHED,
    E_PORT_RANGE,
    E_RESOURCE,
    E_SCHEMA,
    E_SCOPE,
    E_UNKNOWN_ELEMENT,
    E_UNKNOWN_HANDLE,
    E_UNROUTABLE,
    EmulatorError,
)

STATUS_BY_CODE = {
    E_UNKNOWN_HANDLE: 404,
    E_UNKNOWN_ELEMENT: 422,
    E_SCHEMA: 422,
    E_PORT_RANGE: 422,
    E_FANIN: 422,
    E_FANOUT: 422,
    E_CAPACITY: 422,
    E_RESOURCE: 422,
    E_UNROUTABLE: 422,
    E_CONFLICT: 409,
    E_NOT_FINISHED: 409,
    E_EXPIRED: 410,
    E_SCOPE: 403,
}

STREAM_POLL_S = 0.01


class SubmitBody(BaseModel):
    request_id: str
    design: dict
    start_s: float = 0.0
    end_s: float = 1.0
    priority: int = 0


class InstantiateBody(BaseModel):
    request_id: str


def _findings_payload(findings) -> list[dict]:
    out = []
    for f in findings or []:
        out.append(f if isinstance(f, dict) else f.as_dict())
    return out


def error_response(exc: EmulatorError) -> JSONResponse:
    status = STATUS_BY_CODE.get(exc.code, 400)
    body = {
        "code": exc.code,
        "message": exc.message,
        "findings": _findings_payload(getattr(exc, "findings", [])),
    }
    return JSONResponse(status_code=status, content=body)


def _window_payload(w: control.ScheduleWindow) -> dict:
    return {
        "window_id": w.window_id,
        "request_id": w.request_id,
        "subscriber_id": w.subscriber_id,
        "start_s": w.start_s,
        "end_s": w.end_s,
        "priority": w.priority,
        "resources": sorted(w.resources),
    }


def _monitor_payload(snap: dict) -> dict:
    latest = snap["latest_record"]
    return {
        **snap,
        "latest_record": control.record_as_dict(latest) if latest else None,
    }


def create_app(center: control.ControlCenter) -> FastAPI:
    app = FastAPI(title="qnetem control service", docs_url=None, redoc_url=None)

    @app.exception_handler(EmulatorError)
    async def _emulator_error(request: Request, exc: EmulatorError):
        return error_response(exc)

    def subscriber(authorization: Optional[str] = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise EmulatorError(E_SCOPE, "missing bearer token")
        token = authorization[len("Bearer ") :].strip()
        if not token:
            raise EmulatorError(E_SCOPE, "empty bearer token")
        return token

    def owned_handle(handle_id: str, sub: str) -> control.InstantiationHandle:
        handle = center.get_handle(handle_id)
        if handle.subscriber_id != sub:
            raise EmulatorError(E_SCOPE, f"{handle_id} belongs to another subscriber")
        return handle

    @app.get("/health")
    def health():
        return {"status": "ok", "now_s": center.now_s}

    @app.get("/topology")
    def get_topology():
        return topo.topology_to_dict(center.topology)

    @app.post("/requests", status_code=201)
    def post_request(body: SubmitBody, sub: str = Depends(subscriber)):
        req = compiler.NetworkConfigRequest(
            request_id=body.request_id,
            subscriber_id=sub,
            design=body.design,
            start_s=body.start_s,
            end_s=body.end_s,
            priority=body.priority,
        )
        rec = center.submit(req)
        return {
            "request_id": body.request_id,
            "findings": _findings_payload(rec.findings),
            "config": rec.config.document,
        }

    @app.post("/requests/{request_id}/schedule")
    def post_schedule(request_id: str, sub: str = Depends(subscriber)):
        rec = center.get_request(request_id)
        if rec.request.subscriber_id != sub:
            raise EmulatorError(E_SCOPE, f"{request_id} belongs to another subscriber")
        return _window_payload(center.schedule(request_id))

    @app.post("/instantiations", status_code=201)
    def post_instantiation(body: InstantiateBody, sub: str = Depends(subscriber)):
        rec = center.get_request(body.request_id)
        if rec.request.subscriber_id != sub:
            raise EmulatorError(E_SCOPE, f"{body.request_id} belongs to another subscriber")
        handle = center.instantiate(body.request_id)
        return _monitor_payload(center.monitor(handle.handle_id))

    @app.get("/instantiations/{handle_id}")
    def get_instantiation(handle_id: str, sub: str = Depends(subscriber)):
        owned_handle(handle_id, sub)
        return _monitor_payload(center.monitor(handle_id))

    @app.get("/instantiations/{handle_id}/counts")
    def get_counts(
        handle_id: str,
        follow: bool = False,
        after_ps: int = -1,
        sub: str = Depends(subscriber),
    ):
        owned_handle(handle_id, sub)

        def lines():
            sent = after_ps
            while True:
                handle = center.get_handle(handle_id)
                for record in center.live_records(handle_id):
                    if record.interval_start_ps > sent:
                        sent = record.interval_start_ps
                        yield json.dumps(control.record_as_dict(record)) + "\n"
                if handle.state != control.ACTIVE or not follow:
                    return
                time.sleep(STREAM_POLL_S)

        return StreamingResponse(lines(), media_type="application/x-ndjson")

    @app.get("/archives/{handle_id}")
    def get_archive(handle_id: str, sub: str = Depends(subscriber)):
        handle = owned_handle(handle_id, sub)
        center.archive(handle.handle_id)
        record = center.retrieve_archive(handle_id)
        return FileResponse(
            record.path,
            media_type="application/zip",
            filename=f"{handle_id}.zip",
            headers={"X-Manifest-Sha256": record.manifest_sha256},
        )

    @app.get("/ledger/{subscriber_id}")
    def get_ledger(subscriber_id: str, sub: str = Depends(subscriber)):
        if subscriber_id != sub:
            raise EmulatorError(E_SCOPE, "ledger access limited to the named subscriber")
        entries = center.ledger.entries(subscriber_id)
        return {
            "subscriber_id": subscriber_id,
            "total_fee_units": center.ledger.total(subscriber_id),
            "entries": [
                {
                    "instantiation_id": e.instantiation_id,
                    "duration_s": e.duration_s,
                    "weight": e.weight,
                    "fee_units": e.fee_units,
                    "mode": e.mode,
                }
                for e in entries
            ],
        }

    return app


class ClockPump:
    """Background thread mapping real elapsed time onto the virtual clock."""

    def __init__(self, center: control.ControlCenter, tick_s: float = 0.1):
        self.center = center
        self.tick_s = tick_s
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, daemon=True)

    def _run(self):
        last = time.monotonic()
        while not self._stop.wait(self.tick_s):
            now = time.monotonic()
            self.center.advance(now - last)
            last = now

    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()
        self._thread.join(timeout=2.0)
