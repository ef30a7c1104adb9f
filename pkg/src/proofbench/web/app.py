"""HTTP and websocket API tying the platform together.

Request bodies and responses are JSON; checks follow 202-accepted
semantics with results pushed over the websocket channel and retrievable
again via GET /check/{id} (the long-polling fallback for clients without
persistent connections).
"""

from __future__ import annotations

import asyncio
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, Response, WebSocket
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field
from starlette.websockets import WebSocketDisconnect

from ..activities import ActivityConfig
from ..diagnostics import Diagnostic, DiagnosticSource, Severity
from ..isar.lexer import tokenize
from ..isar.structure import check_structure
from ..linting import InvalidPatternError, compile_ruleset, lint
from ..platform import Platform
from ..telemetry import EventFilter, EventKind
from ..workspace.checks import structure_to_diagnostic
from ..workspace.documents import NameInvalidError, QuotaExceededError
from ..workspace.users import BadCredentialsError, Role, User


class LoginRequest(BaseModel):
    name: str
    password: str


class SaveTheoryRequest(BaseModel):
    content: str


class LintRequest(BaseModel):
    activity: str
    content: str
    theory_name: str = ""


class CheckRequest(BaseModel):
    activity: str
    names: list[str] = Field(min_length=1)
    linter_enabled: bool = True


def create_app(platform: Platform) -> FastAPI:
    app = FastAPI(title="proofbench", version="0.1.0")
    app.state.platform = platform

    # -- auth ------------------------------------------------------------

    def current_user(request: Request) -> User:
        auth = request.headers.get("authorization", "")
        if not auth.lower().startswith("bearer "):
            raise HTTPException(401, "missing bearer token")
        user = platform.users.resolve_token(auth[7:].strip())
        if user is None:
            raise HTTPException(401, "invalid or expired token")
        return user

    def instructor(user: User = Depends(current_user)) -> User:
        if not user.is_instructor:
            raise HTTPException(403, "instructor role required")
        return user

    # -- login -------------------------------------------------------------

    @app.post("/login")
    def login(body: LoginRequest):
        try:
            token, user = platform.users.login(body.name, body.password)
        except BadCredentialsError:
            raise HTTPException(401, "unknown user or wrong password")
        return {"token": token, "user": {"id": user.id, "name": user.name, "role": user.role.value}}

    @app.post("/guest")
    def guest_login():
        token, user = platform.users.guest_login()
        return {"token": token, "user": {"id": user.id, "name": user.name, "role": user.role.value}}

    # -- activities ----------------------------------------------------------

    @app.get("/activities")
    def list_activities(user: User = Depends(current_user)):
        return [a.to_dict() for a in platform.activities.all()]

    @app.get("/activities/{activity_id}")
    def get_activity(activity_id: str, user: User = Depends(current_user)):
        activity = platform.activities.get(activity_id)
        if activity is None:
            raise HTTPException(404, f"no activity {activity_id!r}")
        return activity.to_dict()

    @app.post("/activities")
    def upsert_activity(body: dict, user: User = Depends(instructor)):
        try:
            config = ActivityConfig.from_dict(body)
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(400, f"invalid activity config: {exc}")
        try:
            compile_ruleset(config.linter)  # surface pattern errors now
        except InvalidPatternError as exc:
            raise HTTPException(400, str(exc))
        platform.coordinator.invalidate_ruleset(config.id)
        platform.activities.save(config)
        return config.to_dict()

    # -- theories ---------------------------------------------------------

    def _resolve_owner(user: User, owner: Optional[str]) -> str:
        if owner is None or owner == user.id:
            return user.id
        if not user.is_instructor:
            raise HTTPException(403, "students may only access their own theories")
        return owner

    @app.get("/theories/{activity_id}")
    def list_theories(
        activity_id: str, owner: Optional[str] = None, user: User = Depends(current_user)
    ):
        owner_id = _resolve_owner(user, owner)
        return [d.to_dict(with_content=False) for d in platform.documents.list(owner_id, activity_id)]

    @app.get("/theories/{activity_id}/{name}")
    def get_theory(
        activity_id: str,
        name: str,
        owner: Optional[str] = None,
        user: User = Depends(current_user),
    ):
        owner_id = _resolve_owner(user, owner)
        doc = platform.documents.load(owner_id, activity_id, name)
        if doc is None:
            raise HTTPException(404, f"no theory {name!r}")
        return doc.to_dict()

    @app.put("/theories/{activity_id}/{name}")
    def put_theory(
        activity_id: str,
        name: str,
        body: SaveTheoryRequest,
        user: User = Depends(current_user),
    ):
        if platform.activities.get(activity_id) is None:
            raise HTTPException(404, f"no activity {activity_id!r}")
        try:
            doc = platform.documents.save_theory(user, activity_id, name, body.content)
        except NameInvalidError as exc:
            raise HTTPException(400, str(exc))
        except QuotaExceededError as exc:
            raise HTTPException(413, str(exc))
        return doc.to_dict()

    @app.delete("/theories/{activity_id}/{name}")
    def delete_theory(activity_id: str, name: str, user: User = Depends(current_user)):
        if not platform.documents.delete(user.id, activity_id, name):
            raise HTTPException(404, f"no theory {name!r}")
        return {"deleted": name}

    @app.get("/theories/{activity_id}/{name}/versions")
    def theory_versions(activity_id: str, name: str, user: User = Depends(current_user)):
        return [
            {"saved_ms": ts, "content_hash": digest}
            for ts, digest in platform.documents.versions(user.id, activity_id, name)
        ]

    @app.get("/archive/{activity_id}")
    def download_archive(activity_id: str, user: User = Depends(current_user)):
        data = platform.documents.export_archive(user.id, activity_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{activity_id}.zip"'},
        )

    @app.post("/archive/{activity_id}")
    async def upload_archive(
        activity_id: str, request: Request, user: User = Depends(current_user)
    ):
        data = await request.body()
        try:
            names = platform.documents.import_archive(user, activity_id, data)
        except NameInvalidError as exc:
            raise HTTPException(400, str(exc))
        except Exception as exc:
            raise HTTPException(400, f"not a readable theory archive: {exc}")
        return {"imported": names}

    # -- lint / check --------------------------------------------------------

    @app.post("/lint")
    def lint_theory(body: LintRequest, user: User = Depends(current_user)):
        activity = platform.activities.get(body.activity)
        if activity is None:
            raise HTTPException(404, f"no activity {body.activity!r}")
        tokens = tokenize(body.content)
        diagnostics: list[Diagnostic] = [
            structure_to_diagnostic(sd, body.theory_name)
            for sd in check_structure(tokens)
        ]
        ruleset = platform.coordinator.ruleset_for(activity)
        if ruleset is not None and ruleset.rules:
            diagnostics.extend(
                lint(body.content, ruleset, tokens=tokens, theory_name=body.theory_name)
            )
        return {"diagnostics": [d.to_dict() for d in diagnostics]}

    @app.post("/check", status_code=202)
    def submit_check(body: CheckRequest, user: User = Depends(current_user)):
        if platform.activities.get(body.activity) is None:
            raise HTTPException(404, f"no activity {body.activity!r}")
        try:
            check_id = platform.coordinator.submit_check(
                user, body.activity, body.names, linter_enabled=body.linter_enabled
            )
        except KeyError as exc:
            raise HTTPException(404, str(exc.args[0]))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {"check_id": check_id}

    @app.get("/check/{check_id}")
    def get_check(check_id: str, user: User = Depends(current_user)):
        record = platform.coordinator.get(check_id, user.id)
        if record is None:
            raise HTTPException(404, f"no check {check_id!r} for this user")
        return record.public()

    # -- telemetry / metrics ---------------------------------------------------

    @app.get("/export")
    def export_telemetry(
        user_id: Optional[str] = None,
        activity: Optional[str] = None,
        kind: Optional[str] = None,
        user: User = Depends(instructor),
    ):
        event_filter = EventFilter(
            user_id=user_id,
            activity_id=activity,
            kind=EventKind(kind) if kind else None,
        )

        def stream():
            for line in platform.telemetry.export(event_filter, role=user.role.value):
                yield line + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/metrics")
    def metrics(user: User = Depends(current_user)):
        return platform.metrics.snapshot(
            active_users=len(platform.hub.connected_users())
        )

    # -- realtime channel --------------------------------------------------------

    @app.websocket("/ws")
    async def websocket_channel(ws: WebSocket, token: str = ""):
        user = platform.users.resolve_token(token)
        if user is None:
            await ws.close(code=4401)
            return
        await ws.accept()
        sub = platform.hub.subscribe(user.id)

        async def pump_incoming():
            # Bidirectional: answer pings, notice disconnects.
            try:
                while True:
                    message = await ws.receive_json()
                    if isinstance(message, dict) and message.get("type") == "ping":
                        await ws.send_json({"type": "pong"})
            except (WebSocketDisconnect, RuntimeError, ValueError):
                return

        incoming = asyncio.create_task(pump_incoming())
        try:
            await ws.send_json({"type": "hello", "user_id": user.id})
            while True:
                outgoing = asyncio.create_task(sub.next_message())
                done, _ = await asyncio.wait(
                    {outgoing, incoming}, return_when=asyncio.FIRST_COMPLETED
                )
                if incoming in done:
                    outgoing.cancel()
                    break
                await ws.send_json(outgoing.result())
        except WebSocketDisconnect:
            pass
        finally:
            incoming.cancel()
            sub.close()

    return app
