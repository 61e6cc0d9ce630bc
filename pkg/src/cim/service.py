"""Thin HTTP/JSON facade over model export, view inspection, and queries.

Every response body is the serialization of the corresponding library
call; there is no service-only logic.  All endpoints are read-only and
safe to hit concurrently once the workspace has loaded.  Until then
everything except nothing answers 503.

Endpoints: GET /health, GET /model, GET /views, GET
/levels/{name}/members, POST /query.  Bodies are JSON (UTF-8) and carry
an ``apiVersion`` field; decimal values are serialized as strings to
keep them exact.
"""

from __future__ import annotations

from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .compiler import materialize_views, views_to_dict
from .query import QueryError, QueryNameError, execute, query_from_dict
from .render import relation_to_dict
from .storage import evaluate
from .workspace import LoadedWorkspace, load_workspace

API_VERSION = 1


def _error(status: int, code: str, message: str, details=None) -> JSONResponse:
    body = {"apiVersion": API_VERSION, "error": {"code": code, "message": message}}
    if details is not None:
        body["error"]["details"] = details
    return JSONResponse(status_code=status, content=body)


def _ok(payload: dict) -> JSONResponse:
    return JSONResponse(content={"apiVersion": API_VERSION, **payload})


class _State:
    def __init__(self, root: Path, materialize: bool):
        self.root = root
        self.materialize = materialize
        self.workspace: LoadedWorkspace | None = None
        self.snapshots: dict | None = None

    def load(self) -> None:
        self.workspace = load_workspace(self.root)
        if self.materialize and self.workspace.compiled.ok:
            self.snapshots = materialize_views(self.workspace.compiled.views, self.workspace.store)


def create_app(workspace_root: Path, materialize: bool = False) -> FastAPI:
    """Build the service; the workspace loads on startup (503 until then).

    Views are virtual by default.  With `materialize` the compiled views
    are evaluated once at load time and member reads serve those frozen
    snapshots; query rewriting always composes the view definitions.
    """
    state = _State(Path(workspace_root), materialize)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        state.load()
        yield

    app = FastAPI(title="cim service", lifespan=lifespan)
    # The API is read-only; let the browser frontend call it from any origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST", "HEAD"])

    def ready() -> LoadedWorkspace | None:
        return state.workspace

    @app.get("/health")
    def health():
        if ready() is None:
            return _error(503, "loading", "workspace is still loading")
        return _ok({"status": "ok", "workspace": ready().models.manifest.name})

    @app.api_route("/model", methods=["GET", "HEAD"])
    def model():
        ws = ready()
        if ws is None:
            return _error(503, "loading", "workspace is still loading")
        return _ok({"graph": ws.graph()})

    @app.get("/views")
    def views():
        ws = ready()
        if ws is None:
            return _error(503, "loading", "workspace is still loading")
        if not ws.compiled.ok:
            return _error(
                409,
                "compile-failed",
                "the mapping does not compile",
                details=[
                    {"code": d.code, "severity": d.severity.value, "path": d.path, "message": d.message}
                    for d in ws.compiled.diagnostics
                ],
            )
        return _ok({"viewSet": views_to_dict(ws.compiled, ws.sdl)})

    @app.get("/levels/{name}/members")
    def level_members(name: str):
        ws = ready()
        if ws is None:
            return _error(503, "loading", "workspace is still loading")
        if ws.cdl.level(name) is None:
            return _error(404, "unknown-level", f"no level named {name!r}")
        view = ws.compiled.view(f"level:{name}")
        if view is None:
            return _error(409, "unmapped-level", f"level {name!r} has no compiled view")
        if state.snapshots is not None:
            relation = state.snapshots[view.target.id]
        else:
            relation = evaluate(view.body, ws.store)
        return _ok({"level": name, "members": relation_to_dict(relation)})

    @app.post("/query")
    async def query(request: Request):
        ws = ready()
        if ws is None:
            return _error(503, "loading", "workspace is still loading")
        if not ws.compiled.ok:
            return _error(409, "compile-failed", "the mapping does not compile")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "malformed-body", "request body is not valid JSON")
        try:
            parsed = query_from_dict(body)
        except QueryError as exc:
            return _error(400, "malformed-query", str(exc))
        try:
            result = execute(parsed, ws.cdl, ws.compiled, ws.store)
        except QueryNameError as exc:
            return _error(422, "unresolved-name", str(exc), details={"candidates": exc.candidates})
        except QueryError as exc:
            return _error(422, "invalid-query", str(exc))
        return _ok({"result": relation_to_dict(result)})

    return app
