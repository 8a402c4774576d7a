"""HTTP control API over the sentinel registry.

Thin JSON layer for the browser UI and scripts: list the module table,
wire producer to consumer, inspect topology, and fetch the latest view
document pushed by a data-access sink.  Wiring errors map to HTTP
statuses but keep their names in the body so clients can tell
FeatureMismatch from NoInputInterface.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .sentinel import (
    FeatureMismatch,
    ModuleRegistry,
    NoInputInterface,
    RegisteredModule,
    UnknownModule,
)

__all__ = ["create_app", "InterfaceModel", "ModuleModel", "WireRequest", "TopologyEdge"]


class InterfaceModel(BaseModel):
    name: str
    direction: str
    address: str


class ModuleModel(BaseModel):
    id: int
    name: str
    interfaces: list[InterfaceModel]
    features: list[str]
    status: str
    producers: list[int]
    consumers: list[int]


class WireRequest(BaseModel):
    producer: int
    consumer: int


class WireResult(BaseModel):
    producer: int
    consumer: int
    address: str


class TopologyEdge(BaseModel):
    producer: int
    consumer: int


def _module_model(module: RegisteredModule) -> ModuleModel:
    return ModuleModel(
        id=module.id,
        name=module.name,
        interfaces=[
            InterfaceModel(name=i.name, direction=i.direction, address=i.address)
            for i in module.interfaces
        ],
        features=sorted(module.features),
        status=module.status,
        producers=sorted(module.producers),
        consumers=sorted(module.consumers),
    )


def create_app(registry: ModuleRegistry, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="event-graph sentinel", version="1")

    @app.get("/modules", response_model=list[ModuleModel])
    def list_modules() -> list[ModuleModel]:
        return [_module_model(m) for m in registry.list_modules()]

    @app.post("/wire", response_model=WireResult)
    def wire(request: WireRequest) -> WireResult:
        try:
            address = registry.wire(request.producer, request.consumer)
        except UnknownModule as exc:
            raise HTTPException(
                status_code=404, detail={"error": "UnknownModule", "message": str(exc)}
            ) from exc
        except FeatureMismatch as exc:
            raise HTTPException(
                status_code=409, detail={"error": "FeatureMismatch", "message": str(exc)}
            ) from exc
        except NoInputInterface as exc:
            raise HTTPException(
                status_code=409, detail={"error": "NoInputInterface", "message": str(exc)}
            ) from exc
        return WireResult(producer=request.producer, consumer=request.consumer, address=address)

    @app.get("/topology", response_model=list[TopologyEdge])
    def topology() -> list[TopologyEdge]:
        return [TopologyEdge(producer=p, consumer=c) for p, c in registry.topology()]

    @app.get("/view")
    def get_view() -> Response:
        view = registry.get_view()
        if view is None:
            raise HTTPException(
                status_code=404, detail={"error": "NoView", "message": "no view pushed yet"}
            )
        return Response(content=view, media_type="application/json")

    @app.post("/view")
    async def put_view(request: Request) -> dict:
        body = await request.body()
        registry.set_view(body.decode("utf-8"))
        return {"stored": len(body)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
