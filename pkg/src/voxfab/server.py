"""HTTP facade over the pipeline, stateless per request.

POST /v1/pipeline takes a raw morphology document and answers 200 with the
blueprint summary plus base64 STL meshes, 422 with the stage reports when a
solver gives up, or 400 when the document itself is bad. GET /v1/config and
GET /v1/health round out the surface the sketch editor needs.
"""

from __future__ import annotations

import base64

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .config import PipelineConfig, config_to_dict, default_config
from .errors import StageFailure, VoxfabError
from .geometry import stl_bytes
from .morphology import parse_morphology
from .pipeline import Blueprint, run_pipeline
from .report import _jsonify, design_report


def _mesh_payloads(bp: Blueprint) -> list[dict]:
    out = []
    for sid in sorted(bp.body.rigid_parts):
        data = stl_bytes(bp.body.rigid_parts[sid])
        out.append({"part": f"part_{sid}", "format": "stl-base64",
                    "data": base64.b64encode(data).decode("ascii")})
    if bp.body.skin is not None:
        out.append({"part": "skin", "format": "stl-base64",
                    "data": base64.b64encode(
                        stl_bytes(bp.body.skin)).decode("ascii")})
    return out


def _placement_payload(bp: Blueprint, config: PipelineConfig) -> dict:
    motors = [{
        "joint_id": p.joint_id,
        "offset_mm": p.offset,
        "configuration": p.configuration,
        "score": p.score,
        "pose": [[float(x) for x in row] for row in p.pose],
    } for p in bp.motors.placements]
    boxes = {"controller": config.electronics.controller_box,
             "battery": config.electronics.battery_box}
    electronics = [{
        "component": p.component,
        "segment": p.segment,
        "box_center_mm": [float(x) for x in p.box_center],
        "rotation": [[float(x) for x in row] for row in p.rotation],
        "extents_mm": list(boxes[p.component]),
        "v_insert_mm3": p.v_insert_mm3,
    } for p in bp.electronics]
    return {"motors": motors, "electronics": electronics}


def _route_payload(bp: Blueprint) -> list[dict]:
    return [{
        "joint_id": r.joint_id,
        "length_mm": r.length_mm,
        "max_curvature_per_mm": r.max_curvature,
        "touched_parts": list(r.touched_parts or []),
        "waypoints_mm": [[float(x) for x in p] for p in r.path.waypoints],
    } for r in bp.wires.routes]


def create_app(config: PipelineConfig | None = None) -> FastAPI:
    config = config or default_config()
    app = FastAPI(title="voxfab", docs_url=None, redoc_url=None)

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/config")
    def get_config() -> JSONResponse:
        return JSONResponse(_jsonify(config_to_dict(config)))

    @app.post("/v1/pipeline")
    async def pipeline(request: Request) -> JSONResponse:
        raw = await request.body()
        try:
            spec = parse_morphology(raw)
        except VoxfabError as exc:
            return JSONResponse({"status": "invalid", "detail": str(exc)},
                                status_code=400)
        try:
            result = await run_in_threadpool(run_pipeline, spec, config)
        except StageFailure as exc:   # unreachable: failures become reports
            return JSONResponse({"status": "invalid", "detail": str(exc)},
                                status_code=400)
        except VoxfabError as exc:    # precondition rejects (empty grid)
            return JSONResponse({"status": "invalid", "detail": str(exc)},
                                status_code=400)
        body = design_report(result)
        if not result.ok:
            return JSONResponse(_jsonify(body), status_code=422)
        bp = result.blueprint
        body["meshes"] = _mesh_payloads(bp)
        body["placements"] = _placement_payload(bp, config)
        body["routes"] = _route_payload(bp)
        return JSONResponse(_jsonify(body))

    return app


def serve(config: PipelineConfig | None = None, host: str = "127.0.0.1",
          port: int = 8341) -> None:
    """Run the API until interrupted. Raises OSError when the port is
    taken."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port,
                log_level="warning")
