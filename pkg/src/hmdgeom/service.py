"""Stateless JSON-over-HTTP service mirroring the CLI.

Endpoints: POST /api/predict, /api/field, /api/fit, /api/simulate and
GET /api/health. Request and response bodies are exactly the CLI JSON
schemas; invalid bodies return 400 and diverged geometry returns 422, both
with the same error JSON shape the CLI prints. No sessions, no state.
"""

from __future__ import annotations

from typing import Sequence

from fastapi import Body, FastAPI, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware

from . import api
from .jsonfmt import dumps


def _json_response(payload: dict, status_code: int = 200) -> Response:
    return Response(content=dumps(payload), status_code=status_code,
                    media_type="application/json")


def create_app(cors_origins: Sequence[str] = ("*",)) -> FastAPI:
    app = FastAPI(title="hmdgeom", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(api.ApiError)
    async def _api_error(_request, exc: api.ApiError):
        return _json_response(exc.payload(), status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def _bad_body(_request, exc: RequestValidationError):
        return _json_response(
            {"error": {"type": "InvalidRequest", "message": str(exc.errors())}},
            status_code=400)

    @app.get("/api/health")
    def health() -> Response:
        return _json_response(api.health())

    @app.post("/api/predict")
    def predict(body: dict = Body(...)) -> Response:
        return _json_response(api.predict(body))

    @app.post("/api/field")
    def field(body: dict = Body(...)) -> Response:
        return _json_response(api.field(body))

    @app.post("/api/fit")
    def fit(body: dict = Body(...)) -> Response:
        return _json_response(api.fit(body))

    @app.post("/api/simulate")
    def simulate(body: dict = Body(...)) -> Response:
        return _json_response(api.simulate(body))

    return app
