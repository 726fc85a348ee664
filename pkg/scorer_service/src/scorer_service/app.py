"""FastAPI application: /score, /lid and /health.

Request bodies follow the wire contract exactly; schema violations return
400 and requests arriving before the models finished loading return 503.
Batches beyond the configured cap are rejected so callers chunk instead of
ballooning memory. Inference is serialized inside the backend, so results
are deterministic under concurrent clients.
"""

import threading

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import DEFAULT_BATCH_CAP, SCORE_METRICS, __version__
from .backends import LiteBackend, build_backend


class ScorePair(BaseModel):
    reference: str
    candidate: str


class ScoreRequest(BaseModel):
    metric: str
    pairs: list[ScorePair] = Field(min_length=1)


class LidRequest(BaseModel):
    texts: list[str] = Field(min_length=1)
    languages: list[str] = Field(min_length=1)


def create_app(backend=None, batch_cap: int = DEFAULT_BATCH_CAP, warmup: bool = True) -> FastAPI:
    app = FastAPI(title="scorer-service", version=__version__)
    app.state.backend = backend if backend is not None else LiteBackend()
    app.state.batch_cap = batch_cap
    app.state.ready = threading.Event()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def load_backend():
        app.state.backend.load()
        app.state.ready.set()

    if warmup:
        load_backend()
    app.state.load_backend = load_backend

    def reject_if_loading():
        if not app.state.ready.is_set():
            return JSONResponse(status_code=503, content={"detail": "models loading"})
        return None

    @app.post("/score")
    def score(request: ScoreRequest):
        loading = reject_if_loading()
        if loading:
            return loading
        if request.metric not in SCORE_METRICS:
            return JSONResponse(
                status_code=400,
                content={"detail": f"unknown metric {request.metric!r}; expected one of {list(SCORE_METRICS)}"},
            )
        if len(request.pairs) > app.state.batch_cap:
            return JSONResponse(
                status_code=400,
                content={"detail": f"batch of {len(request.pairs)} exceeds cap {app.state.batch_cap}"},
            )
        pairs = [(pair.reference, pair.candidate) for pair in request.pairs]
        return {"scores": app.state.backend.score(request.metric, pairs)}

    @app.post("/lid")
    def lid(request: LidRequest):
        loading = reject_if_loading()
        if loading:
            return loading
        if len(request.texts) > app.state.batch_cap:
            return JSONResponse(
                status_code=400,
                content={"detail": f"batch of {len(request.texts)} exceeds cap {app.state.batch_cap}"},
            )
        return {"probabilities": app.state.backend.lid(request.texts, request.languages)}

    @app.get("/health")
    def health():
        if not app.state.ready.is_set():
            return {"status": "loading", "model_versions": {}}
        return {"status": "ready", "model_versions": app.state.backend.model_versions()}

    return app


def main(argv=None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="scorer-service", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8090)
    parser.add_argument("--backend", default="lite", choices=["lite", "pretrained"])
    parser.add_argument("--batch-cap", type=int, default=DEFAULT_BATCH_CAP)
    parser.add_argument("--bleurt-path", help="local BLEURT checkpoint (pretrained backend)")
    parser.add_argument("--lid-path", help="local fasttext LID model file (pretrained backend)")
    args = parser.parse_args(argv)

    kwargs = {}
    if args.backend == "pretrained":
        kwargs = {"bleurt_path": args.bleurt_path, "lid_path": args.lid_path}
    app = create_app(build_backend(args.backend, **kwargs), batch_cap=args.batch_cap)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0
