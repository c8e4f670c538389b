"""FastAPI service wrapping the experiment layer.

Domain errors surface as HTTP 422 with a payload that carries the error
class and the process exit code the CLI should use.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PhotonLinkError
from ..experiments import run_detuning, run_emit_sweep, run_fit, run_synth, run_transfer
from .schemas import (
    ConfigRequest,
    DetuningResponse,
    EmitSweepResponse,
    FitRequest,
    FitResponse,
    HealthResponse,
    SynthResponse,
    TransferResponse,
)


def create_app():
    app = FastAPI(title="photonlink", version=__version__)

    @app.exception_handler(PhotonLinkError)
    async def _domain_error(request: Request, exc: PhotonLinkError):
        return JSONResponse(
            status_code=422,
            content={
                "detail": {
                    "message": str(exc),
                    "error_type": type(exc).__name__,
                    "exit_code": exc.exit_code,
                }
            },
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/synth", response_model=SynthResponse)
    def synth(req: ConfigRequest):
        return run_synth(req.config)

    @app.post("/emit-sweep", response_model=EmitSweepResponse)
    def emit_sweep(req: ConfigRequest):
        return run_emit_sweep(req.config)

    @app.post("/transfer", response_model=TransferResponse)
    def transfer(req: ConfigRequest):
        return run_transfer(req.config)

    @app.post("/detuning", response_model=DetuningResponse)
    def detuning(req: ConfigRequest):
        return run_detuning(req.config)

    @app.post("/fit", response_model=FitResponse)
    def fit(req: FitRequest):
        return run_fit(req.config, req.data)

    return app


app = create_app()
