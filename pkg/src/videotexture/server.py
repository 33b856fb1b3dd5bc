"""HTTP service wrapping the pipeline.

A long-lived process keeps the analysis cache warm, so clients can request
many syntheses (different seeds, modes, transition plans) against one
expensive analysis. The CLI talks to this app in-process by default; `serve`
exposes it over the network.
"""

from __future__ import annotations

import logging
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, pipeline
from .errors import (
    ConfigError,
    DecodeFailure,
    EncodeFailure,
    IoFailure,
    MissingInput,
    VideoTextureError,
)
from .pipeline import PipelineConfig

logger = logging.getLogger(__name__)

app = FastAPI(title="videotexture", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class LoopInfo(BaseModel):
    start: int
    end: int
    length: int
    cut_cost: float
    min_length: int
    prune_frac: float


class AnalyzeResponse(BaseModel):
    summary: dict
    artifacts: dict
    cache_hit: bool


class SynthesizeResponse(BaseModel):
    gif: str
    sequence: str
    mode: str
    rendered_frames: int
    loop: Optional[LoopInfo] = None
    cache_hit: bool
    summary: dict


class VisualizeRequest(PipelineConfig):
    scale: int = Field(default=1, ge=1)


class VisualizeResponse(BaseModel):
    artifacts: dict
    cache_hit: bool
    summary: dict


class ErrorResponse(BaseModel):
    error: str
    message: str
    exit_code: int


def _status_for(exc: VideoTextureError) -> int:
    if isinstance(exc, MissingInput):
        return 404
    if isinstance(exc, (EncodeFailure, IoFailure)):
        return 500
    if isinstance(exc, (ConfigError, DecodeFailure)):
        return 400
    return 422


@app.exception_handler(VideoTextureError)
async def _domain_error_handler(request: Request, exc: VideoTextureError):
    payload = ErrorResponse(
        error=type(exc).__name__, message=str(exc), exit_code=exc.exit_code
    )
    logger.warning("%s: %s", type(exc).__name__, exc)
    return JSONResponse(status_code=_status_for(exc), content=payload.model_dump())


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/analyze", response_model=AnalyzeResponse)
def analyze(config: PipelineConfig) -> AnalyzeResponse:
    return AnalyzeResponse(**pipeline.run_analyze(config))


@app.post("/synthesize", response_model=SynthesizeResponse)
def synthesize(config: PipelineConfig) -> SynthesizeResponse:
    return SynthesizeResponse(**pipeline.run_synthesize(config))


@app.post("/visualize", response_model=VisualizeResponse)
def visualize(request: VisualizeRequest) -> VisualizeResponse:
    config = PipelineConfig(**request.model_dump(exclude={"scale"}))
    return VisualizeResponse(**pipeline.run_visualize(config, scale=request.scale))
