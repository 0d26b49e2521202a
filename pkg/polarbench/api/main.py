"""polarbench REST API using FastAPI."""

import os
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException, status
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger
from pydantic import BaseModel, Field

from polarbench import __version__
from polarbench.channels import ChannelParam
from polarbench.config import Config
from polarbench.construction import (
    CodeSpec,
    construct_arikan,
    construct_rm,
    dual_code,
    min_distance,
    z_profile_bec,
)
from polarbench.core import ExperimentResolver
from polarbench.exceptions import ConfigError, InvalidInputError, OracleRefusedError
from polarbench.simulation import ExperimentConfig, run_experiment
from polarbench.simulation.csv_report import CSV_COLUMNS, summary_row

# Get configuration from environment or use defaults
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = int(os.getenv("API_PORT", "8000"))
API_TITLE = os.getenv("API_TITLE", "polarbench API")
API_DESCRIPTION = os.getenv("API_DESCRIPTION", "Polar code construction and simulation service")
API_MAX_TRIALS = int(os.getenv("API_MAX_TRIALS", "20000"))
CORS_ORIGINS = os.getenv("CORS_ORIGINS", "*").split(",")

# Initialize FastAPI app
app = FastAPI(
    title=API_TITLE,
    description=API_DESCRIPTION,
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Request/Response Models
class ConstructRequest(BaseModel):
    """Request model for construct endpoint."""

    channel: str = Field("bec:0.5", description="Channel as kind:value, e.g. bec:0.5")
    n: int = Field(..., ge=0, le=20, description="Block exponent")
    rate: float = Field(..., ge=0.0, le=1.0, description="Code rate")
    rule: str = Field("arikan", description="Frozen-set rule: arikan or rm")
    method: str = Field("genie", description="BSC/BAWGN construction: genie or bhattacharyya")
    construction_trials: Optional[int] = Field(
        None, ge=1, description="Monte Carlo trials of the genie construction"
    )
    seed: Optional[int] = Field(None, description="Seed of the genie construction")
    dual: bool = Field(False, description="Return the dual code")


class ConstructResponse(BaseModel):
    """Response model for construct endpoint."""

    code: Dict[str, Any] = Field(..., description="CodeSpec document")
    rate: float = Field(..., description="K / N")
    frozen_count: int = Field(..., description="|F|")
    d_min: Optional[int] = Field(None, description="Minimum distance (None for K = 0)")


class ZProfileRequest(BaseModel):
    """Request model for zprofile endpoint."""

    eps: float = Field(..., ge=0.0, le=1.0, description="BEC erasure probability")
    n: int = Field(..., ge=0, le=20, description="Block exponent")
    orientation: str = Field("primal", description="primal or dual")


class ZProfileResponse(BaseModel):
    """Response model for zprofile endpoint."""

    eps: float
    n: int
    orientation: str
    values: List[float] = Field(..., description="Per-index SC erasure probabilities")


class SimulateRequest(BaseModel):
    """Request model for simulate endpoint."""

    experiment: Dict[str, Any] = Field(..., description="Experiment document")


class SimulateResponse(BaseModel):
    """Response model for simulate endpoint."""

    columns: List[str] = Field(..., description="CSV column order")
    rows: List[Dict[str, str]] = Field(..., description="One formatted row per summary")


class HealthResponse(BaseModel):
    """Response model for health endpoint."""

    status: str = Field(..., description="Service health status")
    version: str = Field(..., description="API version")


class PresetInfo(BaseModel):
    """Experiment preset information."""

    name: str = Field(..., description="Preset id")
    description: str = Field(..., description="What the preset sweeps")


class ConfigValidationRequest(BaseModel):
    """Request model for config validation endpoint."""

    config: Optional[Dict[str, Any]] = Field(None, description="Experiment document to validate")
    preset: Optional[str] = Field(None, description="Preset to layer the document on")
    scale: str = Field("small", description="Preset scale: small or paper")


class ConfigValidationResponse(BaseModel):
    """Response model for config validation endpoint."""

    status: str = Field(..., description="Validation status: 'valid' or 'invalid'")
    explanation: str = Field(..., description="Detailed explanation of validation result")
    issues: List[str] = Field(..., description="List of validation issues or warnings")
    resolved_config: Optional[Dict[str, Any]] = Field(
        None, description="Final resolved experiment if valid"
    )


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, (InvalidInputError, ConfigError)):
        return HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST, detail=f"Invalid request: {str(e)}"
        )
    if isinstance(e, OracleRefusedError):
        return HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=f"Refused: {str(e)}"
        )
    logger.exception("request failed")
    return HTTPException(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=f"Internal error: {str(e)}"
    )


# API Endpoints
@app.get("/", response_model=Dict[str, Any])
async def root() -> Dict[str, Any]:
    """Root endpoint providing API information."""
    return {
        "service": "polarbench API",
        "version": __version__,
        "docs": "/docs",
        "health": "/health",
        "endpoints": {
            "construct": "/construct",
            "zprofile": "/zprofile",
            "simulate": "/simulate",
            "list_presets": "/presets",
            "validate_config": "/config/validate",
        },
    }


@app.get("/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """Health check endpoint."""
    try:
        # Exact BEC construction is cheap and touches the core path
        construct_arikan(ChannelParam("bec", 0.5), 3, 0.5)
        return HealthResponse(status="healthy", version=__version__)
    except Exception as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Health check failed: {str(e)}",
        )


@app.post("/construct", response_model=ConstructResponse)
def construct(request: ConstructRequest) -> ConstructResponse:
    """Construct a code and report its rate, frozen-set size and minimum distance."""
    try:
        if request.rule == "rm":
            code: CodeSpec = construct_rm(request.n, request.rate)
        elif request.rule == "arikan":
            code = construct_arikan(
                ChannelParam.parse(request.channel),
                request.n,
                request.rate,
                request.method,
                request.construction_trials,
                request.seed,
            )
        else:
            raise ConfigError(f"Unknown rule '{request.rule}'")
        if request.dual:
            code = dual_code(code)
        return ConstructResponse(
            code=code.to_dict(),
            rate=code.rate,
            frozen_count=len(code.frozen),
            d_min=min_distance(code) if code.information else None,
        )
    except Exception as e:
        raise _http_error(e)


@app.post("/zprofile", response_model=ZProfileResponse)
def zprofile(request: ZProfileRequest) -> ZProfileResponse:
    """Exact Z profile of the BEC for one orientation."""
    try:
        profile = z_profile_bec(request.eps, request.n, request.orientation)
        return ZProfileResponse(
            eps=request.eps,
            n=request.n,
            orientation=request.orientation,
            values=[float(z) for z in profile.values],
        )
    except Exception as e:
        raise _http_error(e)


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest) -> SimulateResponse:
    """Run one experiment document and return its TrialSummary rows."""
    try:
        document = dict(request.experiment)
        document.setdefault("seed", Config.default_seed())
        result = ExperimentResolver().resolve_and_validate(config=document)
        if result["status"] != "valid":
            raise ConfigError("; ".join(result["issues"]))
        cfg = ExperimentConfig.from_dict(result["resolved_config"])
        if cfg.trials > API_MAX_TRIALS:
            raise InvalidInputError(
                f"The service runs at most {API_MAX_TRIALS} trials per point, got {cfg.trials}"
            )
        summaries = run_experiment(cfg, Config(seed=cfg.seed))
        return SimulateResponse(columns=CSV_COLUMNS, rows=[summary_row(s) for s in summaries])
    except Exception as e:
        raise _http_error(e)


@app.get("/presets", response_model=List[PresetInfo])
async def list_presets() -> List[PresetInfo]:
    """List available experiment presets."""
    try:
        descriptions = ExperimentResolver().preset_descriptions()
        return [PresetInfo(name=name, description=text) for name, text in descriptions.items()]
    except Exception as e:
        raise _http_error(e)


@app.post("/config/validate", response_model=ConfigValidationResponse)
async def validate_config(request: ConfigValidationRequest) -> ConfigValidationResponse:
    """Validate an experiment document, optionally on top of a preset."""
    try:
        result = ExperimentResolver().resolve_and_validate(
            config=request.config, preset=request.preset, scale=request.scale
        )
        return ConfigValidationResponse(
            status=result["status"],
            explanation=result["explanation"],
            issues=result["issues"],
            resolved_config=result["resolved_config"] if result["status"] == "valid" else None,
        )
    except Exception as e:
        raise _http_error(e)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host=API_HOST, port=API_PORT)
