"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from pydantic import BaseModel

from ..config import RunConfig


class ConfigRequest(BaseModel):
    config: RunConfig = RunConfig()


class FitRequest(BaseModel):
    config: RunConfig = RunConfig()
    data: list[tuple[float, int, int, float]]  # (tau_ns, nA, nB, Pf)


class WaveformPayload(BaseModel):
    order: int
    direction: str
    t_ns: list[float]
    re_g_over_2pi_MHz: list[float]
    im_g_over_2pi_MHz: list[float]
    captured: float
    clamped: bool
    spec: dict


class FeasibilityEntry(BaseModel):
    order: int
    captured: float
    clamped: bool
    window_ns: list[float]
    peak_rate_over_2pi_MHz: float


class SynthResponse(BaseModel):
    waveforms: list[WaveformPayload]
    feasibility: list[FeasibilityEntry]
    orthogonality_defect: float | None = None
    config_hash: str


class PopulationSweepPayload(BaseModel):
    order: int
    T_ns: list[float]
    pg_sim: list[float]
    pg_model: list[float]
    plateaus_ns: list[list[float]]
    n_plateaus: int
    max_model_deviation: float


class EmitSweepResponse(BaseModel):
    sweeps: list[PopulationSweepPayload]
    config_hash: str


class SweepPayload(BaseModel):
    n_a: int
    n_b: int
    tau_ns: list[float]
    pf: list[float]
    source: str


class FitPayload(BaseModel):
    tau0_ns: float
    tau0_err_ns: float
    p_loss: float
    p_loss_err: float
    residual: float
    n_points: int
    converged: bool
    boundary: bool


class TransferResponse(BaseModel):
    sweeps: list[SweepPayload]
    fit: FitPayload | None = None
    matrix: list[list[float]]
    delay_ns: float | None = None
    selectivity: float | None = None
    selectivity_db: float | None = None
    selectivity_infinite: bool = False
    provenance: str
    config_hash: str


class DetuningResponse(BaseModel):
    delta_a_mhz: list[float]
    delta_b_mhz: list[float]
    pf: list[list[float]]
    ridge_slope: float | None = None
    ridge_intercept_mhz: float | None = None
    ridge_points_mhz: list[list[float]]
    config_hash: str


class FitResponse(BaseModel):
    fit: FitPayload
    config_hash: str


class HealthResponse(BaseModel):
    status: str
    version: str
