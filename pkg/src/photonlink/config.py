"""Run configuration shared by the service and the CLI.

All user-facing quantities are in laboratory units (MHz for frequencies
over 2 pi, ns for times, us for decay times); conversion to SI angular
frequencies and seconds happens at the boundary to the core modules.
"""

from __future__ import annotations

import hashlib
import json
import math

from pydantic import BaseModel, Field, field_validator, model_validator

from .dynamics import LinkParams, NodeParams
from .errors import ConfigError
from .modes import closed_form_mode, gram_schmidt_family
from .transfer import propagation_delay

__all__ = ["RunConfig", "config_hash", "MHZ", "NS"]

MHZ = 2.0 * math.pi * 1e6  # rad/s per MHz of nu = omega / 2 pi
NS = 1e-9


class RunConfig(BaseModel):
    """One experiment bundle; defaults reproduce the hardware parameters."""

    modes: list[int] = Field(default=[0, 1, 2])
    gamma_mhz: float = 14.0  # Gamma / 2 pi
    kappa_a_mhz: float = 26.7
    kappa_b_mhz: float = 30.7
    delta_ab_mhz: float = 0.0  # receiver resonator offset Delta_AB / 2 pi
    delta_a_mhz: float = 0.0  # emission pulse carrier shift
    delta_b_mhz: float = 0.0  # absorption pulse carrier shift
    p_loss: float = 0.17
    tau_ns: float | None = 145.9  # link delay; None = derive from geometry
    length_m: float | None = None
    vg_fraction: float | None = None
    cable_m: float = 0.0
    cable_v_fraction: float = 0.7
    t1_ef_us: float | None = None
    dt_ns: float = 0.1
    taper_ns: float = 3.0
    window_tail_mass: float = 0.005
    sweep_points: int = 25
    sweep_span_ns: float | None = None  # delay sweep half-span; None = 3/Gamma
    truncation_step_ns: float = 1.0
    detuning_span_mhz: float = 2.0
    detuning_points: int = 21
    noise_sigma: float = 0.01
    seed: int = 1
    source: str = "model"  # model | sim | file
    data_file: str | None = None

    @field_validator("gamma_mhz", "kappa_a_mhz", "kappa_b_mhz", "dt_ns")
    @classmethod
    def _positive(cls, v, info):
        if v <= 0.0:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    @field_validator("p_loss", "window_tail_mass", "noise_sigma")
    @classmethod
    def _unit_interval(cls, v, info):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{info.field_name} must lie in [0, 1]")
        return v

    @field_validator("modes")
    @classmethod
    def _orders(cls, v):
        if not v or any(n < 0 for n in v):
            raise ValueError("modes must be a non-empty list of orders >= 0")
        return v

    @field_validator("source")
    @classmethod
    def _source(cls, v):
        if v not in ("model", "sim", "file"):
            raise ValueError("source must be one of model, sim, file")
        return v

    @model_validator(mode="after")
    def _delay_source(self):
        if self.tau_ns is None and (self.length_m is None or self.vg_fraction is None):
            raise ValueError("either tau_ns or (length_m, vg_fraction) must be given")
        return self

    def check_bandwidth_feasible(self):
        """Enforce Gamma < min(kappa_A, kappa_B) before any synthesis."""
        bound = min(self.kappa_a_mhz, self.kappa_b_mhz)
        if self.gamma_mhz >= bound:
            from .errors import FeasibilityError

            raise FeasibilityError(
                f"Gamma/2pi = {self.gamma_mhz} MHz must stay below "
                f"min(kappa_A, kappa_B)/2pi = {bound} MHz "
                f"(flux ratio {self.gamma_mhz / bound:.4f} >= 1)",
                ratio=self.gamma_mhz / bound,
            )

    # SI accessors -----------------------------------------------------

    @property
    def gamma(self):
        return self.gamma_mhz * MHZ

    @property
    def kappa_a(self):
        return self.kappa_a_mhz * MHZ

    @property
    def kappa_b(self):
        return self.kappa_b_mhz * MHZ

    @property
    def t1_ef(self):
        return None if self.t1_ef_us is None else self.t1_ef_us * 1e-6

    @property
    def link_delay(self):
        if self.tau_ns is not None:
            return self.tau_ns * NS
        return propagation_delay(
            self.length_m, self.vg_fraction, self.cable_m, self.cable_v_fraction
        )

    def mode(self, n):
        if n <= 2:
            return closed_form_mode(n, self.gamma)
        return gram_schmidt_family(self.gamma, n)[n]

    def node_a(self):
        return NodeParams(kappa=self.kappa_a, detuning=0.0, t1_ef=self.t1_ef)

    def node_b(self, with_offset=False):
        return NodeParams(
            kappa=self.kappa_b,
            detuning=self.delta_ab_mhz * MHZ if with_offset else 0.0,
            t1_ef=self.t1_ef,
        )

    def link(self):
        return LinkParams(
            delay=self.link_delay,
            loss=self.p_loss,
            length=self.length_m,
            group_velocity=(
                self.vg_fraction * 2.99792458e8 if self.vg_fraction else None
            ),
        )

    def validated(self):
        """Re-raise pydantic-level problems as ConfigError (CLI exit code 2)."""
        return self


def config_hash(config):
    """Short deterministic digest of a RunConfig for output provenance."""
    payload = json.dumps(config.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def parse_config(data):
    """Build a RunConfig from a dict, mapping validation errors to ConfigError."""
    try:
        return RunConfig(**data)
    except Exception as exc:  # pydantic.ValidationError and friends
        raise ConfigError(str(exc)) from exc
