"""Pulse synthesis and single-excitation simulation of a two-node photon
link with orthogonal temporal modes."""

__version__ = "0.1.0"

from .modes import TemporalMode, ModeFamily, closed_form_mode, gram_schmidt_family, overlap
from .pulses import PulseSpec, CouplingWaveform, synthesize, closed_form_rate
from .dynamics import (
    NodeParams,
    LinkParams,
    Trajectory,
    simulate_emitter,
    simulate_transfer,
    emitter_population_sweep,
    analytic_population,
)
from .transfer import (
    pf_model,
    delay_sweep,
    global_fit,
    transfer_matrix_and_selectivity,
    detuning_sweep,
    propagation_delay,
)
from .config import RunConfig

__all__ = [
    "TemporalMode",
    "ModeFamily",
    "closed_form_mode",
    "gram_schmidt_family",
    "overlap",
    "PulseSpec",
    "CouplingWaveform",
    "synthesize",
    "closed_form_rate",
    "NodeParams",
    "LinkParams",
    "Trajectory",
    "simulate_emitter",
    "simulate_transfer",
    "emitter_population_sweep",
    "analytic_population",
    "pf_model",
    "delay_sweep",
    "global_fit",
    "transfer_matrix_and_selectivity",
    "detuning_sweep",
    "propagation_delay",
    "RunConfig",
    "__version__",
]
