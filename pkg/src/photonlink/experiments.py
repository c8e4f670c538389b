"""Experiment orchestration: RunConfig in, JSON-ready payloads out.

These functions sit between the core modules and the service endpoints;
the CLI only ever sees their payloads (over HTTP) and writes files.
"""

from __future__ import annotations

import math

import numpy as np

from .config import MHZ, NS, RunConfig, config_hash
from .dynamics import analytic_population, emitter_population_sweep
from .errors import ConfigError
from .fileio import read_sweeps, waveform_payload
from .modes import gram_schmidt_family
from .pulses import PulseSpec, default_window, synthesize
from .transfer import (
    DelaySweep,
    delay_sweep,
    detuning_sweep,
    global_fit,
    load_reference_matrix,
    selectivity,
    simulate_delay_sweep,
    transfer_matrix_and_selectivity,
)

__all__ = ["run_synth", "run_emit_sweep", "run_transfer", "run_detuning", "run_fit"]


def _pulse_spec(config, n, direction):
    detuning = (config.delta_a_mhz if direction == "emit" else config.delta_b_mhz) * MHZ
    kappa = config.kappa_a if direction == "emit" else config.kappa_b
    return PulseSpec(
        mode=config.mode(n),
        kappa=kappa,
        direction=direction,
        detuning=detuning,
        taper=config.taper_ns * NS,
        dt=config.dt_ns * NS,
        window_tail_mass=config.window_tail_mass,
    )


def run_synth(config: RunConfig):
    """Emit and absorb waveforms for every requested mode order."""
    config.check_bandwidth_feasible()
    waveforms = []
    report = []
    for n in config.modes:
        emit = synthesize(_pulse_spec(config, n, "emit"))
        absorb = synthesize(_pulse_spec(config, n, "absorb"))
        waveforms.append(waveform_payload(n, "emit", emit))
        waveforms.append(waveform_payload(n, "absorb", absorb))
        report.append({
            "order": n,
            "captured": emit.captured,
            "clamped": emit.clamped,
            "window_ns": [emit.t0 / NS, emit.t_end / NS],
            "peak_rate_over_2pi_MHz": float(np.max(np.abs(emit.samples)) / MHZ),
        })
    payload = {"waveforms": waveforms, "feasibility": report}
    if all(n in config.modes for n in (0, 1, 2)):
        profile = rabi_profile(
            config.gamma, config.kappa_a, dt=config.dt_ns * NS,
            tail_mass=config.window_tail_mass,
        )
        payload["rate_profile"] = {
            "t_ns": (profile.times / NS).tolist(),
            "g0_over_2pi_MHz": (profile.rates[0] / MHZ).tolist(),
            "g1_over_2pi_MHz": (profile.rates[1] / MHZ).tolist(),
            "g2_over_2pi_MHz": (profile.rates[2] / MHZ).tolist(),
            "zero_counts": list(profile.zero_counts),
        }
    if max(config.modes) > 2:
        family = gram_schmidt_family(config.gamma, max(config.modes))
        payload["orthogonality_defect"] = family.overlap_defect()
    payload["config_hash"] = config_hash(config)
    return payload


def run_emit_sweep(config: RunConfig):
    """Ground-state population versus truncation time, ODE and model."""
    config.check_bandwidth_feasible()
    results = []
    node = config.node_a()
    for n in config.modes:
        mode = config.mode(n)
        window = default_window(
            mode, config.window_tail_mass, config.dt_ns * NS, config.taper_ns * NS
        )
        lo = window[0] + config.taper_ns * NS
        hi = window[1] - config.taper_ns * NS
        step = config.truncation_step_ns * NS
        times = np.arange(lo, hi + 0.5 * step, step)
        sweep = emitter_population_sweep(
            mode, node, times,
            dt=config.dt_ns * NS,
            taper=config.taper_ns * NS,
            window_tail_mass=config.window_tail_mass,
        )
        model = analytic_population(mode, config.kappa_a, times, config.t1_ef)
        results.append({
            "order": n,
            "T_ns": (times / NS).tolist(),
            "pg_sim": sweep.pg.tolist(),
            "pg_model": np.asarray(model).tolist(),
            "plateaus_ns": [[a / NS, b / NS] for a, b in sweep.plateaus],
            "n_plateaus": len(sweep.plateaus),
            "max_model_deviation": float(np.max(np.abs(sweep.pg - model))),
        })
    return {"sweeps": results, "config_hash": config_hash(config)}


def _sweep_payload(s):
    return {
        "n_a": s.n_a,
        "n_b": s.n_b,
        "tau_ns": (np.asarray(s.delays) / NS).tolist(),
        "pf": np.asarray(s.pf).tolist(),
        "source": s.source,
    }


def _delay_grid(config):
    tau0 = config.link_delay
    span = (
        config.sweep_span_ns * NS
        if config.sweep_span_ns is not None
        else 3.0 / config.gamma
    )
    return tau0 + np.linspace(-span, span, config.sweep_points)


def run_transfer(config: RunConfig):
    """Nine delay sweeps, the two-parameter fit, and the transfer matrix."""
    config.check_bandwidth_feasible()
    gamma = config.gamma
    tau0 = config.link_delay
    fit = None
    if config.source == "file":
        if config.data_file is None:
            ref = load_reference_matrix()
            matrix = np.asarray(ref["matrix"], dtype=float)
            sel = selectivity(matrix)
            return {
                "sweeps": [],
                "fit": None,
                "matrix": matrix.tolist(),
                "delay_ns": ref["tau0_ns"],
                "selectivity": sel.sigma,
                "selectivity_db": sel.sigma_db,
                "selectivity_infinite": sel.infinite,
                "provenance": "reference",
                "config_hash": config_hash(config),
            }
        sweeps = read_sweeps(config.data_file, gamma=gamma)
    elif config.source == "sim":
        delays = _delay_grid(config)
        sweeps = [
            simulate_delay_sweep(
                n_a, n_b, gamma, delays, config.node_a(), config.node_b(),
                config.link(), dt=config.dt_ns * NS,
                window_tail_mass=config.window_tail_mass,
            )
            for n_a in range(3)
            for n_b in range(3)
        ]
    else:  # model
        delays = _delay_grid(config)
        rng = np.random.default_rng(config.seed)
        sweeps = []
        for n_a in range(3):
            for n_b in range(3):
                s = delay_sweep(n_a, n_b, gamma, delays, tau0, config.p_loss)
                if config.noise_sigma > 0.0:
                    s = DelaySweep(
                        n_a=n_a, n_b=n_b, delays=s.delays,
                        pf=s.pf + rng.normal(0.0, config.noise_sigma, len(s.pf)),
                        source="synthetic", gamma=gamma,
                    )
                sweeps.append(s)

    fit = global_fit(sweeps)
    tau_fit = fit.tau0
    if config.source == "sim":
        tm, sel = transfer_matrix_and_selectivity(
            tau_fit, source="simulation", gamma=gamma,
            node_a=config.node_a(), node_b=config.node_b(), link=config.link(),
            dt=config.dt_ns * NS, window_tail_mass=config.window_tail_mass,
        )
        matrix = tm.values
    elif config.source == "file":
        matrix = np.zeros((3, 3))
        for s in sweeps:
            idx = int(np.argmin(np.abs(s.delays - tau_fit)))
            matrix[s.n_a, s.n_b] = s.pf[idx]
        sel = selectivity(matrix)
    else:
        tm, sel = transfer_matrix_and_selectivity(
            tau_fit, source="model", gamma=gamma, tau0=tau_fit, p_loss=fit.p_loss
        )
        matrix = tm.values
    return {
        "sweeps": [_sweep_payload(s) for s in sweeps],
        "fit": fit.to_dict() | {"converged": fit.converged, "boundary": fit.boundary_flag},
        "matrix": np.asarray(matrix).tolist(),
        "delay_ns": tau_fit / NS,
        "selectivity": None if sel.infinite else sel.sigma,
        "selectivity_db": None if sel.infinite else sel.sigma_db,
        "selectivity_infinite": sel.infinite,
        "provenance": config.source,
        "config_hash": config_hash(config),
    }


def run_detuning(config: RunConfig):
    """2D detuning map of the matched-mode transfer with ridge extraction."""
    config.check_bandwidth_feasible()
    span = config.detuning_span_mhz * MHZ
    n = config.detuning_points
    delta_ab = config.delta_ab_mhz * MHZ
    delta_a = np.linspace(-span, span, n)
    delta_b = delta_ab + np.linspace(-span, span, n)
    dmap = detuning_sweep(
        delta_a, delta_b, delta_ab, config.node_a(), config.node_b(),
        config.link(), gamma=config.gamma, dt=config.dt_ns * NS,
        window_tail_mass=config.window_tail_mass,
    )
    return {
        "delta_a_mhz": (delta_a / MHZ).tolist(),
        "delta_b_mhz": (delta_b / MHZ).tolist(),
        "pf": dmap.pf.tolist(),
        "ridge_slope": dmap.ridge_slope,
        "ridge_intercept_mhz": dmap.ridge_intercept / MHZ
        if math.isfinite(dmap.ridge_intercept) else None,
        "ridge_points_mhz": [[p[0] / MHZ, p[1] / MHZ] for p in dmap.ridge_points],
        "config_hash": config_hash(config),
    }


def run_fit(config: RunConfig, rows):
    """Two-parameter fit of externally supplied (tau_ns, nA, nB, Pf) rows."""
    if not rows:
        raise ConfigError("fit needs at least one data row")
    grouped = {}
    for tau_ns, n_a, n_b, pf in rows:
        grouped.setdefault((int(n_a), int(n_b)), []).append((float(tau_ns) * NS, float(pf)))
    sweeps = []
    for (n_a, n_b), pts in sorted(grouped.items()):
        pts.sort()
        sweeps.append(DelaySweep(
            n_a=n_a, n_b=n_b,
            delays=np.array([p[0] for p in pts]),
            pf=np.array([p[1] for p in pts]),
            source="file", gamma=config.gamma,
        ))
    fit = global_fit(sweeps)
    return {
        "fit": fit.to_dict() | {"converged": fit.converged, "boundary": fit.boundary_flag},
        "config_hash": config_hash(config),
    }
