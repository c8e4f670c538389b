"""CSV and JSON writers/readers for all exported artifacts.

Floats are rendered with repr (shortest round-trip form), so re-running a
command with the same config and seed produces byte-identical files.
Every CSV starts with a provenance comment carrying the tool version and
the config hash.  Writers accept the JSON payloads produced by the
experiments module; the object-based entry points build those payloads
first, keeping one source of truth per file format.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .pulses import CouplingWaveform, PulseSpec
from .transfer import DelaySweep

__all__ = [
    "waveform_payload",
    "write_waveform",
    "write_waveform_payload",
    "read_waveform",
    "write_trajectory",
    "write_sweeps",
    "read_sweeps",
    "read_fit_rows",
    "write_fit_report",
    "write_population_sweep",
    "write_detuning_map",
    "write_matrix",
]

MHZ = 2.0 * math.pi * 1e6
NS = 1e-9


def _fmt(x):
    return repr(float(x))


def _header(config_hash):
    return f"# photonlink v{__version__} config={config_hash}\n"


def _dump_json(path, payload):
    with Path(path).open("w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def waveform_payload(order, direction, wf):
    samples = np.asarray(wf.samples, dtype=complex)
    return {
        "order": order,
        "direction": direction,
        "t_ns": (wf.times / NS).tolist(),
        "re_g_over_2pi_MHz": (samples.real / MHZ).tolist(),
        "im_g_over_2pi_MHz": (samples.imag / MHZ).tolist(),
        "captured": wf.captured,
        "clamped": wf.clamped,
        "spec": wf.spec.to_dict(),
    }


def write_waveform_payload(path, payload, config_hash=""):
    """Waveform CSV (t_ns, re/im of g over 2 pi in MHz) plus JSON sidecar."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(_header(config_hash))
        fh.write("t_ns,re_g_over_2pi_MHz,im_g_over_2pi_MHz\n")
        for t, re, im in zip(
            payload["t_ns"], payload["re_g_over_2pi_MHz"], payload["im_g_over_2pi_MHz"]
        ):
            fh.write(f"{_fmt(t)},{_fmt(re)},{_fmt(im)}\n")
    t_ns = payload["t_ns"]
    meta = {
        "spec": payload["spec"],
        "t0_ns": t_ns[0],
        "dt_ns": (t_ns[-1] - t_ns[0]) / (len(t_ns) - 1) if len(t_ns) > 1 else 0.0,
        "captured": payload["captured"],
        "clamped": payload["clamped"],
        "config": config_hash,
        "version": __version__,
    }
    sidecar = path.with_suffix(path.suffix + ".json")
    _dump_json(sidecar, meta)
    return sidecar


def write_waveform(path, waveform, config_hash=""):
    mode = waveform.spec.mode
    return write_waveform_payload(
        path, waveform_payload(mode.order, waveform.spec.direction, waveform), config_hash
    )


def read_waveform(path):
    """Rebuild a CouplingWaveform from a CSV and its JSON sidecar."""
    path = Path(path)
    with path.with_suffix(path.suffix + ".json").open() as fh:
        meta = json.load(fh)
    rows = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    samples = rows[:, 1] * MHZ + 1j * rows[:, 2] * MHZ
    if np.all(samples.imag == 0.0):
        samples = samples.real
    spec = PulseSpec.from_dict(meta["spec"])
    return CouplingWaveform(
        t0=meta["t0_ns"] * NS,
        dt=meta["dt_ns"] * NS,
        samples=samples,
        spec=spec,
        captured=meta["captured"],
        clamped=meta["clamped"],
    )


_TRAJ_COLUMNS = (
    "t_ns,alphaA_re,alphaA_im,betaA_re,betaA_im,"
    "alphaB_re,alphaB_im,betaB_re,betaB_im,"
    "fout_re,fout_im,frefl_re,frefl_im"
)


def write_trajectory(path, traj, config_hash="", stride=1):
    """Trajectory CSV (full cascade schema, zeros for absent fields) + summary."""
    path = Path(path)
    n = len(traj.t)
    zeros = np.zeros(n, dtype=complex)
    a_b = traj.alpha_b if traj.alpha_b is not None else zeros
    b_b = traj.beta_b if traj.beta_b is not None else zeros
    refl = traj.f_refl if traj.f_refl is not None else zeros
    with path.open("w") as fh:
        fh.write(_header(config_hash))
        fh.write(_TRAJ_COLUMNS + "\n")
        for i in range(0, n, stride):
            row = [
                traj.t[i] / NS,
                traj.alpha_a[i].real, traj.alpha_a[i].imag,
                traj.beta_a[i].real, traj.beta_a[i].imag,
                a_b[i].real, a_b[i].imag,
                b_b[i].real, b_b[i].imag,
                traj.f_out[i].real, traj.f_out[i].imag,
                refl[i].real, refl[i].imag,
            ]
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    summary_path = path.with_suffix(path.suffix + ".json")
    _dump_json(summary_path, traj.summary())
    return summary_path


def write_sweeps(path, sweeps, config_hash=""):
    """Delay sweeps in the measured-data format: tau_ns,nA,nB,Pf."""
    with Path(path).open("w") as fh:
        fh.write(_header(config_hash))
        fh.write("tau_ns,nA,nB,Pf\n")
        for s in sweeps:
            if isinstance(s, dict):
                n_a, n_b = s["n_a"], s["n_b"]
                taus, pfs = s["tau_ns"], s["pf"]
            else:
                n_a, n_b = s.n_a, s.n_b
                taus, pfs = np.asarray(s.delays) / NS, s.pf
            for tau, pf in zip(taus, pfs):
                fh.write(f"{_fmt(tau)},{n_a},{n_b},{_fmt(pf)}\n")


def read_fit_rows(path):
    """Raw (tau_ns, nA, nB, Pf) rows of a measured-data CSV."""
    rows = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("tau_ns"):
                continue
            tau, n_a, n_b, pf = line.split(",")
            rows.append((float(tau), int(n_a), int(n_b), float(pf)))
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return rows


def read_sweeps(path, gamma=None):
    """Parse the tau_ns,nA,nB,Pf format back into DelaySweep objects."""
    grouped = {}
    for tau_ns, n_a, n_b, pf in read_fit_rows(path):
        grouped.setdefault((n_a, n_b), []).append((tau_ns * NS, pf))
    out = []
    for (n_a, n_b), pts in sorted(grouped.items()):
        pts.sort()
        out.append(DelaySweep(
            n_a=n_a, n_b=n_b,
            delays=np.array([p[0] for p in pts]),
            pf=np.array([p[1] for p in pts]),
            source="file", gamma=gamma,
        ))
    return out


def write_fit_report(path, fit, config_hash=""):
    report = dict(fit.to_dict() if hasattr(fit, "to_dict") else fit)
    report["config"] = config_hash
    report["version"] = __version__
    _dump_json(path, report)


def write_population_sweep(path, payload, config_hash=""):
    """Per-mode P_g(T) rows: simulated and analytic-model curves."""
    with Path(path).open("w") as fh:
        fh.write(_header(config_hash))
        fh.write("T_ns,Pg_sim,Pg_model\n")
        for t, a, b in zip(payload["T_ns"], payload["pg_sim"], payload["pg_model"]):
            fh.write(f"{_fmt(t)},{_fmt(a)},{_fmt(b)}\n")


def write_detuning_map(path, payload, config_hash=""):
    with Path(path).open("w") as fh:
        fh.write(_header(config_hash))
        fh.write("dA_over_2pi_MHz,dB_over_2pi_MHz,Pf\n")
        for i, da in enumerate(payload["delta_a_mhz"]):
            for j, db in enumerate(payload["delta_b_mhz"]):
                fh.write(f"{_fmt(da)},{_fmt(db)},{_fmt(payload['pf'][i][j])}\n")
    meta = {
        "ridge_slope": payload["ridge_slope"],
        "ridge_intercept_MHz": payload["ridge_intercept_mhz"],
        "ridge_points_MHz": payload["ridge_points_mhz"],
        "config": config_hash,
        "version": __version__,
    }
    sidecar = Path(path).with_suffix(Path(path).suffix + ".json")
    _dump_json(sidecar, meta)
    return sidecar


def write_matrix(path, matrix, delay_ns, provenance, sigma, sigma_db, infinite,
                 config_hash=""):
    _dump_json(path, {
        "matrix": [[float(v) for v in row] for row in matrix],
        "delay_ns": delay_ns,
        "provenance": provenance,
        "selectivity": sigma,
        "selectivity_db": sigma_db,
        "selectivity_infinite": infinite,
        "config": config_hash,
        "version": __version__,
    })
