"""Command-line front end: a thin HTTP client of the service.

By default every command talks to an in-process instance of the FastAPI
app (no network involved); pass --server to target a running service
instead.  Commands only move JSON payloads around and write the CSV/JSON
artifacts; all physics happens behind the service boundary.

Exit codes: 0 success, 2 config, 3 feasibility, 4 window, 5 integrator,
6 fit, 7 grid mismatch, 8 numerical breakdown, 1 anything else.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .fileio import (
    read_fit_rows,
    write_detuning_map,
    write_fit_report,
    write_matrix,
    write_population_sweep,
    write_sweeps,
    write_waveform_payload,
)

CONFIG_EXIT = 2


class ServiceClient:
    """Synchronous client; in-process ASGI transport unless --server is set."""

    def __init__(self, server=None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient
            from .service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path, payload):
        resp = self._client.post(path, json=payload)
        if resp.status_code == 200:
            return resp.json()
        try:
            detail = resp.json().get("detail")
        except Exception:
            detail = resp.text
        if isinstance(detail, dict) and "exit_code" in detail:
            click.echo(f"error ({detail['error_type']}): {detail['message']}", err=True)
            sys.exit(detail["exit_code"])
        click.echo(f"error: {detail}", err=True)
        sys.exit(CONFIG_EXIT if resp.status_code == 422 else 1)


def _load_config_file(path):
    if path is None:
        return {}
    with Path(path).open() as fh:
        return json.load(fh)


_CONFIG_FLAGS = [
    ("gamma_mhz", float, "Photon bandwidth Gamma/2pi in MHz"),
    ("kappa_a_mhz", float, "Emitter resonator linewidth /2pi in MHz"),
    ("kappa_b_mhz", float, "Receiver resonator linewidth /2pi in MHz"),
    ("delta_ab_mhz", float, "Receiver resonator offset /2pi in MHz"),
    ("delta_a_mhz", float, "Emission pulse carrier shift /2pi in MHz"),
    ("delta_b_mhz", float, "Absorption pulse carrier shift /2pi in MHz"),
    ("p_loss", float, "Single-pass photon loss probability"),
    ("tau_ns", float, "Link delay in ns"),
    ("length_m", float, "Waveguide length in m (with --vg-fraction)"),
    ("vg_fraction", float, "Group velocity as a fraction of c"),
    ("cable_m", float, "Extra coaxial cable length in m"),
    ("cable_v_fraction", float, "Cable velocity as a fraction of c"),
    ("t1_ef_us", float, "e-f decay time in microseconds"),
    ("dt_ns", float, "Sample period in ns"),
    ("taper_ns", float, "Taper duration in ns"),
    ("window_tail_mass", float, "Envelope mass left outside each window edge"),
    ("sweep_points", int, "Points per delay sweep"),
    ("sweep_span_ns", float, "Delay sweep half-span in ns"),
    ("truncation_step_ns", float, "Truncation-time step in ns"),
    ("detuning_span_mhz", float, "Detuning half-span in MHz"),
    ("detuning_points", int, "Detuning grid points per axis"),
    ("noise_sigma", float, "Synthetic noise sigma for model-source sweeps"),
    ("seed", int, "Random seed for synthetic noise"),
    ("source", str, "Data source: model, sim or file"),
    ("data_file", str, "Measured-data CSV (tau_ns,nA,nB,Pf)"),
]


def config_options(fn):
    fn = click.option("--config", "config_file", type=click.Path(exists=True),
                      default=None, help="JSON config file; flags override it")(fn)
    fn = click.option("--mode", "modes", type=int, multiple=True,
                      help="Mode order (repeatable)")(fn)
    for name, typ, helptext in reversed(_CONFIG_FLAGS):
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, name, type=typ, default=None, help=helptext)(fn)
    return fn


def build_config(config_file, modes, defaults=None, **flags):
    data = dict(defaults or {})
    data.update(_load_config_file(config_file))
    if modes:
        data["modes"] = list(modes)
    for key, value in flags.items():
        if value is not None:
            data[key] = value
    return data


@click.group()
@click.version_option(version=__version__)
@click.option("--server", default=None, envvar="PHOTONLINK_SERVER",
              help="Service URL; default is an in-process instance")
@click.option("--out", "out_dir", default="out", show_default=True,
              help="Output directory")
@click.pass_context
def main(ctx, server, out_dir):
    """Temporal-mode photon link: pulse synthesis, simulation, analysis."""
    ctx.obj = {"server": server, "out": Path(out_dir)}


def _client(ctx):
    return ServiceClient(ctx.obj["server"])


def _outdir(ctx):
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    return out


@main.command()
@config_options
@click.pass_context
def synth(ctx, config_file, modes, **flags):
    """Synthesize emit/absorb coupling waveforms and report feasibility."""
    payload = {"config": build_config(config_file, modes, **flags)}
    result = _client(ctx).post("/synth", payload)
    out = _outdir(ctx)
    chash = result["config_hash"]
    for wf in result["waveforms"]:
        name = f"waveform_{wf['direction']}_n{wf['order']}.csv"
        write_waveform_payload(out / name, wf, chash)
    for entry in result["feasibility"]:
        click.echo(
            f"mode {entry['order']}: window "
            f"[{entry['window_ns'][0]:.1f}, {entry['window_ns'][1]:.1f}] ns, "
            f"captured {entry['captured']:.4f}, "
            f"peak rate {entry['peak_rate_over_2pi_MHz']:.3f} MHz"
            + (", CLAMPED" if entry["clamped"] else "")
        )
    if result.get("orthogonality_defect") is not None:
        click.echo(f"family orthogonality defect: {result['orthogonality_defect']:.2e}")
    click.echo(f"wrote {len(result['waveforms'])} waveforms to {out}")


@main.command("emit-sweep")
@config_options
@click.pass_context
def emit_sweep(ctx, config_file, modes, **flags):
    """Ground-state population versus truncation time (ODE and model)."""
    payload = {"config": build_config(config_file, modes, **flags)}
    result = _client(ctx).post("/emit-sweep", payload)
    out = _outdir(ctx)
    chash = result["config_hash"]
    for sweep in result["sweeps"]:
        write_population_sweep(out / f"population_n{sweep['order']}.csv", sweep, chash)
        click.echo(
            f"mode {sweep['order']}: {sweep['n_plateaus']} plateau(s), "
            f"max |ODE - model| = {sweep['max_model_deviation']:.4f}"
        )
    click.echo(f"wrote {len(result['sweeps'])} population sweeps to {out}")


@main.command()
@config_options
@click.pass_context
def transfer(ctx, config_file, modes, **flags):
    """Delay sweeps, two-parameter fit, transfer matrix and selectivity."""
    payload = {"config": build_config(
        config_file, modes, defaults={"gamma_mhz": 24.0}, **flags
    )}
    result = _client(ctx).post("/transfer", payload)
    out = _outdir(ctx)
    chash = result["config_hash"]
    if result["sweeps"]:
        write_sweeps(out / "delay_sweeps.csv", result["sweeps"], chash)
    if result["fit"] is not None:
        write_fit_report(out / "fit_report.json", result["fit"], chash)
        fit = result["fit"]
        click.echo(
            f"fit: tau0 = {fit['tau0_ns']:.2f} +- {fit['tau0_err_ns']:.2f} ns, "
            f"p_loss = {fit['p_loss']:.4f} +- {fit['p_loss_err']:.4f}"
        )
    write_matrix(
        out / "transfer_matrix.json", result["matrix"], result["delay_ns"],
        result["provenance"], result["selectivity"], result["selectivity_db"],
        result["selectivity_infinite"], chash,
    )
    if result["selectivity_infinite"]:
        click.echo("selectivity: infinite (all off-diagonal entries are zero)")
    else:
        click.echo(
            f"selectivity: {result['selectivity']:.1f} "
            f"({result['selectivity_db']:.1f} dB)"
        )
    click.echo(f"wrote transfer artifacts to {out}")


@main.command()
@config_options
@click.pass_context
def detuning(ctx, config_file, modes, **flags):
    """2D carrier-detuning map of the matched transfer with ridge fit."""
    payload = {"config": build_config(
        config_file, modes, defaults={"delta_ab_mhz": 2.0}, **flags
    )}
    result = _client(ctx).post("/detuning", payload)
    out = _outdir(ctx)
    write_detuning_map(out / "detuning_map.csv", result, result["config_hash"])
    if result["ridge_slope"] is not None:
        click.echo(
            f"ridge: slope {result['ridge_slope']:.3f}, "
            f"intercept {result['ridge_intercept_mhz']:.3f} MHz"
        )
    click.echo(f"wrote detuning map to {out}")


@main.command()
@config_options
@click.pass_context
def fit(ctx, config_file, modes, **flags):
    """Two-parameter (tau0, p_loss) fit of a measured-data file."""
    data_file = flags.pop("data_file", None) or _load_config_file(config_file).get("data_file")
    if not data_file:
        click.echo("error: fit requires --data-file", err=True)
        sys.exit(CONFIG_EXIT)
    rows = read_fit_rows(data_file)
    payload = {
        "config": build_config(config_file, modes, defaults={"gamma_mhz": 24.0}, **flags),
        "data": rows,
    }
    result = _client(ctx).post("/fit", payload)
    out = _outdir(ctx)
    write_fit_report(out / "fit_report.json", result["fit"], result["config_hash"])
    f = result["fit"]
    click.echo(
        f"tau0 = {f['tau0_ns']:.3f} +- {f['tau0_err_ns']:.3f} ns, "
        f"p_loss = {f['p_loss']:.4f} +- {f['p_loss_err']:.4f} "
        f"(residual {f['residual']:.3e}, {f['n_points']} points)"
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the photonlink service."""
    import uvicorn

    uvicorn.run("photonlink.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
