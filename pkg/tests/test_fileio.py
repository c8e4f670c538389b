"""Round-trip and format tests for the file writers."""

import json
import math

import numpy as np
import pytest

from photonlink.dynamics import LinkParams, NodeParams, simulate_emitter, simulate_transfer
from photonlink.fileio import (
    read_sweeps,
    read_waveform,
    write_fit_report,
    write_sweeps,
    write_trajectory,
    write_waveform,
)
from photonlink.modes import closed_form_mode
from photonlink.pulses import PulseSpec, synthesize
from photonlink.transfer import DelaySweep, delay_sweep, global_fit

GAMMA = 2.0 * math.pi * 14e6
KAPPA = 2.0 * math.pi * 26.7e6


def test_waveform_csv_round_trip_and_replay(tmp_path):
    wf = synthesize(PulseSpec(
        mode=closed_form_mode(1, GAMMA), kappa=KAPPA,
        detuning=2.0 * math.pi * 0.4e6,
    ))
    path = tmp_path / "wf.csv"
    write_waveform(path, wf, "deadbeef")
    back = read_waveform(path)
    np.testing.assert_allclose(back.samples, wf.samples, rtol=1e-12, atol=1e-20)
    assert back.t0 == pytest.approx(wf.t0, rel=1e-12)
    assert back.dt == pytest.approx(wf.dt, rel=1e-12)
    # replay: the reconstructed waveform drives the simulator identically
    t1 = simulate_emitter(wf, NodeParams(KAPPA))
    t2 = simulate_emitter(back, NodeParams(KAPPA))
    np.testing.assert_allclose(t2.alpha_a, t1.alpha_a, atol=1e-12)


def test_trajectory_export(tmp_path):
    emit = synthesize(PulseSpec(mode=closed_form_mode(0, GAMMA), kappa=KAPPA))
    absorb = synthesize(PulseSpec(
        mode=closed_form_mode(0, GAMMA), kappa=KAPPA, direction="absorb"
    ))
    traj = simulate_transfer(
        emit, absorb, NodeParams(KAPPA), NodeParams(KAPPA),
        LinkParams(delay=145.9e-9, loss=0.1),
    )
    path = tmp_path / "traj.csv"
    write_trajectory(path, traj, "cafe", stride=10)
    lines = path.read_text().splitlines()
    assert lines[1].split(",")[:5] == [
        "t_ns", "alphaA_re", "alphaA_im", "betaA_re", "betaA_im"
    ]
    assert lines[1].endswith("frefl_re,frefl_im")
    summary = json.loads((tmp_path / "traj.csv.json").read_text())
    assert set(summary) == {"final_Pf_B", "captured_fraction", "norm_defect"}
    assert summary["final_Pf_B"] == pytest.approx(traj.final_pf_b)


def test_emitter_trajectory_export_zero_receiver(tmp_path):
    wf = synthesize(PulseSpec(mode=closed_form_mode(0, GAMMA), kappa=KAPPA))
    traj = simulate_emitter(wf, NodeParams(KAPPA))
    path = tmp_path / "em.csv"
    write_trajectory(path, traj, stride=50)
    rows = np.loadtxt(path, delimiter=",", skiprows=2)
    np.testing.assert_array_equal(rows[:, 5:9], 0.0)  # alphaB, betaB columns


def test_sweep_csv_round_trip(tmp_path):
    tau0 = 145.9e-9
    delays = tau0 + np.linspace(-2e-8, 2e-8, 15)
    sweeps = [delay_sweep(a, b, GAMMA, delays, tau0, 0.17)
              for a in range(2) for b in range(2)]
    path = tmp_path / "sweeps.csv"
    write_sweeps(path, sweeps, "beef")
    back = read_sweeps(path, gamma=GAMMA)
    assert len(back) == 4
    for orig, loaded in zip(sweeps, back):
        assert (loaded.n_a, loaded.n_b) == (orig.n_a, orig.n_b)
        np.testing.assert_allclose(loaded.delays, orig.delays, rtol=1e-12)
        np.testing.assert_allclose(loaded.pf, orig.pf, rtol=1e-12)
    fit = global_fit([s for s in back if len(s.delays) >= 10] or back)
    assert fit.tau0 == pytest.approx(tau0, abs=1e-12)


def test_fit_report_format(tmp_path):
    tau0 = 145.9e-9
    delays = tau0 + np.linspace(-2e-8, 2e-8, 15)
    sweeps = [delay_sweep(a, b, GAMMA, delays, tau0, 0.2)
              for a in range(3) for b in range(3)]
    fit = global_fit(sweeps)
    path = tmp_path / "fit.json"
    write_fit_report(path, fit, "f00d")
    report = json.loads(path.read_text())
    for key in ("tau0_ns", "tau0_err_ns", "p_loss", "p_loss_err", "residual", "n_points"):
        assert key in report
    assert report["tau0_ns"] == pytest.approx(145.9, abs=1e-9)
    assert report["config"] == "f00d"
