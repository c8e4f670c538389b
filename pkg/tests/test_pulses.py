"""Tests for coupling-rate synthesis."""

import math

import numpy as np
import pytest

from photonlink.errors import FeasibilityError, WindowError
from photonlink.modes import closed_form_mode
from photonlink.pulses import (
    CouplingWaveform,
    PulseSpec,
    closed_form_rate,
    default_window,
    rabi_profile,
    rate_from_mode,
    synthesize,
)

GAMMA = 2.0 * math.pi * 14e6
KAPPA = 2.0 * math.pi * 26.7e6


def test_rate_at_origin_mode0():
    expected = KAPPA * math.sqrt(GAMMA) / (2.0 * math.sqrt(2.0 * KAPPA - GAMMA))
    assert closed_form_rate(0, GAMMA, KAPPA, 0.0) == pytest.approx(expected, rel=1e-13)
    # about 7.96 MHz in nu units for the hardware parameters
    assert expected / (2.0 * math.pi * 1e6) == pytest.approx(7.96, abs=0.005)


def test_rate_plateau():
    expected = math.sqrt(GAMMA * (KAPPA - GAMMA)) / 2.0
    assert closed_form_rate(0, GAMMA, KAPPA, 25.0 / GAMMA) == pytest.approx(expected, rel=1e-6)


def test_rate_overflow_safe_far_out():
    for n in range(3):
        for x in (-50.0, 50.0):
            v = closed_form_rate(n, GAMMA, KAPPA, x / GAMMA)
            assert np.isfinite(v)


@pytest.mark.parametrize("n", [0, 1, 2])
def test_closed_form_matches_generic_pipeline(n):
    t = np.linspace(-10.0 / GAMMA, 10.0 / GAMMA, 2000)
    a = closed_form_rate(n, GAMMA, KAPPA, t)
    b = rate_from_mode(closed_form_mode(n, GAMMA), KAPPA, t)
    scale = np.max(np.abs(b))
    assert np.all(np.abs(a - b) <= 1e-8 * np.maximum(np.abs(b), 1e-9 * scale))


def test_closed_form_bandwidth_bound():
    with pytest.raises(FeasibilityError):
        closed_form_rate(0, KAPPA, KAPPA, 0.0)
    with pytest.raises(ValueError):
        closed_form_rate(3, GAMMA, KAPPA, 0.0)


def test_infeasible_mode_rejected():
    wide = closed_form_mode(0, 2.0 * math.pi * 30e6)
    with pytest.raises(FeasibilityError) as err:
        synthesize(PulseSpec(mode=wide, kappa=KAPPA))
    assert err.value.ratio == pytest.approx(30.0 / 26.7, rel=1e-12)


def test_narrow_window_rejected():
    mode = closed_form_mode(0, GAMMA)
    with pytest.raises(WindowError):
        synthesize(PulseSpec(mode=mode, kappa=KAPPA, window=(-1e-9, 1e-9)))


def test_dt_resolution_guard():
    with pytest.raises(ValueError):
        PulseSpec(mode=closed_form_mode(0, GAMMA), kappa=KAPPA, dt=1e-9)


def test_default_window_tail_mass():
    mode = closed_form_mode(1, GAMMA)
    taper = 3e-9
    t0, t1 = default_window(mode, 0.005, 1e-10, taper)
    assert t1 == -t0
    inner = t1 - taper
    assert mode.cumulative_complement(inner) <= 0.005
    assert mode.cumulative_complement(inner - 1e-10) >= 0.005 * 0.9


@pytest.mark.parametrize("n", [0, 1, 2])
def test_synthesize_tapers_and_capture(n):
    wf = synthesize(PulseSpec(mode=closed_form_mode(n, GAMMA), kappa=KAPPA))
    assert wf.captured >= 0.99
    assert wf.samples[0] == 0.0 and wf.samples[-1] == 0.0
    assert wf.samples.dtype == np.float64  # delta = 0 keeps samples real
    n_taper = int(round(wf.spec.taper / wf.dt))
    lead = wf.samples[: n_taper + 1]
    untapered = rate_from_mode(closed_form_mode(n, GAMMA), KAPPA, wf.times[: n_taper + 1])
    ramp = np.arange(n_taper + 1) / n_taper
    np.testing.assert_allclose(lead, untapered * ramp, rtol=1e-12, atol=1e-12)


def test_interior_matches_closed_form():
    wf = synthesize(PulseSpec(mode=closed_form_mode(0, GAMMA), kappa=KAPPA))
    sel = (wf.times > wf.t0 + 5e-9) & (wf.times < wf.t_end - 5e-9)
    ref = closed_form_rate(0, GAMMA, KAPPA, wf.times[sel])
    np.testing.assert_allclose(wf.samples[sel], ref, rtol=1e-9)


def test_absorb_is_time_reversed_emit():
    spec = dict(mode=closed_form_mode(1, GAMMA), kappa=KAPPA)
    emit = synthesize(PulseSpec(direction="emit", **spec))
    absorb = synthesize(PulseSpec(direction="absorb", **spec))
    assert np.array_equal(absorb.samples, emit.samples[::-1])


def test_detuning_adds_phase_after_reversal():
    delta = 2.0 * math.pi * 1.5e6
    spec = dict(mode=closed_form_mode(0, GAMMA), kappa=KAPPA)
    plain = synthesize(PulseSpec(direction="absorb", **spec))
    shifted = synthesize(PulseSpec(direction="absorb", detuning=delta, **spec))
    assert np.iscomplexobj(shifted.samples)
    np.testing.assert_allclose(
        shifted.samples, plain.samples * np.exp(-1j * delta * plain.times), rtol=1e-12
    )


@pytest.mark.parametrize("ratio", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_feasibility_margin_across_ratios(ratio, n):
    gamma = ratio * KAPPA
    mode = closed_form_mode(n, gamma)
    wf = synthesize(PulseSpec(mode=mode, kappa=KAPPA))
    assert not wf.clamped
    f = mode.eval(wf.times)
    margin = KAPPA * mode.cumulative_complement(wf.times) - f * f
    assert np.min(margin) >= 0.0


def test_rabi_profile_zero_counts():
    profile = rabi_profile(GAMMA, KAPPA)
    assert profile.zero_counts == (0, 1, 2)


def test_user_window_roundtrip():
    mode = closed_form_mode(0, GAMMA)
    window = (-80e-9, 80e-9)
    wf = synthesize(PulseSpec(mode=mode, kappa=KAPPA, window=window))
    assert wf.t0 == pytest.approx(window[0])
    assert wf.t_end == pytest.approx(window[1])


def test_spec_serialization_round_trip():
    spec = PulseSpec(
        mode=closed_form_mode(2, GAMMA), kappa=KAPPA, direction="absorb",
        detuning=2.0 * math.pi * 0.5e6,
    )
    back = PulseSpec.from_dict(spec.to_dict())
    assert back.direction == "absorb"
    assert back.kappa == pytest.approx(spec.kappa, rel=1e-12)
    assert back.detuning == pytest.approx(spec.detuning, rel=1e-12)
    assert back.mode.order == 2
