"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines; every tolerance is fixed here, nothing is configurable.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from photonlink.dynamics import (
    LinkParams,
    NodeParams,
    analytic_population,
    emitter_population_sweep,
    envelope_distance,
    simulate_emitter,
    simulate_transfer,
)
from photonlink.modes import closed_form_mode, gram_schmidt_family
from photonlink.pulses import PulseSpec, closed_form_rate, rate_from_mode, synthesize
from photonlink.transfer import (
    DelaySweep,
    delay_sweep,
    detuning_sweep,
    global_fit,
    load_reference_matrix,
    pf_model,
    selectivity,
    simulate_delay_sweep,
    transfer_matrix_and_selectivity,
)

MHZ = 2.0 * math.pi * 1e6
NS = 1e-9
GAMMA_14 = 14.0 * MHZ
GAMMA_24 = 24.0 * MHZ
KAPPA_A = 26.7 * MHZ
KAPPA_B = 30.7 * MHZ
TAU0 = 145.9 * NS


def _report(num, name, elapsed, detail=""):
    extra = f"; {detail}" if detail else ""
    print(f"\nacceptance {num} ({name}): PASS in {elapsed:.2f}s{extra}", flush=True)


def _fail(num, name):
    print(f"\nacceptance {num} ({name}): FAIL", flush=True)


def _criterion(num, name, limit_s, body):
    start = time.monotonic()
    try:
        detail = body()
    except AssertionError:
        _fail(num, name)
        raise
    elapsed = time.monotonic() - start
    _report(num, name, elapsed, detail or "")
    assert elapsed < limit_s, f"criterion {num} took {elapsed:.1f}s (limit {limit_s}s)"


def test_criterion_1_orthonormality():
    def body():
        family = gram_schmidt_family(GAMMA_14, 5)
        span = 110.0 / GAMMA_14
        worst = 0.0
        for a in range(6):
            for b in range(a, 6):
                val, _ = integrate.quad(
                    lambda t: family[a].eval(t) * family[b].eval(t),
                    -span, span, limit=200,
                )
                worst = max(worst, abs(val - (1.0 if a == b else 0.0)))
        assert worst <= 1e-8, f"orthonormality defect {worst:.2e}"
        dist_worst = 0.0
        for n in range(3):
            cf = closed_form_mode(n, GAMMA_14)
            gs = family[n]
            d2, _ = integrate.quad(
                lambda t: (cf.eval(t) - gs.eval(t)) ** 2, -span, span, limit=200
            )
            dist_worst = max(dist_worst, math.sqrt(max(d2, 0.0)))
        assert dist_worst <= 1e-8, f"closed-form L2 distance {dist_worst:.2e}"
        return f"defect {worst:.1e}, closed-form dist {dist_worst:.1e}"

    _criterion(1, "orthonormality suite", 1.0, body)


def test_criterion_2_closed_form_equivalence():
    def body():
        t = np.linspace(-10.0 / GAMMA_14, 10.0 / GAMMA_14, 2000)
        worst_rate = 0.0
        for n in range(3):
            a = closed_form_rate(n, GAMMA_14, KAPPA_A, t)
            b = rate_from_mode(closed_form_mode(n, GAMMA_14), KAPPA_A, t)
            scale = np.max(np.abs(b))
            rel = np.abs(a - b) / np.maximum(np.abs(b), 1e-9 * scale)
            worst_rate = max(worst_rate, float(np.max(rel)))
        assert worst_rate <= 1e-8, f"rate deviation {worst_rate:.2e}"
        worst_cum = 0.0
        for n in (1, 2):
            m = closed_form_mode(n, GAMMA_14)
            for ti in np.linspace(-15.0 / GAMMA_14, 15.0 / GAMMA_14, 31):
                ref, _ = integrate.quad(
                    lambda s: m.eval(s) ** 2, -90.0 / GAMMA_14, ti, limit=300
                )
                worst_cum = max(worst_cum, abs(m.cumulative(ti) - ref))
        assert worst_cum <= 1e-8, f"cumulative deviation {worst_cum:.2e}"
        return f"rate rel {worst_rate:.1e}, cumulative {worst_cum:.1e}"

    _criterion(2, "closed-form/oracle equivalence", 5.0, body)


def test_criterion_3_emission_fidelity():
    def body():
        node = NodeParams(KAPPA_A)
        worst_l2, worst_residual = 0.0, 0.0
        for n in range(3):
            wf = synthesize(PulseSpec(
                mode=closed_form_mode(n, GAMMA_14), kappa=KAPPA_A,
                window_tail_mass=1e-8,
            ))
            traj = simulate_emitter(wf, node)
            target = closed_form_mode(n, GAMMA_14).eval(traj.t)
            worst_l2 = max(worst_l2, envelope_distance(traj.f_out, target, wf.dt))
            worst_residual = max(worst_residual, abs(traj.alpha_a[-1]) ** 2)
        assert worst_l2 <= 1e-3, f"emitted-field L2 distance {worst_l2:.2e}"
        assert worst_residual <= 1e-3, f"residual excitation {worst_residual:.2e}"
        return f"L2 {worst_l2:.1e}, residual {worst_residual:.1e}"

    _criterion(3, "emission fidelity", 10.0, body)


def test_criterion_4_population_plateaus():
    def body():
        step = 1.0 * NS
        worst_dev = 0.0
        for n in range(3):
            mode = closed_form_mode(n, GAMMA_14)
            span = {0: 60e-9, 1: 95e-9, 2: 135e-9}[n]
            times = np.arange(-span, span, step)
            sweep = emitter_population_sweep(mode, NodeParams(KAPPA_A), times)
            assert len(sweep.plateaus) == n, (
                f"mode {n}: {len(sweep.plateaus)} plateaus"
            )
            damped = emitter_population_sweep(
                mode, NodeParams(KAPPA_A, t1_ef=10e-6), times
            )
            model = analytic_population(mode, KAPPA_A, times, t1_ef=10e-6)
            worst_dev = max(worst_dev, float(np.max(np.abs(damped.pg - model))))
        assert worst_dev <= 2e-2, f"ODE vs analytic model {worst_dev:.3f}"
        return f"plateau counts 0/1/2, model deviation {worst_dev:.4f}"

    _criterion(4, "population plateaus", 60.0, body)


def test_criterion_5_transfer_selectivity():
    def body():
        tm, sel = transfer_matrix_and_selectivity(
            TAU0, source="model", gamma=GAMMA_24, tau0=TAU0, p_loss=0.17
        )
        assert np.allclose(np.diag(tm.values), 0.83, atol=1e-10)
        assert np.allclose(tm.values[~np.eye(3, dtype=bool)], 0.0, atol=1e-10)
        ref_sel = selectivity(load_reference_matrix()["matrix"])
        assert abs(ref_sel.sigma - 40.0) <= 10.0, f"reference sigma {ref_sel.sigma:.1f}"
        emit = synthesize(PulseSpec(mode=closed_form_mode(0, GAMMA_24), kappa=KAPPA_A))
        absorb = synthesize(PulseSpec(
            mode=closed_form_mode(0, GAMMA_24), kappa=KAPPA_B, direction="absorb"
        ))
        traj = simulate_transfer(
            emit, absorb, NodeParams(KAPPA_A), NodeParams(KAPPA_B),
            LinkParams(delay=TAU0, loss=0.17),
        )
        assert abs(traj.final_pf_b - 0.83) <= 2e-2, f"matched efficiency {traj.final_pf_b:.4f}"
        return (
            f"reference sigma {ref_sel.sigma:.1f} ({ref_sel.sigma_db:.1f} dB), "
            f"simulated matched efficiency {traj.final_pf_b:.4f}"
        )

    _criterion(5, "transfer selectivity", 60.0, body)


def test_criterion_6_fit_round_trip():
    def body():
        delays = TAU0 + np.linspace(-3.07 / GAMMA_24, 2.93 / GAMMA_24, 25)
        rng = np.random.default_rng(7)
        sweeps = []
        for n_a in range(3):
            for n_b in range(3):
                s = delay_sweep(n_a, n_b, GAMMA_24, delays, TAU0, 0.17)
                sweeps.append(DelaySweep(
                    n_a=n_a, n_b=n_b, delays=s.delays,
                    pf=s.pf + rng.normal(0.0, 0.01, len(s.pf)),
                    source="synthetic", gamma=GAMMA_24,
                ))
        fit = global_fit(sweeps)
        assert fit.converged
        assert abs(fit.tau0 - TAU0) <= 0.2 * NS, f"tau0 error {(fit.tau0 - TAU0) / NS:.3f} ns"
        assert abs(fit.p_loss - 0.17) <= 0.01, f"p_loss error {fit.p_loss - 0.17:.4f}"
        return (
            f"tau0 {fit.tau0 / NS:.3f} +- {fit.tau0_err / NS:.3f} ns, "
            f"p_loss {fit.p_loss:.4f} +- {fit.p_loss_err:.4f}"
        )

    _criterion(6, "fit round trip", 30.0, body)


def test_criterion_7_parity_widths():
    def body():
        d = np.logspace(-3, -2, 12) / GAMMA_24
        p01 = pf_model(0, 1, GAMMA_24, TAU0 + d, TAU0, 0.0)
        p02 = pf_model(0, 2, GAMMA_24, TAU0 + d, TAU0, 0.0)
        s01 = float(np.polyfit(np.log(d), np.log(p01), 1)[0])
        s02 = float(np.polyfit(np.log(d), np.log(p02), 1)[0])
        assert abs(s01 - 2.0) <= 0.1, f"(0,1) slope {s01:.3f}"
        assert abs(s02 - 4.0) <= 0.2, f"(0,2) slope {s02:.3f}"
        return f"log-log slopes {s01:.3f} and {s02:.3f}"

    _criterion(7, "parity minimum widths", 10.0, body)


def test_criterion_8_detuning_ridge():
    def body():
        delta_ab = 2.0 * MHZ
        n = 21
        da = np.linspace(-2.0 * MHZ, 2.0 * MHZ, n)
        db = delta_ab + np.linspace(-2.0 * MHZ, 2.0 * MHZ, n)
        dmap = detuning_sweep(
            da, db, delta_ab, NodeParams(KAPPA_A), NodeParams(KAPPA_B),
            LinkParams(delay=TAU0, loss=0.0), gamma=GAMMA_14,
        )
        slope = dmap.ridge_slope
        intercept = dmap.ridge_intercept / MHZ
        assert abs(slope - 1.0) <= 0.1, f"ridge slope {slope:.3f}"
        assert abs(intercept - 2.0) <= 0.3, f"ridge intercept {intercept:.3f} MHz"
        return f"slope {slope:.3f}, intercept {intercept:.3f} MHz"

    _criterion(8, "detuning ridge", 300.0, body)


def test_criterion_9_conservation_and_convergence():
    def body():
        emit = synthesize(PulseSpec(mode=closed_form_mode(1, GAMMA_14), kappa=KAPPA_A))
        traj = simulate_emitter(emit, NodeParams(KAPPA_A))
        emitter_defect = float(np.max(np.abs(traj.conservation_series() - 1.0)))
        assert emitter_defect <= 1e-5, f"emitter norm defect {emitter_defect:.2e}"

        absorb = synthesize(PulseSpec(
            mode=closed_form_mode(1, GAMMA_14), kappa=KAPPA_B, direction="absorb"
        ))
        args = (emit, absorb, NodeParams(KAPPA_A), NodeParams(KAPPA_B),
                LinkParams(delay=TAU0, loss=0.17))
        cascade = simulate_transfer(*args)
        assert cascade.norm_defect <= 1e-5, f"cascade norm defect {cascade.norm_defect:.2e}"

        p1 = cascade.final_pf_b
        p2 = simulate_transfer(*args, substeps=2).final_pf_b
        assert abs(p1 - p2) <= 1e-8, f"step-halving change {abs(p1 - p2):.2e}"
        return (
            f"norm defects {emitter_defect:.1e}/{cascade.norm_defect:.1e}, "
            f"halving change {abs(p1 - p2):.1e}"
        )

    _criterion(9, "conservation and convergence", 60.0, body)
