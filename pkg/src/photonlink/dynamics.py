"""Single-excitation dynamics of the emitter, channel and receiver.

Within the single-excitation manifold each node reduces to two complex
amplitudes, alpha (qubit f-state, via the f0-g1 drive) and beta (transfer
resonator photon), obeying

    alpha' = g(t) beta - alpha / (2 T1ef)
    beta'  = -g*(t) alpha - (kappa/2 + i Delta) beta - sqrt(kappa) f_in(t)

with the emitted field f_out = sqrt(kappa) beta and the reflected field
f_refl = f_in + sqrt(kappa) beta.  The relative signs of the drive term
and the reflection are fixed by two requirements enforced in the tests:
matched absorption of the time-reversed pulse reaches |alpha_B|^2 -> 1,
and the excitation norm identity holds exactly.

Frame convention for two-node runs: the simulation frame is the emitter
resonator frame.  Each node's waveform is expressed in that node's own
frame, so a node whose resonator sits at offset Delta from the simulation
frame has its drive multiplied by exp(+i Delta t) internally (its local
oscillator rotates with its resonator).  With the receiver offset
Delta_AB = omega_B - omega_A and pulse carrier shifts delta_A/delta_B
applied by the pulses module, mode-matched absorption peaks on the ridge
delta_B - delta_A = Delta_AB, which is the behavior the hardware
calibration shows.

Integration is classic fixed-step RK4 on the waveform grid; drives and
input fields are interpolated linearly at half steps.  The channel applies
an amplitude factor sqrt(1 - p_loss) and a delay rounded to the grid (the
rounding residual is recorded, not compensated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import GridMismatchError, IntegratorError
from .pulses import DEFAULT_DT, DEFAULT_TAIL_MASS, DEFAULT_TAPER, PulseSpec, synthesize

__all__ = [
    "NodeParams",
    "LinkParams",
    "Trajectory",
    "simulate_emitter",
    "simulate_transfer",
    "emitter_population_sweep",
    "analytic_population",
    "count_plateaus",
    "envelope_distance",
    "PopulationSweep",
]

NORM_GROWTH_LIMIT = 1e-4  # per recorded step, emitter-style integration


@dataclass(frozen=True)
class NodeParams:
    """One qubit-resonator node."""

    kappa: float  # resonator linewidth, rad/s
    detuning: float = 0.0  # resonator offset from the simulation frame, rad/s
    t1_ef: float | None = None  # e-f decay time, s

    def __post_init__(self):
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        if self.t1_ef is not None and self.t1_ef <= 0.0:
            raise ValueError("t1_ef must be positive when set")


@dataclass(frozen=True)
class LinkParams:
    """Unidirectional channel between the nodes."""

    delay: float  # propagation delay, s
    loss: float = 0.0  # single-pass photon loss probability
    length: float | None = None  # informational, m
    group_velocity: float | None = None  # informational, m/s

    def __post_init__(self):
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError("loss must lie in [0, 1]")
        if self.delay < 0.0:
            raise ValueError("delay must be >= 0")


@dataclass
class Trajectory:
    """Recorded amplitudes and fields on the sample grid."""

    t: np.ndarray
    alpha_a: np.ndarray
    beta_a: np.ndarray
    emitted: np.ndarray  # cumulative integral kappa_A |beta_A|^2
    f_out: np.ndarray
    alpha_b: np.ndarray | None = None
    beta_b: np.ndarray | None = None
    f_in: np.ndarray | None = None
    f_refl: np.ndarray | None = None
    reflected: np.ndarray | None = None  # cumulative integral |f_refl|^2
    link_steps: int = 0
    loss: float = 0.0
    delay_rounding_error: float = 0.0
    norm_defect: float = 0.0

    @property
    def final_pf_b(self):
        return float(abs(self.alpha_b[-1]) ** 2) if self.alpha_b is not None else 0.0

    @property
    def captured_fraction(self):
        return float(self.emitted[-1])

    def population_f_a(self):
        return np.abs(self.alpha_a) ** 2

    def conservation_series(self):
        """Left-hand side of the excitation-norm identity at every step."""
        total = np.abs(self.alpha_a) ** 2 + np.abs(self.beta_a) ** 2
        if self.alpha_b is None:
            return total + self.emitted
        arrived = np.zeros_like(self.emitted)
        if self.link_steps < len(self.emitted):
            arrived[self.link_steps:] = self.emitted[: len(self.emitted) - self.link_steps]
        else:
            arrived[:] = 0.0
        in_flight = self.emitted - arrived
        total += in_flight + self.loss * arrived
        total += np.abs(self.alpha_b) ** 2 + np.abs(self.beta_b) ** 2 + self.reflected
        return total

    def summary(self):
        return {
            "final_Pf_B": self.final_pf_b,
            "captured_fraction": self.captured_fraction,
            "norm_defect": self.norm_defect,
        }


def _half_grid(values, substeps):
    """Linear interpolation of sample values onto the RK4 half-step grid."""
    n = len(values)
    total = (n - 1) * 2 * substeps + 1
    pos = np.arange(total) / (2.0 * substeps)
    base = np.arange(n, dtype=float)
    if np.iscomplexobj(values):
        return np.interp(pos, base, values.real) + 1j * np.interp(pos, base, values.imag)
    return np.interp(pos, base, values)


def _place_on_grid(waveform, t0, n, shift_steps=0):
    """Waveform samples embedded in a length-n global grid starting at t0."""
    out = np.zeros(n, dtype=complex if np.iscomplexobj(waveform.samples) else float)
    start = (waveform.t0 + shift_steps * waveform.dt) - t0
    off = int(round(start / waveform.dt))
    if abs(off * waveform.dt - start) > 1e-6 * waveform.dt:
        raise GridMismatchError("waveform start is not aligned with the simulation grid")
    lo = max(off, 0)
    hi = min(off + len(waveform.samples), n)
    if hi > lo:
        out[lo:hi] = waveform.samples[lo - off : hi - off]
    return out


def _run_node(
    g_half,
    fin_half,
    kappa,
    detuning,
    decay_rate,
    dt,
    substeps,
    n_samples,
    alpha0=1.0 + 0.0j,
    beta0=0.0 + 0.0j,
    emitted0=0.0,
    check_stability=False,
):
    """RK4 integration of one node; records at sample points.

    Returns (alpha, beta, emitted, reflected) arrays of length n_samples.
    """
    h = dt / substeps
    sqk = math.sqrt(kappa)
    cb = complex(-0.5 * kappa, -detuning)
    ca = -0.5 * decay_rate
    g = g_half.tolist()
    has_in = fin_half is not None
    f = fin_half.tolist() if has_in else None

    a = complex(alpha0)
    b = complex(beta0)
    em = float(emitted0)
    rf = 0.0
    rec_a = np.empty(n_samples, dtype=complex)
    rec_b = np.empty(n_samples, dtype=complex)
    rec_e = np.empty(n_samples)
    rec_r = np.empty(n_samples) if has_in else None
    rec_a[0], rec_b[0], rec_e[0] = a, b, em
    if has_in:
        rec_r[0] = rf
    prev_norm = abs(a) ** 2 + abs(b) ** 2

    half = 0.5 * h
    sixth = h / 6.0
    for i in range(n_samples - 1):
        for s in range(substeps):
            base = 2 * (i * substeps + s)
            g0, gm, g1 = g[base], g[base + 1], g[base + 2]
            if has_in:
                f0, fm, f1 = f[base], f[base + 1], f[base + 2]
            else:
                f0 = fm = f1 = 0.0

            k1a = g0 * b + ca * a
            k1b = -g0.conjugate() * a + cb * b - sqk * f0
            k1e = kappa * (b.real * b.real + b.imag * b.imag)
            ta = a + half * k1a
            tb = b + half * k1b
            k2a = gm * tb + ca * ta
            k2b = -gm.conjugate() * ta + cb * tb - sqk * fm
            k2e = kappa * (tb.real * tb.real + tb.imag * tb.imag)
            ta = a + half * k2a
            tb = b + half * k2b
            k3a = gm * tb + ca * ta
            k3b = -gm.conjugate() * ta + cb * tb - sqk * fm
            k3e = kappa * (tb.real * tb.real + tb.imag * tb.imag)
            ta = a + h * k3a
            tb = b + h * k3b
            k4a = g1 * tb + ca * ta
            k4b = -g1.conjugate() * ta + cb * tb - sqk * f1
            k4e = kappa * (tb.real * tb.real + tb.imag * tb.imag)

            if has_in:
                r = f0 + sqk * b
                k1r = r.real * r.real + r.imag * r.imag
                tb2 = b + half * k1b
                r = fm + sqk * tb2
                k2r = r.real * r.real + r.imag * r.imag
                tb2 = b + half * k2b
                r = fm + sqk * tb2
                k3r = r.real * r.real + r.imag * r.imag
                tb2 = b + h * k3b
                r = f1 + sqk * tb2
                k4r = r.real * r.real + r.imag * r.imag
                rf += sixth * (k1r + 2.0 * (k2r + k3r) + k4r)

            a += sixth * (k1a + 2.0 * (k2a + k3a) + k4a)
            b += sixth * (k1b + 2.0 * (k2b + k3b) + k4b)
            em += sixth * (k1e + 2.0 * (k2e + k3e) + k4e)

        rec_a[i + 1], rec_b[i + 1], rec_e[i + 1] = a, b, em
        if has_in:
            rec_r[i + 1] = rf
        if check_stability:
            norm = abs(a) ** 2 + abs(b) ** 2
            if norm > prev_norm + NORM_GROWTH_LIMIT:
                raise IntegratorError(
                    f"norm grew by {norm - prev_norm:.2e} in one step at "
                    f"sample {i + 1}; reduce the step size"
                )
            prev_norm = norm
    return rec_a, rec_b, rec_e, rec_r


def _frame_phase(g_global, t, node):
    if node.detuning == 0.0:
        return g_global
    return g_global * np.exp(1j * node.detuning * t)


def simulate_emitter(waveform, node, substeps=1, settle=0.0):
    """Integrate the emitter EOM from (alpha, beta) = (1, 0).

    The grid is the waveform grid, optionally extended by `settle` seconds
    of drive-free evolution.  For real drives the complex solution matches
    the real-form equations; that equivalence is covered by tests.
    """
    dt = waveform.dt
    n = len(waveform.samples) + int(round(settle / dt))
    t = waveform.t0 + dt * np.arange(n)
    g_global = _frame_phase(_place_on_grid(waveform, waveform.t0, n), t, node)
    decay = 0.0 if node.t1_ef is None else 1.0 / node.t1_ef
    g_half = _half_grid(g_global, substeps)
    a, b, em, _ = _run_node(
        g_half, None, node.kappa, node.detuning, decay, dt, substeps, n,
        check_stability=True,
    )
    traj = Trajectory(
        t=t, alpha_a=a, beta_a=b, emitted=em, f_out=math.sqrt(node.kappa) * b
    )
    traj.norm_defect = float(np.max(np.abs(traj.conservation_series() - 1.0))) if decay == 0.0 else 0.0
    return traj


def simulate_transfer(
    emit_wf,
    absorb_wf,
    node_a,
    node_b,
    link,
    absorb_delay=None,
    settle=None,
    substeps=1,
):
    """Cascade: emit at node A, propagate with loss and delay, absorb at B.

    `absorb_delay` displaces the receiver pulse relative to the emission
    clock (defaults to the link delay, the matched setting).  Both delays
    are rounded to whole samples; the residuals are recorded on the
    trajectory.  The receiver drive acquires the frame factor
    exp(+i Delta_B t) as described in the module docstring.
    """
    if abs(emit_wf.dt - absorb_wf.dt) > 1e-12 * emit_wf.dt:
        raise GridMismatchError("emit and absorb waveforms use different sample periods")
    dt = emit_wf.dt
    if absorb_delay is None:
        absorb_delay = link.delay
    link_steps = int(round(link.delay / dt))
    pulse_steps = int(round(absorb_delay / dt))
    rounding = max(abs(link_steps * dt - link.delay), abs(pulse_steps * dt - absorb_delay))
    if settle is None:
        settle = 10.0 / node_b.kappa

    t0 = emit_wf.t0
    t_end = max(
        emit_wf.t_end + link_steps * dt,
        absorb_wf.t_end + pulse_steps * dt,
    ) + settle
    n = int(round((t_end - t0) / dt)) + 1
    t = t0 + dt * np.arange(n)

    g_a = _frame_phase(_place_on_grid(emit_wf, t0, n), t, node_a)
    decay_a = 0.0 if node_a.t1_ef is None else 1.0 / node_a.t1_ef
    a_a, b_a, em_a, _ = _run_node(
        _half_grid(g_a, substeps), None, node_a.kappa, node_a.detuning,
        decay_a, dt, substeps, n, check_stability=True,
    )
    f_out = math.sqrt(node_a.kappa) * b_a

    amp = math.sqrt(1.0 - link.loss)
    f_in = np.zeros(n, dtype=complex)
    if link_steps < n:
        f_in[link_steps:] = amp * f_out[: n - link_steps]

    g_b = _frame_phase(_place_on_grid(absorb_wf, t0, n, shift_steps=pulse_steps), t, node_b)
    decay_b = 0.0 if node_b.t1_ef is None else 1.0 / node_b.t1_ef
    a_b, b_b, em_b, refl = _run_node(
        _half_grid(g_b, substeps), _half_grid(f_in, substeps), node_b.kappa,
        node_b.detuning, decay_b, dt, substeps, n,
        alpha0=0.0 + 0.0j, beta0=0.0 + 0.0j,
    )

    traj = Trajectory(
        t=t,
        alpha_a=a_a,
        beta_a=b_a,
        emitted=em_a,
        f_out=f_out,
        alpha_b=a_b,
        beta_b=b_b,
        f_in=f_in,
        f_refl=f_in + math.sqrt(node_b.kappa) * b_b,
        reflected=refl,
        link_steps=link_steps,
        loss=link.loss,
        delay_rounding_error=rounding,
    )
    if decay_a == 0.0 and decay_b == 0.0:
        traj.norm_defect = float(np.max(np.abs(traj.conservation_series() - 1.0)))
    return traj


@dataclass
class PopulationSweep:
    """Ground-state population vs truncation time, with its plateaus."""

    times: np.ndarray
    pg: np.ndarray
    plateaus: list = field(default_factory=list)


def emitter_population_sweep(
    mode,
    node,
    times,
    dt=DEFAULT_DT,
    taper=DEFAULT_TAPER,
    window_tail_mass=DEFAULT_TAIL_MASS,
    substeps=1,
    slope_tol=1e-3,
):
    """P_g(T): truncate the emission pulse at each T and read out.

    The pulse is cut with a linear release taper of the configured length
    centered on T (so the effective truncation time is T itself, and the
    instant-truncation population model can be compared without a
    first-order taper bias); after the taper the drive is zero, so the
    resonator population plus the emitted probability, which is what P_g
    measures, is already stationary (qubit decay only moves weight from f
    to e).  One full-pulse trajectory supplies the state at each
    truncation point, and only the tapered release is re-integrated.
    """
    times = np.asarray(times, dtype=float)
    spec = PulseSpec(
        mode=mode, kappa=node.kappa, dt=dt, taper=taper,
        window_tail_mass=window_tail_mass,
    )
    wf = synthesize(spec)
    traj = simulate_emitter(wf, node, substeps=substeps)
    n = len(traj.t)
    g_global = _frame_phase(_place_on_grid(wf, wf.t0, n), traj.t, node)
    decay = 0.0 if node.t1_ef is None else 1.0 / node.t1_ef
    n_taper = int(round(taper / dt))
    ramp = 1.0 - np.arange(n_taper + 1) / n_taper if n_taper > 0 else np.array([0.0])

    pg = np.empty(len(times))
    for j, T in enumerate(times):
        i = int(round((T - 0.5 * taper - traj.t[0]) / dt))
        i = min(max(i, 0), n - 1)
        tail = np.zeros(n_taper + 1, dtype=complex)
        avail = min(n_taper + 1, n - i)
        tail[:avail] = g_global[i : i + avail]
        tail *= ramp
        _, b, em, _ = _run_node(
            _half_grid(tail, substeps), None, node.kappa, node.detuning,
            decay, dt, substeps, n_taper + 1,
            alpha0=traj.alpha_a[i], beta0=traj.beta_a[i], emitted0=traj.emitted[i],
        )
        pg[j] = abs(b[-1]) ** 2 + em[-1]
    sweep = PopulationSweep(times=times, pg=pg)
    sweep.plateaus = count_plateaus(times, pg, mode.bandwidth, slope_tol=slope_tol)
    return sweep


def analytic_population(mode, kappa, T, t1_ef=None):
    """Closed-population model: resonator term plus integrated emission.

    Without decay this is f(T)^2/kappa + F(T); with decay both pieces are
    damped by exp(-t/T1ef) inside the history integral.
    """
    T_arr = np.atleast_1d(np.asarray(T, dtype=float))
    if t1_ef is None:
        out = mode.eval(T_arr) ** 2 / kappa + mode.cumulative(T_arr)
    else:
        lo = -80.0 / mode.bandwidth
        vals = []
        for Ti in T_arr:
            hist, _ = integrate.quad(
                lambda s: mode.eval(s) ** 2 * math.exp(-s / t1_ef), lo, Ti, limit=400
            )
            vals.append(mode.eval(Ti) ** 2 / kappa * math.exp(-Ti / t1_ef) + hist)
        out = np.asarray(vals)
    return out if np.asarray(T).ndim else float(out[0])


def envelope_distance(a, b, dt):
    """L2 distance between two sampled envelopes up to a global phase.

    The emission drive's sign branch fixes the emitted field only up to a
    global phase (the positive branch gives f_out = -f), so distances are
    minimized over that phase:  d^2 = |a|^2 + |b|^2 - 2 |<a, b>|.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    na = float(np.trapezoid(np.abs(a) ** 2, dx=dt))
    nb = float(np.trapezoid(np.abs(b) ** 2, dx=dt))
    cross = abs(complex(np.trapezoid(np.conj(a) * b, dx=dt)))
    return math.sqrt(max(na + nb - 2.0 * cross, 0.0))


def count_plateaus(times, pg, bandwidth, slope_tol=1e-3):
    """Interior intervals where dPg/dT <= slope_tol * Gamma.

    The criterion is signed: the shallow re-absorption dip just before
    each mode node is part of its plateau.  Runs touching the sweep
    boundary are the trivial flat tails and are excluded.
    """
    times = np.asarray(times, dtype=float)
    pg = np.asarray(pg, dtype=float)
    if len(times) < 3:
        return []
    slope = np.gradient(pg, times)
    mask = slope <= slope_tol * bandwidth
    intervals = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            if i > 0 and j < n - 1:
                intervals.append((float(times[i]), float(times[j])))
            i = j + 1
        else:
            i += 1
    return intervals
