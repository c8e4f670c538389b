"""Synthesis of the time-dependent f0-g1 coupling rate.

The drive that emits a photon with envelope f(t) through a resonator of
linewidth kappa is

    g(t) = (f'(t) + (kappa/2) f(t)) / sqrt(kappa [1 - F(t)] - f(t)^2),

taking the positive sign branch (the other sign only changes a global
phase of the photon).  The square root demands f^2 <= kappa (1 - F)
everywhere; for the sech family this holds exactly when Gamma < kappa.

Absorption uses the time-reversed emission drive computed with the
receiver's linewidth.  A carrier detuning delta multiplies the samples by
exp(-i delta t); any inter-node frame bookkeeping is done by the dynamics
module, so waveforms here are always expressed in their own node's frame.

Finite pulses are trimmed with linear tapers (3 ns by default).  The
default window is chosen so the untapered interior holds all but
`window_tail_mass` of the envelope on each side, and the tapers extend
outward from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import FeasibilityError, WindowError
from .modes import TemporalMode, closed_form_mode
from .specfun import log1p_exp, polylog_neg_exp, sech

__all__ = [
    "PulseSpec",
    "CouplingWaveform",
    "synthesize",
    "closed_form_rate",
    "rate_from_mode",
    "default_window",
    "rabi_profile",
    "RATE_CLAMP_FACTOR",
]

DEFAULT_TAPER = 3e-9
DEFAULT_DT = 1e-10
DEFAULT_TAIL_MASS = 0.005
MIN_CAPTURED = 0.99
FEASIBILITY_MARGIN = 1e-12  # in units of kappa
RATE_CLAMP_FACTOR = 20.0  # |g| capped at 20 Gamma, flagged


@dataclass(frozen=True)
class PulseSpec:
    """Everything needed to synthesize one coupling-rate waveform."""

    mode: TemporalMode
    kappa: float  # resonator linewidth, rad/s
    direction: str = "emit"  # "emit" | "absorb"
    detuning: float = 0.0  # carrier shift delta, rad/s
    window: tuple | None = None  # (t_start, t_end) in s; None = auto
    taper: float = DEFAULT_TAPER
    dt: float = DEFAULT_DT
    window_tail_mass: float = DEFAULT_TAIL_MASS

    def __post_init__(self):
        if self.direction not in ("emit", "absorb"):
            raise ValueError("direction must be 'emit' or 'absorb'")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        fastest = max(self.mode.bandwidth, self.kappa)
        if self.dt > 1.0 / (50.0 * fastest) * (1.0 + 1e-9):
            raise ValueError(
                f"dt={self.dt:g} s too coarse; need dt <= 1/(50 max(Gamma, kappa))"
            )

    def to_dict(self):
        return {
            "mode": self.mode.to_dict(),
            "kappa_over_2pi_MHz": self.kappa / (2.0 * math.pi * 1e6),
            "direction": self.direction,
            "detuning_over_2pi_MHz": self.detuning / (2.0 * math.pi * 1e6),
            "window_ns": [self.window[0] * 1e9, self.window[1] * 1e9] if self.window else None,
            "taper_ns": self.taper * 1e9,
            "dt_ns": self.dt * 1e9,
            "window_tail_mass": self.window_tail_mass,
        }

    @classmethod
    def from_dict(cls, d):
        scale = 2.0 * math.pi * 1e6
        window = d.get("window_ns")
        return cls(
            mode=TemporalMode.from_dict(d["mode"]),
            kappa=d["kappa_over_2pi_MHz"] * scale,
            direction=d["direction"],
            detuning=d.get("detuning_over_2pi_MHz", 0.0) * scale,
            window=(window[0] * 1e-9, window[1] * 1e-9) if window else None,
            taper=d.get("taper_ns", 3.0) * 1e-9,
            dt=d.get("dt_ns", 0.1) * 1e-9,
            window_tail_mass=d.get("window_tail_mass", DEFAULT_TAIL_MASS),
        )


@dataclass(frozen=True)
class CouplingWaveform:
    """Uniformly sampled coupling rate, tapered, possibly carrier-shifted.

    Samples are real for delta = 0 and complex otherwise.  `clamped` marks
    waveforms whose rate hit the 20 Gamma cap near the window edge.
    """

    t0: float
    dt: float
    samples: np.ndarray
    spec: PulseSpec
    captured: float
    clamped: bool = False

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def t_end(self):
        return self.t0 + self.dt * (len(self.samples) - 1)

    @property
    def duration(self):
        return self.dt * (len(self.samples) - 1)


def default_window(mode, tail_mass=DEFAULT_TAIL_MASS, dt=DEFAULT_DT, taper=DEFAULT_TAPER):
    """Symmetric window holding >= 1 - 2*tail_mass inside the untapered part.

    The family is symmetric about its probability median t = 0, so the
    window is [-T, T] with 1 - F(T) = tail_mass, rounded out to whole dt,
    plus the taper extensions.
    """
    gamma = mode.bandwidth
    half = brentq(
        lambda t: mode.cumulative_complement(t) - tail_mass,
        0.0,
        120.0 / gamma,
        xtol=1e-3 * dt,
    )
    half = math.ceil(half / dt) * dt + taper
    return (-half, half)


def rate_from_mode(mode, kappa, t):
    """Generic pipeline: evaluate the emission rate from f, f' and 1 - F."""
    t = np.asarray(t, dtype=float)
    f = mode.eval(t)
    fdot = mode.derivative(t)
    comp = mode.cumulative_complement(t)
    radicand = kappa * comp - f * f
    out = (fdot + 0.5 * kappa * f) / np.sqrt(np.maximum(radicand, 0.0))
    return out if out.ndim else float(out)


def synthesize(spec):
    """Build the tapered coupling waveform for a PulseSpec.

    Emission samples follow the generic rate pipeline; absorption reverses
    them about the window midpoint (receiver linewidth already enters via
    spec.kappa).  The carrier detuning is applied last, as a sample-wise
    phase exp(-i delta t) on the waveform's own time grid.
    """
    mode, kappa = spec.mode, spec.kappa
    gamma = mode.bandwidth
    if gamma >= kappa:
        raise FeasibilityError(
            f"mode bandwidth Gamma={gamma:g} rad/s exceeds the channel rate bound: "
            f"asymptotic flux ratio Gamma/kappa = {gamma / kappa:.4f} >= 1",
            violating_time=None,
            ratio=gamma / kappa,
        )
    window = spec.window if spec.window is not None else default_window(
        mode, spec.window_tail_mass, spec.dt, spec.taper
    )
    t0, t1 = window
    if t1 <= t0:
        raise WindowError("window end must exceed window start")
    n = int(round((t1 - t0) / spec.dt)) + 1
    t = t0 + spec.dt * np.arange(n)

    f = mode.eval(t)
    comp = mode.cumulative_complement(t)
    margin = kappa * comp - f * f
    bad = margin < FEASIBILITY_MARGIN * kappa
    if np.any(bad):
        t_bad = float(t[np.argmax(bad)])
        raise FeasibilityError(
            f"target mode infeasible at t = {t_bad * 1e9:.3f} ns "
            f"(asymptotic flux ratio Gamma/kappa = {gamma / kappa:.4f})",
            violating_time=t_bad,
            ratio=gamma / kappa,
        )
    captured = float(mode.cumulative_complement(t0) - mode.cumulative_complement(t1))
    if captured < MIN_CAPTURED:
        raise WindowError(
            f"window captures only {captured:.4f} of the envelope (needs >= {MIN_CAPTURED})"
        )

    rate = (mode.derivative(t) + 0.5 * kappa * f) / np.sqrt(margin)
    cap = RATE_CLAMP_FACTOR * gamma
    clamped = bool(np.any(np.abs(rate) > cap))
    if clamped:
        rate = np.clip(rate, -cap, cap)

    n_taper = int(round(spec.taper / spec.dt))
    if n_taper > 0:
        ramp = np.arange(n_taper + 1) / n_taper
        rate = rate.copy()
        rate[: n_taper + 1] *= ramp
        rate[-(n_taper + 1):] *= ramp[::-1]

    if spec.direction == "absorb":
        rate = rate[::-1].copy()

    samples = rate
    if spec.detuning != 0.0:
        samples = rate * np.exp(-1j * spec.detuning * t)

    return CouplingWaveform(
        t0=t0,
        dt=spec.dt,
        samples=samples,
        spec=replace(spec, window=(float(t0), float(t1))),
        captured=captured,
        clamped=clamped,
    )


def closed_form_rate(n, gamma, kappa, t):
    """Closed-form coupling rates g0, g1, g2 of the first three modes.

    Evaluates the printed expressions (with exact algebraic regroupings
    such as sech^2(x/2) sinh x = 2 tanh(x/2) so nothing overflows up to
    Gamma t = +-50).  Deep in the trailing tail the printed brackets
    cancel catastrophically; there the denominator falls back to the
    stable complement form, which is the same quantity regrouped.
    """
    if n not in (0, 1, 2):
        raise ValueError("closed-form rates exist for n in {0, 1, 2}")
    if gamma >= kappa:
        raise FeasibilityError(
            f"Gamma/kappa = {gamma / kappa:.4f} >= 1: mode not feasible",
            ratio=gamma / kappa,
        )
    t_arr = np.asarray(t, dtype=float)
    x = gamma * t_arr
    if not np.all(np.isfinite(x)):
        raise ValueError("closed_form_rate requires finite t")
    th = np.tanh(0.5 * x)
    sh = sech(0.5 * x)
    if n == 0:
        # sqrt(G)(1+e^x)(k - G tanh(x/2)) sech(x/2) / (4 sqrt(k + e^x (k-G)))
        # rewritten with (1+e^x) sech(x/2) = 2 e^{x/2}:
        out = math.sqrt(gamma) * (kappa - gamma * th) / (
            2.0 * np.sqrt(kappa * np.exp(-x) + (kappa - gamma))
        )
        return out if out.ndim else float(out)

    ell = log1p_exp(x)
    li2 = polylog_neg_exp(2, x)
    if n == 1:
        num = 0.5 * gamma ** 1.5 * sh * (2.0 + kappa * t_arr - x * th)
        bracket = (
            2.0 * x * kappa * (x + 4.0 * ell)
            - 8.0 * kappa * li2
            - x * x * (gamma * sh * sh + 2.0 * kappa * th)
        )
        scale = 4.0 * math.pi ** 2 / 3.0
    else:
        li3 = polylog_neg_exp(3, x)
        li4 = polylog_neg_exp(4, x)
        q = math.pi ** 2 - 3.0 * x * x
        num = 0.5 * math.sqrt(gamma) * sh * (
            12.0 * gamma * x - kappa * math.pi ** 2 + 3.0 * kappa * x * x + gamma * q * th
        )
        bracket = (
            48.0 * kappa * x * (3.0 * x * x - math.pi ** 2) * ell
            - 864.0 * kappa * (x * li3 + li4)
            + 48.0 * kappa * (math.pi ** 2 - 9.0 * x * x) * li2
            + q * q * (2.0 * kappa - gamma * sh * sh)
            - 2.0 * kappa * q * q * th
        )
        scale = 64.0 * math.pi ** 4 / 5.0
    # Cancellation floor: past x ~ 35 the printed bracket is pure rounding
    # noise, so recompute it from the stable 1 - F form (identical algebra).
    term_scale = kappa * (1.0 + x * x) ** n
    tiny = bracket <= 1e-9 * term_scale
    if np.any(np.atleast_1d(tiny)):
        mode = closed_form_mode(n, gamma)
        f = mode.eval(t_arr)
        stable = scale * (kappa * mode.cumulative_complement(t_arr) - f * f)
        bracket = np.where(tiny, stable, bracket)
    out = num / np.sqrt(bracket)
    return out if out.ndim else float(out)


# Check: g1/g2 numerators vanish where f'_n + (kappa/2) f_n = 0, giving the
# n interior zeros of the drive that create the population plateaus.

@dataclass(frozen=True)
class RabiProfile:
    times: np.ndarray
    rates: tuple  # one real array per mode order 0..2
    zero_counts: tuple  # interior zero crossings of each rate


def rabi_profile(gamma=2.0 * math.pi * 14e6, kappa=2.0 * math.pi * 26.7e6,
                 dt=DEFAULT_DT, tail_mass=DEFAULT_TAIL_MASS):
    """Untapered rate curves of the first three modes on a shared grid."""
    modes = [closed_form_mode(n, gamma) for n in range(3)]
    half = max(default_window(m, tail_mass, dt, 0.0)[1] for m in modes)
    n = int(round(2.0 * half / dt)) + 1
    t = -half + dt * np.arange(n)
    rates = []
    zeros = []
    for m in modes:
        r = rate_from_mode(m, kappa, t)
        rates.append(r)
        v = r[np.abs(r) > 0.0]
        zeros.append(int(np.sum(v[:-1] * v[1:] < 0.0)))
    return RabiProfile(times=t, rates=tuple(rates), zero_counts=tuple(zeros))
