"""Special-function kernel: hyperbolic-secant forms and polylogarithms.

Everything downstream evaluates polylogarithms only on the negative real
axis, at z = -exp(-x) with real x.  For x >= 0 we have |z| <= 1 and the
defining series Li_n(z) = sum_k z^k / k^n applies; near x = 0 it converges
too slowly, so the alternating series is accelerated with an iterated
Euler transform.  For x < 0 the Jonquiere inversion identity maps the
argument back to |z| <= 1:

    Li2(-e^y) = -pi^2/6   - y^2/2                - Li2(-e^-y)
    Li3(-e^y) =           - pi^2 y/6  - y^3/6    + Li3(-e^-y)
    Li4(-e^y) = -7pi^4/360 - pi^2 y^2/12 - y^4/24 - Li4(-e^-y)

with y = -x > 0.  All routines are pure and overflow-safe for |x| up to
several hundred; absolute accuracy is ~1e-15, well inside the 1e-12
requirement of the closed-form cumulative probabilities.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["sech", "log1p_exp", "polylog_neg_exp", "PolylogOrder", "VALID_ORDERS"]

VALID_ORDERS = (2, 3, 4)

# Crossover between the Euler-accelerated and the direct series.  At
# x = 0.5 the direct series still needs < 100 terms for 1e-18.
_DIRECT_SERIES_MIN_X = 0.5
_EULER_TERMS = 64


class PolylogOrder(int):
    """Integer polylog order restricted to {2, 3, 4}."""

    def __new__(cls, order):
        order = int(order)
        if order not in VALID_ORDERS:
            raise ValueError(f"polylog order must be one of {VALID_ORDERS}, got {order}")
        return super().__new__(cls, order)


def sech(x):
    """Hyperbolic secant, computed as 2 e^-|x| / (1 + e^-2|x|).

    Never overflows; underflows to 0 for |x| >~ 745.
    """
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    out = 2.0 * e / (1.0 + e * e)
    return out if out.ndim else float(out)


def log1p_exp(x):
    """ln(1 + e^-x) without overflow for large negative x."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, np.log1p(np.exp(-np.abs(x))), -x + np.log1p(np.exp(-np.abs(x))))
    return out if out.ndim else float(out)


def _series_direct(order, x):
    """Defining series for x >= _DIRECT_SERIES_MIN_X (fast geometric decay)."""
    if x.size == 0:
        return np.zeros(0)
    xmin = float(np.min(x))
    # e^{-k xmin} <= 1e-18  =>  k >= 41.5 / xmin
    nterms = min(int(45.0 / xmin) + 2, 2000)
    k = np.arange(1, nterms + 1, dtype=float)
    signs = np.where(k.astype(int) % 2 == 1, -1.0, 1.0)
    terms = signs[:, None] * np.exp(-np.outer(k, x)) / (k ** order)[:, None]
    return terms.sum(axis=0)


def _series_euler(order, x):
    """Euler-transformed alternating series for 0 <= x < _DIRECT_SERIES_MIN_X.

    Iterated pairwise averaging of the partial sums gains roughly one bit
    per pass for the totally monotone terms e^{-kx}/k^n, so 64 terms reach
    full double precision even at x = 0 (|z| = 1).
    """
    if x.size == 0:
        return np.zeros(0)
    k = np.arange(1, _EULER_TERMS + 1, dtype=float)
    signs = np.where(k.astype(int) % 2 == 1, -1.0, 1.0)
    terms = signs[:, None] * np.exp(-np.outer(k, x)) / (k ** order)[:, None]
    partial = np.cumsum(terms, axis=0)
    while partial.shape[0] > 1:
        partial = 0.5 * (partial[:-1] + partial[1:])
    return partial[0]


def _nonnegative_x(order, x):
    out = np.empty_like(x)
    lo = x < _DIRECT_SERIES_MIN_X
    out[lo] = _series_euler(order, x[lo])
    out[~lo] = _series_direct(order, x[~lo])
    return out


def _polylog_neg_exp_array(order, x):
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = _nonnegative_x(order, x[pos])
    if np.any(~pos):
        y = -x[~pos]
        mirror = _nonnegative_x(order, y)
        if order == 2:
            out[~pos] = -math.pi ** 2 / 6.0 - 0.5 * y * y - mirror
        elif order == 3:
            out[~pos] = -(math.pi ** 2) * y / 6.0 - y ** 3 / 6.0 + mirror
        else:
            out[~pos] = (
                -7.0 * math.pi ** 4 / 360.0
                - (math.pi ** 2) * y * y / 12.0
                - y ** 4 / 24.0
                - mirror
            )
    return out


def polylog_neg_exp(order, x):
    """Li_order(-e^-x) for real x and order in {2, 3, 4}.

    Accepts scalars or arrays; raises on non-finite input.
    """
    order = PolylogOrder(order)
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("polylog_neg_exp requires finite x")
    out = _polylog_neg_exp_array(order, np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])
