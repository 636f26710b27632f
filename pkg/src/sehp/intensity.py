"""Rate function of the self-excited process and its exact integral.

    rate(t) = v * exp(-beta t) + alpha * sum_{t_j < t} exp(-beta (t - t_j))

An event never excites itself at its own arrival instant, so ``rate`` is
right-continuous with a jump of ``alpha`` just after each event.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascades import Cascade, SehpParams

_TINY = np.finfo(np.float64).tiny


def flush_exp(x):
    """``exp(x)`` with subnormal results flushed to zero."""
    out = np.exp(x)
    return np.where(out < _TINY, 0.0, out)


@dataclass(frozen=True, eq=False)
class IntensityContext:
    params: SehpParams
    events: np.ndarray

    def __post_init__(self):
        ev = np.array(self.events, dtype=np.float64).reshape(-1)
        if ev.size and np.any(np.diff(ev) < 0):
            raise ValueError("events must be sorted non-decreasing")
        ev.setflags(write=False)
        object.__setattr__(self, "events", ev)

    @classmethod
    def from_cascade(cls, params: SehpParams, cascade: Cascade) -> "IntensityContext":
        return cls(params, cascade.timestamps)


def rate(ctx: IntensityContext, t):
    """Instantaneous rate at time(s) ``t >= 0``; direct summation over past events."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("rate is defined for t >= 0 only")
    p = ctx.params
    tt = t_arr[..., None]
    lag = tt - ctx.events
    excite = np.where(lag > 0, flush_exp(-p.beta * np.where(lag > 0, lag, 0.0)), 0.0)
    out = p.v * flush_exp(-p.beta * t_arr) + p.alpha * excite.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def compensator(ctx: IntensityContext, a, b):
    """Integral of the rate over ``[a, b]`` in closed form (vectorised over a, b)."""
    a_arr = np.asarray(a, dtype=np.float64)
    b_arr = np.asarray(b, dtype=np.float64)
    if np.any(a_arr < 0):
        raise ValueError("compensator requires a >= 0")
    if np.any(a_arr > b_arr):
        raise ValueError("compensator requires a <= b")
    p = ctx.params
    base = (p.v / p.beta) * flush_exp(-p.beta * a_arr) * -np.expm1(-p.beta * (b_arr - a_arr))

    aa = a_arr[..., None]
    bb = b_arr[..., None]
    ev = ctx.events
    # each event contributes on [max(a, t_j), b] when t_j < b
    start = np.maximum(aa, ev)
    active = ev < bb
    lag_start = np.where(active, start - ev, 0.0)
    span = np.where(active, bb - start, 0.0)
    pieces = np.where(active, flush_exp(-p.beta * lag_start) * -np.expm1(-p.beta * span), 0.0)
    out = base + (p.alpha / p.beta) * pieces.sum(axis=-1)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def compensator_increments(ctx: IntensityContext, times) -> np.ndarray:
    """Integrals of the rate between consecutive points of ``0, times[0], times[1], ...``."""
    times = np.asarray(times, dtype=np.float64)
    left = np.concatenate(([0.0], times[:-1]))
    return np.atleast_1d(compensator(ctx, left, times))
