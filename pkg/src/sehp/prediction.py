"""Expected popularity beyond the observation window.

For ``t >= T`` the expected count is the observed count plus the integral of
the rate over ``[T, t]`` with the event set frozen at the observed events::

    c(t) = N + (v/beta) (exp(-beta T) - exp(-beta t))
             + (alpha/beta) sum_j (exp(-beta (T - t_j)) - exp(-beta (t - t_j)))

Forwardings expected after ``T`` do not feed back into the rate here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascades import Cascade, SehpParams


@dataclass(frozen=True, eq=False)
class PredictionSeries:
    cascade_id: str
    horizons: np.ndarray
    expected_counts: np.ndarray

    def rows(self):
        for h, c in zip(self.horizons.tolist(), self.expected_counts.tolist()):
            yield self.cascade_id, h, c


def expected_new_events(params: SehpParams, cascade: Cascade, t):
    """Expected number of events on ``(T, t]``, i.e. ``c(t) - N`` without cancellation."""
    t_arr = np.asarray(t, dtype=np.float64)
    T = cascade.horizon
    if np.any(t_arr < T):
        raise ValueError(f"prediction time must be >= horizon T={T}")
    v, alpha, beta = params.v, params.alpha, params.beta
    # exp(-beta T) - exp(-beta t) == exp(-beta T) * (1 - exp(-beta (t - T)))
    grow = -np.expm1(-beta * (t_arr - T))
    excite = np.exp(-beta * (T - cascade.timestamps)).sum()
    out = (v * np.exp(-beta * T) + alpha * excite) / beta * grow
    return float(out) if out.ndim == 0 else out


def predict(params: SehpParams, cascade: Cascade, t):
    """Expected number of events by time(s) ``t >= T``."""
    return cascade.n_events + expected_new_events(params, cascade, t)


def asymptotic_count(params: SehpParams, cascade: Cascade) -> float:
    """Limit of :func:`predict` as ``t`` goes to infinity."""
    T = cascade.horizon
    excite = np.exp(-params.beta * (T - cascade.timestamps)).sum()
    return float(cascade.n_events + (params.v * np.exp(-params.beta * T) + params.alpha * excite) / params.beta)


def predict_series(params: SehpParams, cascade: Cascade, horizons) -> PredictionSeries:
    h = np.array(horizons, dtype=np.float64).reshape(-1)
    if h.size > 1 and np.any(np.diff(h) <= 0):
        raise ValueError("horizons must be strictly increasing")
    if h.size and h[0] < cascade.horizon:
        raise ValueError(f"horizons must be >= T={cascade.horizon}")
    counts = np.atleast_1d(predict(params, cascade, h)) if h.size else np.zeros(0)
    h.setflags(write=False)
    counts.setflags(write=False)
    return PredictionSeries(cascade.id, h, counts)
