"""Popularity-prediction metrics and the truncate-fit-predict-compare sweep."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cascades import Cascade, SehpParams
from .estimation import FitResult
from .prediction import predict

DEFAULT_EPSILON = 0.2


def _relative_errors(predicted, actual) -> np.ndarray:
    c = np.asarray(predicted, dtype=np.float64).reshape(-1)
    r = np.asarray(actual, dtype=np.float64).reshape(-1)
    if c.size != r.size:
        raise ValueError(f"length mismatch: {c.size} predictions vs {r.size} actual counts")
    if c.size == 0:
        raise ValueError("need at least one item")
    if np.any(r <= 0):
        raise ValueError("actual counts must be positive (percentage error undefined at 0)")
    return np.abs(c - r) / r


def mape(predicted, actual) -> float:
    """Mean of ``|c_i - r_i| / r_i``."""
    return float(np.mean(_relative_errors(predicted, actual)))


def accuracy(predicted, actual, epsilon: float = DEFAULT_EPSILON) -> float:
    """Fraction of items whose relative error is at most ``epsilon`` (inclusive)."""
    if epsilon < 0 or not math.isfinite(epsilon):
        raise ValueError("epsilon must be a finite non-negative number")
    err = _relative_errors(predicted, actual)
    return float(np.count_nonzero(err <= epsilon)) / err.size


@dataclass(frozen=True)
class MetricsReport:
    horizon: float
    mape: float | None
    accuracy: float | None
    n_items: int
    n_skipped: int = 0
    error: str | None = None

    def to_record(self) -> dict:
        rec = {
            "horizon_seconds": self.horizon,
            "mape": self.mape,
            "accuracy": self.accuracy,
            "n_items": self.n_items,
            "n_skipped": self.n_skipped,
        }
        if self.error is not None:
            rec["error"] = self.error
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def metrics_at_horizon(
    horizon: float, predicted, actual, epsilon: float = DEFAULT_EPSILON, n_skipped: int = 0
) -> MetricsReport:
    """Metrics for one horizon; items with zero actual count are skipped and counted."""
    c = np.asarray(predicted, dtype=np.float64).reshape(-1)
    r = np.asarray(actual, dtype=np.float64).reshape(-1)
    if c.size != r.size:
        raise ValueError("length mismatch between predicted and actual counts")
    keep = r > 0
    n_skipped += int(np.count_nonzero(~keep))
    c, r = c[keep], r[keep]
    if c.size == 0:
        return MetricsReport(horizon, None, None, 0, n_skipped, error="no valid items")
    return MetricsReport(horizon, mape(c, r), accuracy(c, r, epsilon), int(c.size), n_skipped)


def _params_of(fit) -> SehpParams | None:
    if fit is None:
        return None
    if isinstance(fit, FitResult):
        return fit.params
    return fit


def horizon_sweep(
    fits: Sequence[FitResult | SehpParams | None],
    cascades: Sequence[Cascade],
    train_T: float,
    horizons: Sequence[float],
    epsilon: float = DEFAULT_EPSILON,
) -> list[MetricsReport]:
    """Score predictions made from the first ``train_T`` seconds of each cascade.

    ``horizons`` are offsets after ``train_T``.  ``fits[i]`` belongs to
    ``cascades[i]`` and must have been fitted on ``cascades[i].truncate(train_T)``;
    ``None`` marks an item without a usable fit, which is skipped everywhere.
    """
    if len(fits) != len(cascades):
        raise ValueError("fits and cascades must align one-to-one")
    offsets = np.asarray(horizons, dtype=np.float64).reshape(-1)
    if offsets.size and np.any(offsets < 0):
        raise ValueError("horizon offsets must be non-negative")
    t_eval = train_T + offsets
    latest = float(t_eval.max()) if offsets.size else train_T
    for c in cascades:
        if c.horizon < latest:
            raise ValueError(
                f"cascade {c.id!r} observed only to {c.horizon}, needs {latest}"
            )

    predicted = np.full((len(cascades), offsets.size), np.nan)
    actual = np.zeros((len(cascades), offsets.size))
    usable = np.zeros(len(cascades), dtype=bool)
    for i, (fit, c) in enumerate(zip(fits, cascades)):
        actual[i] = c.count_until(t_eval)
        params = _params_of(fit)
        if params is None:
            continue
        usable[i] = True
        predicted[i] = predict(params, c.truncate(train_T), t_eval)

    n_unusable = int(np.count_nonzero(~usable))
    return [
        metrics_at_horizon(
            float(offsets[k]), predicted[usable, k], actual[usable, k], epsilon, n_unusable
        )
        for k in range(offsets.size)
    ]
