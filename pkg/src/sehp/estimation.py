"""Maximum-likelihood fitting of (v, alpha, beta) for one cascade.

The optimiser is BFGS ascent on ``(log v, log alpha, log beta)`` with an
Armijo backtracking line search, so iterates stay strictly positive and the
log-likelihood never decreases from one accepted iterate to the next.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .cascades import Cascade, SehpParams
from .likelihood import LikelihoodError, log_likelihood
from .simulation import make_rng

# keeps exp() of a trial point representable
_MAX_LOG_STEP = 10.0
_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 60


class UnfittableCascadeError(ValueError):
    pass


class FitError(RuntimeError):
    def __init__(self, message: str, diagnostics: list[dict]):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    n_restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.gradient_tolerance > 0:
            raise ValueError("gradient_tolerance must be > 0")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class FitResult:
    params: SehpParams
    log_likelihood: float
    gradient_norm: float
    iterations: int
    converged: bool
    restart_index: int


def default_initialization(cascade: Cascade) -> SehpParams:
    """Moment-style starting point.

    ``beta0`` is the reciprocal of the mean gap between ``0, t_1, ..., t_N``,
    ``v0 = N / T`` and ``alpha0 = beta0 / 2`` (branching ratio one half).
    """
    n = cascade.n_events
    if n < 1:
        raise UnfittableCascadeError(f"cascade {cascade.id!r} has no events")
    mean_gap = float(cascade.timestamps[-1]) / n
    beta0 = 1.0 / mean_gap if mean_gap > 0 else 1.0 / cascade.horizon
    return SehpParams(v=n / cascade.horizon, alpha=0.5 * beta0, beta=beta0)


def _objective(cascade: Cascade, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Log-likelihood and its gradient with respect to log-parameters."""
    with np.errstate(over="ignore"):
        theta = np.exp(x)
    if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
        return -math.inf, np.full(3, np.nan)
    try:
        params = SehpParams(*theta)
        res = log_likelihood(params, cascade)
    except (ValueError, LikelihoodError, FloatingPointError):
        return -math.inf, np.full(3, np.nan)
    g = theta * res.gradient
    if not (math.isfinite(res.value) and np.all(np.isfinite(g))):
        return -math.inf, np.full(3, np.nan)
    return res.value, g


def _bfgs_ascent(cascade: Cascade, x0: np.ndarray, config: FitConfig, trace: list | None = None):
    x = np.array(x0, dtype=np.float64)
    f, g = _objective(cascade, x)
    if not math.isfinite(f):
        return x, f, g, 0, False
    if trace is not None:
        trace.append(f)
    H = np.eye(3)
    tol = config.gradient_tolerance
    it = 0
    while it < config.max_iterations:
        if np.max(np.abs(g)) <= tol:
            return x, f, g, it, True
        it += 1
        p = H @ g
        if not np.dot(g, p) > 0:
            H = np.eye(3)
            p = g.copy()
        big = np.max(np.abs(p))
        if big > _MAX_LOG_STEP:
            p *= _MAX_LOG_STEP / big
        slope = float(np.dot(g, p))

        step = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = x + step * p
            f_new, g_new = _objective(cascade, x_new)
            if math.isfinite(f_new):
                if f_new >= f + _ARMIJO_C * step * slope:
                    accepted = True
                    break
                # increase lost in rounding: take the step if it did not hurt
                if f_new >= f and np.max(np.abs(g_new)) < np.max(np.abs(g)):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if not np.allclose(H, np.eye(3)):
                H = np.eye(3)
                continue
            break

        s = x_new - x
        y = g - g_new  # gradient of the negated objective changes by -y
        sy = float(np.dot(s, y))
        if it == 1 and sy > 0:
            H = np.eye(3) * (sy / float(np.dot(y, y)))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            I = np.eye(3)
            H = (I - rho * np.outer(s, y)) @ H @ (I - rho * np.outer(y, s)) + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        if trace is not None:
            trace.append(f)

    return x, f, g, it, bool(np.max(np.abs(g)) <= tol)


def _cascade_key(cascade_id: str) -> int:
    return int.from_bytes(hashlib.blake2b(cascade_id.encode("utf-8"), digest_size=8).digest(), "little")


def restart_points(cascade: Cascade, config: FitConfig) -> list[SehpParams]:
    """Starting points: the default initialisation, then multiplicative jitters of it."""
    init = default_initialization(cascade)
    points = [init]
    base = np.log(init.as_array())
    for k in range(1, config.n_restarts):
        rng = make_rng(int(config.seed), _cascade_key(cascade.id), k)
        u = rng.uniform(-1.0, 1.0, size=3)
        points.append(SehpParams(*np.exp(base + u)))
    return points


def fit(cascade: Cascade, config: FitConfig | None = None) -> FitResult:
    config = config or FitConfig()
    if cascade.n_events < 1:
        raise UnfittableCascadeError(f"cascade {cascade.id!r} has no events to fit")

    best = None
    diagnostics = []
    for k, start in enumerate(restart_points(cascade, config)):
        x, f, g, iters, ok = _bfgs_ascent(cascade, np.log(start.as_array()), config)
        gnorm = float(np.max(np.abs(g))) if np.all(np.isfinite(g)) else math.inf
        diagnostics.append(
            {"restart": k, "start": start, "log_likelihood": f, "gradient_norm": gnorm,
             "iterations": iters, "converged": ok}
        )
        if not math.isfinite(f):
            continue
        if best is None or f > best.log_likelihood:
            theta = np.exp(x)
            best = FitResult(SehpParams(*theta), float(f), gnorm, iters, ok, k)
    if best is None:
        raise FitError(f"all {config.n_restarts} restarts failed for cascade {cascade.id!r}", diagnostics)
    return best
