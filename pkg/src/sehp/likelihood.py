"""Log-likelihood of a single cascade, its gradient, and a quadrature check.

For events ``t_1 <= ... <= t_N`` observed on ``[0, T]``::

    loglik = (v/beta) (exp(-beta T) - 1)
           + (alpha/beta) sum_i (exp(-beta (T - t_i)) - 1)
           + sum_i log(v exp(-beta t_i) + alpha A_i)

with ``A_i = sum_{j<i} exp(-beta (t_i - t_j))``.  ``A_i`` and the auxiliary
``B_i = sum_{j<i} (t_i - t_j) exp(-beta (t_i - t_j))`` obey the recursions

    A_i = e_i (A_{i-1} + 1)
    B_i = e_i (B_{i-1} + d_i (A_{i-1} + 1)),    d_i = t_i - t_{i-1}, e_i = exp(-beta d_i)

so value and gradient come out of a single O(N) pass.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .cascades import Cascade, SehpParams


class LikelihoodError(ArithmeticError):
    """The rate vanished at an observed event, so the log-likelihood is undefined."""

    def __init__(self, index: int, time: float):
        super().__init__(f"rate is zero at event index {index} (t={time!r})")
        self.index = index
        self.time = time


class QuadratureError(RuntimeError):
    pass


class LogLikResult(NamedTuple):
    value: float
    gradient: np.ndarray  # d/dv, d/dalpha, d/dbeta


def _excitation_sums(ts: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    n = ts.size
    A = np.zeros(n)
    B = np.zeros(n)
    a = b = 0.0
    for i in range(1, n):
        d = ts[i] - ts[i - 1]
        e = math.exp(-beta * d)
        b = e * (b + d * (a + 1.0))
        a = e * (a + 1.0)
        A[i] = a
        B[i] = b
    return A, B


def log_likelihood(params: SehpParams, cascade: Cascade) -> LogLikResult:
    v, alpha, beta = params.v, params.alpha, params.beta
    ts = cascade.timestamps
    T = cascade.horizon

    # (exp(-beta x) - 1) / beta, kept accurate for small beta x
    em1_T = math.expm1(-beta * T)
    value = (v / beta) * em1_T
    dv = em1_T / beta
    dbeta = -(v / beta**2) * em1_T - (v / beta) * T * math.exp(-beta * T)
    dalpha = 0.0

    if ts.size:
        rem = T - ts
        em1_rem = np.expm1(-beta * rem)
        s_rem = em1_rem.sum()
        value += (alpha / beta) * s_rem
        dalpha += s_rem / beta
        dbeta += -(alpha / beta**2) * s_rem - (alpha / beta) * np.sum(rem * np.exp(-beta * rem))

        A, B = _excitation_sums(ts, beta)
        base = np.exp(-beta * ts)
        lam = v * base + alpha * A
        bad = np.flatnonzero(~(lam > 0))
        if bad.size:
            i = int(bad[0])
            raise LikelihoodError(i, float(ts[i]))
        value += np.log(lam).sum()
        dv += np.sum(base / lam)
        dalpha += np.sum(A / lam)
        dbeta += np.sum((-v * ts * base - alpha * B) / lam)

    return LogLikResult(float(value), np.array([dv, dalpha, dbeta], dtype=np.float64))


def log_likelihood_quadrature(
    params: SehpParams, cascade: Cascade, tol: float = 1e-10
) -> float:
    """Log-likelihood assembled interval by interval from survival terms.

    Every integral of the rate is computed numerically with adaptive
    quadrature on the directly summed rate, so this shares no algebra with
    :func:`log_likelihood`.  Intended as a slow reference for tests.

    Knots are ``0, t_1, ..., t_N, T``; on the interval ending at ``ts[k]``
    the events ``ts[:k]`` have already occurred.
    """
    v, alpha, beta = params.v, params.alpha, params.beta
    ts = cascade.timestamps
    knots = np.concatenate(([0.0], ts, [cascade.horizon]))

    total = 0.0
    for k in range(knots.size - 1):
        lo, hi = float(knots[k]), float(knots[k + 1])
        # events that have already happened anywhere inside (lo, hi)
        past = ts[:k]

        def f(s, past=past):
            return v * math.exp(-beta * s) + alpha * float(np.exp(-beta * (s - past)).sum())

        if hi > lo:
            integral, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-13, limit=200)
            if not err <= tol:
                raise QuadratureError(
                    f"quadrature on [{lo}, {hi}] did not reach {tol} (estimated error {err})"
                )
            total -= integral
        if k < ts.size:
            # tied earlier events count at full strength here
            lam = f(float(ts[k]))
            if not lam > 0:
                raise LikelihoodError(k, float(ts[k]))
            total += math.log(lam)
    return total
