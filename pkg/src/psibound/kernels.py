"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The fallback is selected by setting the environment variable
``PSIBOUND_NO_NUMBA=1`` before import (or automatically when numba is not
importable).  Both paths compute identical values; ``benchmarks/
bench_kernels.py`` times them against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("PSIBOUND_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - exercised via env flag instead
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# segmented sieve marking
# ---------------------------------------------------------------------------


@njit(cache=True)
def _mark_segment_jit(flags, base_primes, low):  # pragma: no cover - jitted
    n = flags.shape[0]
    for i in range(base_primes.shape[0]):
        p = base_primes[i]
        start = p * p
        if start < low:
            start = ((low + p - 1) // p) * p
        j = start - low
        while j < n:
            flags[j] = False
            j += p


def _mark_segment_np(flags, base_primes, low):
    n = flags.shape[0]
    for p in base_primes:
        start = max(p * p, ((low + p - 1) // p) * p)
        if start - low < n:
            flags[start - low :: p] = False


def mark_segment(flags: np.ndarray, base_primes: np.ndarray, low: int) -> None:
    """Clear composite positions in ``flags`` covering [low, low+len)."""
    if USE_NUMBA:
        _mark_segment_jit(flags, base_primes, np.int64(low))
    else:
        _mark_segment_np(flags, base_primes, low)


# ---------------------------------------------------------------------------
# paired zero-sum terms: 2*Re(x^rho / rho) / (2 sqrt(x)) for rho = 1/2 + i*gamma
# ---------------------------------------------------------------------------


@njit(cache=True)
def _zero_terms_jit(gammas, log_x):  # pragma: no cover - jitted
    out = np.empty(gammas.shape[0])
    for i in range(gammas.shape[0]):
        g = gammas[i]
        phase = g * log_x
        out[i] = (0.5 * math.cos(phase) + g * math.sin(phase)) / (0.25 + g * g)
    return out


def _zero_terms_np(gammas, log_x):
    phase = gammas * log_x
    return (0.5 * np.cos(phase) + gammas * np.sin(phase)) / (0.25 + gammas * gammas)


def zero_sum_terms(gammas: np.ndarray, log_x: float) -> np.ndarray:
    """Per-zero summand of the conjugate-paired truncated zero sum.

    ``2*sqrt(x) * zero_sum_terms(...).sum()`` equals
    ``2 * sum_gamma Re(x^(1/2+i*gamma) / (1/2+i*gamma))``.
    """
    if USE_NUMBA:
        return _zero_terms_jit(gammas, float(log_x))
    return _zero_terms_np(gammas, float(log_x))


# ---------------------------------------------------------------------------
# residual profile over a grid of truncation heights
# ---------------------------------------------------------------------------


@njit(cache=True)
def _residual_profile_jit(terms, gammas, psi_minus_x, two_sqrt_x, t_grid):
    # pragma: no cover - jitted
    out = np.empty(t_grid.shape[0])
    csum = np.empty(terms.shape[0] + 1)
    csum[0] = 0.0
    for i in range(terms.shape[0]):
        csum[i + 1] = csum[i] + terms[i]
    for j in range(t_grid.shape[0]):
        t = t_grid[j]
        k = np.searchsorted(gammas, t, side="right")
        out[j] = abs(psi_minus_x + two_sqrt_x * csum[k])
    return out


def _residual_profile_np(terms, gammas, psi_minus_x, two_sqrt_x, t_grid):
    csum = np.concatenate(([0.0], np.cumsum(terms)))
    idx = np.searchsorted(gammas, t_grid, side="right")
    return np.abs(psi_minus_x + two_sqrt_x * csum[idx])


def residual_profile(
    gammas: np.ndarray,
    log_x: float,
    psi_minus_x: float,
    sqrt_x: float,
    t_grid: np.ndarray,
) -> np.ndarray:
    """|psi(x) - x + S(x, T*)| for each cutoff T* in ``t_grid``.

    S is the conjugate-paired zero sum over ordinates <= T*.  Summation uses
    a fixed left-to-right prefix order so results are reproducible bit for
    bit regardless of the grid.
    """
    terms = zero_sum_terms(gammas, log_x)
    if USE_NUMBA:
        return _residual_profile_jit(
            terms, gammas, float(psi_minus_x), 2.0 * float(sqrt_x), t_grid
        )
    return _residual_profile_np(
        terms, gammas, float(psi_minus_x), 2.0 * float(sqrt_x), t_grid
    )


# ---------------------------------------------------------------------------
# log-weighted partial sums over sieved primes (Lambda(n) n^{-kappa} pieces)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _weighted_lambda_sum_jit(values, logs, kappa):  # pragma: no cover - jitted
    acc = 0.0
    for i in range(values.shape[0]):
        acc += logs[i] * math.exp(-kappa * math.log(values[i]))
    return acc


def _weighted_lambda_sum_np(values, logs, kappa):
    return float(np.sum(logs * np.exp(-kappa * np.log(values))))


def weighted_lambda_sum(values: np.ndarray, logs: np.ndarray, kappa: float) -> float:
    """sum logs[i] * values[i]^(-kappa) with values > 0."""
    v = np.asarray(values, dtype=np.float64)
    l = np.asarray(logs, dtype=np.float64)
    if USE_NUMBA:
        return float(_weighted_lambda_sum_jit(v, l, float(kappa)))
    return _weighted_lambda_sum_np(v, l, float(kappa))
