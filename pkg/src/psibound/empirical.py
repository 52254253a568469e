"""Desk-scale empirical cross-checks against real zeta-zero data.

These routines exercise the *classical* truncated explicit formula at
heights where zero ordinates are available.  They are sanity checks of the
machinery, not tests of the certified constants: the certified regime
starts at x >= e^40, far beyond desk scale, and every report produced here
carries that label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from . import kernels
from .arith import ChebyshevTable
from .errors import DataFormatError, PreconditionError
from .primality import is_prime

RH_VERIFICATION_HEIGHT = 3.0e12
DESK_SCALE_LABEL = (
    "desk-scale sanity check of the classical truncated formula; "
    "not a test of the certified large-x constants"
)

# beyond this phase magnitude, float64 argument reduction loses the angle
PHASE_SAFE_LIMIT = 2.0**53


@dataclass(frozen=True)
class ZerosDataset:
    gammas: np.ndarray  # ascending positive ordinates
    height: float

    def __len__(self) -> int:
        return int(self.gammas.size)


@dataclass(frozen=True)
class PowerIntervalWitness:
    n: int
    m: int
    p: int
    offset: int
    policy: str

    def verify(self) -> bool:
        """Exact big-integer re-check of the containment and primality."""
        lo = self.n**self.m
        hi = (self.n + 1) ** self.m
        if not (lo < self.p < hi):
            return False
        if self.p != lo + self.offset:
            return False
        ok, _ = is_prime(self.p)
        return ok


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def load_zeros(stream: IO[str] | Iterable[str]) -> ZerosDataset:
    """Parse one positive ordinate per line, ascending; reject junk early."""
    gammas = []
    last = 0.0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            g = float(line)
        except ValueError as exc:
            raise DataFormatError(f"line {lineno}: not a number: {line!r}") from exc
        if not g > 0.0:
            raise DataFormatError(f"line {lineno}: ordinates must be positive")
        if g <= last:
            raise DataFormatError(
                f"line {lineno}: ordering violation ({g} after {last})"
            )
        if g > RH_VERIFICATION_HEIGHT:
            raise DataFormatError(
                f"line {lineno}: ordinate {g} above the verification height; "
                "the critical-line assumption only covers verified heights"
            )
        gammas.append(g)
        last = g
    arr = np.asarray(gammas, dtype=np.float64)
    return ZerosDataset(gammas=arr, height=float(arr[-1]) if arr.size else 0.0)


def load_zeros_path(path: str) -> ZerosDataset:
    with open(path, "r", encoding="utf-8") as fh:
        return load_zeros(fh)


# ---------------------------------------------------------------------------
# truncated zero sum
# ---------------------------------------------------------------------------


def _reduced_terms(gammas: np.ndarray, log_x: float) -> np.ndarray:
    if gammas.size and float(gammas[-1]) * abs(log_x) > PHASE_SAFE_LIMIT:
        # extended-precision phase reduction, one ordinate at a time
        import mpmath as mp

        out = np.empty(gammas.size)
        two_pi = mp.mpf(2) * mp.pi
        for i, g in enumerate(gammas):
            phase = float(mp.fmod(mp.mpf(g) * mp.mpf(log_x), two_pi))
            out[i] = (0.5 * math.cos(phase) + g * math.sin(phase)) / (0.25 + g * g)
        return out
    return kernels.zero_sum_terms(gammas, log_x)


def zero_sum(
    x: float, T: float, ds: ZerosDataset, allow_truncation: bool = False
) -> float:
    """2 * sum over 0 < gamma <= T of Re(x^(1/2+i gamma) / (1/2+i gamma)).

    Conjugate ordinates are paired analytically, so the result is real by
    construction; the critical line is assumed for every data point, which
    ingestion guarantees below the verification height.
    """
    if not x > 1.0:
        raise PreconditionError("zero_sum needs x > 1")
    if T > ds.height and not allow_truncation:
        raise PreconditionError(
            f"T={T} above data height {ds.height}; pass allow_truncation to accept"
        )
    cut = int(np.searchsorted(ds.gammas, T, side="right"))
    if cut == 0:
        return 0.0
    log_x = math.log(x)
    terms = _reduced_terms(ds.gammas[:cut], log_x)
    return 2.0 * math.sqrt(x) * float(np.sum(terms))


def zero_sum_complex_reference(x: float, T: float, ds: ZerosDataset) -> float:
    """Naive complex-arithmetic evaluation (independent cross-check path)."""
    cut = int(np.searchsorted(ds.gammas, T, side="right"))
    total = 0.0 + 0.0j
    for g in ds.gammas[:cut]:
        rho = complex(0.5, float(g))
        total += x**rho / rho + x**rho.conjugate() / rho.conjugate()
    return total.real


# ---------------------------------------------------------------------------
# residual scan over truncation heights
# ---------------------------------------------------------------------------


def residual_scan(
    x: float,
    T: float,
    ds: ZerosDataset,
    table: ChebyshevTable,
    steps: int = 256,
    refine_rounds: int = 2,
):
    """Scan |psi(x) - x + S(x, T*)| over T* in [T, 2T].

    Returns (best_T*, best_residual, profile) where profile is the list of
    (T*, residual) pairs from the initial grid.  The grid minimum is
    refined locally a couple of rounds.  Desk-scale diagnostic only.
    """
    if x > table.limit:
        raise PreconditionError("x beyond sieve limit")
    if 2.0 * T > ds.height:
        raise PreconditionError(
            f"window [T, 2T] = [{T}, {2*T}] exceeds data height {ds.height}"
        )
    psi_minus_x = table.psi(x) - x
    sqrt_x = math.sqrt(x)
    log_x = math.log(x)

    def profile_on(grid: np.ndarray) -> np.ndarray:
        return kernels.residual_profile(ds.gammas, log_x, psi_minus_x, sqrt_x, grid)

    grid = np.linspace(T, 2.0 * T, steps)
    res = profile_on(grid)
    best_idx = int(np.argmin(res))
    best_t, best_r = float(grid[best_idx]), float(res[best_idx])
    lo = grid[max(best_idx - 1, 0)]
    hi = grid[min(best_idx + 1, len(grid) - 1)]
    for _ in range(refine_rounds):
        sub = np.linspace(lo, hi, steps)
        sub_res = profile_on(sub)
        i = int(np.argmin(sub_res))
        if sub_res[i] < best_r:
            best_t, best_r = float(sub[i]), float(sub_res[i])
        lo = sub[max(i - 1, 0)]
        hi = sub[min(i + 1, len(sub) - 1)]
    return best_t, best_r, list(zip(grid.tolist(), res.tolist()))


# ---------------------------------------------------------------------------
# primes between consecutive powers, empirically
# ---------------------------------------------------------------------------

_WHEEL_PRIMES_LIMIT = 50_000


def _wheel_primes() -> np.ndarray:
    from .arith import _simple_primes

    return _simple_primes(_WHEEL_PRIMES_LIMIT)


_WHEEL_CACHE: np.ndarray | None = None


def find_prime_in_power_interval(n: int, m: int) -> PowerIntervalWitness:
    """First certified prime above n^m, checked to lie below (n+1)^m.

    Candidates are pre-filtered by a wheel of small primes (one big-int
    remainder per wheel prime per window), then certified by the primality
    battery.  The search window grows geometrically; exhausting the whole
    interval raises, though that cannot happen at the sizes this tool
    handles.
    """
    global _WHEEL_CACHE
    if n < 1 or m < 2:
        raise PreconditionError("need n >= 1 and m >= 2")
    lo = n**m
    hi = (n + 1) ** m
    if lo < 2 < hi:
        return PowerIntervalWitness(n=n, m=m, p=2, offset=2 - lo, policy="trivial")
    if _WHEEL_CACHE is None:
        _WHEEL_CACHE = _wheel_primes()
    wheel = _WHEEL_CACHE
    window = max(8 * m * max(int(math.log(max(n, 2))), 1), 512)
    start = lo + 1
    while start < hi:
        stop = min(start + window, hi)
        size = int(stop - start)
        flags = np.ones(size, dtype=bool)
        for p in wheel:
            p = int(p)
            first = (-start) % p
            if start + first == p:  # the wheel prime itself
                first += p
            flags[first::p] = False
        for off in np.flatnonzero(flags):
            cand = start + int(off)
            ok, policy = is_prime(cand)
            if ok:
                return PowerIntervalWitness(
                    n=n, m=m, p=cand, offset=cand - lo, policy=policy
                )
        start = stop
        window *= 2
    raise PreconditionError(f"interval ({n}^{m}, {n+1}^{m}) exhausted")
