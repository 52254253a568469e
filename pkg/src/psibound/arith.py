"""Exact prime-power arithmetic at desk scale plus auxiliary explicit bounds.

``ChebyshevTable`` holds a segmented sieve up to a limit: a packed
prime-flag bitmask, the higher prime powers p^j (j >= 2) with their base
primes, and cumulative psi/theta checkpoints every ``stride`` integers.
Point queries unpack one local bit window, so they cost O(stride) numpy
work after an O(1) checkpoint lookup.

The module also hosts the scalar bound helpers used by the error budget:
the interval-stretch constant c0(lambda), the Brun-Titchmarsh interval
factors, the psi-theta gap bound, and the Dirichlet-series tail bound
sum Lambda(n) n^(-kappa) <= 1/(kappa-1).
"""

from __future__ import annotations

import binascii
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DataFormatError, PreconditionError

DEFAULT_STRIDE = 1 << 16
DEFAULT_SEGMENT = 1 << 20
MEMORY_CEILING = 1 << 34

A1_DEFAULT = 1 + 1.93378e-8
A2_DEFAULT = 1.0432
VALID_FROM_DEFAULT = math.exp(40.0)


@dataclass(frozen=True)
class PsiThetaConstants:
    a1: float = A1_DEFAULT
    a2: float = A2_DEFAULT
    valid_from: float = VALID_FROM_DEFAULT

    def __post_init__(self) -> None:
        if not (self.a1 > 1.0 and self.a2 > 1.0):
            raise PreconditionError("a1 and a2 must exceed 1")


# ---------------------------------------------------------------------------
# sieve
# ---------------------------------------------------------------------------


def _simple_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


@dataclass
class ChebyshevTable:
    limit: int
    stride: int
    prime_bits: np.ndarray  # packed bitmask, bit n set iff n prime, n <= limit
    power_values: np.ndarray  # sorted p^j (j >= 2) <= limit
    power_bases: np.ndarray  # matching base primes
    psi_ck: np.ndarray  # psi(k*stride) for k = 0..ceil(limit/stride)
    theta_ck: np.ndarray
    _primes_cache: np.ndarray | None = field(default=None, repr=False)

    # -- queries -------------------------------------------------------------

    def _primes_in(self, lo: int, hi: int) -> np.ndarray:
        """Primes in [lo, hi] via one bitmask window unpack."""
        if hi < lo or hi < 2:
            return np.empty(0, dtype=np.int64)
        lo = max(lo, 0)
        byte_lo, byte_hi = lo // 8, hi // 8 + 1
        window = np.unpackbits(self.prime_bits[byte_lo:byte_hi], bitorder="little")
        idx = np.flatnonzero(window) + byte_lo * 8
        return idx[(idx >= lo) & (idx <= hi)].astype(np.int64)

    def psi(self, x: float) -> float:
        """Chebyshev psi: sum of log p over prime powers p^j <= x."""
        n = min(int(math.floor(x)), self.limit)
        if x > self.limit:
            raise PreconditionError(f"psi({x}) beyond sieve limit {self.limit}")
        if n < 2:
            return 0.0
        ck = n // self.stride
        total = float(self.psi_ck[ck])
        lo = ck * self.stride + 1
        primes = self._primes_in(lo, n)
        if primes.size:
            total += float(np.sum(np.log(primes.astype(np.float64))))
        i0 = np.searchsorted(self.power_values, lo, side="left")
        i1 = np.searchsorted(self.power_values, n, side="right")
        if i1 > i0:
            total += float(
                np.sum(np.log(self.power_bases[i0:i1].astype(np.float64)))
            )
        return total

    def theta(self, x: float) -> float:
        """Chebyshev theta: sum of log p over primes p <= x."""
        n = min(int(math.floor(x)), self.limit)
        if x > self.limit:
            raise PreconditionError(f"theta({x}) beyond sieve limit {self.limit}")
        if n < 2:
            return 0.0
        ck = n // self.stride
        total = float(self.theta_ck[ck])
        primes = self._primes_in(ck * self.stride + 1, n)
        if primes.size:
            total += float(np.sum(np.log(primes.astype(np.float64))))
        return total

    def lambda_mass(self, lo: float, hi: float) -> float:
        """sum of Lambda(n) over lo <= n <= hi (exact, from the table)."""
        a = max(int(math.ceil(lo)), 1)
        b = int(math.floor(hi))
        if b < a:
            return 0.0
        return self.psi(b) - (self.psi(a - 1) if a > 1 else 0.0)

    def primes(self) -> np.ndarray:
        if self._primes_cache is None:
            self._primes_cache = self._primes_in(2, self.limit)
        return self._primes_cache

    def lambda_support(self) -> tuple[np.ndarray, np.ndarray]:
        """(n, Lambda(n)) for every n <= limit with Lambda(n) > 0."""
        primes = self.primes()
        values = np.concatenate([primes, self.power_values])
        logs = np.concatenate(
            [np.log(primes.astype(np.float64)), np.log(self.power_bases.astype(np.float64))]
        )
        order = np.argsort(values, kind="stable")
        return values[order], logs[order]


def sieve(
    limit: int,
    stride: int = DEFAULT_STRIDE,
    segment: int = DEFAULT_SEGMENT,
    memory_ceiling: int = MEMORY_CEILING,
) -> ChebyshevTable:
    """Build the exact table for 1..limit with a segmented sieve."""
    if limit < 1:
        raise PreconditionError("sieve limit must be >= 1")
    if limit > memory_ceiling:
        raise PreconditionError(
            f"sieve limit {limit} exceeds the memory ceiling {memory_ceiling}"
        )
    base = _simple_primes(math.isqrt(limit))
    nbits = limit + 1
    prime_bits = np.zeros((nbits + 7) // 8, dtype=np.uint8)

    n_ck = limit // stride + 1
    psi_ck = np.zeros(n_ck, dtype=np.float64)
    theta_ck = np.zeros(n_ck, dtype=np.float64)

    # higher prime powers
    pv, pb = [], []
    for p in base:
        q = int(p) * int(p)
        while q <= limit:
            pv.append(q)
            pb.append(int(p))
            q *= int(p)
    power_values = np.array(sorted(zip(pv, pb)), dtype=np.int64).reshape(-1, 2)
    if power_values.size:
        pow_vals = power_values[:, 0].copy()
        pow_bases = power_values[:, 1].copy()
    else:
        pow_vals = np.empty(0, dtype=np.int64)
        pow_bases = np.empty(0, dtype=np.int64)
    pow_logs = np.log(pow_bases.astype(np.float64)) if pow_bases.size else pow_bases.astype(np.float64)

    psi_run = 0.0
    theta_run = 0.0
    ck_next = 1
    low = 2
    while low <= limit:
        high = min(low + segment - 1, limit)
        flags = np.ones(high - low + 1, dtype=bool)
        if low <= 1:
            flags[: 2 - low] = False
        kernels.mark_segment(flags, base, low)
        # a base prime inside the window is not composite
        for p in base:
            if low <= p <= high:
                flags[p - low] = True
        idx = np.flatnonzero(flags)
        seg_primes = idx + low
        # pack into the global bitmask
        bit_positions = seg_primes
        np.bitwise_or.at(
            prime_bits, bit_positions // 8, (1 << (bit_positions % 8)).astype(np.uint8)
        )
        seg_logs = np.log(seg_primes.astype(np.float64))
        # cumulative checkpoints crossed by this segment
        seg_cum = np.cumsum(seg_logs)
        while ck_next * stride <= high:
            boundary = ck_next * stride
            cnt = np.searchsorted(seg_primes, boundary, side="right")
            theta_val = theta_run + (seg_cum[cnt - 1] if cnt else 0.0)
            i1 = np.searchsorted(pow_vals, boundary, side="right")
            i0 = np.searchsorted(pow_vals, low, side="left")
            pw = float(np.sum(pow_logs[i0:i1])) if i1 > i0 else 0.0
            psi_val = psi_run + (seg_cum[cnt - 1] if cnt else 0.0) + pw
            theta_ck[ck_next] = theta_val
            psi_ck[ck_next] = psi_val
            ck_next += 1
        seg_total = float(seg_cum[-1]) if seg_cum.size else 0.0
        theta_run += seg_total
        i0 = np.searchsorted(pow_vals, low, side="left")
        i1 = np.searchsorted(pow_vals, high, side="right")
        psi_run += seg_total + (float(np.sum(pow_logs[i0:i1])) if i1 > i0 else 0.0)
        low = high + 1

    return ChebyshevTable(
        limit=limit,
        stride=stride,
        prime_bits=prime_bits,
        power_values=pow_vals,
        power_bases=pow_bases,
        psi_ck=psi_ck,
        theta_ck=theta_ck,
    )


# ---------------------------------------------------------------------------
# versioned binary cache
# ---------------------------------------------------------------------------

_MAGIC = b"PSIBSIEV"
_VERSION = 1


def save_table(table: ChebyshevTable, path: str) -> None:
    parts = [
        table.prime_bits.tobytes(),
        table.power_values.tobytes(),
        table.power_bases.tobytes(),
        table.psi_ck.tobytes(),
        table.theta_ck.tobytes(),
    ]
    payload = b"".join(parts)
    crc = binascii.crc32(payload)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(
            struct.pack(
                "<IQQQQI",
                _VERSION,
                table.limit,
                table.stride,
                table.power_values.size,
                table.psi_ck.size,
                crc,
            )
        )
        for part in parts:
            fh.write(part)


def load_table(path: str) -> ChebyshevTable:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise DataFormatError(f"{path}: not a sieve cache (bad magic)")
        version, limit, stride, npow, nck, crc = struct.unpack("<IQQQQI", fh.read(40))
        if version != _VERSION:
            raise DataFormatError(f"{path}: unsupported cache version {version}")
        payload = fh.read()
    if binascii.crc32(payload) != crc:
        raise DataFormatError(f"{path}: checksum mismatch")
    nbytes_bits = (limit + 1 + 7) // 8
    off = 0
    prime_bits = np.frombuffer(payload[off : off + nbytes_bits], dtype=np.uint8).copy()
    off += nbytes_bits
    power_values = np.frombuffer(payload[off : off + 8 * npow], dtype=np.int64).copy()
    off += 8 * npow
    power_bases = np.frombuffer(payload[off : off + 8 * npow], dtype=np.int64).copy()
    off += 8 * npow
    psi_ck = np.frombuffer(payload[off : off + 8 * nck], dtype=np.float64).copy()
    off += 8 * nck
    theta_ck = np.frombuffer(payload[off : off + 8 * nck], dtype=np.float64).copy()
    return ChebyshevTable(
        limit=int(limit),
        stride=int(stride),
        prime_bits=prime_bits,
        power_values=power_values,
        power_bases=power_bases,
        psi_ck=psi_ck,
        theta_ck=theta_ck,
    )


# ---------------------------------------------------------------------------
# scalar bound helpers
# ---------------------------------------------------------------------------

C0_SERIES_SWITCH = 1e-6


def c0(lam: float) -> float:
    """Interval-stretch constant (e^lambda - 1)/lambda + 1.

    Below 1e-6 the ratio is evaluated by its Taylor series to dodge the
    0/0 cancellation; the two branches agree to 1e-12 at the switch.
    """
    if not lam > 0.0:
        raise PreconditionError("lambda must be positive")
    if lam < C0_SERIES_SWITCH:
        ratio = 1.0 + lam / 2.0 + lam * lam / 6.0 + lam**3 / 24.0
    else:
        ratio = math.expm1(lam) / lam
    return ratio + 1.0


def bt_interval_bound(
    x: float,
    T: float,
    lam: float,
    theta_prime: float,
    c: PsiThetaConstants = PsiThetaConstants(),
) -> tuple[float, float]:
    """The two interval factors (E1, E2) of the Brun-Titchmarsh mass bound.

    E1(x,T) = 2 log(x + (c0-1) lambda x) / log(c0 theta' x / T)
    E2(x)   = a1 (x + (c0-1) lambda x)^(1/2) + a2 (...)^(1/3) + log x
    """
    cc = c0(lam)
    x_plus = x + (cc - 1.0) * lam * x
    denom = math.log(cc * theta_prime * x / T)
    if denom <= 0.0:
        raise PreconditionError(
            f"c0*theta'*x/T must exceed 1 (got log = {denom:.3g})"
        )
    e1 = 2.0 * math.log(x_plus) / denom
    e2 = c.a1 * x_plus**0.5 + c.a2 * x_plus ** (1.0 / 3.0) + math.log(x)
    return e1, e2


def mass_upper(x: float, u: float, e1: float, e2: float, lam: float) -> float:
    """Certified upper bound c0*u*x*E1 + E2 for the Lambda mass of
    [x - u x, x + (c0-1) u x]; valid only for 0 <= u <= lambda."""
    if not 0.0 <= u <= lam:
        raise PreconditionError(f"u={u} outside [0, lambda={lam}]")
    return c0(lam) * u * x * e1 + e2


def psi_theta_gap(x: float, c: PsiThetaConstants = PsiThetaConstants()) -> float:
    """Upper bound a1*sqrt(x) + a2*x^(1/3) for psi(x) - theta(x), x >= e^40."""
    if x < c.valid_from:
        raise PreconditionError(
            f"psi-theta bound certified only for x >= {c.valid_from:.6g}"
        )
    return c.a1 * math.sqrt(x) + c.a2 * x ** (1.0 / 3.0)


def delange_bound(kappa: float) -> float:
    """Upper bound 1/(kappa-1) for sum_n Lambda(n) n^(-kappa), kappa > 1."""
    if not kappa > 1.0:
        raise PreconditionError("kappa must exceed 1")
    return 1.0 / (kappa - 1.0)
