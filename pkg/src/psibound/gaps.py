"""Primes between consecutive powers: the positivity condition pipeline.

For x = n^m the interval (x, x+h] with h = m x^(1-1/m) sits inside
(n^m, (n+1)^m).  Writing T = x^mu / 2, a prime exists in the interval
whenever

    1 - F(x) - 2 M G(x,h) / (x^mu h) + E(x)/h > 0

where F bounds the height-2T zero sum of x^(beta-1) (zetabounds module),
G(x,h) = (x+h)(log(x+h))^(1-omega) + x (log x)^(1-omega) is the two-point
error shape, and E(x) converts psi-positivity into theta-positivity.  The
default E is -(a1 (x+h)^(1/2) + a2 (x+h)^(1/3)): subtracting the maximal
prime-power contamination of the count leaves genuine primes.

Everything is evaluated from log x, so scans reach log x = 1e6 and beyond.
Results depend on the externally transcribed zero-count/zero-density
constants and are labeled as such by the CLI.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from typing import Sequence

from .arith import PsiThetaConstants
from .budget import log_t_ceiling, log_t_floor
from .errors import PreconditionError
from .zetabounds import ZetaBoundsConfig, nu_log, zero_sum_bound_log

LOG2 = math.log(2.0)

# M/omega schedule used by the shipped m=90 run: the prose constants of the
# source application (its companion table prints slightly smaller values;
# both are accepted via custom schedules)
DEFAULT_M_SCHEDULE = ((1000.0, 6.555, 0.9), (4000.0, 5.602, 0.9))


@dataclass(frozen=True)
class GapParams:
    m: int
    mu: float
    sigma1: float = 0.6
    m_const: float = 6.555
    omega: float = 0.9
    alpha: float = 1.0 / 85.0
    e_mode: str = "psi_theta"  # or "none" / "custom"
    m_schedule: tuple[tuple[float, float, float], ...] | None = None
    custom_e_over_h: float = 0.0
    psith: PsiThetaConstants = field(default_factory=PsiThetaConstants)

    def __post_init__(self) -> None:
        if self.m < 2:
            raise PreconditionError("m must be at least 2")
        if not 0.0 < self.mu < 1.0:
            raise PreconditionError("mu must lie in (0,1)")
        if self.e_mode not in ("psi_theta", "none", "custom"):
            raise PreconditionError(f"unknown e_mode {self.e_mode!r}")

    def m_omega_at(self, log_x: float) -> tuple[float, float]:
        if not self.m_schedule:
            return self.m_const, self.omega
        idx = bisect_right([row[0] for row in self.m_schedule], log_x) - 1
        if idx < 0:
            idx = 0
        _, m_const, omega = self.m_schedule[idx]
        return m_const, omega


@dataclass(frozen=True)
class ConditionReport:
    log_x: float
    lhs: float
    f_term: float
    error_term: float
    e_term: float
    admissible: bool
    violated: str = ""

    def reconstruct(self) -> float:
        return 1.0 - self.f_term - self.error_term + self.e_term


@dataclass(frozen=True)
class ScanResult:
    reports: tuple[ConditionReport, ...]
    min_lhs: float
    argmin_log_x: float
    crossovers_in_range: tuple[tuple[str, float], ...]

    @property
    def all_positive(self) -> bool:
        return self.min_lhs > 0.0


# ---------------------------------------------------------------------------
# single-point evaluation
# ---------------------------------------------------------------------------


def condition_lhs(
    log_x: float,
    p: GapParams,
    zcfg: ZetaBoundsConfig | None = None,
    strict: bool = True,
) -> ConditionReport:
    """Evaluate the positivity condition at x = exp(log_x).

    ``strict`` enforces the truncation-range precondition of the two-point
    bound; scans relax it and record admissibility instead, since the
    published low-x scan runs partly outside the certified range and leans
    on external verification there.
    """
    zcfg = zcfg or ZetaBoundsConfig()
    m_const, omega = p.m_omega_at(log_x)
    u = log_x
    log_T = p.mu * u - LOG2

    ok, why = _admissible(u, log_T, p.alpha)
    if strict and not ok:
        raise PreconditionError(f"T = x^mu/2 not admissible at log x = {u}: {why}")

    log_h = math.log(p.m) + (1.0 - 1.0 / p.m) * u
    # log(x+h) = u + log1p(h/x)
    h_over_x = math.exp(log_h - u)
    log_xh = u + math.log1p(h_over_x)

    f_term = zero_sum_bound_log(u, log_T, p.sigma1, zcfg)

    # 2 M G(x,h) / (x^mu h), G = (x+h) log(x+h)^(1-omega) + x log(x)^(1-omega)
    # for mu < 1/m the exponent grows with x; clamp to inf instead of raising
    def _exp(arg: float) -> float:
        return math.exp(arg) if arg < 700.0 else math.inf

    g1 = _exp(log_xh - p.mu * u - log_h) * (log_xh ** (1.0 - omega))
    g2 = _exp(u - p.mu * u - log_h) * (u ** (1.0 - omega))
    error_term = 2.0 * m_const * (g1 + g2)

    if p.e_mode == "psi_theta":
        e_term = -(
            p.psith.a1 * math.exp(0.5 * log_xh - log_h)
            + p.psith.a2 * math.exp(log_xh / 3.0 - log_h)
        )
    elif p.e_mode == "custom":
        e_term = p.custom_e_over_h
    else:
        e_term = 0.0

    lhs = 1.0 - f_term - error_term + e_term
    return ConditionReport(
        log_x=u,
        lhs=lhs,
        f_term=f_term,
        error_term=error_term,
        e_term=e_term,
        admissible=ok,
        violated="" if ok else why,
    )


def _admissible(u: float, log_T: float, alpha: float) -> tuple[bool, str]:
    lo = log_t_floor(u)
    hi = log_t_ceiling(u, alpha)
    if not log_T > lo:
        return False, f"log T = {log_T:.4g} <= floor {lo:.4g} (max(51, log^2 x))"
    if not log_T < hi:
        return False, f"log T = {log_T:.4g} >= ceiling {hi:.4g} ((x^alpha - 2)/4)"
    return True, ""


# ---------------------------------------------------------------------------
# scans and optimization
# ---------------------------------------------------------------------------


def scan_condition(
    p: GapParams,
    log_x_range: tuple[float, float],
    step: float,
    zcfg: ZetaBoundsConfig | None = None,
    log_spaced: bool = False,
    points: int | None = None,
) -> ScanResult:
    """Grid evaluation of the condition over a log_x range.

    Linear grid with ``step`` by default; ``log_spaced`` with ``points``
    switches to a geometric grid (for ranges spanning decades).  Zero-free
    crossover heights falling inside the range are marked.
    """
    zcfg = zcfg or ZetaBoundsConfig()
    lo, hi = log_x_range
    if hi < lo:
        raise PreconditionError("empty scan range")
    if log_spaced:
        npts = points or 64
        if lo <= 0:
            raise PreconditionError("log-spaced scan needs positive endpoints")
        grid = [lo * (hi / lo) ** (i / max(npts - 1, 1)) for i in range(npts)]
    elif hi == lo:
        grid = [lo]
    else:
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        grid = [lo + i * step for i in range(n)]
        if grid[-1] < hi - 1e-9:
            grid.append(hi)
    # pin the zero-free regime switches: the condition's minimum tends to
    # sit at them, so the grid must not straddle one
    for _, log_x in _crossovers_in(lo, hi, p.mu, zcfg):
        grid.extend([log_x * (1 - 1e-9), log_x * (1 + 1e-9)])
    grid = sorted(set(grid))

    reports = tuple(condition_lhs(u, p, zcfg, strict=False) for u in grid)
    min_idx = min(range(len(reports)), key=lambda i: reports[i].lhs)
    crossings = _crossovers_in(lo, hi, p.mu, zcfg)
    return ScanResult(
        reports=reports,
        min_lhs=reports[min_idx].lhs,
        argmin_log_x=reports[min_idx].log_x,
        crossovers_in_range=crossings,
    )


# log-t locations of the zero-free regime switches; the RH verification
# ceiling is where nu drops from 1/2
_REGIME_SWITCHES = (
    ("rh-ceiling", math.log(3.0e12)),
    ("classical-to-ford", 46.2044),
    ("ford-to-loglog", 170.2633),
    ("loglog-to-vk", 482036.2),
)


def _crossovers_in(
    lo: float, hi: float, mu: float, zcfg: ZetaBoundsConfig
) -> tuple[tuple[str, float], ...]:
    out = []
    for name, log_t in _REGIME_SWITCHES:
        log_x = (log_t + LOG2) / mu  # where log(2T) = mu log x reaches log_t
        if lo <= log_x <= hi:
            out.append((name, log_x))
    return tuple(out)


def optimize_mu(
    p: GapParams,
    log_x_range: tuple[float, float],
    mu_bracket: tuple[float, float],
    zcfg: ZetaBoundsConfig | None = None,
    step: float | None = None,
    coarse: int = 17,
    tol: float = 1e-4,
    log_spaced: bool = False,
    points: int | None = None,
) -> tuple[float, float]:
    """Maximize the scan's minimum lhs over mu (golden-section after a
    coarse scan; falls back to the coarse grid winner when the profile is
    not unimodal).  Returns (mu_star, min_lhs at mu_star)."""
    lo_mu, hi_mu = mu_bracket
    if not 0.0 < lo_mu <= hi_mu < 1.0:
        raise PreconditionError("mu bracket must sit inside (0,1)")
    zcfg = zcfg or ZetaBoundsConfig()
    span = log_x_range[1] - log_x_range[0]
    scan_step = step if step is not None else max(span / 60.0, 1e-9)

    def min_lhs(mu: float) -> float:
        q = replace(p, mu=mu)
        return scan_condition(
            q, log_x_range, scan_step, zcfg, log_spaced=log_spaced, points=points
        ).min_lhs

    if hi_mu == lo_mu:
        return lo_mu, min_lhs(lo_mu)
    grid = [lo_mu + (hi_mu - lo_mu) * i / (coarse - 1) for i in range(coarse)]
    vals = [min_lhs(m) for m in grid]
    i_best = max(range(coarse), key=vals.__getitem__)
    a = grid[max(i_best - 1, 0)]
    b = grid[min(i_best + 1, coarse - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = min_lhs(c), min_lhs(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = min_lhs(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = min_lhs(d)
    mu_star = 0.5 * (a + b)
    best = min_lhs(mu_star)
    if vals[i_best] > best:
        return grid[i_best], vals[i_best]
    return mu_star, best


@dataclass(frozen=True)
class SmallestMProtocol:
    """Two-stage feasibility mirroring the published m=90 run: a dense
    low-range scan under the first schedule piece, then a log-spaced sweep
    that crosses the last zero-free regime switch."""

    low_range: tuple[float, float] = (1000.0, 4000.0)
    low_step: float = 50.0
    low_mu_bracket: tuple[float, float] = (0.0105, 0.0117)
    high_range: tuple[float, float] = (4000.0, 1.0e8)
    high_points: int = 48
    high_mu_bracket: tuple[float, float] = (0.0105, 0.0117)


def feasible_m(
    m: int,
    protocol: SmallestMProtocol,
    base: GapParams | None = None,
    zcfg: ZetaBoundsConfig | None = None,
) -> bool:
    p = base or GapParams(m=m, mu=0.0113, m_schedule=DEFAULT_M_SCHEDULE)
    p = replace(p, m=m)
    _, low_best = optimize_mu(
        p, protocol.low_range, protocol.low_mu_bracket, zcfg, step=protocol.low_step
    )
    if not low_best > 0.0:
        return False
    _, high_best = optimize_mu(
        p,
        protocol.high_range,
        protocol.high_mu_bracket,
        zcfg,
        log_spaced=True,
        points=protocol.high_points,
    )
    return high_best > 0.0


def smallest_m(
    m_range: tuple[int, int],
    protocol: SmallestMProtocol | None = None,
    base: GapParams | None = None,
    zcfg: ZetaBoundsConfig | None = None,
) -> int | None:
    """Binary search for the least feasible exponent (None if none in range).

    Feasibility is monotone in m: growing m widens the target interval
    h = m x^(1-1/m) while the error terms shrink.
    """
    protocol = protocol or SmallestMProtocol()
    lo, hi = m_range
    if lo > hi:
        raise PreconditionError("empty m range")
    if not feasible_m(hi, protocol, base, zcfg):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible_m(mid, protocol, base, zcfg):
            hi = mid
        else:
            lo = mid + 1
    return hi
