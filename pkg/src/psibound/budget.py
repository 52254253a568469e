"""Assembly of the explicit-formula error budget and its certified supremum.

The pointwise budget at admissible (x, T) is a sum of four terms

    k_term       K * x * (log x)^(1-omega) / T
    delange_term 1.785 * e * x * log x / (2 lambda^2 T^2)
    bt_term      1.785 * e^(kappa lambda) * c0 * x * E1(x,T) / (theta' T)
    sqrt_term    1.785 * e^(kappa lambda) * E2(x) / (2 theta'^2)

with kappa = 1 + 1/log x.  The headline constant M is a certified upper
bound for the supremum of  budget * T / (x (log x)^(1-omega))  over all
x >= x_M and max{51, log^2 x} < T < (x^alpha - 2)/4.

Supremum strategy, per term (u = log x):

* k_term is exactly K under the normalization.
* the Delange term is maximized at the T floor max{51, u^2} and decreases
  in u, so its supremum sits at u = u_M.
* the Brun-Titchmarsh term grows with T; bounding T < x^alpha gives the
  monotone envelope  E1 < 2(u+lambda) / ((1-alpha) u + log(c0 theta')),
  whose normalized form has a rational-quadratic derivative — candidate
  maxima are u_M, the quadratic's roots, and (for omega = 1) the u -> inf
  limit.
* the sqrt term also grows with T; under the same T < x^alpha envelope
  each of its three pieces decays in u, so u_M dominates.

The T < x^alpha relaxation (instead of the exact ceiling (x^alpha - 2)/4)
only enlarges the bound, keeping it certified, and reproduces the shipped
reference M values to within one percent.

All x-dependence is carried in log space so configurations with
log x_M up to 1e13 evaluate without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable

from .arith import PsiThetaConstants, c0
from .enclosure import Enclosure
from .errors import ConfigError, PreconditionError

R_COEFF = 1.785
LOG_51 = math.log(51.0)


# ---------------------------------------------------------------------------
# configuration tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KRow:
    log_xk: float
    alpha: float
    omega: float
    k_const: float
    omega_bar: float | None = None
    d_param: float | None = None


@dataclass(frozen=True)
class KTable:
    rows: tuple[KRow, ...]

    def __post_init__(self) -> None:
        seen = set()
        for r in self.rows:
            key = (r.log_xk, r.alpha, r.omega)
            if key in seen:
                raise ConfigError(f"duplicate K row for {key}")
            if not r.k_const > 0:
                raise ConfigError("K must be positive")
            seen.add(key)

    def lookup(self, log_x: float, alpha: float, omega: float) -> KRow:
        for r in self.rows:
            if (
                math.isclose(r.log_xk, log_x, rel_tol=1e-9)
                and math.isclose(r.alpha, alpha, rel_tol=1e-9)
                and math.isclose(r.omega, omega, rel_tol=1e-9, abs_tol=1e-12)
            ):
                return r
        raise ConfigError(f"no K row for (log_x={log_x}, alpha={alpha}, omega={omega})")


@dataclass(frozen=True)
class MSpec:
    log_xm: float
    alpha: float
    omega: float
    lam: float
    k_const: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 0.5:
            raise PreconditionError("alpha must lie in (0, 1/2]")
        if not 0.0 <= self.omega <= 1.0:
            raise PreconditionError("omega must lie in [0, 1]")
        if not self.lam > 0.0:
            raise PreconditionError("lambda must be positive")
        if not self.log_xm >= 40.0:
            raise PreconditionError("log x_M must be at least 40")


@dataclass(frozen=True)
class ErrorBudget:
    k_term: float
    delange_term: float
    bt_term: float
    sqrt_term: float

    @property
    def total(self) -> float:
        return self.k_term + self.delange_term + self.bt_term + self.sqrt_term


@dataclass(frozen=True)
class SupStrategy:
    mode: str = "analytic"  # or "grid"
    grid_decades: int = 6
    grid_points: int = 4000
    t_points: int = 64


@dataclass(frozen=True)
class SupResult:
    m_upper: float
    k_term: float
    delange_term: float
    bt_term: float
    sqrt_term: float
    certified: str  # "analytic" or "grid+lipschitz"

    @property
    def terms(self) -> ErrorBudget:
        return ErrorBudget(self.k_term, self.delange_term, self.bt_term, self.sqrt_term)


# ---------------------------------------------------------------------------
# admissible T range (log space)
# ---------------------------------------------------------------------------


def log_t_floor(u: float) -> float:
    return max(LOG_51, 2.0 * math.log(u))


def log_t_ceiling(u: float, alpha: float) -> float:
    """log of (x^alpha - 2)/4; requires x^alpha > 2."""
    au = alpha * u
    if au <= math.log(2.0):
        return -math.inf
    return au + math.log1p(-2.0 * math.exp(-au)) - math.log(4.0)


def t_range_admissible(u: float, log_T: float, alpha: float) -> tuple[bool, str]:
    lo = log_t_floor(u)
    hi = log_t_ceiling(u, alpha)
    if not log_T > lo:
        return False, f"T below the floor max(51, log^2 x) (log T = {log_T:.6g} <= {lo:.6g})"
    if not log_T < hi:
        return False, f"T above the ceiling (x^alpha - 2)/4 (log T = {log_T:.6g} >= {hi:.6g})"
    return True, ""


# ---------------------------------------------------------------------------
# pointwise budget
# ---------------------------------------------------------------------------


def normalized_budget_log(
    u: float,
    log_T: float,
    spec: MSpec,
    theta_prime: float,
    psith: PsiThetaConstants = PsiThetaConstants(),
    check_range: bool = True,
) -> ErrorBudget:
    """The four budget terms already multiplied by T/(x (log x)^(1-omega)).

    Operates on u = log x and log T so astronomically large configurations
    stay inside float range.
    """
    if u < spec.log_xm:
        raise PreconditionError(f"x below x_M (log x = {u} < {spec.log_xm})")
    if check_range:
        ok, why = t_range_admissible(u, log_T, spec.alpha)
        if not ok:
            raise PreconditionError(why)
    lam = spec.lam
    kappa = 1.0 + 1.0 / u
    cc = c0(lam)
    e_kl = math.exp(kappa * lam)

    k_n = spec.k_const
    delange_n = math.exp(
        math.log(R_COEFF * math.e / (2.0 * lam * lam)) + spec.omega * math.log(u) - log_T
    )
    # E1 = 2 log(x e^lambda) / log(c0 theta' x / T)
    denom = math.log(cc * theta_prime) + u - log_T
    if denom <= 0.0:
        raise PreconditionError("c0 theta' x / T must exceed 1")
    e1 = 2.0 * (u + lam) / denom
    bt_n = R_COEFF * e_kl * cc * e1 / (theta_prime * u ** (1.0 - spec.omega))
    # sqrt term: 1.785 e^(kappa lambda) E2(x) T / (2 theta'^2 x u^(1-omega))
    piece1 = psith.a1 * math.exp(lam / 2.0 + log_T - u / 2.0)
    piece2 = psith.a2 * math.exp(lam / 3.0 + log_T - 2.0 * u / 3.0)
    piece3 = u * math.exp(log_T - u)
    sqrt_n = (
        R_COEFF
        * e_kl
        * (piece1 + piece2 + piece3)
        / (2.0 * theta_prime * theta_prime * u ** (1.0 - spec.omega))
    )
    return ErrorBudget(k_n, delange_n, bt_n, sqrt_n)


def error_budget(
    x: float,
    T: float,
    spec: MSpec,
    theta_prime: float,
    psith: PsiThetaConstants = PsiThetaConstants(),
) -> ErrorBudget:
    """The un-normalized budget at a float-representable (x, T)."""
    u = math.log(x)
    norm = normalized_budget_log(u, math.log(T), spec, theta_prime, psith)
    scale = x * u ** (1.0 - spec.omega) / T
    return ErrorBudget(
        norm.k_term * scale,
        norm.delange_term * scale,
        norm.bt_term * scale,
        norm.sqrt_term * scale,
    )


# ---------------------------------------------------------------------------
# certified supremum
# ---------------------------------------------------------------------------


def _enc(x: float) -> Enclosure:
    return Enclosure.point(x)


def _delange_sup(spec: MSpec) -> float:
    """sup over u >= u_M of the Delange term at its T floor, upper-rounded."""
    lam, omega, u_m = spec.lam, spec.omega, spec.log_xm
    pref = R_COEFF * _enc(math.e) / (2.0 * _enc(lam) * _enc(lam))
    sqrt51 = math.sqrt(51.0)
    if u_m >= sqrt51:
        val = pref * _enc(u_m ** (omega - 2.0))
    else:  # floor is the constant 51 until u = sqrt(51); peak at the switch
        val = pref * _enc(51.0 ** (omega / 2.0 - 1.0))
    return val.hi


def _bt_envelope_value(u: float, spec: MSpec, theta_lo: float, pref: Enclosure, b0: float) -> float:
    num = _enc(u + spec.lam)
    den = _enc((1.0 - spec.alpha) * u + b0) * _enc(u ** (1.0 - spec.omega))
    return (pref * num / den).hi


def _bt_sup(spec: MSpec, theta_lo: float) -> float:
    """sup of the normalized Brun-Titchmarsh term via the T < x^alpha envelope."""
    lam, alpha, omega, u_m = spec.lam, spec.alpha, spec.omega, spec.log_xm
    cc = c0(lam)
    kappa_m = 1.0 + 1.0 / u_m
    pref = (
        R_COEFF
        * _enc(kappa_m * lam).exp()
        * _enc(cc)
        * 2.0
        / _enc(theta_lo)
    )
    b0 = math.log(cc * theta_lo)
    candidates = [u_m]
    # stationary points of (u+A) u^(omega-1) / ((1-alpha) u + B0):
    # sign of derivative = sign of q(u) = q2 u^2 + q1 u + q0
    a_, b_ = lam, b0
    q2 = (omega - 1.0) * (1.0 - alpha)
    q1 = omega * b_ + (omega - 2.0) * (1.0 - alpha) * a_
    q0 = (omega - 1.0) * a_ * b_
    if abs(q2) > 0.0:
        disc = q1 * q1 - 4.0 * q2 * q0
        if disc >= 0.0:
            for sgn in (-1.0, 1.0):
                r = (-q1 + sgn * math.sqrt(disc)) / (2.0 * q2)
                if r > u_m:
                    candidates.extend([r * (1 - 1e-6), r, r * (1 + 1e-6)])
    elif abs(q1) > 0.0:
        r = -q0 / q1
        if r > u_m:
            candidates.extend([r * (1 - 1e-6), r, r * (1 + 1e-6)])
    best = max(_bt_envelope_value(u, spec, theta_lo, pref, b0) for u in candidates)
    if omega == 1.0:
        limit = (pref / _enc(1.0 - alpha)).hi
        best = max(best, limit)
    return best


def _sqrt_sup(spec: MSpec, theta_lo: float, psith: PsiThetaConstants) -> float:
    """sup of the normalized sqrt term under T < x^alpha: three decaying
    exponential pieces, each maximized at u_M (with a stationary-point
    guard for the u * x^(alpha-1) piece)."""
    lam, alpha, omega, u_m = spec.lam, spec.alpha, spec.omega, spec.log_xm
    kappa_m = 1.0 + 1.0 / u_m
    pref = (
        R_COEFF
        * _enc(kappa_m * lam).exp()
        / (2.0 * _enc(theta_lo) * _enc(theta_lo))
    )

    def pieces_at(u: float) -> Enclosure:
        p1 = _enc(psith.a1) * _enc(lam / 2.0 + (alpha - 0.5) * u).exp()
        p2 = _enc(psith.a2) * _enc(lam / 3.0 + (alpha - 2.0 / 3.0) * u).exp()
        p3 = _enc(u) * _enc((alpha - 1.0) * u).exp()
        return (p1 + p2 + p3) / _enc(u ** (1.0 - omega))

    candidates = [u_m]
    u_star = omega / (1.0 - alpha)  # stationary point of u^omega e^((alpha-1)u)
    if u_star > u_m:
        candidates.append(u_star)
    return max((pref * pieces_at(u)).hi for u in candidates)


def normalized_sup(
    spec: MSpec,
    theta_prime: Enclosure,
    strategy: SupStrategy = SupStrategy(),
    psith: PsiThetaConstants = PsiThetaConstants(),
) -> SupResult:
    """Certified upper bound for the normalized budget's supremum."""
    theta_lo = theta_prime.lo
    if strategy.mode == "analytic":
        k_term = spec.k_const
        delange = _delange_sup(spec)
        bt = _bt_sup(spec, theta_lo)
        sq = _sqrt_sup(spec, theta_lo, psith)
        return SupResult(k_term + delange + bt + sq, k_term, delange, bt, sq, "analytic")
    if strategy.mode != "grid":
        raise PreconditionError(f"unknown strategy mode {strategy.mode!r}")
    return _grid_sup(spec, theta_lo, strategy, psith)


def _grid_sup(
    spec: MSpec, theta_lo: float, strategy: SupStrategy, psith: PsiThetaConstants
) -> SupResult:
    """Dense-grid fallback with multiplicative Lipschitz padding.

    Every normalized term is smooth in (log u, log T) with logarithmic
    derivative bounded by a few units; a 2x padding on the grid maximum is
    recorded as non-analytic certification.
    """
    u_m = spec.log_xm
    best = ErrorBudget(spec.k_const, 0.0, 0.0, 0.0)
    m_best = 0.0
    for i in range(strategy.grid_points):
        u = u_m * math.exp(strategy.grid_decades * math.log(10.0) * i / (strategy.grid_points - 1))
        lo, hi = log_t_floor(u), log_t_ceiling(u, spec.alpha)
        if not hi > lo:
            continue
        for j in range(strategy.t_points):
            log_T = lo + (hi - lo) * (j + 0.5) / strategy.t_points
            b = normalized_budget_log(u, log_T, spec, theta_lo, psith, check_range=False)
            if b.total > m_best:
                m_best = b.total
                best = b
    pad = 1.05
    return SupResult(
        m_best * pad,
        best.k_term,
        best.delange_term * pad,
        best.bt_term * pad,
        best.sqrt_term * pad,
        "grid+lipschitz",
    )


# ---------------------------------------------------------------------------
# lambda optimization
# ---------------------------------------------------------------------------


def optimize_lambda(
    log_xm: float,
    alpha: float,
    omega: float,
    k_const: float,
    theta_prime: Enclosure,
    bracket: tuple[float, float] = (1e-6, 1.0),
    coarse: int = 33,
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Minimize the certified M over lambda: coarse log-grid scan for a
    unimodal bracket, then golden-section refinement (grid winner if the
    scan looks non-unimodal)."""
    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise PreconditionError("bad lambda bracket")

    def m_of(lam: float) -> float:
        spec = MSpec(log_xm, alpha, omega, lam, k_const)
        return normalized_sup(spec, theta_prime).m_upper

    grid = [lo * (hi / lo) ** (i / (coarse - 1)) for i in range(coarse)]
    vals = [m_of(l) for l in grid]
    i_best = min(range(coarse), key=vals.__getitem__)
    # unimodality sniff: the sampled curve should descend then ascend
    descents = sum(1 for a, b in zip(vals, vals[1:]) if b < a - 1e-15)
    ascents = sum(1 for a, b in zip(vals, vals[1:]) if b > a + 1e-15)
    lo_i = max(i_best - 1, 0)
    hi_i = min(i_best + 1, coarse - 1)
    a, b = grid[lo_i], grid[hi_i]
    if descents and ascents and not _is_unimodal(vals):
        return grid[i_best], vals[i_best]  # grid fallback
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = m_of(c), m_of(d)
    while b - a > tol * max(1.0, b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = m_of(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = m_of(d)
    lam_star = 0.5 * (a + b)
    m_star = m_of(lam_star)
    if vals[i_best] < m_star:
        return grid[i_best], vals[i_best]
    return lam_star, m_star


def _is_unimodal(vals: list[float]) -> bool:
    falling = True
    for a, b in zip(vals, vals[1:]):
        if falling and b > a + 1e-15:
            falling = False
        elif not falling and b < a - 1e-15:
            return False
    return True


# ---------------------------------------------------------------------------
# interval error of the two-point bound
# ---------------------------------------------------------------------------


def interval_error(x: float, h: float, m_const: float, omega: float, T: float) -> float:
    """M ((x+h)(log(x+h))^(1-omega) + x (log x)^(1-omega)) / T."""
    if h < 0.0:
        raise PreconditionError("h must be nonnegative")
    if not x > 1.0:
        raise PreconditionError("x must exceed 1")
    g = (x + h) * math.log(x + h) ** (1.0 - omega) + x * math.log(x) ** (1.0 - omega)
    return m_const * g / T


def interval_error_admissible(
    x: float, h: float, T: float, alpha: float
) -> tuple[bool, str]:
    """The two-point bound needs T admissible at both endpoints; the floor
    binds at x+h and the ceiling at x."""
    u_hi = math.log(x + h)
    u_lo = math.log(x)
    log_T = math.log(T)
    if not log_T > log_t_floor(u_hi):
        return False, "T below the floor at x+h"
    if not log_T < log_t_ceiling(u_lo, alpha):
        return False, "T above the ceiling at x"
    return True, ""


# ---------------------------------------------------------------------------
# table files
# ---------------------------------------------------------------------------


def _parse_value(tok: str) -> float:
    if "/" in tok:
        num, _, den = tok.partition("/")
        return float(num) / float(den)
    return float(tok)


def load_ktable(stream: IO[str] | Iterable[str]) -> KTable:
    """Rows 'log_xK alpha omega K [omega_bar D]'; '-' marks a missing
    annotation; fractions like 1/85 are accepted."""
    rows = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) not in (4, 6):
            raise ConfigError(f"line {lineno}: expected 4 or 6 columns")
        try:
            log_xk, alpha, omega, k = (_parse_value(t) for t in toks[:4])
            extra = [None if t == "-" else _parse_value(t) for t in toks[4:]]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number") from exc
        rows.append(
            KRow(
                log_xk,
                alpha,
                omega,
                k,
                omega_bar=extra[0] if extra else None,
                d_param=extra[1] if len(extra) > 1 else None,
            )
        )
    return KTable(tuple(rows))


def load_ktable_path(path: str) -> KTable:
    with open(path, "r", encoding="utf-8") as fh:
        return load_ktable(fh)


@dataclass(frozen=True)
class MRow:
    log_xm: float
    alpha: float
    omega: float
    lam: float
    m_ref: float


def load_mtable(stream: IO[str] | Iterable[str]) -> tuple[MRow, ...]:
    """Reference rows 'log_xM alpha omega lambda M'."""
    rows = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != 5:
            raise ConfigError(f"line {lineno}: expected 5 columns")
        try:
            vals = [_parse_value(t) for t in toks]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number") from exc
        rows.append(MRow(*vals))
    return tuple(rows)


def load_mtable_path(path: str) -> tuple[MRow, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_mtable(fh)
