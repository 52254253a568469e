"""Zero-free regions, zero-counting and zero-density bounds, and the
resulting bound on the height-truncated sum of x^(beta-1) over zeta zeros.

The four zero-free widths and their combination are hard formulas from the
literature; the counting and density bounds are *configuration*: shapes
plus constants transcribed from external sources, each carrying a
provenance string.  Everything x- and T-dependent is evaluated in
log-space internally so the prime-gap pipeline can run at log x up to 1e6
without overflowing floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import ConfigError, PreconditionError

LOG_2PI = math.log(2.0 * math.pi)

# shapes understood by the configurable evaluators
ZERO_COUNT_SHAPES = ("rvm", "constant")
ZERO_DENSITY_SHAPES = ("power_log", "constant")


@dataclass(frozen=True)
class FordConstants:
    a: float = 0.685
    b: float = 0.155
    c: float = 0.04962
    d: float = 0.0196
    e: float = 1.15
    j_slope: float = 1.0 / 6.0
    j_const: float = 0.618


@dataclass(frozen=True)
class ZetaBoundsConfig:
    c_classical: float = 5.558691
    c_yang: float = 21.233
    c_vk: float = 53.989
    ford: FordConstants = field(default_factory=FordConstants)
    rh_height: float = 3.0e12
    zero_count: tuple[str, tuple[float, ...], str] = (
        "rvm",
        (0.1038, 0.2573, 9.3675),
        "unconfigured",
    )
    zero_density: tuple[str, tuple[float, ...], str] = (
        "power_log",
        (11.499, 8.0 / 3.0, 5.0, 2.0, 3.186),
        "unconfigured",
    )
    sigma_grid: float = 1e-3

    def __post_init__(self) -> None:
        for name in ("c_classical", "c_yang", "c_vk", "rh_height"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for label, (shape, consts, prov), shapes in (
            ("zero_count", self.zero_count, ZERO_COUNT_SHAPES),
            ("zero_density", self.zero_density, ZERO_DENSITY_SHAPES),
        ):
            if shape not in shapes:
                raise ConfigError(f"{label}: unknown shape {shape!r}")
            if not prov:
                raise ConfigError(f"{label}: provenance string required")
            if shape == "rvm" and len(consts) != 3:
                raise ConfigError(f"{label}: rvm shape needs (c_log, c_loglog, c_const)")
            if shape == "power_log" and len(consts) != 5:
                raise ConfigError(f"{label}: power_log shape needs (C1, p, q, r, C2)")
            if shape == "constant" and len(consts) != 1:
                raise ConfigError(f"{label}: constant shape needs one value")


@dataclass(frozen=True)
class ZeroSumParams:
    x: float
    T: float
    sigma1: float = 0.6

    def __post_init__(self) -> None:
        if not self.x > 1.0:
            raise PreconditionError("x must exceed 1")
        if not self.T > 0.0:
            raise PreconditionError("T must be positive")
        if not 0.5 < self.sigma1 < 1.0:
            raise PreconditionError("sigma1 must lie in (1/2, 1)")


# ---------------------------------------------------------------------------
# zero-free widths
# ---------------------------------------------------------------------------


def _nu1_log(ell: float, cfg: ZetaBoundsConfig) -> float:
    return 1.0 / (cfg.c_classical * ell)


def _nu2_log(ell: float, cfg: ZetaBoundsConfig) -> float:
    f = cfg.ford
    j = f.j_slope * ell + math.log(ell) + math.log(f.j_const)
    num = f.c - f.d / (j + f.e)
    den = j + f.a + f.b * math.log(ell)
    return num / den


def _nu3_log(ell: float, cfg: ZetaBoundsConfig) -> float:
    return math.log(ell) / (cfg.c_yang * ell)


def _nu4_log(ell: float, cfg: ZetaBoundsConfig) -> float:
    return 1.0 / (cfg.c_vk * ell ** (2.0 / 3.0) * math.log(ell) ** (1.0 / 3.0))


_NU_LOG = {1: _nu1_log, 2: _nu2_log, 3: _nu3_log, 4: _nu4_log}
_NU_MIN_T = {1: 2.0, 2: 3.0, 3: 3.0, 4: 3.0}


def nu_log(log_t: float, selector, cfg: ZetaBoundsConfig) -> float:
    """Zero-free width at height exp(log_t); selector 1..4 or 'combined'."""
    if selector == "combined":
        if log_t <= math.log(cfg.rh_height):
            return 0.5
        return max(_NU_LOG[i](log_t, cfg) for i in (1, 2, 3, 4))
    if selector not in _NU_LOG:
        raise PreconditionError(f"unknown selector {selector!r}")
    if log_t < math.log(_NU_MIN_T[selector]):
        raise PreconditionError(
            f"nu_{selector} needs t >= {_NU_MIN_T[selector]}, got log t = {log_t}"
        )
    return _NU_LOG[selector](log_t, cfg)


def nu(t: float, selector, cfg: ZetaBoundsConfig | None = None) -> float:
    """Zero-free width nu(t): no zeros with real part >= 1 - nu(t) at |t|."""
    cfg = cfg or ZetaBoundsConfig()
    t = abs(t)
    if selector == "combined" and t <= cfg.rh_height:
        return 0.5
    if t <= 1.0:
        raise PreconditionError("t must exceed 1")
    return nu_log(math.log(t), selector, cfg)


def crossover(
    i: int,
    j: int,
    bracket: tuple[float, float],
    cfg: ZetaBoundsConfig | None = None,
    tol: float = 1e-3,
) -> float:
    """log t where nu_j overtakes nu_i, by bisection on nu_j - nu_i.

    ``bracket`` is in log t coordinates and must straddle a single sign
    change.
    """
    cfg = cfg or ZetaBoundsConfig()
    lo, hi = bracket

    def g(ell: float) -> float:
        return _NU_LOG[j](ell, cfg) - _NU_LOG[i](ell, cfg)

    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise PreconditionError(
            f"no sign change of nu_{j} - nu_{i} on log-bracket [{lo}, {hi}]"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# configured zero-count / zero-density bounds
# ---------------------------------------------------------------------------


def log_zero_count_upper(log_T: float, cfg: ZetaBoundsConfig) -> float:
    """log of the configured upper bound for the zero count to height T."""
    shape, consts, _ = cfg.zero_count
    if shape == "constant":
        return math.log(consts[0]) if consts[0] > 0.0 else -math.inf
    c_log, c_loglog, c_const = consts
    pieces = []
    main_inner = log_T - LOG_2PI - 1.0  # log(T / 2 pi e)
    if main_inner > 0.0:
        pieces.append(log_T - LOG_2PI + math.log(main_inner))
    main_neg = 0.0
    if main_inner < 0.0:
        main_neg = math.exp(log_T - LOG_2PI) * main_inner  # small-T correction
    loglog_T = math.log(log_T) if log_T > 1.0 else None
    for coeff, val in (
        (c_log, loglog_T),
        (
            c_loglog,
            math.log(loglog_T) if loglog_T is not None and loglog_T > 0.0 else None,
        ),
        (c_const, 0.0),
    ):
        if coeff > 0.0 and val is not None:
            pieces.append(math.log(coeff) + val)
    if not pieces:
        return -math.inf
    out = pieces[0]
    for p in pieces[1:]:
        out = np.logaddexp(out, p)
    if main_neg:
        lin = math.exp(out) + main_neg
        if lin <= 0.0:
            return -math.inf
        return math.log(lin)
    return float(out)


def zero_count_upper(T: float, cfg: ZetaBoundsConfig | None = None) -> float:
    """Configured upper bound of shape (T/2pi) log(T/2pi e) + c_a log T
    + c_b log log T + c_c."""
    cfg = cfg or ZetaBoundsConfig()
    if cfg.zero_count[0] == "rvm" and not T >= 2.0:
        raise PreconditionError("zero count bound needs T >= 2")
    shape, consts, _ = cfg.zero_count
    if shape == "constant":
        return consts[0]
    c_log, c_loglog, c_const = consts
    main = T / (2 * math.pi) * math.log(T / (2 * math.pi * math.e))
    return (
        main
        + c_log * math.log(T)
        + (c_loglog * math.log(math.log(T)) if math.log(T) > 1.0 else 0.0)
        + c_const
    )


def log_zero_density_upper(sigma: float, log_T: float, cfg: ZetaBoundsConfig) -> float:
    """log of the configured zero-density upper bound N(sigma, T)."""
    shape, consts, _ = cfg.zero_density
    if shape == "constant":
        return math.log(consts[0]) if consts[0] > 0 else -math.inf
    c1, p, q, r, c2 = consts
    loglog = math.log(log_T)
    pieces = []
    if c1 > 0.0:
        pieces.append(math.log(c1) + p * (1.0 - sigma) * log_T + (q - r * sigma) * loglog)
    if c2 > 0.0:
        pieces.append(math.log(c2) + 2.0 * loglog)
    if not pieces:
        return -math.inf
    out = pieces[0]
    for piece in pieces[1:]:
        out = float(np.logaddexp(out, piece))
    return out


def zero_density_upper(
    sigma: float, T: float, cfg: ZetaBoundsConfig | None = None
) -> float:
    """Configured upper bound of shape C1 T^(p(1-sigma)) (log T)^(q - r sigma)
    + C2 log^2 T."""
    cfg = cfg or ZetaBoundsConfig()
    if not 0.5 <= sigma < 1.0:
        raise PreconditionError("sigma must lie in [1/2, 1)")
    if not T >= 2.0:
        raise PreconditionError("zero density bound needs T >= 2")
    return math.exp(log_zero_density_upper(sigma, math.log(T), cfg))


# ---------------------------------------------------------------------------
# the zero-sum bound
# ---------------------------------------------------------------------------


def _log_exp_window(t1: float, t2: float, c: float) -> float:
    """log of int_{t1}^{t2} e^{-t c} dt, stable for any sign and size of c."""
    span = t2 - t1
    if abs(c) * span < 1e-9:
        # flat kernel: upper-bound by span times the larger endpoint value
        return math.log(span) + max(-t1 * c, -t2 * c)
    if c > 0.0:
        return -t1 * c + math.log1p(-math.exp(-span * c)) - math.log(c)
    return -t2 * c + math.log1p(-math.exp(span * c)) - math.log(-c)


def _log_mid_integral_closed(
    u: float, log_2T: float, t1: float, t2: float, cfg: ZetaBoundsConfig
) -> float:
    """log of int over sigma in [1-t2, 1-t1] of x^(sigma-1) N(sigma, 2T) dsigma.

    For the power_log density shape the sigma-integral is elementary: with
    t = 1 - sigma each summand is a pure exponential in t, so the integral
    is exact (no grid).  Exactness is what certifies the bound here.
    """
    shape, consts, _ = cfg.zero_density
    if shape == "constant":
        if consts[0] <= 0.0:
            return -math.inf
        return math.log(consts[0]) + _log_exp_window(t1, t2, u)
    c1, p, q, r, c2 = consts
    loglog = math.log(log_2T)
    pieces = []
    if c1 > 0.0:
        rate = u - p * log_2T - r * loglog
        pieces.append(math.log(c1) + (q - r) * loglog + _log_exp_window(t1, t2, rate))
    if c2 > 0.0:
        pieces.append(math.log(c2) + 2.0 * loglog + _log_exp_window(t1, t2, u))
    if not pieces:
        return -math.inf
    out = pieces[0]
    for piece in pieces[1:]:
        out = float(np.logaddexp(out, piece))
    return out


def _log_mid_integral_riemann(
    u: float, log_2T: float, t1: float, t2: float, cfg: ZetaBoundsConfig
) -> float:
    """Upper Riemann sum on a fixed sigma grid (cross-check path).

    Each cell is bounded by the product of the per-factor maxima; this is
    one-sided safe at any resolution but only tight while the integrand
    decays slower than the cell width.
    """
    sigma1, hi = 1.0 - t2, 1.0 - t1
    n_cells = max(1, int(math.ceil((hi - sigma1) / cfg.sigma_grid)))
    edges = np.linspace(sigma1, hi, n_cells + 1)
    log_pieces = np.empty(n_cells)
    for i in range(n_cells):
        lo_edge, hi_edge = edges[i], edges[i + 1]
        log_pieces[i] = (
            math.log(hi_edge - lo_edge)
            + (hi_edge - 1.0) * u
            + log_zero_density_upper(lo_edge, log_2T, cfg)
        )
    return float(np.logaddexp.reduce(log_pieces))


# relative safety pad absorbing float rounding in the closed-form path
_F_ROUNDING_PAD = 1e-9


def zero_sum_bound_log(
    log_x: float,
    log_T: float,
    sigma1: float,
    cfg: ZetaBoundsConfig | None = None,
    mid_method: str = "closed",
) -> float:
    """Upper bound for sum over |gamma| <= 2T of x^(beta-1), in log-x space.

    Three pieces: zeros with beta <= sigma1 cost at most x^(sigma1-1) each;
    zeros with beta in (sigma1, 1 - nu(2T)] are weighted by the configured
    density bound; the additive 2 N(2T)/x floor covers the x^(-1) baseline.
    The zero-free region truncates the integral's upper endpoint.

    The middle integral is evaluated in closed form (exact for the
    configured shapes); ``mid_method='riemann'`` selects the grid-based
    upper sum instead, which is one-sided safe at any resolution but
    overshoots badly once log T outruns the grid.
    """
    cfg = cfg or ZetaBoundsConfig()
    if not log_x > 0.0:
        raise PreconditionError("need x > 1")
    log_2T = log_T + math.log(2.0)
    log_n2t = log_zero_count_upper(log_2T, cfg)
    u = log_x

    # 2 N(2T) (x^(sigma1-1) - x^(-1))
    expo = math.log(2.0) + log_n2t + (sigma1 - 1.0) * u
    frac = -math.expm1(-sigma1 * u)  # 1 - x^(-sigma1)
    term_low = math.exp(expo) * frac if expo < 700.0 else math.inf

    # 2 N(2T) / x
    expo_tail = math.log(2.0) + log_n2t - u
    term_tail = math.exp(expo_tail) if expo_tail < 700.0 else math.inf

    # middle integral over sigma in [sigma1, 1 - nu(2T)]
    nu_2t = nu_log(log_2T, "combined", cfg)
    term_mid = 0.0
    if 1.0 - nu_2t > sigma1:
        t1, t2 = nu_2t, 1.0 - sigma1
        if mid_method == "closed":
            log_int = _log_mid_integral_closed(u, log_2T, t1, t2, cfg)
        elif mid_method == "riemann":
            log_int = _log_mid_integral_riemann(u, log_2T, t1, t2, cfg)
        else:
            raise PreconditionError(f"unknown mid_method {mid_method!r}")
        expo_mid = math.log(2.0) + math.log(u) + log_int
        term_mid = math.exp(expo_mid) if expo_mid < 700.0 else math.inf
    total = term_low + term_mid + term_tail
    return total * (1.0 + _F_ROUNDING_PAD)


def zero_sum_bound(p: ZeroSumParams, cfg: ZetaBoundsConfig | None = None) -> float:
    """Float-domain wrapper of ``zero_sum_bound_log``."""
    return zero_sum_bound_log(math.log(p.x), math.log(p.T), p.sigma1, cfg)


# ---------------------------------------------------------------------------
# config file:  sections [zero_free], [zero_count], [zero_density];
# "key = value" lines; '# provenance:' comments attach to the next constant
# ---------------------------------------------------------------------------

_ZF_KEYS = {
    "c_classical",
    "c_yang",
    "c_vk",
    "rh_height",
    "ford_a",
    "ford_b",
    "ford_c",
    "ford_d",
    "ford_e",
    "ford_j_slope",
    "ford_j_const",
}


def load_config(stream: IO[str] | Iterable[str]) -> ZetaBoundsConfig:
    section = None
    pending_prov: str | None = None
    zf: dict[str, float] = {}
    sections: dict[str, dict[str, str]] = {"zero_count": {}, "zero_density": {}}
    provenance: dict[str, str] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            note = line.lstrip("#").strip()
            if note.lower().startswith("provenance:"):
                pending_prov = note.partition(":")[2].strip()
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("zero_free", "zero_count", "zero_density"):
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line or section is None:
            raise ConfigError(f"line {lineno}: expected 'key = value' inside a section")
        key, _, val = (s.strip() for s in line.partition("="))
        if section == "zero_free":
            if key not in _ZF_KEYS:
                raise ConfigError(f"line {lineno}: unknown zero_free key {key!r}")
            zf[key] = _parse_number(val, lineno)
        else:
            sections[section][key] = val
            if pending_prov:
                provenance[f"{section}.{key}"] = pending_prov
        pending_prov = None

    def build(section_name: str, shape_keys: dict[str, tuple[str, ...]]):
        sec = sections[section_name]
        shape = sec.get("shape", "")
        if shape not in shape_keys:
            raise ConfigError(f"[{section_name}] missing or unknown shape {shape!r}")
        vals = []
        for key in shape_keys[shape]:
            if key not in sec:
                raise ConfigError(f"[{section_name}] missing constant {key!r}")
            vals.append(_parse_number(sec[key], 0))
        prov = "; ".join(
            provenance.get(f"{section_name}.{k}", "")
            for k in ("shape", *shape_keys[shape])
            if provenance.get(f"{section_name}.{k}")
        )
        return shape, tuple(vals), prov or "unspecified"

    count = build("zero_count", {"rvm": ("c_log", "c_loglog", "c_const"), "constant": ("value",)})
    density = build(
        "zero_density",
        {"power_log": ("c1", "p", "q", "r", "c2"), "constant": ("value",)},
    )
    ford = FordConstants(
        a=zf.get("ford_a", 0.685),
        b=zf.get("ford_b", 0.155),
        c=zf.get("ford_c", 0.04962),
        d=zf.get("ford_d", 0.0196),
        e=zf.get("ford_e", 1.15),
        j_slope=zf.get("ford_j_slope", 1.0 / 6.0),
        j_const=zf.get("ford_j_const", 0.618),
    )
    return ZetaBoundsConfig(
        c_classical=zf.get("c_classical", 5.558691),
        c_yang=zf.get("c_yang", 21.233),
        c_vk=zf.get("c_vk", 53.989),
        ford=ford,
        rh_height=zf.get("rh_height", 3.0e12),
        zero_count=count,
        zero_density=density,
    )


def _parse_number(text: str, lineno: int) -> float:
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return float(num) / float(den)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: bad fraction {text!r}") from exc
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad number {text!r}") from exc


def load_config_path(path: str) -> ZetaBoundsConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(fh)
