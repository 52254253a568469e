"""Averaged truncated-Perron error machinery.

The central objects:

* ``delta`` - the two-branch pointwise bound for the difference between
  the step function v(y) and the weight-averaged vertical-line integral of
  e^{sy}/s,
* ``quadrature_residual`` - a diagnostic that evaluates that double
  integral by adaptive quadrature and checks the bound numerically,
* ``general_error`` - the certified error of the averaged truncated
  Perron formula for a finite Dirichlet series,
* ``r_bound`` - the truncation-error bound with the 1.785 coefficient and
  the lambda-split tail, driven by a caller-supplied mass oracle.

Everything certified is rounded one-sidedly; quadrature appears only in
diagnostics, never inside certified bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Sequence

from scipy.integrate import quad

from .errors import DataFormatError, DiagnosticError, PreconditionError
from .weights import PiecewiseWeight, WeightConstants, canonical_weight

R_COEFFICIENT = 1.785  # startup-validated against 4*N_hi for the weight in use


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaInput:
    y: float
    kappa_prime: float
    consts: WeightConstants

    def __post_init__(self) -> None:
        if not self.kappa_prime > 0.0:
            raise PreconditionError("kappa' must be positive")


@dataclass(frozen=True)
class FiniteSeries:
    terms: tuple[tuple[int, float], ...]
    kappa: float
    kappa_a: float

    def __post_init__(self) -> None:
        if not self.kappa > self.kappa_a > 0.0:
            raise PreconditionError("need kappa > kappa_a > 0")
        last = 0
        for n, _ in self.terms:
            if n <= last:
                raise PreconditionError("series indices must be strictly increasing")
            last = n

    def abs_sum_weighted(self) -> float:
        """sum |a_n| n^(-kappa) over the whole (finite) series."""
        return sum(abs(a) * n ** (-self.kappa) for n, a in self.terms)

    def partial_sum(self, x: float) -> float:
        return sum(a for n, a in self.terms if n <= x)


@dataclass(frozen=True)
class PerronErrorBound:
    value: float
    term_main: float
    term_tail: float

    def __post_init__(self) -> None:
        if self.term_main < 0 or self.term_tail < 0:
            raise PreconditionError("bound terms must be nonnegative")

    def __add__(self, other: "PerronErrorBound") -> "PerronErrorBound":
        return PerronErrorBound(
            self.value + other.value,
            self.term_main + other.term_main,
            self.term_tail + other.term_tail,
        )


@dataclass(frozen=True)
class QuadratureSettings:
    epsabs: float = 1e-11
    epsrel: float = 1e-11
    limit: int = 400


@dataclass(frozen=True)
class QuadratureCheck:
    approx: float
    residual: float
    delta: float
    quad_error: float

    @property
    def ok(self) -> bool:
        return self.residual <= self.delta + 10.0 * self.quad_error + 1e-13


# ---------------------------------------------------------------------------
# the pointwise bound
# ---------------------------------------------------------------------------


def step(y: float) -> float:
    """v(y): 1 for y >= 0, else 0."""
    return 1.0 if y >= 0.0 else 0.0


def delta(inp: DeltaInput) -> float:
    """Pointwise bound for |v(y) - averaged integral|.

    For y != 0 the bound is the smaller of two branches: a derivative-mass
    branch 2 e^{y kappa'} N / |y|^{k+1} and an arctan branch; at y = 0 only
    the arctan branch is defined.  Upper enclosure endpoints of N and L are
    used so the returned value is a valid bound.
    """
    y, kp = inp.y, inp.kappa_prime
    n_hi = inp.consts.n_kxi.hi
    l_hi = inp.consts.l_xi.hi
    k = inp.consts.k
    e_fac = math.exp(y * kp)
    arctan_branch = abs(step(y) - e_fac / math.pi * math.atan(1.0 / kp)) + abs(
        y
    ) * e_fac * l_hi
    if y == 0.0:
        return arctan_branch
    mass_branch = 2.0 * e_fac * n_hi / abs(y) ** (k + 1)
    return min(mass_branch, arctan_branch)


# ---------------------------------------------------------------------------
# averaged indicator integral (diagnostic quadrature)
# ---------------------------------------------------------------------------


def _weight_tail(w: PiecewiseWeight) -> Callable[[float], float]:
    """W(t) = integral of w over [max(t,1), xi]; equals 1 below t=1."""

    def antideriv(piece, u: float) -> float:
        acc = 0.0
        for j, c in enumerate(piece.coeffs):
            acc += c * u ** (j + 1) / (j + 1)
        return acc

    piece_mass = [antideriv(p, p.hi) - antideriv(p, p.lo) for p in w.pieces]
    suffix = [0.0] * (len(w.pieces) + 1)
    for i in range(len(w.pieces) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + piece_mass[i]

    def W(t: float) -> float:
        if t <= 1.0:
            return suffix[0]
        for i, p in enumerate(w.pieces):
            if t <= p.hi:
                return suffix[i + 1] + (antideriv(p, p.hi) - antideriv(p, t))
        return 0.0

    return W


def averaged_indicator(
    y: float,
    kappa_prime: float,
    weight: PiecewiseWeight,
    settings: QuadratureSettings = QuadratureSettings(),
) -> tuple[float, float]:
    """(value, error estimate) for the weight-averaged Perron integral.

    Collapsing the tau-average against the inner vertical integral leaves a
    single real integral: e^{y kappa'}/pi * int_0^xi [kappa' cos(ty)
    + t sin(ty)] / (kappa'^2 + t^2) * W(t) dt with W the weight's tail mass.
    """
    W = _weight_tail(weight)
    kp = kappa_prime

    def integrand(t: float) -> float:
        return (kp * math.cos(t * y) + t * math.sin(t * y)) / (kp * kp + t * t) * W(t)

    breaks = sorted({1.0, *(p.hi for p in weight.pieces)})
    val, err = quad(
        integrand,
        0.0,
        weight.xi,
        points=[b for b in breaks if 0.0 < b < weight.xi],
        limit=settings.limit,
        epsabs=settings.epsabs,
        epsrel=settings.epsrel,
    )
    scale = math.exp(y * kp) / math.pi
    if err > max(settings.epsabs * 100.0, 1e-6):
        raise DiagnosticError(
            f"averaged-indicator quadrature did not converge (err={err:.3g})"
        )
    return scale * val, scale * err


def quadrature_residual(
    inp: DeltaInput,
    settings: QuadratureSettings = QuadratureSettings(),
    weight: PiecewiseWeight | None = None,
) -> QuadratureCheck:
    """Evaluate |v(y) - averaged integral| numerically and compare to delta."""
    w = weight if weight is not None else canonical_weight()
    if w.k != inp.consts.k or w.xi != inp.consts.xi:
        raise PreconditionError("weight does not match the supplied constants")
    approx, err = averaged_indicator(inp.y, inp.kappa_prime, w, settings)
    residual = abs(step(inp.y) - approx)
    return QuadratureCheck(
        approx=approx, residual=residual, delta=delta(inp), quad_error=err
    )


# ---------------------------------------------------------------------------
# certified bounds
# ---------------------------------------------------------------------------


def general_error(
    series: FiniteSeries,
    x: float,
    T: float,
    consts: WeightConstants,
    lam: float,
) -> float:
    """Certified error of the averaged truncated Perron formula.

    The u-integral from theta'/T is split at lambda.  On [theta'/T, lambda]
    the jump structure of the series mass makes the integral exact in
    closed form; beyond lambda the mass is bounded by the full weighted sum,
    leaving a lambda^-(k+1) tail.
    """
    if not (x >= 1.0 and T >= 1.0):
        raise PreconditionError("need x >= 1 and T >= 1")
    k = consts.k
    a = consts.theta_prime.lo / T  # smaller lower limit = safe (larger) bound
    if lam < a:
        raise PreconditionError(f"lambda={lam} below theta'/T={a}")
    head = 0.0
    for n, an in series.terms:
        if an == 0.0:
            continue
        u_n = abs(math.log(x / n))
        if u_n > lam:
            continue
        lo = max(u_n, a)
        head += abs(an) * n ** (-series.kappa) * (lo ** -(k + 1) - lam ** -(k + 1))
    tail = series.abs_sum_weighted() * lam ** -(k + 1)
    n_hi = consts.n_kxi.hi
    return (2.0 * n_hi / T ** (k + 1)) * x**series.kappa * (head + tail)


MassOracle = Callable[[float], float]


def r_bound(
    x: float,
    T: float,
    kappa: float,
    lam: float,
    consts: WeightConstants,
    series_tail: float,
    mass: MassOracle,
    grid_points: int = 512,
) -> PerronErrorBound:
    """Truncation-error bound: coefficient/T^2 times (main + tail) with

    main = x^kappa * series_tail / (2 lambda^2),
    tail = e^{kappa lambda} * int_{theta'/T}^{lambda} mass(u) u^-3 du,

    where ``series_tail`` upper-bounds sum |a_n| n^-kappa and ``mass(u)``
    upper-bounds the |a_n| mass of |log(x/n)| <= u.  The integral is an
    upper Riemann sum on a geometric grid (mass is nondecreasing in u, the
    kernel decreasing), so the result is one-sided safe.
    """
    if 4.0 * consts.n_kxi.hi > R_COEFFICIENT:
        raise PreconditionError(
            f"coefficient {R_COEFFICIENT} < 4*N_hi = {4.0 * consts.n_kxi.hi}"
        )
    if series_tail < 0.0:
        raise PreconditionError("series_tail must be nonnegative")
    a = consts.theta_prime.lo / T
    if lam < a:
        raise PreconditionError(f"lambda={lam} below theta'/T={a}")
    term_main = R_COEFFICIENT * x**kappa * series_tail / (2.0 * lam * lam * T * T)
    integral = 0.0
    if lam > a:
        ratio = (lam / a) ** (1.0 / grid_points)
        u_lo = a
        for i in range(grid_points):
            u_hi = lam if i == grid_points - 1 else a * ratio ** (i + 1)
            m = mass(u_hi)
            if m < 0.0:
                raise PreconditionError(f"mass oracle returned negative at u={u_hi}")
            integral += m * 0.5 * (u_lo**-2 - u_hi**-2)
            u_lo = u_hi
    term_tail = R_COEFFICIENT * math.exp(kappa * lam) / (T * T) * integral
    return PerronErrorBound(term_main + term_tail, term_main, term_tail)


def interval_r_bound(
    x: float,
    h: float,
    T: float,
    kappa: float,
    lam: float,
    consts: WeightConstants,
    series_tail: float,
    mass_at: Callable[[float], MassOracle],
    grid_points: int = 512,
) -> PerronErrorBound:
    """Interval version: the bound at x+h plus the bound at x.

    ``mass_at(center)`` returns the mass oracle around that center.
    """
    if h < 0.0:
        raise PreconditionError("h must be nonnegative")
    upper = r_bound(x + h, T, kappa, lam, consts, series_tail, mass_at(x + h), grid_points)
    lower = r_bound(x, T, kappa, lam, consts, series_tail, mass_at(x), grid_points)
    return upper + lower


# ---------------------------------------------------------------------------
# series file format: one term per line, "n a_n"
# ---------------------------------------------------------------------------


def load_series(
    stream: IO[str] | Iterable[str], kappa: float, kappa_a: float
) -> FiniteSeries:
    terms = []
    for lineno, ln in enumerate(stream, start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise DataFormatError(f"line {lineno}: expected 'n a_n'")
        try:
            n, a = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise DataFormatError(f"line {lineno}: bad number") from exc
        terms.append((n, a))
    return FiniteSeries(tuple(terms), kappa=kappa, kappa_a=kappa_a)
