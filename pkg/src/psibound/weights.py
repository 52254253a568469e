"""Piecewise-polynomial averaging weights and their derived constants.

A weight lives on [1, xi], integrates to one, and vanishes at the boundary
up to order k-2.  Three constants drive every downstream bound:

* ``n_kxi``   - the derivative-mass constant: 2*pi*N equals the one-sided
  (k-1)-derivative magnitudes at the endpoints plus k! * sum over h <= k of
  (1/h!) * integral of |w^(h)(u)|/u,
* ``l_xi``    - integral of u*|w(u)| divided by pi,
* ``theta_prime`` - the unique positive crossing of 2N/y^(k+1) with
  1 + y*L.

All three are returned as outward-rounded enclosures.  Absolute-value
integrals are computed exactly: the integrand's sign changes are isolated
with rational arithmetic (see ``polyroots``), the domain is split there,
and closed-form antiderivatives of p(u)/u are evaluated with directed
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable

from .enclosure import PI, Enclosure
from .errors import DataFormatError, PreconditionError, StructuralError
from .polyroots import eval_poly, real_roots_in, to_poly

DEFAULT_ROOT_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    coeffs: tuple[float, ...]  # ascending degree

    def derivative(self) -> "Piece":
        c = self.coeffs
        if len(c) <= 1:
            return Piece(self.lo, self.hi, (0.0,))
        return Piece(self.lo, self.hi, tuple(j * c[j] for j in range(1, len(c))))

    def __call__(self, u: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * u + c
        return acc


@dataclass(frozen=True)
class PiecewiseWeight:
    pieces: tuple[Piece, ...]
    k: int
    xi: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise StructuralError("k must be a positive integer")
        if not self.pieces:
            raise StructuralError("weight needs at least one piece")
        if not self.xi > 1.0:
            raise StructuralError("xi must exceed 1")
        prev = 1.0
        for p in self.pieces:
            if not math.isclose(p.lo, prev, rel_tol=0.0, abs_tol=1e-12):
                raise StructuralError(
                    f"pieces must tile [1, xi]; gap or overlap at {p.lo} (expected {prev})"
                )
            if not p.hi > p.lo:
                raise StructuralError(f"piece [{p.lo}, {p.hi}] is empty")
            prev = p.hi
        if not math.isclose(prev, self.xi, rel_tol=0.0, abs_tol=1e-12):
            raise StructuralError(f"pieces end at {prev}, xi is {self.xi}")

    def derivative(self) -> "PiecewiseWeight":
        return PiecewiseWeight(
            tuple(p.derivative() for p in self.pieces), self.k, self.xi
        )

    def __call__(self, u: float) -> float:
        for p in self.pieces:
            if p.lo <= u <= p.hi:
                return p(u)
        raise ValueError(f"{u} outside [1, {self.xi}]")

    def scaled(self, c: float) -> "PiecewiseWeight":
        return PiecewiseWeight(
            tuple(
                Piece(p.lo, p.hi, tuple(c * a for a in p.coeffs)) for p in self.pieces
            ),
            self.k,
            self.xi,
        )


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class AdmissibilityReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class WeightConstants:
    n_kxi: Enclosure
    l_xi: Enclosure
    theta_prime: Enclosure
    k: int
    xi: float

    def __post_init__(self) -> None:
        for name in ("n_kxi", "l_xi", "theta_prime"):
            enc = getattr(self, name)
            if not enc.lo > 0.0:
                raise StructuralError(f"{name} enclosure must be positive, got {enc}")


# ---------------------------------------------------------------------------
# canonical weight
# ---------------------------------------------------------------------------


def canonical_weight() -> PiecewiseWeight:
    """The parabola 6(u-1)(2-u) on [1,2]: unit mass, vanishes at both ends."""
    return PiecewiseWeight((Piece(1.0, 2.0, (-12.0, 18.0, -6.0)),), k=1, xi=2.0)


# ---------------------------------------------------------------------------
# exact piecewise integration with directed rounding
# ---------------------------------------------------------------------------


def _antideriv_p_over_u(coeffs: tuple[float, ...], at: Enclosure) -> Enclosure:
    """Antiderivative of (sum c_j u^j)/u at ``at``: c_0 log u + sum c_j u^j / j."""
    total = Enclosure.point(0.0)
    if coeffs and coeffs[0] != 0.0:
        total = total + Enclosure.point(coeffs[0]) * at.log()
    for j in range(1, len(coeffs)):
        if coeffs[j] != 0.0:
            total = total + Enclosure.point(coeffs[j]) * at.powi(j) / float(j)
    return total


def _antideriv_u_p(coeffs: tuple[float, ...], at: Enclosure) -> Enclosure:
    """Antiderivative of u * (sum c_j u^j): sum c_j u^(j+2)/(j+2)."""
    total = Enclosure.point(0.0)
    for j, c in enumerate(coeffs):
        if c != 0.0:
            total = total + Enclosure.point(c) * at.powi(j + 2) / float(j + 2)
    return total


def _antideriv_p(coeffs: tuple[float, ...], at: Enclosure) -> Enclosure:
    total = Enclosure.point(0.0)
    for j, c in enumerate(coeffs):
        if c != 0.0:
            total = total + Enclosure.point(c) * at.powi(j + 1) / float(j + 1)
    return total


def _sign_split_points(coeffs: tuple[float, ...], lo: float, hi: float):
    """Enclosures of interior sign-change candidates, plus exact signs of the
    polynomial strictly between consecutive split points."""
    brackets = real_roots_in(coeffs, Fraction(lo), Fraction(hi))
    pts: list[Enclosure] = [Enclosure.point(lo)]
    for blo, bhi in brackets:
        enc = Enclosure(
            math.nextafter(float(blo), -math.inf), math.nextafter(float(bhi), math.inf)
        )
        if enc.lo > pts[-1].hi:
            pts.append(enc)
    if pts[-1].hi < hi:
        pts.append(Enclosure.point(hi))
    else:
        pts[-1] = Enclosure.point(hi)
    poly = to_poly(coeffs)
    signs = []
    for left, right in zip(pts, pts[1:]):
        mid = Fraction(left.hi) + (Fraction(right.lo) - Fraction(left.hi)) / 2
        val = eval_poly(poly, mid)
        signs.append(0 if val == 0 else (1 if val > 0 else -1))
    return pts, signs


def _integral_abs(coeffs, lo, hi, antideriv) -> Enclosure:
    """Integral of |p| against the measure encoded by ``antideriv``."""
    pts, signs = _sign_split_points(coeffs, lo, hi)
    total = Enclosure.point(0.0)
    for left, right, sign in zip(pts, pts[1:], signs):
        seg = antideriv(coeffs, right) - antideriv(coeffs, left)
        if sign < 0:
            seg = -seg
        elif sign == 0:
            continue
        # directed rounding can leave a hair of negativity on a zero segment
        seg = Enclosure(min(seg.lo, seg.hi), max(seg.hi, 0.0)) if seg.lo < 0 else seg
        total = total + seg
    return Enclosure(max(total.lo, 0.0), max(total.hi, 0.0))


def _nth_derivative_pieces(w: PiecewiseWeight, h: int) -> PiecewiseWeight:
    d = w
    for _ in range(h):
        d = d.derivative()
    return d


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def check_admissible(
    w: PiecewiseWeight, tol: float = DEFAULT_RESIDUAL_TOL
) -> AdmissibilityReport:
    """Verify the three defining conditions, reporting a residual for each.

    Condition 1 asks for k-times differentiability with an integrable k-th
    derivative.  Polynomial pieces are smooth inside their intervals, so the
    check reduces to matching one-sided derivatives up to order k-1 at the
    interior breakpoints.
    """
    checks = []

    # condition 1: derivative continuity at interior breakpoints
    worst = 0.0
    where = ""
    for order in range(w.k):
        d = _nth_derivative_pieces(w, order)
        for left, right in zip(d.pieces, d.pieces[1:]):
            jump = abs(left(left.hi) - right(right.lo))
            if jump > worst:
                worst = jump
                where = f"order {order} at u={left.hi}"
    checks.append(
        ConditionCheck(
            "differentiable",
            worst <= tol,
            worst,
            where or "single smooth piece",
        )
    )

    # condition 2: unit mass
    mass = Enclosure.point(0.0)
    for p in w.pieces:
        mass = mass + (
            _antideriv_p(p.coeffs, Enclosure.point(p.hi))
            - _antideriv_p(p.coeffs, Enclosure.point(p.lo))
        )
    residual = max(abs(mass.lo - 1.0), abs(mass.hi - 1.0))
    checks.append(
        ConditionCheck("unit-mass", residual <= tol, residual, f"mass={mass}")
    )

    # condition 3: boundary vanishing up to order k-2 (empty for k=1)
    worst = 0.0
    where = ""
    for order in range(w.k - 1):
        d = _nth_derivative_pieces(w, order)
        for val, label in ((d.pieces[0](1.0), "u=1"), (d.pieces[-1](w.xi), "u=xi")):
            if abs(val) > worst:
                worst = abs(val)
                where = f"order {order} at {label}"
    checks.append(
        ConditionCheck(
            "boundary-vanishing",
            worst <= tol,
            worst,
            where or "empty for k=1",
        )
    )
    return AdmissibilityReport(tuple(checks))


# ---------------------------------------------------------------------------
# the constants
# ---------------------------------------------------------------------------


def weight_constants(
    w: PiecewiseWeight, root_tol: float = DEFAULT_ROOT_TOL
) -> WeightConstants:
    report = check_admissible(w)
    if not report.passed:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        raise PreconditionError(f"weight is not admissible (failed: {failed})")

    k = w.k
    dk1 = _nth_derivative_pieces(w, k - 1)
    two_pi_n = (
        Enclosure.point(dk1.pieces[-1](w.xi)).abs() / w.xi
        + Enclosure.point(dk1.pieces[0](1.0)).abs()
    )
    kfact = float(math.factorial(k))
    for h in range(k + 1):
        d = _nth_derivative_pieces(w, h)
        integral = Enclosure.point(0.0)
        for p in d.pieces:
            integral = integral + _integral_abs(p.coeffs, p.lo, p.hi, _antideriv_p_over_u)
        two_pi_n = two_pi_n + integral * (kfact / float(math.factorial(h)))
    n_kxi = two_pi_n / (2.0 * PI)

    l_int = Enclosure.point(0.0)
    for p in w.pieces:
        l_int = l_int + _integral_abs(p.coeffs, p.lo, p.hi, _antideriv_u_p)
    l_xi = l_int / PI

    theta = solve_theta_prime(n_kxi, l_xi, k, tol=root_tol)
    return WeightConstants(n_kxi=n_kxi, l_xi=l_xi, theta_prime=theta, k=k, xi=w.xi)


def solve_theta_prime(
    n_kxi: Enclosure, l_xi: Enclosure, k: int, tol: float = DEFAULT_ROOT_TOL
) -> Enclosure:
    """Unique positive root of 2N/y^(k+1) = 1 + y*L by certified bisection.

    The difference g(y) = 2N/y^(k+1) - 1 - y*L is strictly decreasing on
    y > 0, so a bracket with g > 0 on the left and g < 0 on the right pins
    the crossing.
    """
    if not (n_kxi.lo > 0.0 and l_xi.lo > 0.0):
        raise PreconditionError("theta-prime needs positive N and L enclosures")

    def g(y: float) -> Enclosure:
        ye = Enclosure.point(y)
        return 2.0 * n_kxi / ye.powi(k + 1) - 1.0 - ye * l_xi

    lo = 1.0
    while not g(lo).certainly_positive():
        lo *= 0.5
        if lo < 1e-300:
            raise PreconditionError("no positive bracket for theta-prime")
    hi = max(2.0 * lo, 1.0)
    while not g(hi).certainly_negative():
        hi *= 2.0
        if hi > 1e300:
            raise PreconditionError("no upper bracket for theta-prime")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm.certainly_positive():
            lo = mid
        elif gm.certainly_negative():
            hi = mid
        else:
            break  # enclosure width floor reached; bracket is still certified
    return Enclosure(lo, hi)


def theta_prime(consts: WeightConstants, tol: float = DEFAULT_ROOT_TOL) -> Enclosure:
    return solve_theta_prime(consts.n_kxi, consts.l_xi, consts.k, tol=tol)


# ---------------------------------------------------------------------------
# file format: header "k=<int> xi=<decimal>", one piece per line "a b c0 c1 ..."
# ---------------------------------------------------------------------------


def load_weight(stream: IO[str] | Iterable[str]) -> PiecewiseWeight:
    lines = [
        ln.strip()
        for ln in stream
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines:
        raise DataFormatError("empty weight file")
    header = lines[0].split()
    fields = {}
    for tok in header:
        if "=" not in tok:
            raise DataFormatError(f"bad header token {tok!r}; expected k=<int> xi=<decimal>")
        key, _, val = tok.partition("=")
        fields[key.strip()] = val.strip()
    try:
        k = int(fields["k"])
        xi = float(fields["xi"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"bad weight header {lines[0]!r}") from exc
    pieces = []
    for idx, ln in enumerate(lines[1:], start=2):
        vals = ln.split()
        if len(vals) < 3:
            raise DataFormatError(f"line {idx}: need 'a b c0 [c1 ...]'")
        try:
            nums = [float(v) for v in vals]
        except ValueError as exc:
            raise DataFormatError(f"line {idx}: non-numeric field") from exc
        pieces.append(Piece(nums[0], nums[1], tuple(nums[2:])))
    return PiecewiseWeight(tuple(pieces), k=k, xi=xi)


def dump_weight(w: PiecewiseWeight) -> str:
    out = [f"k={w.k} xi={w.xi!r}"]
    for p in w.pieces:
        out.append(" ".join([repr(p.lo), repr(p.hi)] + [repr(c) for c in p.coeffs]))
    return "\n".join(out) + "\n"
