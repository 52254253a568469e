"""Exact real-root isolation for polynomials with rational coefficients.

Sign-split integration of |p(u)|/u needs *every* sign change of p inside an
interval.  We isolate roots with the Vincent-Collins-Akritas bisection
scheme driven by Descartes' rule of signs, carried out entirely in
``fractions.Fraction`` arithmetic (float coefficients convert exactly), so
no sign change can be missed.  Isolated roots are then narrowed by exact
bisection to rational brackets of width 2^-80.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

Poly = tuple[Fraction, ...]  # ascending coefficients


def to_poly(coeffs) -> Poly:
    p = tuple(Fraction(c) for c in coeffs)
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def eval_poly(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def deriv(p: Poly) -> Poly:
    if len(p) <= 1:
        return (Fraction(0),)
    return tuple(c * j for j, c in enumerate(p) if j >= 1)


def _degree(p: Poly) -> int:
    return len(p) - 1


def _poly_mod(a: Poly, b: Poly) -> Poly:
    a = list(a)
    db, lb = _degree(b), b[-1]
    while len(a) - 1 >= db and any(c != 0 for c in a):
        da, la = len(a) - 1, a[-1]
        shift = da - db
        q = la / lb
        for i in range(db + 1):
            a[shift + i] -= q * b[i]
        while len(a) > 1 and a[-1] == 0:
            a.pop()
    return tuple(a)


def _gcd(a: Poly, b: Poly) -> Poly:
    while not (len(b) == 1 and b[0] == 0):
        a, b = b, _poly_mod(a, b)
    lead = a[-1]
    return tuple(c / lead for c in a)


def square_free(p: Poly) -> Poly:
    """p divided by gcd(p, p'): same roots, all simple."""
    if _degree(p) <= 1:
        return p
    g = _gcd(p, deriv(p))
    if _degree(g) == 0:
        return p
    # exact division p / g
    num = list(p)
    dg, lg = _degree(g), g[-1]
    out = [Fraction(0)] * (_degree(p) - dg + 1)
    for i in range(len(out) - 1, -1, -1):
        q = num[i + dg] / lg
        out[i] = q
        for j in range(dg + 1):
            num[i + j] -= q * g[j]
    return tuple(out)


def _shift_by_one(p: Poly) -> Poly:
    """Coefficients of p(t+1)."""
    n = _degree(p)
    out = [Fraction(0)] * (n + 1)
    for j, c in enumerate(p):
        if c == 0:
            continue
        for i in range(j + 1):
            out[i] += c * comb(j, i)
    return tuple(out)


def _sign_variations(p: Poly) -> int:
    signs = [1 if c > 0 else -1 for c in p if c != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _descartes_01(p: Poly) -> int:
    """Upper bound (exact when 0 or 1) on the number of roots in (0,1)."""
    rev = tuple(reversed(p))  # t^n p(1/t)
    return _sign_variations(_shift_by_one(rev))


def _scale_lower_half(p: Poly) -> Poly:
    """q(t) = p(t/2) up to a positive factor: roots in (0,1) <-> p in (0,1/2)."""
    return tuple(c / (Fraction(2) ** j) for j, c in enumerate(p))


def _roots_01(p: Poly, lo: Fraction, hi: Fraction, out: list) -> None:
    """Collect isolating brackets (in original coordinates [lo,hi]) of the
    square-free p mapped so its (0,1) corresponds to (lo,hi)."""
    v = _descartes_01(p)
    if v == 0:
        return
    if v == 1:
        out.append((lo, hi))
        return
    mid = (lo + hi) / 2
    half = eval_poly(p, Fraction(1, 2))
    if half == 0:
        out.append((mid, mid))
    lower = _scale_lower_half(p)
    upper = _shift_by_one(lower)  # p((t+1)/2)
    _roots_01(lower, lo, mid, out)
    _roots_01(upper, mid, hi, out)


def _refine(p: Poly, lo: Fraction, hi: Fraction, bits: int = 80):
    """Narrow an isolating bracket (one simple root strictly inside) by
    exact bisection.  Endpoints that happen to be roots of p belong to
    neighbouring brackets and are nudged off before bisecting."""
    if lo == hi:
        return lo, hi
    span = hi - lo
    base_lo, base_hi = lo, hi
    lo_is_root = eval_poly(p, lo) == 0
    hi_is_root = eval_poly(p, hi) == 0
    k = 0
    while True:
        eps = span / (Fraction(2) ** (40 + 10 * k))
        lo = base_lo + eps if lo_is_root else base_lo
        hi = base_hi - eps if hi_is_root else base_hi
        flo, fhi = eval_poly(p, lo), eval_poly(p, hi)
        # the interior root is simple and unique, so once the nudges are
        # small enough the endpoint signs must straddle it
        if flo != 0 and fhi != 0 and (flo > 0) != (fhi > 0):
            break
        k += 1
    target = span / (Fraction(2) ** bits)
    while hi - lo > target:
        mid = (lo + hi) / 2
        fm = eval_poly(p, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return lo, hi


def real_roots_in(coeffs, a, b) -> list[tuple[Fraction, Fraction]]:
    """Rational brackets for every real root of the polynomial in (a, b).

    Brackets are disjoint, sorted ascending, of width <= (b-a) * 2^-80.
    Endpoint roots are not reported (callers split at interval endpoints
    anyway).
    """
    a, b = Fraction(a), Fraction(b)
    p = square_free(to_poly(coeffs))
    if _degree(p) == 0:
        return []
    # map (a,b) -> (0,1):  q(t) = p(a + (b-a) t)
    span = b - a
    q = p
    # substitute u = a + span * t by Horner on the affine argument
    acc: list[Fraction] = [Fraction(0)]
    for c in reversed(p):
        # acc = acc * (a + span t) + c
        new = [Fraction(0)] * (len(acc) + 1)
        for j, cj in enumerate(acc):
            new[j] += cj * a
            new[j + 1] += cj * span
        new[0] += c
        while len(new) > 1 and new[-1] == 0:
            new.pop()
        acc = new
    q = tuple(acc)
    brackets: list[tuple[Fraction, Fraction]] = []
    _roots_01(q, Fraction(0), Fraction(1), brackets)
    out = []
    for lo01, hi01 in sorted(brackets):
        rlo, rhi = _refine(q, lo01, hi01)
        out.append((a + span * rlo, a + span * rhi))
    return out
