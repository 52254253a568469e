from __future__ import annotations

import io
import math

import numpy as np
import pytest

from psibound.errors import DataFormatError, PreconditionError
from psibound.perron import (
    DeltaInput,
    FiniteSeries,
    PerronErrorBound,
    QuadratureSettings,
    averaged_indicator,
    delta,
    general_error,
    interval_r_bound,
    load_series,
    quadrature_residual,
    r_bound,
    step,
)
from psibound.weights import canonical_weight, weight_constants


@pytest.fixture(scope="module")
def wc():
    return weight_constants(canonical_weight())


# ---------------------------------------------------------------------------
# delta
# ---------------------------------------------------------------------------


def test_delta_at_zero_is_arctan_branch(wc):
    # arctan(1) = pi/4, second summand vanishes at y=0
    assert delta(DeltaInput(0.0, 1.0, wc)) == pytest.approx(0.75, abs=1e-12)


def test_delta_negative_ten_first_branch(wc):
    val = delta(DeltaInput(-10.0, 1.0, wc))
    first = 2.0 * math.exp(-10.0) * wc.n_kxi.hi / 100.0
    second = abs(0.0 - math.exp(-10.0) / math.pi * math.atan(1.0)) + 10.0 * math.exp(
        -10.0
    ) * wc.l_xi.hi
    assert val == pytest.approx(first, rel=1e-12)
    assert first < second  # the mass branch is the minimum here


def test_delta_small_y_second_branch(wc):
    val = delta(DeltaInput(0.01, 1.0, wc))
    second = abs(1.0 - math.exp(0.01) / math.pi * math.atan(1.0)) + 0.01 * math.exp(
        0.01
    ) * wc.l_xi.hi
    assert val == pytest.approx(second, rel=1e-12)
    first = 2.0 * math.exp(0.01) * wc.n_kxi.hi / 0.01**2
    assert second < first  # |y|^-2 blows up


def test_delta_is_min_of_branches_everywhere(wc):
    for y in (-20.0, -3.0, -0.7, -0.05, 0.05, 0.7, 3.0, 20.0):
        for kp in (0.05, 0.2, 1.0):
            val = delta(DeltaInput(y, kp, wc))
            e_fac = math.exp(y * kp)
            first = 2.0 * e_fac * wc.n_kxi.hi / abs(y) ** 2
            second = (
                abs(step(y) - e_fac / math.pi * math.atan(1.0 / kp))
                + abs(y) * e_fac * wc.l_xi.hi
            )
            assert val == pytest.approx(min(first, second), rel=1e-12)


def test_delta_rejects_bad_kappa_prime(wc):
    with pytest.raises(PreconditionError):
        DeltaInput(1.0, 0.0, wc)


# ---------------------------------------------------------------------------
# quadrature residual (diagnostic)
# ---------------------------------------------------------------------------


def test_quadrature_residual_examples(wc):
    for y, kp in ((1.0, 0.2), (-5.0, 1.0)):
        chk = quadrature_residual(DeltaInput(y, kp, wc))
        assert chk.residual <= chk.delta + 10 * chk.quad_error + 1e-13
        assert chk.ok


def test_quadrature_residual_at_zero_matches_branch(wc):
    # at y=0 the integrand loses its e^{sy} factor; the residual equals the
    # arctan branch up to quadrature error
    chk = quadrature_residual(DeltaInput(0.0, 1.0, wc))
    assert chk.residual <= chk.delta + 1e-9
    # direct evaluation: v(0) - (1/pi) * avg of 2*arctan(tau/kp) ... the
    # inner integral at y=0 is computable exactly per tau
    import scipy.integrate as si

    w = canonical_weight()
    exact, _ = si.quad(
        lambda tau: w(tau) * (1.0 / math.pi) * 2.0 * math.atan(tau / 1.0) / 2.0,
        1.0,
        2.0,
    )
    assert chk.approx == pytest.approx(exact, abs=1e-9)


def test_quadrature_residual_grid_property(wc):
    for mag in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
        for kp in (0.05, 0.2, 1.0):
            for y in (mag, -mag):
                chk = quadrature_residual(DeltaInput(y, kp, wc))
                assert chk.ok, (y, kp, chk)


def test_weight_constants_mismatch_rejected(wc):
    from psibound.weights import PiecewiseWeight

    w3 = PiecewiseWeight(canonical_weight().pieces, k=1, xi=2.0)
    bad = canonical_weight()
    object.__setattr__(bad, "xi", 3.0)  # deliberately inconsistent weight
    with pytest.raises(PreconditionError):
        quadrature_residual(DeltaInput(1.0, 1.0, wc), weight=bad)


# ---------------------------------------------------------------------------
# general_error
# ---------------------------------------------------------------------------


def test_general_error_zero_series(wc):
    s = FiniteSeries((), kappa=1.5, kappa_a=1.0)
    assert general_error(s, 10.0, 10.0, wc, 0.5) == 0.0


def test_general_error_single_term_closed_form(wc):
    # one term at n=2 with x=2: the jump sits at u=0, below theta'/T, so the
    # error is the full integral (k+1) int_{theta'/T}^inf u^-3 du in closed
    # form = (T/theta')^2, making the bound lambda-independent
    s = FiniteSeries(((2, 1.0),), kappa=1.5, kappa_a=1.0)
    x, T = 2.0, 10.0
    val = general_error(s, x, T, wc, 0.5)
    a = wc.theta_prime.lo / T
    closed = (2.0 * wc.n_kxi.hi / T**2) * x**1.5 * 2.0 ** (-1.5) * a**-2
    assert val == pytest.approx(closed, rel=1e-12)
    assert general_error(s, x, T, wc, 0.9) == pytest.approx(closed, rel=1e-12)


def test_general_error_T_scaling(wc):
    # when no jump mass moves between the limits, doubling T shrinks the
    # error at least fourfold (T^-(k+1) prefactor, k=1)
    s = FiniteSeries(((3, 0.5), (7, -0.25)), kappa=1.4, kappa_a=1.0)
    x = 5.0
    lam = 0.9
    e1 = general_error(s, x, 50.0, wc, lam)
    e2 = general_error(s, x, 100.0, wc, lam)
    assert e2 <= e1 / 4.0 + 1e-15


def test_general_error_scales_linearly_in_coefficients(wc):
    s1 = FiniteSeries(((2, 1.0), (5, -2.0)), kappa=1.5, kappa_a=1.0)
    s3 = FiniteSeries(((2, 3.0), (5, -6.0)), kappa=1.5, kappa_a=1.0)
    a = general_error(s1, 4.0, 20.0, wc, 0.5)
    b = general_error(s3, 4.0, 20.0, wc, 0.5)
    assert b == pytest.approx(3.0 * a, rel=1e-12)


def test_general_error_lambda_precondition(wc):
    s = FiniteSeries(((2, 1.0),), kappa=1.5, kappa_a=1.0)
    with pytest.raises(PreconditionError):
        general_error(s, 2.0, 10.0, wc, 0.001)


def test_small_instance_oracle(wc):
    """The averaged double integral reproduces partial sums within the
    certified error, for random finite series (independent quadrature)."""
    w = canonical_weight()
    passes = 0
    for seed in range(8):
        rng = np.random.default_rng(seed)
        nterms = int(rng.integers(1, 25))
        ns = sorted(rng.choice(np.arange(1, 50), size=nterms, replace=False).tolist())
        terms = tuple((int(n), float(rng.normal())) for n in ns)
        kappa = float(rng.uniform(1.1, 2.0))
        s = FiniteSeries(terms, kappa=kappa, kappa_a=kappa / 2)
        x = float(rng.uniform(2.0, 40.0))
        if any(abs(math.log(x / n)) < 1e-3 for n, _ in terms):
            x *= 1.01
        T = float(rng.uniform(3.0, 12.0))
        integral, quad_err = 0.0, 0.0
        for n, a in terms:
            val, err = averaged_indicator(T * math.log(x / n), kappa / T, w)
            integral += a * val
            quad_err += abs(a) * err
        residual = abs(s.partial_sum(x) - integral)
        assert residual <= general_error(s, x, T, wc, 0.7) + 10 * quad_err
        passes += 1
    assert passes == 8


# ---------------------------------------------------------------------------
# r_bound
# ---------------------------------------------------------------------------


def test_r_bound_zero_series(wc):
    out = r_bound(100.0, 10.0, 1.2, 0.5, wc, 0.0, lambda u: 0.0)
    assert out == PerronErrorBound(0.0, 0.0, 0.0)


def test_r_bound_coefficient_margin(wc):
    # 4 * 0.4461 = 1.7844 <= 1.785
    assert 4.0 * wc.n_kxi.hi <= 1.785


def test_r_bound_monotone_in_mass(wc):
    small = r_bound(1e4, 100.0, 1.1, 0.5, wc, 5.0, lambda u: 10.0 * u)
    large = r_bound(1e4, 100.0, 1.1, 0.5, wc, 5.0, lambda u: 20.0 * u)
    assert large.value > small.value
    assert large.term_main == small.term_main


def test_r_bound_riemann_sum_is_upper(wc):
    # against the exact integral of a known nondecreasing mass m(u)=c*u:
    # int m(u)/u^3 du = c*(1/a - 1/lam)
    c = 7.0
    x, T, kappa, lam = 1e4, 100.0, 1.1, 0.5
    out = r_bound(x, T, kappa, lam, wc, 0.0, lambda u: c * u, grid_points=2048)
    a = wc.theta_prime.lo / T
    exact_tail = 1.785 * math.exp(kappa * lam) / T**2 * c * (1.0 / a - 1.0 / lam)
    assert out.term_tail >= exact_tail
    assert out.term_tail <= exact_tail * 1.01  # geometric grid is tight


def test_r_bound_negative_mass_rejected(wc):
    with pytest.raises(PreconditionError):
        r_bound(1e4, 100.0, 1.1, 0.5, wc, 1.0, lambda u: -1.0)


def test_r_bound_lambda_precondition(wc):
    with pytest.raises(PreconditionError):
        r_bound(1e4, 100.0, 1.1, 1e-6, wc, 1.0, lambda u: 0.0)


def test_interval_r_bound_h_zero_doubles(wc):
    mass_at = lambda center: (lambda u: 3.0 * u)
    single = r_bound(1e4, 100.0, 1.1, 0.5, wc, 2.0, mass_at(1e4))
    both = interval_r_bound(1e4, 0.0, 100.0, 1.1, 0.5, wc, 2.0, mass_at)
    assert both.value == pytest.approx(2.0 * single.value, rel=1e-12)


def test_interval_r_bound_dominates_components(wc):
    mass_at = lambda center: (lambda u: center * u)
    x, h = 1e4, 100.0
    combined = interval_r_bound(x, h, 100.0, 1.1, 0.5, wc, 2.0, mass_at)
    at_x = r_bound(x, 100.0, 1.1, 0.5, wc, 2.0, mass_at(x))
    at_xh = r_bound(x + h, 100.0, 1.1, 0.5, wc, 2.0, mass_at(x + h))
    assert combined.value >= at_x.value
    assert combined.value >= at_xh.value
    assert combined.value == pytest.approx(at_x.value + at_xh.value, rel=1e-12)
    with pytest.raises(PreconditionError):
        interval_r_bound(x, -1.0, 100.0, 1.1, 0.5, wc, 2.0, mass_at)


def test_r_bound_dominates_truncated_formula_residual(wc, table_1e6):
    """Desk-scale cross-check: the certified bound with the exact sieve mass
    dominates the best explicit-formula residual over T* in [T, 2T]."""
    from psibound.empirical import load_zeros_path, residual_scan
    from psibound import datafiles

    x, T, lam = 1e4, 100.0, 0.5
    kappa = 1.0 + 1.0 / math.log(x)
    t = table_1e6

    def mass(u):
        return t.lambda_mass(x * math.exp(-u), x * math.exp(u))

    series_tail = 1.0 / (kappa - 1.0)  # log x, the Dirichlet tail bound
    bound = r_bound(x, T, kappa, lam, wc, series_tail, mass)
    ds = load_zeros_path(datafiles.zeros_path())
    best_t, best_resid, _ = residual_scan(x, T, ds, t, steps=128)
    assert best_resid <= bound.value


# ---------------------------------------------------------------------------
# series file format
# ---------------------------------------------------------------------------


def test_load_series_roundtrip():
    s = load_series(io.StringIO("2 1.5\n5 -0.25\n"), kappa=1.5, kappa_a=1.0)
    assert s.terms == ((2, 1.5), (5, -0.25))
    with pytest.raises(DataFormatError):
        load_series(io.StringIO("2 1.5 3\n"), kappa=1.5, kappa_a=1.0)
    with pytest.raises(DataFormatError):
        load_series(io.StringIO("x 1\n"), kappa=1.5, kappa_a=1.0)
    with pytest.raises(PreconditionError):
        load_series(io.StringIO("5 1\n2 1\n"), kappa=1.5, kappa_a=1.0)
