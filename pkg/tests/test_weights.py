from __future__ import annotations

import io
import math

import mpmath as mp
import pytest

from psibound.enclosure import TWO_PI, Enclosure
from psibound.errors import DataFormatError, PreconditionError, StructuralError
from psibound.weights import (
    AdmissibilityReport,
    Piece,
    PiecewiseWeight,
    canonical_weight,
    check_admissible,
    dump_weight,
    load_weight,
    solve_theta_prime,
    theta_prime,
    weight_constants,
)

# closed forms for the canonical parabola, from exact antiderivatives of
# |w|/u and |w'|/u over [1,2] split at the w' sign change u=3/2
TWO_PI_N_CLOSED = (
    (9 - 12 * math.log(2))
    + (18 * math.log(1.5) - 6)
    + (6 - 18 * math.log(4 / 3))
)


def test_canonical_weight_coefficients():
    w = canonical_weight()
    assert w.k == 1 and w.xi == 2.0
    assert len(w.pieces) == 1
    assert w.pieces[0].coeffs == (-12.0, 18.0, -6.0)
    assert w.pieces[0].lo == 1.0 and w.pieces[0].hi == 2.0


def test_canonical_weight_unit_mass_and_boundary():
    w = canonical_weight()
    rep = check_admissible(w)
    assert rep.passed
    mass_check = next(c for c in rep.checks if c.name == "unit-mass")
    assert mass_check.residual <= 1e-12
    assert w(1.0) == 0.0 and w(2.0) == 0.0
    assert w(1.5) == pytest.approx(1.5)  # peak value 6*(1/2)*(1/2)


def test_scaled_weight_fails_unit_mass_with_residual_one():
    w = canonical_weight().scaled(2.0)
    rep = check_admissible(w)
    assert not rep.passed
    mass_check = next(c for c in rep.checks if c.name == "unit-mass")
    assert not mass_check.passed
    assert mass_check.residual == pytest.approx(1.0, abs=1e-9)


def test_k3_variant_fails_boundary_vanishing():
    # same parabola declared k=3: condition 3 needs w'(1)=0, but w'(1)=6
    w = PiecewiseWeight(canonical_weight().pieces, k=3, xi=2.0)
    rep = check_admissible(w)
    assert not rep.passed
    bad = next(c for c in rep.checks if c.name == "boundary-vanishing")
    assert not bad.passed
    assert bad.residual == pytest.approx(6.0)


def test_constants_match_published_enclosures():
    wc = weight_constants(canonical_weight())
    assert 0.4460 <= wc.n_kxi.lo <= wc.n_kxi.hi <= 0.4461
    assert abs(wc.l_xi.mid - 3 / (2 * math.pi)) <= 1e-9
    assert 0.8029 <= wc.theta_prime.lo <= wc.theta_prime.hi <= 0.8030


def test_constants_closed_forms():
    wc = weight_constants(canonical_weight())
    two_pi_n = wc.n_kxi * TWO_PI
    assert abs(two_pi_n.mid - TWO_PI_N_CLOSED) <= 1e-9
    assert abs(two_pi_n.mid - (9 - 12 * math.log(2) + 18 * math.log(9 / 8))) <= 1e-9
    assert abs((wc.l_xi * math.pi).mid - 1.5) <= 1e-9
    assert two_pi_n.contains(9 - 12 * math.log(2) + 18 * math.log(9 / 8))


def test_theta_prime_substitution_residual():
    wc = weight_constants(canonical_weight())
    y = wc.theta_prime.mid
    f1 = 2 * wc.n_kxi.mid / y ** (wc.k + 1)
    f2 = 1 + y * wc.l_xi.mid
    assert abs(f1 - f2) <= 10 * 1e-12 + 1e-11  # residual scales with slope ~3.3


def test_theta_prime_decreases_when_n_halves():
    wc = weight_constants(canonical_weight())
    full = theta_prime(wc)
    halved = solve_theta_prime(wc.n_kxi * 0.5, wc.l_xi, wc.k)
    assert halved.hi < full.lo


def test_theta_prime_synthetic_cubic():
    # k=1, N=0.5, L=0.5: the crossing solves 1/y^2 = 1 + y/2
    enc = solve_theta_prime(Enclosure.point(0.5), Enclosure.point(0.5), 1)
    root = enc.mid
    assert abs(1 / root**2 - (1 + root / 2)) < 1e-9
    # independent high-precision cubic solve: y^3 + 2y^2 - 2 = 0
    mp.mp.dps = 40
    exact = [r for r in mp.polyroots([1, 2, 0, -2]) if mp.im(r) == 0 and r > 0][0]
    assert abs(root - float(exact)) < 1e-10


def test_enclosure_soundness_against_doubled_precision():
    """Recompute N, L, theta' with mpmath at 40 digits; the high-precision
    values must land inside the reported enclosures."""
    wc = weight_constants(canonical_weight())
    mp.mp.dps = 40

    def w(u):
        return 6 * (u - 1) * (2 - u)

    def wprime(u):
        return -12 * u + 18

    int_w = mp.quad(lambda u: abs(w(u)) / u, [1, 2])
    int_wp = mp.quad(lambda u: abs(wprime(u)) / u, [1, mp.mpf(3) / 2, 2])
    n_hp = (int_w + int_wp) / (2 * mp.pi)
    l_hp = mp.quad(lambda u: u * abs(w(u)), [1, 2]) / mp.pi
    assert wc.n_kxi.lo <= float(n_hp) <= wc.n_kxi.hi
    assert wc.l_xi.lo <= float(l_hp) <= wc.l_xi.hi
    th_hp = mp.findroot(lambda y: 2 * n_hp / y**2 - 1 - y * l_hp, mp.mpf("0.8"))
    assert wc.theta_prime.lo <= float(th_hp) <= wc.theta_prime.hi


def test_inadmissible_weight_rejected_by_constants():
    with pytest.raises(PreconditionError):
        weight_constants(canonical_weight().scaled(1.5))


def test_structural_validation():
    with pytest.raises(StructuralError):
        PiecewiseWeight((Piece(1.0, 1.8, (1.0,)),), k=1, xi=2.0)  # gap at top
    with pytest.raises(StructuralError):
        PiecewiseWeight(
            (Piece(1.0, 1.5, (1.0,)), Piece(1.6, 2.0, (1.0,))), k=1, xi=2.0
        )
    with pytest.raises(StructuralError):
        PiecewiseWeight(canonical_weight().pieces, k=0, xi=2.0)


def test_multi_piece_sign_split_integration():
    # w(u) = c*(u - 1.5) on [1,2] is signed; admissibility fails (mass 0)
    # but the split integration must still produce |integral| pieces that
    # match a high-precision quadrature.
    from psibound.weights import _antideriv_p_over_u, _integral_abs

    coeffs = (-1.5, 1.0)  # u - 1.5
    got = _integral_abs(coeffs, 1.0, 2.0, _antideriv_p_over_u)
    mp.mp.dps = 30
    ref = mp.quad(lambda u: abs(u - mp.mpf(1.5)) / u, [1, mp.mpf(3) / 2, 2])
    assert got.lo <= float(ref) <= got.hi


def test_weight_file_roundtrip(tmp_path):
    w = canonical_weight()
    text = dump_weight(w)
    again = load_weight(io.StringIO(text))
    assert again == w
    p = tmp_path / "weight.txt"
    p.write_text("k=1 xi=2.0\n1.0 2.0 -12 18 -6\n", encoding="utf-8")
    with p.open() as fh:
        loaded = load_weight(fh)
    assert loaded.pieces[0].coeffs == (-12.0, 18.0, -6.0)


def test_weight_file_errors():
    with pytest.raises(DataFormatError):
        load_weight(io.StringIO(""))
    with pytest.raises(DataFormatError):
        load_weight(io.StringIO("k=1\n1 2 1\n"))
    with pytest.raises(DataFormatError):
        load_weight(io.StringIO("k=1 xi=2.0\n1 2\n"))
    with pytest.raises(DataFormatError):
        load_weight(io.StringIO("k=1 xi=2.0\n1 2 x\n"))
