from __future__ import annotations

import math

import numpy as np
import pytest

from psibound.arith import (
    PsiThetaConstants,
    bt_interval_bound,
    c0,
    delange_bound,
    load_table,
    mass_upper,
    psi_theta_gap,
    save_table,
    sieve,
)
from psibound.errors import DataFormatError, PreconditionError
from psibound.kernels import weighted_lambda_sum


def brute_prime_powers(n: int):
    """Direct enumeration oracle: (p^j, log p) for all prime powers <= n."""
    out = []
    for p in range(2, n + 1):
        if all(p % q for q in range(2, math.isqrt(p) + 1)):
            q = p
            while q <= n:
                out.append((q, math.log(p)))
                q *= p
    return out


def test_psi_theta_small_values(table_1e6):
    t = table_1e6
    assert t.psi(10) == pytest.approx(
        3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7), abs=1e-12
    )
    assert t.theta(10) == pytest.approx(math.log(210), abs=1e-12)
    assert t.psi(1) == 0.0
    assert t.theta(1.9) == 0.0


def test_psi_matches_brute_force(table_1e6):
    t = table_1e6
    for x in (2, 3, 4, 97, 1024, 65537, 100000):
        oracle = sum(l for _, l in brute_prime_powers(x))
        assert t.psi(x) == pytest.approx(oracle, rel=1e-12, abs=1e-9)


def test_psi_equals_sum_of_theta_roots(table_1e6):
    t = table_1e6
    rng = np.random.default_rng(7)
    for x in rng.integers(10, 10**6, size=1000):
        x = int(x)
        acc, k = 0.0, 1
        while x ** (1.0 / k) >= 2.0:
            acc += t.theta(x ** (1.0 / k))
            k += 1
        assert abs(t.psi(x) - acc) < 1e-6


def test_psi_monotone_and_checkpoint_boundaries(table_1e6):
    t = table_1e6
    stride = t.stride
    for x in (stride - 1, stride, stride + 1, 2 * stride, 2 * stride + 1):
        assert t.psi(x + 1) >= t.psi(x) - 1e-12
        assert t.theta(x) <= t.psi(x) + 1e-12


def test_sieve_limit_guards():
    with pytest.raises(PreconditionError):
        sieve(0)
    with pytest.raises(PreconditionError):
        sieve(10**7, memory_ceiling=10**6)
    t = sieve(10**4)
    with pytest.raises(PreconditionError):
        t.psi(10**5)


def test_sieve_cache_roundtrip(tmp_path):
    t = sieve(10**5)
    p = tmp_path / "sieve.bin"
    save_table(t, str(p))
    back = load_table(str(p))
    assert back.limit == t.limit
    assert back.psi(99991) == t.psi(99991)
    assert np.array_equal(back.power_values, t.power_values)
    # corrupt one payload byte: checksum must catch it
    raw = bytearray(p.read_bytes())
    raw[60] ^= 0xFF
    p.write_bytes(bytes(raw))
    with pytest.raises(DataFormatError):
        load_table(str(p))


def test_c0_values_and_continuity():
    assert c0(1.0) == pytest.approx(math.e, abs=1e-12)
    assert c0(1e-12) == pytest.approx(2.0, abs=1e-9)
    # continuity at the series/closed-form switch
    eps = 1e-6
    assert abs(c0(eps * (1 - 1e-9)) - c0(eps * (1 + 1e-9))) <= 1e-12
    assert c0(0.43) == pytest.approx((math.exp(0.43) - 1) / 0.43 + 1, abs=1e-12)
    with pytest.raises(PreconditionError):
        c0(0.0)


def test_bt_interval_bound_limit_and_monotonicity():
    theta_p = 0.8029
    x, T = 1e6, 1e3
    lam_tiny = 1e-9
    e1, _ = bt_interval_bound(x, T, lam_tiny, theta_p)
    # as lambda -> 0, c0 -> 2 and E1 -> 2 log x / log(2 theta' x / T)
    assert e1 == pytest.approx(
        2 * math.log(x) / math.log(2 * theta_p * x / T), rel=1e-6
    )
    e1_a = bt_interval_bound(x, 100.0, 0.07, theta_p)[0]
    e1_b = bt_interval_bound(x, 1000.0, 0.07, theta_p)[0]
    assert e1_b > e1_a  # increasing in T
    with pytest.raises(PreconditionError):
        bt_interval_bound(10.0, 1e9, 0.07, theta_p)


def test_mass_upper_shape():
    e1, e2 = 2.5, 1234.5
    assert mass_upper(1e6, 0.0, e1, e2, 0.07) == e2
    m1 = mass_upper(1e6, 0.01, e1, e2, 0.07)
    m2 = mass_upper(1e6, 0.02, e1, e2, 0.07)
    m3 = mass_upper(1e6, 0.03, e1, e2, 0.07)
    assert m3 - m2 == pytest.approx(m2 - m1, rel=1e-9)  # affine in u
    with pytest.raises(PreconditionError):
        mass_upper(1e6, 0.08, e1, e2, 0.07)


def test_mass_upper_dominates_exact_sieve_mass(table_12e6):
    """Certified interval bound >= exact Lambda mass on random (x, u)."""
    t = table_12e6
    lam = 0.07
    cc = c0(lam)
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(100):
        x = float(rng.uniform(1e4, 1e7))
        u = float(rng.uniform(0.0, lam))
        T = x ** 0.3  # keeps c0*theta'*x/T comfortably > 1
        e1, e2 = bt_interval_bound(x, T, lam, 0.8029)
        exact = t.lambda_mass(x - u * x, x + (cc - 1.0) * u * x)
        assert exact <= mass_upper(x, u, e1, e2, lam) + 1e-9
        checked += 1
    assert checked == 100


def test_psi_theta_gap_values(table_1e6):
    c = PsiThetaConstants()
    x = math.exp(40.0)
    assert psi_theta_gap(x, c) == pytest.approx(
        c.a1 * math.exp(20.0) + c.a2 * math.exp(40.0 / 3.0), rel=1e-12
    )
    # dominant term: ratio to sqrt(x) tends to a1
    assert psi_theta_gap(1e40, c) / math.sqrt(1e40) == pytest.approx(
        c.a1, rel=1e-6
    )
    with pytest.raises(PreconditionError):
        psi_theta_gap(1e10, c)
    # diagnostic-only small-x comparison (outside the certified range)
    t = table_1e6
    gap = t.psi(10**6) - t.theta(10**6)
    assert gap < c.a1 * 1e3 + c.a2 * 1e2


def test_delange_bound_values_and_domination(table_12e6):
    assert delange_bound(1 + 1 / 40) == pytest.approx(40.0, rel=1e-12)
    with pytest.raises(PreconditionError):
        delange_bound(1.0)
    values, logs = table_12e6.lambda_support()
    for kappa in (1.05, 1.1, 1.5, 2.0):
        partial = weighted_lambda_sum(values, logs, kappa)
        assert partial < delange_bound(kappa)
    # kappa=2: the full series sums to -zeta'/zeta(2) ~ 0.5699; partial sums
    # must sit below it and below the 1/(kappa-1)=1 bound
    partial2 = weighted_lambda_sum(values, logs, 2.0)
    assert 0.56 < partial2 < 0.5700


def test_delange_cross_check_partial_sum(table_12e6):
    # direct partial summation over the sieve for kappa = 1.1
    values, logs = table_12e6.lambda_support()
    mask = values <= 10**7
    partial = weighted_lambda_sum(values[mask], logs[mask], 1.1)
    assert partial < 1 / 0.1
