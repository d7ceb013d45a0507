import math
from fractions import Fraction
from math import gcd

import pytest
from scipy.special import zeta as riemann_zeta

from heightzeta.catalog import get_model
from heightzeta.census import (
    count_sintegers,
    count_table,
    enumerate_points,
    equidistribution_test,
    fit_asymptotic,
    fit_residual_rms,
    poisson_crosscheck,
    volume_V,
)
from heightzeta.errors import BudgetExceededError, ConfigError
from heightzeta.localfield import Place

F = Fraction
R = [Place.real()]
S5 = [Place.real(), Place.finite(5)]


def test_count_E1():
    m = get_model("E1")
    assert enumerate_points(m, R, 10) == 21
    assert enumerate_points(m, R, F(21, 2)) == 21
    assert enumerate_points(m, R, 10**6) == 2 * 10**6 + 1


def test_count_E3():
    m = get_model("E3")
    assert enumerate_points(m, R, 100) == 441
    B = 10**6
    T = math.isqrt(B)
    assert enumerate_points(m, R, B) == (2 * T + 1) ** 2


def test_count_E2_brute():
    m = get_model("E2")
    B = 10**4
    T = math.isqrt(B)
    brute = 0
    for n in range(1, T + 1):
        for num in range(-T, T + 1):
            if gcd(num, n) == 1:
                brute += 1
    got = enumerate_points(m, R, B)
    assert got == brute
    assert abs(got / B - 12 / math.pi**2) < 0.01


def test_count_E5_brute():
    m = get_model("E5")
    B = 200
    brute = sum(
        1
        for x in range(-B, B + 1)
        for y in range(-B, B + 1)
        if max(1, abs(x)) * max(1, abs(y)) <= B
    )
    assert enumerate_points(m, R, B) == brute


def test_count_E4_brute():
    m = get_model("E4")
    B = 400
    T = math.isqrt(B)
    brute = 0
    for c in range(1, T + 1):
        for num in range(-T, T + 1):
            if gcd(num, c) != 1:
                continue
            h = max(abs(num), c)
            if h * h <= B:
                brute += 2 * (B // (h * h)) + 1
    assert enumerate_points(m, R, B) == brute


def test_count_E6_brute():
    m = get_model("E6")
    for B in (8, 64, 1000):
        T = round(B ** (1 / 3))
        brute = 0
        for c in range(1, T + 1):
            for a in range(-T, T + 1):
                for b in range(-T, T + 1):
                    if gcd(gcd(abs(a), abs(b)), c) == 1:
                        brute += 1
        assert enumerate_points(m, R, B) == brute


def test_count_E1_with_finite_place():
    m = get_model("E1")
    B = 100
    brute = 0
    k = 0
    while 5**k <= B:
        for num in range(-B, B + 1):
            if k > 0 and num % 5 == 0:
                continue
            if max(5**k, abs(num)) <= B:
                brute += 1
        k += 1
    assert enumerate_points(m, S5, B) == brute == 521


def test_count_E3_with_finite_place():
    m = get_model("E3")
    S2 = [Place.real(), Place.finite(2)]
    B = 64
    brute = 0
    # x, y in Z[1/2] with denominators up to 8; H = (prod_v max(1,|x|,|y|)_v)^2
    for d1 in (1, 2, 4, 8):
        for n1 in range(-8 * 8, 8 * 8 + 1):
            if d1 > 1 and n1 % 2 == 0:
                continue
            for d2 in (1, 2, 4, 8):
                for n2 in range(-8 * 8, 8 * 8 + 1):
                    if d2 > 1 and n2 % 2 == 0:
                        continue
                    fin = max(d1, d2)
                    arch = max(1.0, abs(n1) / d1, abs(n2) / d2)
                    if (fin * arch) ** 2 <= B + 1e-9:
                        brute += 1
    assert enumerate_points(m, S2, B) == brute


def test_count_monotone_and_table():
    m = get_model("E5")
    tb = count_table(m, R, [10, 100, 1000], with_volume=True)
    ns = tb.Ns()
    assert ns == sorted(ns)
    assert all(r["V"] > 0 for r in tb.rows)


def test_budget_exceeded():
    with pytest.raises(BudgetExceededError):
        enumerate_points(get_model("E5"), R, 10**12)


def test_threads_bit_identical():
    m = get_model("E5")
    vals = {enumerate_points(m, R, 10**5, threads=t) for t in (1, 4, 8)}
    assert len(vals) == 1
    m3 = get_model("E3")
    vals3 = {enumerate_points(m3, S5, 10**4, threads=t) for t in (1, 4)}
    assert len(vals3) == 1


# ---------------------------------------------------------------------------
# volumes


def test_volume_closed_forms():
    assert volume_V(get_model("E1"), R, 1000) == pytest.approx(2000.0)
    assert volume_V(get_model("E3"), R, 1000) == pytest.approx(4000.0)
    B = 10**4
    assert volume_V(get_model("E5"), R, B) == pytest.approx(4 * B + 4 * B * math.log(B))
    assert volume_V(get_model("E5"), R, 1) == pytest.approx(4.0)
    assert volume_V(get_model("E2"), R, B) == pytest.approx(12 * B / math.pi**2, rel=2e-3)
    # E4 volume has the predicted leading term 24/pi^2 B log B
    B = 10**8
    lead = volume_V(get_model("E4"), R, B) / (B * math.log(B))
    assert abs(lead - 24 / math.pi**2) < 0.2


def test_volume_E1_finite_place():
    B = 10**4
    K = int(math.log(B) / math.log(5))
    assert volume_V(get_model("E1"), S5, B) == pytest.approx(2 * B * (1 + 0.8 * K))


def test_N_over_V():
    for mid in ("E1", "E3"):
        m = get_model(mid)
        tb = count_table(m, R, [10**k for k in range(2, 6)])
        devs = [abs(r["N"] / r["V"] - 1) for r in tb.rows]
        assert devs[-1] <= 0.05
        assert devs[-1] <= devs[0]


# ---------------------------------------------------------------------------
# fits


def test_fit_E1():
    tb = count_table(get_model("E1"), R, [10 ** (k / 2) for k in range(4, 13)])
    fit = fit_asymptotic(tb, 1)
    assert abs(fit.theta_hat - 2.0) < 0.02
    assert fit.theta_hat > 0


def test_fit_E5():
    tb = count_table(get_model("E5"), R, [10 ** (k / 2) for k in range(4, 13)])
    fit = fit_asymptotic(tb, 2)
    assert abs(fit.theta_hat - 4.0) < 0.4
    assert fit.secondary is not None


def test_fit_needs_rows():
    tb = count_table(get_model("E1"), R, [10, 100, 1000])
    with pytest.raises(ConfigError):
        fit_asymptotic(tb, 1)


def test_fit_model_comparison_E1_S5():
    tb = count_table(get_model("E1"), S5, [10 ** (k / 2) for k in range(4, 13)])
    assert fit_residual_rms(tb, 1) >= 5.0 * fit_residual_rms(tb, 2)


# ---------------------------------------------------------------------------
# Poisson and equidistribution


def test_poisson_trivial_character_only():
    chk = poisson_crosscheck(get_model("E1"), 3.0, 0, height_cutoff=200_000)
    assert chk.rhs == pytest.approx(3.0, abs=1e-9)
    assert chk.lhs == pytest.approx(1 + 2 * float(riemann_zeta(3.0)), abs=1e-8)
    assert chk.gap == pytest.approx(2 * float(riemann_zeta(3.0)) - 2, abs=1e-8)


def test_poisson_E1():
    chk = poisson_crosscheck(get_model("E1"), 3.0, 60)
    assert chk.gap < 2e-3 * chk.lhs


def test_poisson_E2():
    chk = poisson_crosscheck(get_model("E2"), 1.5, 40)
    assert chk.gap < 1e-2 * chk.lhs


def test_equidistribution_small():
    rows = equidistribution_test(get_model("E3"), R, 10**4)
    for r in rows:
        assert abs(r["empirical"] - r["predicted"]) < 0.02
    rows5 = equidistribution_test(get_model("E5"), R, 10**4)
    assert abs(rows5[0]["empirical"] - 0.5) < 0.02
    rows1 = equidistribution_test(get_model("E1"), R, 10**4)
    assert abs(rows1[0]["empirical"] - 0.5) < 0.001


def test_count_sintegers_helper():
    assert count_sintegers(F(10), []) == 21
    # with p = 5: x = m/5^k, height max(5^k, |m|)
    assert count_sintegers(F(10), [5]) == 21 + 2 * (10 - 2)  # k=1: |m|<=10, 5 coprime
