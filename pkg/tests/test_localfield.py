import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heightzeta.errors import NonconvergentError, PoleError
from heightzeta.localfield import (
    Ball,
    BumpFunction,
    Coset,
    PhaseSum,
    Place,
    RadialBump,
    StepFunction,
    abs_value,
    fourier_test_fn,
    haar_volume,
    padic,
    psi,
    residue_c,
    tate_integral,
    zeta_local,
)

F = Fraction
R = Place.real()
C = Place.complex_()


def test_place_validation():
    with pytest.raises(ValueError):
        Place.finite(6)
    with pytest.raises(ValueError):
        Place("finite", None)
    assert Place.finite(7).q == 7


def test_abs_value_examples():
    assert abs_value(F(1, 2), Place.finite(2)) == F(2)
    assert abs_value(1 + 1j, C) == pytest.approx(2.0)
    assert abs_value(-3, R) == 3
    assert abs_value(0, Place.finite(5)) == 0


def test_abs_value_multiplicative():
    rng = random.Random(7)
    P = Place.finite(3)
    for _ in range(50):
        x = F(rng.randint(-50, 50) or 1, rng.randint(1, 50))
        y = F(rng.randint(-50, 50) or 1, rng.randint(1, 50))
        assert abs_value(x * y, P) == abs_value(x, P) * abs_value(y, P)


def test_psi_examples():
    assert psi(Place.finite(2), F(1, 2)) == pytest.approx(-1.0)
    for x in [0, 3, F(7, 3)]:  # integral at p = 2
        assert psi(Place.finite(2), x) == pytest.approx(1.0)
    assert psi(R, F(1, 4)) == pytest.approx(-1j)
    assert psi(C, 0.25 + 17j) == pytest.approx(-1.0)  # depends on Re only


@settings(max_examples=80, deadline=None)
@given(
    p=st.sampled_from([2, 3, 5]),
    nx=st.integers(-200, 200),
    kx=st.integers(0, 4),
    ny=st.integers(-200, 200),
    ky=st.integers(0, 4),
)
def test_psi_character_property(p, nx, kx, ny, ky):
    place = Place.finite(p)
    x = F(nx, p**kx)
    y = F(ny, p**ky)
    assert abs(psi(place, x + y) - psi(place, x) * psi(place, y)) < 1e-12
    assert abs(abs(psi(place, x)) - 1.0) < 1e-12


def test_frac_part():
    ctx = padic(2)
    assert ctx.frac_part(F(1, 6)) == F(1, 2)
    assert ctx.frac_part(F(-1, 4)) == F(3, 4)
    assert ctx.frac_part(F(5)) == 0
    assert padic(3).frac_part(F(1, 6)) == F(2, 3)


def test_haar_volume():
    assert haar_volume(R, Ball(1)) == 2
    assert haar_volume(C, Ball(1)) == pytest.approx(2 * math.pi)
    assert haar_volume(Place.finite(3), Coset(F(2), 2)) == F(1, 9)
    assert haar_volume(Place.finite(3), Ball(F(9))) == F(9)
    with pytest.raises(ValueError):
        haar_volume(Place.finite(3), Ball(F(2)))


def test_zeta_local_closed_forms():
    assert zeta_local(R, 2) == 1.0
    assert zeta_local(Place.finite(2), 1) == 2.0
    assert zeta_local(C, 2 * math.pi) == pytest.approx(1.0)
    assert zeta_local(Place.finite(3), 2) == float(F(9, 8))
    with pytest.raises(PoleError):
        zeta_local(R, 0)
    with pytest.raises(PoleError):
        zeta_local(Place.finite(5), 0)


def test_residue_c():
    assert residue_c(R) == 2.0
    assert residue_c(C) == pytest.approx(2 * math.pi)
    assert residue_c(Place.finite(5)) == pytest.approx(1 / math.log(5))


def test_product_formula_exact():
    # prod_v |x|_v = 1 over the real place and the primes of x, exactly
    rng = random.Random(0)
    for _ in range(1000):
        num = rng.randint(-10**6, 10**6)
        den = rng.randint(1, 10**6)
        if num == 0:
            num = 1
        x = F(num, den)
        prod = abs(x)
        seen = set()
        for part in (abs(x.numerator), x.denominator):
            n = part
            f = 2
            while f * f <= n:
                if n % f == 0:
                    seen.add(f)
                    while n % f == 0:
                        n //= f
                f += 1
            if n > 1:
                seen.add(n)
        for p in seen:
            prod *= abs_value(x, Place.finite(p))
        assert prod == 1


def test_phasesum_merging():
    ps = PhaseSum()
    ps.add(F(1, 3), F(1, 4))
    ps.add(F(1, 3), F(1, 4))
    ps2 = PhaseSum()
    ps2.add(F(1, 3), F(1, 2))
    assert ps.value() == ps2.value()


# ---------------------------------------------------------------------------
# step functions


def test_step_value_and_refine():
    phi = StepFunction.indicator_coset(2, 1, 2)  # 1 + 4 Z_2
    assert phi.value_at(F(1)) == 1
    assert phi.value_at(F(5)) == 1
    assert phi.value_at(F(3)) == 0
    assert phi.value_at(F(1, 2)) == 0
    fine = phi.refine(2)
    for x in [F(1), F(5), F(3), F(1, 2), F(9)]:
        assert fine.value_at(x) == phi.value_at(x)


def test_step_json_roundtrip():
    phi = StepFunction(3, 2, 1, {1: 1.0, 5: 2.0 - 1j, 14: 0.5j})
    back = StepFunction.from_json(phi.to_json())
    assert back.p == phi.p and back.level == phi.level
    assert back.support_exp == phi.support_exp and back.table == phi.table


def test_bump_bounds_spot_check():
    bump = BumpFunction.standard(0.3, 1.5, 2.0)
    xs = np.linspace(-1.3, 1.9, 1777)
    assert max(abs(bump(float(x))) for x in xs) <= bump.sup_f + 1e-12
    assert max(abs(bump.derivative(float(x))) for x in xs) <= bump.sup_df


# ---------------------------------------------------------------------------
# Tate integrals


def test_tate_indicator_zp():
    phi = StepFunction.indicator_zp(3)
    for s in [1.0, 2.5, 0.7 + 1.3j]:
        got = tate_integral(Place.finite(3), phi, s)
        want = 1.0 / (1.0 - 3.0 ** (-complex(s).real) * cmath.exp(-1j * complex(s).imag * math.log(3)))
        assert abs(got - want) < 1e-12


def test_tate_units_constant_in_s():
    phi = StepFunction.indicator_units(5)
    vals = [tate_integral(Place.finite(5), phi, s) for s in [0.3, 1.0, 2.0 + 3j]]
    for v in vals:
        assert abs(v - 1.0) < 1e-12


def test_tate_refinement_invariance():
    phi = StepFunction(2, 1, 0, {0: 1.0, 1: 0.5 + 0.25j})
    for s in [0.8, 1.5 + 0.5j]:
        assert abs(tate_integral(Place.finite(2), phi, s) - tate_integral(Place.finite(2), phi.refine(2), s)) < 1e-12


def test_tate_rejects_nonpositive():
    with pytest.raises(NonconvergentError):
        tate_integral(R, BumpFunction.standard(), -0.5)


def _residue_limit(place, phi):
    eps = [0.1, 0.05, 0.02, 0.01]
    vals = [(complex(tate_integral(place, phi, e)) / zeta_local(place, e)).real for e in eps]
    return float(np.polyfit(eps, vals, 2)[-1])


def test_residue_law_five_functions():
    cases = [
        (Place.finite(3), StepFunction.indicator_zp(3), 1.0),
        (Place.finite(2), StepFunction(2, 2, 0, {0: 2.0, 1: 1.0, 2: 2.0, 3: 0.5}), 2.0),
        (Place.finite(5), StepFunction(5, 1, 1, {0: 1.5, 3: 1.0, 7: 2.0}), 1.5),
        (R, BumpFunction.standard(), 1.0),
        (R, BumpFunction.standard(0.3, 1.0, 0.7), BumpFunction.standard(0.3, 1.0, 0.7)(0.0)),
    ]
    for place, phi, expect in cases:
        got = _residue_limit(place, phi)
        assert abs(got - expect) < 1e-4, (place, got, expect)


def test_tate_complex_radial():
    from scipy.integrate import quad

    rb = RadialBump(BumpFunction.standard())
    got = tate_integral(C, rb, 2.0)
    ref = 4 * math.pi * quad(lambda r: r**3 * rb.profile(r), 0, 1)[0]
    assert abs(got - ref) < 1e-8


# ---------------------------------------------------------------------------
# Fourier transforms


def test_fourier_selfdual_zp():
    ft = fourier_test_fn(Place.finite(5), StepFunction.indicator_zp(5))
    assert ft.level == 0 and ft.support_exp == 0
    assert abs(ft.value_at(F(0)) - 1.0) < 1e-15


def test_fourier_coset_brute():
    # transform of 1_{1+2Z_2} against the direct character sum mod 4
    place = Place.finite(2)
    ctx = padic(2)
    ft = fourier_test_fn(place, StepFunction.indicator_coset(2, 1, 1))
    for a in [F(0), F(1, 2), F(1), F(3, 2)]:
        brute = sum(
            psi(place, a * c) * F(1, 4) for c in [F(1), F(3)]
        )
        assert abs(ft.value_at(a) - brute) < 1e-14
        assert abs(ft.value_at(a) - 0.5 * psi(place, a)) < 1e-14
    assert ft.value_at(F(1, 4)) == 0  # outside (1/2) Z_2


def test_fourier_inversion():
    place = Place.finite(3)
    phi = StepFunction(3, 2, 1, {1: 1.0, 5: 2.0 - 1j, 14: 0.5j})
    ff = fourier_test_fn(place, fourier_test_fn(place, phi))
    for x in [F(1, 3), F(2, 3), F(4, 3), F(1), F(2), F(0)]:
        assert abs(ff.value_at(x) - phi.value_at(-x)) < 1e-12


def test_fourier_real_matches_quadrature():
    bump = BumpFunction.standard()
    ft = fourier_test_fn(R, bump)
    xs = np.linspace(-1, 1, 40001)
    fvals = np.array([bump(float(x)) for x in xs])
    for a in np.linspace(-3.0, 3.0, 10):
        ref = np.trapezoid(fvals * np.exp(-2j * math.pi * a * xs), xs)
        assert abs(ft(a) - ref) < 1e-7
