import random
from fractions import Fraction

import pytest

from heightzeta.catalog import MODELS, get_model, places_from_spec
from heightzeta.errors import ConfigError
from heightzeta.localfield import Place, is_prime

F = Fraction
R = Place.real()


def test_local_height_examples():
    e1 = get_model("E1")
    assert e1.local_height(Place.finite(2), "inf", F(3, 2)) == F(1, 2)
    assert e1.local_height(R, "inf", F(0)) == 1
    assert get_model("E3").local_height(R, "H", (F(3), F(-4))) == F(1, 4)


def test_height_examples():
    assert get_model("E1").height_base(F(7)) == 7
    assert get_model("E3").height_base((F(3), F(-4))) == 16  # max(1,3,4)^2
    assert get_model("E2").height_base(F(2, 3)) == 9
    assert get_model("E4").height_base((F(1, 2), F(3))) == 12  # max(1,2)^2 * 3
    assert get_model("E1").height(F(7), 2) == pytest.approx(49.0)


def test_height_at_least_one():
    rng = random.Random(3)
    for mid in MODELS:
        m = get_model(mid)
        for _ in range(50):
            x = tuple(F(rng.randint(-30, 30), rng.randint(1, 30)) for _ in range(m.dim))
            assert m.height_base(x) >= 1


def test_is_integral_examples():
    e1 = get_model("E1")
    assert not e1.is_integral(Place.finite(5), F(1, 5))
    assert e1.is_integral(Place.finite(5), F(1, 3))
    e4 = get_model("E4")
    assert e4.is_integral(Place.finite(3), (F(1, 3), F(2)))  # x is unrestricted
    assert not e4.is_integral(Place.finite(3), (F(1), F(2, 3)))


def test_stratum_partition():
    totals = {"E1": lambda q: q + 1, "E2": lambda q: q + 1,
              "E3": lambda q: q * q + q + 1, "E6": lambda q: q * q + q + 1,
              "E4": lambda q: (q + 1) ** 2, "E5": lambda q: (q + 1) ** 2}
    for mid, tot in totals.items():
        m = get_model(mid)
        for q in (2, 3, 5, 7, 11):
            s = m.stratum_counts(q, frozenset()) + sum(
                m.stratum_counts(q, A) for A in m.incidence_faces()
            )
            assert s == tot(q), (mid, q)


def test_stratum_examples():
    assert get_model("E1").stratum_counts(7, {"inf"}) == 1
    assert get_model("E5").stratum_counts(7, {"Dx", "Dy"}) == 1
    assert get_model("E3").stratum_counts(7, {"H"}) == 8


def test_product_formula_consistency():
    # the height over {real} + primes of the denominators is unchanged by
    # throwing in 50 extra primes: their factors are exactly 1
    rng = random.Random(17)
    extra = [p for p in range(2, 300) if is_prime(p)][:50]
    for _ in range(500):
        mid = rng.choice(list(MODELS))
        m = get_model(mid)
        x = tuple(F(rng.randint(-99, 99), rng.randint(1, 99)) for _ in range(m.dim))
        base = m.height_base(x)
        for p in extra:
            den_primes = set()
            for c in x:
                d = c.denominator
                while d % p == 0:
                    den_primes.add(p)
                    d //= p
            if p in den_primes:
                continue  # already accounted for
            for alpha in m.divisors.labels:
                assert m.local_height(Place.finite(p), alpha, x) == 1
        assert base >= 1


def test_delta_height_link():
    rng = random.Random(23)
    for _ in range(200):
        mid = rng.choice(list(MODELS))
        m = get_model(mid)
        x = tuple(F(rng.randint(-60, 60), rng.randint(1, 60)) for _ in range(m.dim))
        primes = set()
        for c in x:
            d = c.denominator
            f = 2
            while f * f <= d:
                if d % f == 0:
                    primes.add(f)
                    while d % f == 0:
                        d //= f
                f += 1
            if d > 1:
                primes.add(d)
        all_integral = all(m.is_integral(Place.finite(p), x) for p in primes)
        finite_boundary_product = F(1)
        for p in primes:
            for alpha in m.divisors.removed:
                finite_boundary_product *= m.local_height(Place.finite(p), alpha, x)
        assert all_integral == (finite_boundary_product == 1)


def test_northcott_desk_scale():
    # finitely many E1 points of height <= 30, found by direct scan
    m = get_model("E1")
    pts = [x for x in range(-40, 41) if m.height_base(F(x)) <= 30]
    assert len(pts) == 61


def test_places_from_spec():
    S = places_from_spec(["inf", 5])
    assert S[0].kind == "real" and S[1].prime == 5
    with pytest.raises(ConfigError):
        places_from_spec([5])
    with pytest.raises(ConfigError):
        places_from_spec(["inf", 11])


def test_describe():
    d = get_model("E4").describe()
    assert d["lambda"] == {"Dx": 2, "Dy": 1}
    assert d["removed"] == ["Dy"]


def test_smoothed_metric_option():
    import copy

    m = copy.copy(get_model("E1"))
    m.smoothing_k = 4
    v = m.local_height(R, "inf", F(2))
    assert 0 < v < F(1, 2) + F(1, 100)
    # finite places stay exact under the smoothing option
    assert m.local_height(Place.finite(2), "inf", F(1, 2)) == F(1, 2)
