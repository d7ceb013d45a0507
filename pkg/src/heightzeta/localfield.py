"""Exact and numeric arithmetic on the completions of Q.

The three kinds of places are the real place, the complex place (used only
by the one-dimensional oscillatory theory) and the finite places Q_p.
p-adic numbers are exact rationals throughout: every p-adic integral in
this package reduces to a finite sum over residue classes plus an exact
geometric tail, so no truncated digit expansions appear anywhere.
Additive characters are evaluated as e^{2 pi i t} with t an exact rational
phase; sums of such terms are accumulated through :class:`PhaseSum` so
that a computation repeated at a finer residue level reproduces the same
float bit for bit.

Normalizations.  Haar measure satisfies vol(|x| <= 1) = 2 at the real
place, 2*pi at the complex place and 1 at a finite place over Q; at the
complex place |.| is the *square* of the usual modulus, so that
vol(a*E) = |a| vol(E) holds at every place.  The multiplicative measure is
dx/|x| at archimedean places and (1 - 1/q)^{-1} dx/|x| at finite places.
The additive character is psi(x) = e^{2 pi i x_p} at Q_p (x_p the p-power
fractional part), e^{-2 pi i x} on R and e^{-4 pi i Re(x)} on C.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import quad

from .errors import NonconvergentError, PoleError

TWO_PI = 2.0 * math.pi

Rational = Fraction | int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# places


@dataclass(frozen=True, order=True)
class Place:
    """A completion of Q: "real", "complex", or "finite" with a prime."""

    kind: str
    prime: int | None = None

    def __post_init__(self):
        if self.kind not in ("real", "complex", "finite"):
            raise ValueError(f"unknown place kind {self.kind!r}")
        if self.kind == "finite":
            if self.prime is None or not is_prime(self.prime):
                raise ValueError(f"{self.prime!r} is not a prime")
        elif self.prime is not None:
            raise ValueError("archimedean places carry no prime")

    @classmethod
    def real(cls) -> "Place":
        return cls("real")

    @classmethod
    def complex_(cls) -> "Place":
        return cls("complex")

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls("finite", p)

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_archimedean(self) -> bool:
        return self.kind != "finite"

    @property
    def q(self) -> int:
        """Residue field cardinality (finite places over Q: q = p)."""
        if not self.is_finite:
            raise ValueError("q is defined at finite places only")
        return self.prime

    def __str__(self):
        return self.kind if self.is_archimedean else f"Q_{self.prime}"


REAL = Place.real()
COMPLEX = Place.complex_()


# ---------------------------------------------------------------------------
# exact p-adic arithmetic on rationals


@dataclass(frozen=True)
class PadicContext:
    """Valuation, absolute value, residue reduction and character phases
    for one prime, acting on exact rationals."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def valuation(self, x: Rational) -> int:
        x = Fraction(x)
        if x == 0:
            raise ZeroDivisionError("valuation of 0")
        num, den, p = x.numerator, x.denominator, self.p
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        return v

    def abs(self, x: Rational) -> Fraction:
        """|x|_p = p^{-v_p(x)}, exactly."""
        if x == 0:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation(x))

    def unit_part(self, x: Rational) -> Fraction:
        x = Fraction(x)
        return x / Fraction(self.p) ** self.valuation(x)

    def frac_part(self, x: Rational) -> Fraction:
        """The p-primary component of x mod 1: the unique rational in
        [0, 1) with p-power denominator congruent to x modulo the other
        primary components."""
        x = Fraction(x)
        den = x.denominator
        k = 0
        while den % self.p == 0:
            den //= self.p
            k += 1
        if k == 0:
            return Fraction(0)
        pk = self.p**k
        inv = pow(den, -1, pk)
        return Fraction((x.numerator * inv) % pk, pk)

    def reduce(self, x: Rational, e: int) -> int:
        """Representative of a p-integral rational modulo p^e, in [0, p^e)."""
        x = Fraction(x)
        pe = self.p**e
        if x.denominator % self.p == 0:
            raise ValueError(f"{x} is not p-integral at p={self.p}")
        return (x.numerator * pow(x.denominator, -1, pe)) % pe


_CONTEXTS: dict[int, PadicContext] = {}


def padic(p: int) -> PadicContext:
    ctx = _CONTEXTS.get(p)
    if ctx is None:
        ctx = _CONTEXTS[p] = PadicContext(p)
    return ctx


# ---------------------------------------------------------------------------
# basic place-wise operations


def abs_value(x, place: Place):
    """Normalized absolute value; exact Fraction at finite places (and at
    the real place for rational input), square of the modulus on C."""
    if place.is_finite:
        return padic(place.prime).abs(Fraction(x))
    if place.kind == "real":
        return abs(Fraction(x)) if isinstance(x, (int, Fraction)) else abs(x)
    z = complex(x)
    return z.real * z.real + z.imag * z.imag


def psi(place: Place, x) -> complex:
    """The standard additive character of the place, |psi| = 1."""
    if place.is_finite:
        t = padic(place.prime).frac_part(Fraction(x))
        return cmath.exp(2j * math.pi * float(t))
    if place.kind == "real":
        return cmath.exp(-2j * math.pi * float(x))
    return cmath.exp(-4j * math.pi * complex(x).real)


@dataclass(frozen=True)
class Ball:
    """|x| <= radius, radius in the normalized value group."""

    radius: Fraction | float


@dataclass(frozen=True)
class Coset:
    """center + p^exponent Z_p."""

    center: Fraction
    exponent: int


def haar_volume(place: Place, region) -> Fraction | float:
    if isinstance(region, Coset):
        if not place.is_finite:
            raise ValueError("cosets only make sense at finite places")
        return Fraction(place.prime) ** (-region.exponent)
    r = region.radius
    if place.kind == "real":
        return 2 * r
    if place.kind == "complex":
        return TWO_PI * float(r)
    p = place.prime
    k = padic(p).valuation(Fraction(r))
    if Fraction(p) ** k != Fraction(r):
        raise ValueError(f"radius {r} not in the value group of Q_{p}")
    return Fraction(p) ** k


def zeta_local(place: Place, s):
    """The local zeta value: 2/s (real), 2*pi/s (complex),
    1/(1 - q^{-s}) (finite).  Exact rational arithmetic is used when s is
    an int or Fraction.  Raises PoleError at the poles."""
    if place.kind == "real":
        if s == 0:
            raise PoleError("zeta_R has a pole at s = 0")
        if isinstance(s, (int, Fraction)):
            return float(Fraction(2) / Fraction(s))
        return 2.0 / complex(s)
    if place.kind == "complex":
        if s == 0:
            raise PoleError("zeta_C has a pole at s = 0")
        if isinstance(s, (int, Fraction)):
            return TWO_PI / float(s)
        return TWO_PI / complex(s)
    q = place.prime
    if isinstance(s, (int, Fraction)):
        qs = Fraction(q) ** Fraction(s) if Fraction(s).denominator == 1 else None
        if qs is not None:
            if qs == 1:
                raise PoleError(f"zeta_{place} has a pole at s = {s}")
            return float(qs / (qs - 1))
        s = float(s)
    denom = 1.0 - cmath.exp(-complex(s) * math.log(q))
    if abs(denom) < 1e-14:
        raise PoleError(f"zeta_{place} has a pole at s = {s}")
    return 1.0 / denom


def residue_c(place: Place) -> float:
    """Residue at s = 0 of the ball zeta integral: 2, 2*pi, or 1/log q."""
    if place.kind == "real":
        return 2.0
    if place.kind == "complex":
        return TWO_PI
    return 1.0 / math.log(place.prime)


# ---------------------------------------------------------------------------
# exact accumulation of root-of-unity sums


class PhaseSum:
    """Sum of terms  weight * value * e^{2 pi i phase}  with exact rational
    weights and phases.

    Terms are merged on the (phase, value) pair, so the same computation
    carried out on a finer residue decomposition produces the *identical*
    dictionary (the split weights re-add exactly) and hence the identical
    float; evaluation order is fixed by sorting the keys.
    """

    __slots__ = ("_terms",)

    def __init__(self):
        self._terms: dict[tuple[Fraction, complex], Fraction] = {}

    def add(self, phase: Fraction, weight: Fraction, value: complex = 1.0 + 0j):
        if value == 0:
            return
        key = (phase, complex(value))
        self._terms[key] = self._terms.get(key, Fraction(0)) + weight

    def value(self) -> complex:
        res, ims = [], []
        for (phase, val), w in sorted(
            self._terms.items(), key=lambda kv: (kv[0][0], kv[0][1].real, kv[0][1].imag)
        ):
            z = float(w) * val * cmath.exp(2j * math.pi * float(phase))
            res.append(z.real)
            ims.append(z.imag)
        return complex(math.fsum(res), math.fsum(ims))


# ---------------------------------------------------------------------------
# test functions


@dataclass
class StepFunction:
    """Locally constant, compactly supported function on Q_p.

    The support is contained in p^{-support_exp} Z_p and the function is
    constant on cosets x + p^level Z_p.  ``table`` maps the class index j
    to the value on  j * p^{-support_exp} + p^level Z_p,  for j in
    [0, p^{support_exp + level}); absent keys mean 0.
    """

    p: int
    level: int
    support_exp: int
    table: dict[int, complex]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.level + self.support_exp < 0:
            raise ValueError("level must be at least -support_exp")
        n = self.p ** (self.support_exp + self.level)
        for j in self.table:
            if not 0 <= j < n:
                raise ValueError(f"class index {j} out of range [0, {n})")

    # -- constructors -------------------------------------------------

    @classmethod
    def indicator_zp(cls, p: int) -> "StepFunction":
        return cls(p, 0, 0, {0: 1.0 + 0j})

    @classmethod
    def indicator_coset(cls, p: int, center: Rational, n: int) -> "StepFunction":
        """Indicator of center + p^n Z_p."""
        c = Fraction(center)
        ctx = padic(p)
        k = max(0, -ctx.valuation(c)) if c != 0 else 0
        if n + k < 0:
            raise ValueError("coset is larger than its support ball")
        j = ctx.reduce(c * Fraction(p) ** k, k + n)
        return cls(p, n, k, {j: 1.0 + 0j})

    @classmethod
    def indicator_units(cls, p: int) -> "StepFunction":
        return cls(p, 1, 0, {j: 1.0 + 0j for j in range(1, p)})

    # -- structure ----------------------------------------------------

    def class_rep(self, j: int) -> Fraction:
        return Fraction(j, 1) * Fraction(self.p) ** (-self.support_exp)

    def classes(self) -> Iterator[tuple[Fraction, complex]]:
        """Yield (representative, value) over the nonzero classes."""
        for j, v in sorted(self.table.items()):
            if v != 0:
                yield self.class_rep(j), v

    def value_at(self, x: Rational) -> complex:
        x = Fraction(x)
        ctx = padic(self.p)
        if x != 0 and ctx.valuation(x) < -self.support_exp:
            return 0j
        j = ctx.reduce(x * Fraction(self.p) ** self.support_exp, self.support_exp + self.level)
        return complex(self.table.get(j, 0))

    def refine(self, extra: int = 1) -> "StepFunction":
        """The same function re-expressed at level + extra."""
        if extra < 0:
            raise ValueError("extra must be >= 0")
        p, k, m = self.p, self.support_exp, self.level
        block = p ** (k + m)
        table = {}
        for j, v in self.table.items():
            if v == 0:
                continue
            for t in range(p**extra):
                table[j + t * block] = v
        return StepFunction(p, m + extra, k, table)

    def min_level(self) -> int:
        """Least n >= 1 such that the function is constant on all cosets
        x + p^n Z_p.  Computed from the table, never read off the stored
        level."""
        p, k, m = self.p, self.support_exp, self.level
        lower = max(1, -k)
        for n in range(lower, max(m, lower)):
            if k + n < 0:
                continue
            groups: dict[int, complex] = {}
            ok = True
            block = p ** (k + n)
            for j in range(p ** (k + m)):
                v = complex(self.table.get(j, 0))
                r = j % block
                if r in groups:
                    if groups[r] != v:
                        ok = False
                        break
                else:
                    groups[r] = v
            if ok:
                return n
        return max(m, lower)

    def support_min_valuation(self) -> int:
        """Smallest valuation attained on the (nonzero) support, or the
        stored level when only the zero class is hit."""
        ctx = padic(self.p)
        best = None
        for rep, _ in self.classes():
            if rep == 0:
                v = self.level  # the zero class starts at valuation >= level
            else:
                v = ctx.valuation(rep)
            best = v if best is None else min(best, v)
        if best is None:
            raise ValueError("zero function has empty support")
        return best

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "level": self.level,
                "support_exp": self.support_exp,
                "table": {str(j): [complex(v).real, complex(v).imag] for j, v in sorted(self.table.items())},
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        d = json.loads(text)
        table = {int(j): complex(re, im) for j, (re, im) in d["table"].items()}
        return cls(d["p"], d["level"], d["support_exp"], table)


def _standard_profile(radius: float, amplitude: float):
    r2 = radius * radius

    def f(u: float) -> float:
        if abs(u) >= radius:
            return 0.0
        w = 1.0 - (u * u) / r2
        return amplitude * math.exp(1.0 - 1.0 / w)

    def df(u: float) -> float:
        if abs(u) >= radius:
            return 0.0
        w = 1.0 - (u * u) / r2
        return f(u) * (-2.0 * u / (r2 * w * w))

    return f, df


@dataclass
class BumpFunction:
    """Smooth compactly supported test function on R.

    ``sup_f`` and ``sup_df`` are upper bounds for |f| and |f'|; they are
    spot-checked on a grid by the test suite, not trusted blindly.
    """

    support: tuple[float, float]
    f: Callable[[float], float]
    df: Callable[[float], float]
    sup_f: float
    sup_df: float

    def __call__(self, x: float) -> float:
        lo, hi = self.support
        if x <= lo or x >= hi:
            return 0.0
        return self.f(x)

    def derivative(self, x: float) -> float:
        lo, hi = self.support
        if x <= lo or x >= hi:
            return 0.0
        return self.df(x)

    @classmethod
    def standard(cls, center: float = 0.0, radius: float = 1.0, amplitude: float = 1.0) -> "BumpFunction":
        prof, dprof = _standard_profile(radius, amplitude)
        f = lambda x: prof(x - center)
        df = lambda x: dprof(x - center)
        grid = np.linspace(center - radius, center + radius, 4001)
        sup_df = 1.05 * max(abs(df(float(x))) for x in grid)
        return cls((center - radius, center + radius), f, df, abs(amplitude), sup_df)


@dataclass
class RadialBump:
    """Rotation-invariant bump on C, given by a radial profile."""

    profile: BumpFunction

    def __call__(self, z: complex) -> float:
        return self.profile(abs(z))

    @property
    def radius(self) -> float:
        return self.profile.support[1]


# ---------------------------------------------------------------------------
# quadrature helpers (QUADPACK behind a complex-valued facade)


def quad_complex(f, a, b, *, points=None, epsabs=1e-12, epsrel=1e-10, limit=400):
    """Adaptive integral of a complex-valued function; returns (value, err)."""

    def part(g):
        val, err, *_ = quad(
            g, a, b, points=points, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
        )
        return val, err

    re, e1 = part(lambda t: f(t).real)
    im, e2 = part(lambda t: f(t).imag)
    return complex(re, im), e1 + e2


def quad_oscillatory(f, a, b, omega, *, epsabs=1e-12, epsrel=1e-10, limit=400):
    """Integral of f(t) e^{-i omega t} over [a, b] (b may be inf) with the
    oscillation handled by QAWO/QAWF; returns (value, err)."""
    if omega == 0.0:
        return quad_complex(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)

    def part(g, weight):
        kwargs = dict(weight=weight, wvar=omega, epsabs=epsabs, epsrel=epsrel, full_output=1)
        if not math.isinf(b):
            kwargs["limit"] = limit
        val, err, *_ = quad(g, a, b, **kwargs)
        return val, err

    c_re, e1 = part(lambda t: f(t).real, "cos")
    c_im, e2 = part(lambda t: f(t).imag, "cos")
    s_re, e3 = part(lambda t: f(t).real, "sin")
    s_im, e4 = part(lambda t: f(t).imag, "sin")
    value = complex(c_re + s_im, c_im - s_re)
    return value, e1 + e2 + e3 + e4


# ---------------------------------------------------------------------------
# Tate integrals


def tate_integral(place: Place, phi, s) -> complex:
    """zeta(Phi, |.|^s) = integral of Phi(x) |x|^s d^x.  Exact (finite sum
    plus geometric tail) for a StepFunction at a finite place; adaptive
    quadrature for a bump at an archimedean place.  Requires Re(s) > 0."""
    s = complex(s)
    if s.real <= 0:
        raise NonconvergentError("tate_integral requires Re(s) > 0")
    if place.is_finite:
        if not isinstance(phi, StepFunction) or phi.p != place.prime:
            raise ValueError("finite-place Tate integrals take a StepFunction at the same prime")
        return _tate_finite(phi, s)
    if place.kind == "real":
        lo, hi = phi.support
        f = lambda x: phi(x) * (abs(x) ** (s - 1.0) if x != 0 else 0.0)
        pts = [0.0] if lo < 0.0 < hi else None
        val, _err = quad_complex(f, lo, hi, points=pts)
        return val
    # complex place: 2 * int dtheta int r^{2s-1} Phi(r e^{i theta}) dr
    R = phi.radius
    thetas, wts = np.polynomial.legendre.leggauss(64)
    thetas = (thetas + 1.0) * math.pi
    wts = wts * math.pi
    total = 0j
    for th, w in zip(thetas, wts):
        g = lambda r: 2.0 * (r ** (2.0 * s - 1.0)) * phi(r * cmath.exp(1j * th))
        val, _ = quad_complex(g, 0.0, R)
        total += w * val
    return total


def _tate_finite(phi: StepFunction, s: complex) -> complex:
    p = phi.p
    lnp = math.log(p)
    m = phi.level
    parts = []
    # nonzero classes lie each in a single valuation shell
    ctx = padic(p)
    vol_class = Fraction(1, p**m)
    for rep, v in phi.classes():
        if rep == 0:
            continue
        k = ctx.valuation(rep)
        # d^x = (1-1/q)^{-1} dx/|x|; on the shell |x| = p^{-k} this weights
        # the class volume by (1-1/p)^{-1} p^{k}
        w = float(vol_class) * p**k / (1.0 - 1.0 / p)
        parts.append(v * w * cmath.exp(-k * s * lnp))
    total = sum(parts, 0j)
    # the zero class covers the shells k >= m with constant value phi(0)
    v0 = phi.value_at(0)
    if v0 != 0:
        total += v0 * cmath.exp(-m * s * lnp) / (1.0 - cmath.exp(-s * lnp))
    return total


# ---------------------------------------------------------------------------
# Fourier transforms of test functions


class ArchFourierTransform:
    """Numeric Fourier transform of an archimedean test function."""

    def __init__(self, place: Place, phi):
        self.place = place
        self.phi = phi

    def __call__(self, a) -> complex:
        if self.place.kind == "real":
            lo, hi = self.phi.support
            val, _ = quad_oscillatory(lambda x: complex(self.phi(x)), lo, hi, TWO_PI * float(a))
            return val
        # complex place: int Phi(z) psi(az) dz, dz = 2 dA
        R = self.phi.radius
        a = complex(a)
        thetas, wts = np.polynomial.legendre.leggauss(96)
        thetas = (thetas + 1.0) * math.pi
        wts = wts * math.pi
        total = 0j
        for th, w in zip(thetas, wts):
            zdir = cmath.exp(1j * th)
            om = 4.0 * math.pi * (a * zdir).real  # phase e^{-i om r}
            g = lambda r: 2.0 * r * complex(self.phi(r * zdir))
            val, _ = quad_oscillatory(g, 0.0, R, om)
            total += w * val
        return total


def fourier_test_fn(place: Place, phi):
    """Fourier transform f -> f^(a) = int f(x) psi(ax) dx.

    At a finite place the result is again a StepFunction, computed exactly
    from finite character sums; at archimedean places a numeric evaluator
    is returned.
    """
    if place.is_archimedean:
        return ArchFourierTransform(place, phi)
    if not isinstance(phi, StepFunction) or phi.p != place.prime:
        raise ValueError("finite-place transforms take a StepFunction at the same prime")
    p, k, m = phi.p, phi.support_exp, phi.level
    ctx = padic(p)
    new_k, new_m = m, max(k, 0)
    table: dict[int, complex] = {}
    vol = Fraction(1, p**m)
    for jprime in range(p ** (new_k + new_m)):
        a = Fraction(jprime) * Fraction(p) ** (-new_k)
        ps = PhaseSum()
        for rep, v in phi.classes():
            ps.add(ctx.frac_part(a * rep), vol, v)
        val = ps.value()
        if val != 0:
            table[jprime] = val
    return StepFunction(p, new_m, new_k, table)
