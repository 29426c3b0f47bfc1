"""Rational functions of q over the character field, with factored denominators.

A RatFn is num / prod(den factors), where num is a Laurent MPoly and every
denominator factor is kept in a normalized form (minimal term == 1).  Factors
of the shape 1 - q^k * chi are split cyclotomically into factors that are
linear or Phi_d-blocks in (q * rho) with rho = chi^{1/k}, so that

  * cancellation is exact trial division by tracked factors,
  * pole classification (origin / infinity / roots of unity / orbit poles)
    is a walk over the factor multiset,
  * partial fractions run over a pairwise-coprime factor basis.

q-free RatFns double as the coefficient field (characters only); the linear
solver and all metric arithmetic live there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .chars import (
    MPoly,
    Mono,
    mono_char_part,
    mono_inv,
    mono_is_one,
    mono_one,
    mono_pow,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


class KernelError(ValueError):
    """Exact-arithmetic contract violation (division by zero, bad pole, ...)."""


# ---------------------------------------------------------------------------
# cyclotomic factorization of 1 - x^k
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def cyclotomic_coeffs(d: int) -> tuple[int, ...]:
    """Integer coefficients of the d-th cyclotomic polynomial, low to high."""
    if d == 1:
        return (-1, 1)  # x - 1
    # divide x^d - 1 by all lower cyclotomic divisors
    num = [0] * (d + 1)
    num[0], num[d] = -1, 1
    for e in range(1, d):
        if d % e:
            continue
        div = cyclotomic_coeffs(e)
        out = [0] * (len(num) - len(div) + 1)
        rem = list(num)
        for i in range(len(out) - 1, -1, -1):
            c = rem[i + len(div) - 1] // div[-1]
            out[i] = c
            if c:
                for j, dv in enumerate(div):
                    rem[i + j] -= c * dv
        assert not any(rem), "cyclotomic division must be exact"
        num = out
    return tuple(num)


def _one_minus_x_pow_factors(nvars: int, x: Mono, k: int) -> list[MPoly]:
    """Factor 1 - x^k into constant-term-one blocks, x a monomial, k >= 1."""
    out = []
    for d in range(1, k + 1):
        if k % d:
            continue
        if d == 1:
            out.append(MPoly(nvars, {mono_one(nvars): _ONE, x: -_ONE}))
            continue
        coeffs = cyclotomic_coeffs(d)
        sign = 1 if coeffs[0] > 0 else -1
        terms = {}
        for j, c in enumerate(coeffs):
            if c:
                terms[mono_pow(x, j)] = Fraction(sign * c)
        out.append(MPoly(nvars, terms))
    return out


def _split_den_factor(f: MPoly) -> list[MPoly]:
    """Split a normalized factor into canonical blocks where possible."""
    if f.is_q_free() or len(f.terms) != 2:
        return [f]
    terms = dict(f.terms)
    one = mono_one(f.nvars)
    if terms.get(one) != 1:
        return [f]
    (m, c), = [t for t in terms.items() if t[0] != one]
    k = m[0]
    if c != -1 or k <= 0 or k != int(k):
        return [f]
    k = int(k)
    if k == 1:
        return [f]
    # f == 1 - q^k * chi == 1 - x^k with x = q * chi^{1/k}
    x = mono_pow(m, Fraction(1, k))
    return _one_minus_x_pow_factors(f.nvars, x, k)


# ---------------------------------------------------------------------------
# RatFn
# ---------------------------------------------------------------------------

class RatFn:
    """num / prod(den): exact rational function in q and the characters."""

    __slots__ = ("nvars", "num", "den")

    def __init__(self, nvars: int, num: MPoly, den: tuple[MPoly, ...] = (), *, _canonical=False):
        self.nvars = nvars
        if _canonical:
            self.num, self.den = num, den
            return
        factors: list[MPoly] = []
        for f in den:
            if f.is_zero():
                raise KernelError("zero denominator factor")
            norm, c, m = f.normalized()
            num = num.divexact(MPoly.monomial(nvars, m, c))
            if norm.is_one():
                continue
            factors.extend(_split_den_factor(norm))
        # exhaustive cancellation of tracked factors into the numerator
        kept: list[MPoly] = []
        if num.is_zero():
            factors = []
        for f in sorted(factors, key=_factor_key):
            q = num.divexact(f)
            if q is not None:
                num = q
            else:
                kept.append(f)
        self.num = num
        self.den = tuple(kept)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> RatFn:
        return RatFn(nvars, MPoly.zero(nvars), ())

    @staticmethod
    def one(nvars: int) -> RatFn:
        return RatFn(nvars, MPoly.one(nvars), ())

    @staticmethod
    def const(nvars: int, c) -> RatFn:
        return RatFn(nvars, MPoly.const(nvars, Fraction(c)), ())

    @staticmethod
    def from_poly(p: MPoly) -> RatFn:
        return RatFn(p.nvars, p, ())

    @staticmethod
    def monomial(nvars: int, m: Mono, c=1) -> RatFn:
        return RatFn(nvars, MPoly.monomial(nvars, m, c), ())

    @staticmethod
    def fraction(num: MPoly, den_factors) -> RatFn:
        return RatFn(num.nvars, num, tuple(den_factors))

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_q_free(self) -> bool:
        return self.num.is_q_free() and all(f.is_q_free() for f in self.den)

    def is_one(self) -> bool:
        return not self.den and self.num.is_one()

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: RatFn) -> RatFn:
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        a_extra, b_extra, common = _den_merge(self.den, other.den)
        num = self.num * _prod(self.nvars, a_extra) + other.num * _prod(self.nvars, b_extra)
        return RatFn(self.nvars, num, common)

    def __neg__(self) -> RatFn:
        return RatFn(self.nvars, -self.num, self.den, _canonical=True)

    def __sub__(self, other: RatFn) -> RatFn:
        return self + (-other)

    def __mul__(self, other: RatFn) -> RatFn:
        if self.is_zero() or other.is_zero():
            return RatFn.zero(self.nvars)
        return RatFn(self.nvars, self.num * other.num, self.den + other.den)

    def inv(self) -> RatFn:
        if self.is_zero():
            raise KernelError("division by zero")
        num = _prod(self.nvars, self.den)
        return RatFn(self.nvars, num, (self.num,))

    @staticmethod
    def euler_inverse(nvars: int, chars) -> RatFn:
        """prod 1/(1 - w^{-1}) over characters w, with a factored denominator.

        This is the reciprocal K-theoretic Euler class used by every
        localization sum; building it factored keeps cancellation exact.
        """
        from .chars import MPoly, mono_inv, mono_one
        num = MPoly.one(nvars)
        dens = []
        for w in chars:
            dens.append(MPoly(nvars, {mono_one(nvars): _ONE, mono_inv(w): -_ONE}))
        return RatFn(nvars, num, tuple(dens))

    def __truediv__(self, other: RatFn) -> RatFn:
        return self * other.inv()

    def scale(self, c) -> RatFn:
        return RatFn(self.nvars, self.num.scale(Fraction(c)), self.den, _canonical=True)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatFn):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("RatFn is not hashable; compare with ==")

    # -- substitution and specializations --------------------------------

    def den_poly(self) -> MPoly:
        return _prod(self.nvars, self.den)

    def subs_q(self, value: MPoly) -> RatFn:
        """Substitute q -> value (a monomial or invertible-coefficient poly)."""
        new_den = []
        for f in self.den:
            g = f.subs_q(value)
            if g.is_zero():
                raise KernelError("substitution hits a pole; request the residue instead")
            new_den.append(g)
        return RatFn(self.nvars, self.num.subs_q(value), tuple(new_den))

    def subs_q_inverse(self) -> RatFn:
        """q -> 1/q."""
        nv = self.nvars
        inv_q = MPoly.monomial(nv, mono_pow(_q_mono(nv), -1))
        return self.subs_q(inv_q)

    def residue_at(self, rho: Mono) -> RatFn:
        """Coefficient of 1/(1 - q*rho) in the partial fractions of self.

        Requires the pole q = rho^{-1} to come from a single simple tracked
        linear factor (1 - q*rho).
        """
        nv = self.nvars
        target = MPoly(nv, {mono_one(nv): _ONE, _q_shift(rho): -_ONE})
        count = sum(1 for f in self.den if f == target)
        if count == 0:
            raise KernelError("no pole at the requested location")
        if count > 1:
            raise KernelError("pole is not simple")
        rest = list(self.den)
        rest.remove(target)
        g = RatFn(nv, self.num, tuple(rest), _canonical=True)
        return g.subs_q(MPoly.monomial(nv, mono_inv(rho)))

    def eval_point(self, point) -> Fraction:
        num = self.num.evaluate(point)
        den = _ONE
        for f in self.den:
            v = f.evaluate(point)
            if v == 0:
                raise KernelError("evaluation point hits a pole")
            den *= v
        return num / den

    def adams(self, m: int) -> RatFn:
        """Psi^m: q -> q^m and every character exponent scaled by m."""
        if m < 1:
            raise KernelError("Adams operations need a positive integer")
        return RatFn(self.nvars, self.num.scale_exponents(m),
                     tuple(f.scale_exponents(m) for f in self.den))

    # -- q-structure -----------------------------------------------------

    def q_free_part(self) -> RatFn:
        """Checked view of a q-free value (characters only)."""
        if not self.is_q_free():
            raise KernelError("value is not q-free")
        return self

    def infinity_decay(self) -> Fraction:
        """Vanishing order at q = infinity (negative = pole of that order)."""
        if self.is_zero():
            raise KernelError("zero has no decay order")
        den_deg = sum(f.q_degrees()[1] for f in self.den)
        return den_deg - self.num.q_degrees()[1]

    def origin_order(self) -> Fraction:
        """Vanishing order at q = 0 (negative = pole); den factors are regular at 0."""
        if self.is_zero():
            raise KernelError("zero has no origin order")
        return self.num.q_degrees()[0]

    def __repr__(self):
        if not self.den:
            return f"({self.num!r})"
        return f"({self.num!r}) / " + " / ".join(f"({f!r})" for f in self.den)


def _q_mono(nvars: int) -> Mono:
    return (Fraction(1),) + (_ZERO,) * (nvars - 1)


def _q_shift(rho: Mono) -> Mono:
    """Monomial q * rho for a q-free rho."""
    return (rho[0] + 1,) + tuple(rho[1:])


def _prod(nvars: int, factors) -> MPoly:
    out = MPoly.one(nvars)
    for f in factors:
        out = out * f
    return out


def _factor_key(f: MPoly):
    return tuple(sorted((m, c) for m, c in f.terms.items()))


def _den_merge(a: tuple[MPoly, ...], b: tuple[MPoly, ...]):
    """Multiset merge: returns (a-only, b-only, union) factor tuples."""
    from collections import Counter

    ca = Counter(_factor_key(f) for f in a)
    cb = Counter(_factor_key(f) for f in b)
    by_key = {_factor_key(f): f for f in a + b}
    a_extra, b_extra, union = [], [], []
    for key in sorted(set(ca) | set(cb)):
        na, nb = ca.get(key, 0), cb.get(key, 0)
        union.extend([by_key[key]] * max(na, nb))
        if na < nb:
            a_extra.extend([by_key[key]] * (nb - na))
        elif nb < na:
            b_extra.extend([by_key[key]] * (na - nb))
    return tuple(a_extra), tuple(b_extra), tuple(union)
