"""Exact arithmetic for Laurent polynomials in q and torus characters.

Everything downstream is built over one commutative ring: Laurent
polynomials in the variables (q, L_1, ..., L_s) with rational
coefficients, where exponents are rational numbers on a refined lattice
(so fractional character powers like a square root of L_0/L_1 are just
monomials).  Slot 0 of every exponent tuple is reserved for q.

Monomials are plain tuples of Fractions; polynomials are dicts from
monomial to nonzero Fraction.  All values are immutable by convention:
no function mutates its inputs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

Mono = tuple  # tuple[Fraction, ...], slot 0 = q exponent
Scalar = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def mono_one(nvars: int) -> Mono:
    """Identity monomial in nvars variables (q counts as a variable)."""
    return (_ZERO,) * nvars


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_div(a: Mono, b: Mono) -> Mono:
    return tuple(x - y for x, y in zip(a, b))


def mono_inv(a: Mono) -> Mono:
    return tuple(-x for x in a)


def mono_pow(a: Mono, k: Fraction | int) -> Mono:
    k = Fraction(k)
    return tuple(x * k for x in a)


def mono_is_one(a: Mono) -> bool:
    return all(x == 0 for x in a)


def mono_q_degree(a: Mono) -> Fraction:
    return a[0]


def mono_char_part(a: Mono) -> Mono:
    """Same monomial with the q exponent dropped to zero."""
    return (_ZERO,) + tuple(a[1:])


def q_mono(nvars: int, k: Fraction | int = 1) -> Mono:
    return (Fraction(k),) + (_ZERO,) * (nvars - 1)


class MPoly:
    """Laurent polynomial with Fraction coefficients and Mono exponents.

    Canonical form: zero coefficients are never stored.  Instances are
    treated as immutable; hash is over the frozen term set.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Mono, Scalar] | None = None):
        self.nvars = nvars
        clean: dict[Mono, Scalar] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> MPoly:
        return MPoly(nvars)

    @staticmethod
    def const(nvars: int, c: Scalar | int) -> MPoly:
        c = Fraction(c)
        if not c:
            return MPoly(nvars)
        return MPoly(nvars, {mono_one(nvars): c})

    @staticmethod
    def one(nvars: int) -> MPoly:
        return MPoly.const(nvars, 1)

    @staticmethod
    def monomial(nvars: int, m: Mono, c: Scalar | int = 1) -> MPoly:
        return MPoly(nvars, {m: Fraction(c)})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(mono_one(self.nvars)) == 1

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_q_free(self) -> bool:
        return all(m[0] == 0 for m in self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and mono_is_one(next(iter(self.terms))))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: MPoly) -> MPoly:
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, _ZERO) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return MPoly(self.nvars, out)

    def __neg__(self) -> MPoly:
        return MPoly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: MPoly) -> MPoly:
        return self + (-other)

    def __mul__(self, other: MPoly) -> MPoly:
        if self.is_zero() or other.is_zero():
            return MPoly(self.nvars)
        out: dict[Mono, Scalar] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                v = out.get(m, _ZERO) + c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return MPoly(self.nvars, out)

    def scale(self, c: Scalar | int) -> MPoly:
        c = Fraction(c)
        if not c:
            return MPoly(self.nvars)
        return MPoly(self.nvars, {m: cc * c for m, cc in self.terms.items()})

    def mono_shift(self, m: Mono) -> MPoly:
        """Multiply by a single monomial."""
        return MPoly(self.nvars, {mono_mul(mm, m): c for mm, c in self.terms.items()})

    def __pow__(self, k: int) -> MPoly:
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = MPoly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- structure ---------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Mono, Scalar]]:
        return sorted(self.terms.items(), key=lambda t: t[0])

    def min_mono(self) -> Mono:
        return min(self.terms)

    def max_mono(self) -> Mono:
        return max(self.terms)

    def q_degrees(self) -> tuple[Fraction, Fraction]:
        """(min, max) exponent of q over the support; (0, 0) for zero."""
        if not self.terms:
            return _ZERO, _ZERO
        exps = [m[0] for m in self.terms]
        return min(exps), max(exps)

    def q_coefficients(self) -> dict[Fraction, MPoly]:
        """Split into q-free coefficient polynomials keyed by q exponent."""
        out: dict[Fraction, dict[Mono, Scalar]] = {}
        for m, c in self.terms.items():
            out.setdefault(m[0], {})[mono_char_part(m)] = c
        return {k: MPoly(self.nvars, v) for k, v in sorted(out.items())}

    def subs_q(self, value: MPoly, neg_value: MPoly | None = None) -> MPoly:
        """Substitute q -> value.

        Negative q exponents need neg_value = value^{-1}, which must be a
        Laurent polynomial (i.e. value a monomial) unless supplied.
        """
        out = MPoly(self.nvars)
        for qexp, coeff in self.q_coefficients().items():
            if qexp == 0:
                out = out + coeff
                continue
            if qexp == int(qexp):
                k = int(qexp)
                if k > 0:
                    out = out + coeff * (value ** k)
                else:
                    if neg_value is None:
                        if not value.is_monomial():
                            raise ValueError("cannot invert non-monomial substitution")
                        m, c = next(iter(value.terms.items()))
                        neg_value = MPoly.monomial(self.nvars, mono_inv(m), 1 / c)
                    out = out + coeff * (neg_value ** (-k))
            else:
                if not value.is_monomial():
                    raise ValueError("fractional q power needs a monomial substitution")
                m, c = next(iter(value.terms.items()))
                if c != 1:
                    raise ValueError("fractional q power of a non-unit coefficient")
                out = out + coeff.mono_shift(mono_pow(m, qexp))
        return out

    def scale_exponents(self, k: int) -> MPoly:
        """Apply the Adams substitution: every exponent (q included) times k."""
        return MPoly(self.nvars, {mono_pow(m, k): c for m, c in self.terms.items()})

    def evaluate(self, point: tuple[Fraction, ...]) -> Fraction:
        """Evaluate at explicit nonzero rational values (q first)."""
        total = _ZERO
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e == 0:
                    continue
                if e != int(e):
                    raise ValueError("cannot evaluate fractional exponent at a rational point")
                v *= Fraction(x) ** int(e)
            total += v
        return total

    # -- division ----------------------------------------------------------

    def divexact(self, g: MPoly) -> MPoly | None:
        """Exact Laurent division self / g, or None when not divisible.

        Division runs from the lex-minimal end: for a genuine quotient the
        lex-min (resp. lex-max) of a product is the product of lex-minima
        (resp. maxima), which gives exact lex bounds on quotient terms and
        guarantees the generated quotient terms increase strictly.
        """
        if g.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return MPoly(self.nvars)
        if g.is_monomial():
            m, c = next(iter(g.terms.items()))
            return MPoly(self.nvars, {mono_div(mm, m): cc / c for mm, cc in self.terms.items()})
        # Newton(quot) + Newton(g) = Newton(self), so quotient exponents are
        # boxed coordinatewise by the support extremes; the box is compact and
        # the generated terms strictly increase in lex order, hence we stop.
        lo = tuple(min(m[i] for m in self.terms) - min(m[i] for m in g.terms)
                   for i in range(self.nvars))
        hi = tuple(max(m[i] for m in self.terms) - max(m[i] for m in g.terms)
                   for i in range(self.nvars))
        if any(l > h for l, h in zip(lo, hi)):
            return None
        g_min = g.min_mono()
        g_mc = g.terms[g_min]
        rem = dict(self.terms)
        quot: dict[Mono, Scalar] = {}
        while rem:
            low = min(rem)
            t = mono_div(low, g_min)
            if any(not (l <= x <= h) for x, l, h in zip(t, lo, hi)):
                return None
            c = rem[low] / g_mc
            quot[t] = c
            for m, gc in g.terms.items():
                mm = mono_mul(t, m)
                v = rem.get(mm, _ZERO) - c * gc
                if v:
                    rem[mm] = v
                else:
                    rem.pop(mm, None)
        return MPoly(self.nvars, quot)

    def content(self) -> tuple[Scalar, Mono]:
        """(coefficient, monomial) of the minimal term; (1, 1) for zero."""
        if not self.terms:
            return _ONE, mono_one(self.nvars)
        m = self.min_mono()
        return self.terms[m], m

    def normalized(self) -> tuple[MPoly, Scalar, Mono]:
        """Factor out the minimal term so the result has constant term 1.

        Returns (normalized poly, coefficient, monomial) with
        self == normalized * coefficient * monomial.
        """
        if self.is_zero():
            return self, _ONE, mono_one(self.nvars)
        c, m = self.content()
        norm = MPoly(self.nvars, {mono_div(mm, m): cc / c for mm, cc in self.terms.items()})
        return norm, c, m

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for m, c in self.sorted_terms():
            v = [] if c == 1 and not mono_is_one(m) else [str(c)]
            for i, e in enumerate(m):
                if e == 0:
                    continue
                name = "q" if i == 0 else f"L{i - 1}"
                v.append(name if e == 1 else f"{name}^{e}")
            bits.append("*".join(v) or str(c))
        return " + ".join(bits)
