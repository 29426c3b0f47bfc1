"""Partial fraction decomposition of RatFn values along the q-line.

Coefficients live in the q-free fraction field (characters); denominators
are the canonical factor blocks tracked by RatFn.  The decomposition

    f = sum_k  laurent_k q^k  +  sum_{F, j}  A_{F,j}(q) / F^j,   deg A < deg F

is exact and unique once the factor basis is fixed, which makes it the
coordinate system for every linear solve and every tau / double-pole
extraction downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chars import MPoly
from .ratfun import KernelError, RatFn, _factor_key

FactorKey = tuple


# ---------------------------------------------------------------------------
# univariate polynomials over the q-free fraction field
# ---------------------------------------------------------------------------

def _k_zero(nvars: int) -> RatFn:
    return RatFn.zero(nvars)


def up_trim(p: list[RatFn]) -> list[RatFn]:
    while p and p[-1].is_zero():
        p.pop()
    return p


def up_add(a: list[RatFn], b: list[RatFn], nvars: int) -> list[RatFn]:
    out = []
    for i in range(max(len(a), len(b))):
        x = a[i] if i < len(a) else _k_zero(nvars)
        y = b[i] if i < len(b) else _k_zero(nvars)
        out.append(x + y)
    return up_trim(out)


def up_scale(a: list[RatFn], c: RatFn) -> list[RatFn]:
    return up_trim([x * c for x in a])


def up_mul(a: list[RatFn], b: list[RatFn], nvars: int) -> list[RatFn]:
    if not a or not b:
        return []
    out = [_k_zero(nvars) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if y.is_zero():
                continue
            out[i + j] = out[i + j] + x * y
    return up_trim(out)


def up_pow(g: list[RatFn], k: int, nvars: int) -> list[RatFn]:
    out = [RatFn.one(nvars)]
    for _ in range(k):
        out = up_mul(out, g, nvars)
    return out


def up_divmod(a: list[RatFn], b: list[RatFn], nvars: int) -> tuple[list[RatFn], list[RatFn]]:
    if not b:
        raise KernelError("univariate division by zero")
    rem = list(a)
    quo = [_k_zero(nvars) for _ in range(max(0, len(a) - len(b) + 1))]
    inv_lead = b[-1].inv()
    for i in range(len(rem) - len(b), -1, -1):
        c = rem[i + len(b) - 1] * inv_lead
        if c.is_zero():
            continue
        quo[i] = c
        for j, bv in enumerate(b):
            rem[i + j] = rem[i + j] - c * bv
    return up_trim(quo), up_trim(rem)


def up_bezout(a: list[RatFn], b: list[RatFn], nvars: int):
    """(g, u, v) with u*a + v*b = g, g a gcd of a and b in K[q]."""
    minus_one = RatFn.const(nvars, -1)
    r0, r1 = list(a), list(b)
    u0, u1 = [RatFn.one(nvars)], []
    v0, v1 = [], [RatFn.one(nvars)]
    while r1:
        q, r = up_divmod(r0, r1, nvars)
        r0, r1 = r1, r
        u0, u1 = u1, up_add(u0, up_scale(up_mul(q, u1, nvars), minus_one), nvars)
        v0, v1 = v1, up_add(v0, up_scale(up_mul(q, v1, nvars), minus_one), nvars)
    return r0, u0, v0


def mpoly_to_upoly(p: MPoly) -> list[RatFn]:
    """q-polynomial (nonnegative integer exponents) to coefficient list."""
    lo, hi = p.q_degrees()
    if lo < 0 or hi != int(hi) or lo != int(lo):
        raise KernelError("not a polynomial in q")
    out = [RatFn.zero(p.nvars) for _ in range(int(hi) + 1)]
    for qexp, coeff in p.q_coefficients().items():
        if qexp != int(qexp):
            raise KernelError("fractional q exponent in polynomial context")
        out[int(qexp)] = RatFn.from_poly(coeff)
    return up_trim(out)


def upoly_to_ratfn(p: list[RatFn], nvars: int) -> RatFn:
    out = RatFn.zero(nvars)
    for k, c in enumerate(p):
        if not c.is_zero():
            out = out + c * _q_power(nvars, k)
    return out


def _q_power(nvars: int, k: int) -> RatFn:
    return RatFn.monomial(nvars, (Fraction(k),) + (Fraction(0),) * (nvars - 1))


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

@dataclass
class PartialFractions:
    """Exact decomposition; parts[key][j] is the numerator over factor^j."""

    nvars: int
    laurent: dict[int, RatFn]
    parts: dict[FactorKey, dict[int, list[RatFn]]]
    factors: dict[FactorKey, MPoly]

    def reassemble(self) -> RatFn:
        out = RatFn.zero(self.nvars)
        for k, c in self.laurent.items():
            out = out + c * _q_power(self.nvars, k)
        for key, by_pow in self.parts.items():
            f = self.factors[key]
            for j, numer in by_pow.items():
                out = out + upoly_to_ratfn(numer, self.nvars) * \
                    RatFn.fraction(MPoly.one(self.nvars), (f,) * j)
        return out

    def coordinates(self):
        """Stable iteration of (coordinate key, q-free RatFn value) pairs."""
        for k in sorted(self.laurent):
            yield ("laurent", k), self.laurent[k]
        for key in sorted(self.parts):
            for j in sorted(self.parts[key]):
                for i, c in enumerate(self.parts[key][j]):
                    yield ("pole", key, j, i), c

    def part_at(self, factor: MPoly, power: int, index: int = 0) -> RatFn:
        numer = self.parts.get(_factor_key(factor), {}).get(power, [])
        return numer[index] if index < len(numer) else RatFn.zero(self.nvars)


def partial_fractions(f: RatFn) -> PartialFractions:
    """Full decomposition of f over its tracked factor basis."""
    nvars = f.nvars
    if f.is_zero():
        return PartialFractions(nvars, {}, {}, {})

    qfree: list[MPoly] = []
    qdep: dict[FactorKey, tuple[MPoly, int]] = {}
    for fac in f.den:
        if fac.is_q_free():
            qfree.append(fac)
        else:
            key = _factor_key(fac)
            prev = qdep.get(key)
            qdep[key] = (fac, (prev[1] if prev else 0) + 1)

    scale = RatFn.fraction(MPoly.one(nvars), tuple(qfree)) if qfree else RatFn.one(nvars)

    lo, _ = f.num.q_degrees()
    if lo != int(lo):
        raise KernelError("fractional q exponent outside a denominator factor")
    shift = -int(lo) if lo < 0 else 0
    q_poly = f.num.mono_shift((Fraction(shift),) + (Fraction(0),) * (nvars - 1))
    numer = up_scale(mpoly_to_upoly(q_poly), scale)

    # factor groups: an origin block q^shift plus the tracked q-factors
    groups: list[tuple[list[RatFn], int, MPoly | None]] = []
    if shift:
        groups.append(([_k_zero(nvars), RatFn.one(nvars)], shift, None))
    for fac, mult in sorted(qdep.values(), key=lambda t: _factor_key(t[0])):
        groups.append((mpoly_to_upoly(fac), mult, fac))

    laurent: dict[int, RatFn] = {}
    parts: dict[FactorKey, dict[int, list[RatFn]]] = {}
    factors: dict[FactorKey, MPoly] = {}

    def emit_poly(p: list[RatFn]) -> None:
        for k, c in enumerate(p):
            if not c.is_zero():
                laurent[k] = laurent.get(k, _k_zero(nvars)) + c

    def emit_part(rem: list[RatFn], g: list[RatFn], mult: int, fac: MPoly | None) -> None:
        if not rem:
            return
        # g-adic expansion: rem = sum_j C_j g^j with deg C_j < deg g
        adic: dict[int, list[RatFn]] = {}
        j = mult
        cur = list(rem)
        while cur:
            if j < 1:
                raise KernelError("partial fraction bookkeeping error")
            cur, r = up_divmod(cur, g, nvars)
            if r:
                adic[j] = r
            j -= 1
        if fac is None:  # origin block: 1/q^j terms
            for jj, numer_up in adic.items():
                c = numer_up[0]
                if not c.is_zero():
                    laurent[-jj] = laurent.get(-jj, _k_zero(nvars)) + c
            return
        key = _factor_key(fac)
        factors[key] = fac
        store = parts.setdefault(key, {})
        for jj, numer_up in adic.items():
            store[jj] = up_add(store.get(jj, []), numer_up, nvars)

    def split(numer_up: list[RatFn], gs) -> None:
        if not gs:
            emit_poly(numer_up)
            return
        (g, mult, fac), rest = gs[0], gs[1:]
        gm = up_pow(g, mult, nvars)
        if not rest:
            quo, rem = up_divmod(numer_up, gm, nvars)
            emit_poly(quo)
            emit_part(rem, g, mult, fac)
            return
        h = [RatFn.one(nvars)]
        for g2, m2, _ in rest:
            h = up_mul(h, up_pow(g2, m2, nvars), nvars)
        gcd, u, v = up_bezout(gm, h, nvars)
        if len(gcd) != 1:
            raise KernelError("denominator factors are not coprime")
        c = gcd[0].inv()
        u, v = up_scale(u, c), up_scale(v, c)
        # numer/(gm*h) = numer*v/gm + numer*u/h
        quo, rem = up_divmod(up_mul(numer_up, v, nvars), gm, nvars)
        emit_part(rem, g, mult, fac)
        split(up_add(up_mul(numer_up, u, nvars), up_mul(quo, h, nvars), nvars), rest)

    # N' = num * q^shift over den' = q^shift * prod(F) is f itself, so the
    # decomposition below is already the decomposition of f
    split(numer, groups)

    laurent_clean = {k: v for k, v in laurent.items() if not v.is_zero()}
    parts_clean: dict[FactorKey, dict[int, list[RatFn]]] = {}
    for key, by_pow in parts.items():
        by_pow = {j: n for j, n in ((j, up_trim(list(n))) for j, n in by_pow.items()) if n}
        if by_pow:
            parts_clean[key] = by_pow
    factors_clean = {k: factors[k] for k in parts_clean}
    return PartialFractions(nvars, laurent_clean, parts_clean, factors_clean)
