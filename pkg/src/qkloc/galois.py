"""Branch averaging for multiple-cover contributions.

An m-fold cover edge carries weights in fractional powers lam^{k/m}.  In
K-theory the fixed-point contribution of such an edge is the average over
the deck group's m twisted sectors, i.e. over all m-th root branches of
lam^{1/m}.  Over the rational character field that average is the x^0
component of the contribution reduced in the field

    K[x] / (x^m - lam),

because Tr(x^k) vanishes for 0 < k < m.  This keeps every computed series
inside honest rational character arithmetic (the averaged factors like
1/(1 - q x^{-1}) come out as 1/(1 - q^m lam^{-1}) and friends).
"""

from __future__ import annotations

from fractions import Fraction

from .chars import MPoly, Mono, mono_pow
from .pfrac import up_bezout
from .ratfun import KernelError, RatFn


def _decompose(p: MPoly, x: Mono, m: int) -> list[MPoly]:
    """Write p = sum_k x^k p_k with p_k on the integer-multiple-free lattice."""
    comps: list[dict] = [dict() for _ in range(m)]
    for mono, c in p.terms.items():
        hit = None
        for k in range(m):
            shifted = tuple(a - k * b for a, b in zip(mono, x))
            if all(e.denominator == 1 for e in shifted):
                hit = (k, shifted)
                break
        if hit is None:
            raise KernelError(f"monomial {mono} is not on the x-branch lattice")
        k, shifted = hit
        comps[k][shifted] = comps[k].get(shifted, Fraction(0)) + c
    return [MPoly(p.nvars, d) for d in comps]


def _field_mul(a: list[RatFn], b: list[RatFn], lam_rat: RatFn, m: int, nvars: int) -> list[RatFn]:
    out = [RatFn.zero(nvars) for _ in range(m)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if y.is_zero():
                continue
            k = i + j
            v = x * y
            if k >= m:
                k -= m
                v = v * lam_rat
            out[k] = out[k] + v
    return out


def _field_inv(a: list[RatFn], lam_rat: RatFn, m: int, nvars: int) -> list[RatFn]:
    # invert modulo x^m - lam by extended Euclid in K[x]
    modulus = [-lam_rat] + [RatFn.zero(nvars)] * (m - 1) + [RatFn.one(nvars)]
    poly = list(a)
    while poly and poly[-1].is_zero():
        poly.pop()
    if not poly:
        raise KernelError("division by zero in branch field")
    gcd, u, _ = up_bezout(poly, modulus, nvars)
    if len(gcd) != 1:
        raise KernelError("branch modulus is not coprime to the element")
    inv_g = gcd[0].inv()
    out = [c * inv_g for c in u]
    while len(out) > m:  # reduce via x^m = lam
        c = out.pop()
        out[len(out) - m] = out[len(out) - m] + c * lam_rat
    out += [RatFn.zero(nvars)] * (m - len(out))
    return out


def galois_average(f: RatFn, lam: Mono, m: int) -> RatFn:
    """(1/m) sum over branches zeta of f with lam^{1/m} -> zeta lam^{1/m}."""
    if m == 1:
        return f
    nvars = f.nvars
    x = mono_pow(lam, Fraction(1, m))
    lam_rat = RatFn.monomial(nvars, lam)
    acc = [RatFn.from_poly(p) for p in _decompose(f.num, x, m)]
    for fac in f.den:
        comps = _decompose(fac, x, m)
        if all(c.is_zero() for c in comps[1:]):
            acc[0:m] = [c * RatFn.from_poly(comps[0]).inv() for c in acc]
            continue
        inv = _field_inv([RatFn.from_poly(c) for c in comps], lam_rat, m, nvars)
        acc = _field_mul(acc, inv, lam_rat, m, nvars)
    return acc[0]
