"""Recursion coefficients: K-theoretic Euler classes of m-fold covers.

C(beta, mu, m) is the K-theoretic Euler class of the virtual cotangent
space at the isolated fixed point of the two-pointed degree-m stable-map
space given by the m-fold cover of the orbit joining beta and mu.  Its
character list is H^0 of the pulled-back tangent bundle on the cover with
the single trivial character (the cover's reparametrization direction)
removed:

  * orbit direction: lam^{j/m} for j = -m..m, j != 0,
  * every normal direction (nu, a): nu * lam^{-k/m} for k = 0..m*a,

with lam the tangent character at beta along the orbit.  The same value is
the edge factor of every fixed-point graph sum, which is why it cannot
depend on the stability chamber.
"""

from __future__ import annotations

from fractions import Fraction

from .. import target as target_mod
from ..chars import Mono, mono_div, mono_mul, mono_pow
from ..ratfun import KernelError, RatFn


def edge_characters(target: target_mod.TargetData, beta: int, mu: int, m: int) -> list[Mono]:
    """All H^0 characters on the m-cover edge, trivial one included."""
    if m < 1:
        raise KernelError("cover multiplicity must be >= 1")
    _, lam = target.orbit_between(beta, mu)
    chars: list[Mono] = []
    for j in range(-m, m + 1):
        chars.append(mono_pow(lam, Fraction(j, m)))
    for nu, a in target.orbit_normal_data(beta, mu):
        for k in range(0, m * a + 1):
            chars.append(mono_div(nu, mono_pow(lam, Fraction(k, m))))
    return chars


def recursion_coefficient(target: target_mod.TargetData, beta: int, mu: int, m: int) -> RatFn:
    """C(beta, mu, m) as a polynomial value in the characters."""
    out = RatFn.one(target.nvars)
    for w in edge_characters(target, beta, mu, m):
        if all(x == 0 for x in w):
            continue
        out = out * (RatFn.one(target.nvars) - RatFn.monomial(target.nvars, mono_pow(w, -1)))
    return out


def recursion_coefficient_inv(target: target_mod.TargetData, beta: int, mu: int, m: int) -> RatFn:
    """1/C(beta, mu, m) with the denominator kept factored."""
    chars = [w for w in edge_characters(target, beta, mu, m) if not all(x == 0 for x in w)]
    return RatFn.euler_inverse(target.nvars, chars)


def coefficient_table(target: target_mod.TargetData, m_max: int) -> dict:
    """(beta, mu, m) -> C for every oriented orbit; the chamber-shared table."""
    out = {}
    for fp in target.fixed_points:
        for mu, _, _ in target.orbits_at(fp.id):
            for m in range(1, m_max + 1):
                out[(fp.id, mu, m)] = recursion_coefficient(target, fp.id, mu, m)
    return out
