"""Pole taxonomy, the double-pole space, and expansions at roots of unity.

The allowed pole locations for every series in the pipeline are: q = 0,
q = infinity, roots of unity, and simple "orbit" poles at m-th roots of a
one-dimensional-orbit character.  A PoleProfile classifies the tracked
denominator factors of a RatFn against that taxonomy; anything else is
reported, not guessed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chars import MPoly, mono_char_part, mono_inv, mono_is_one, mono_one, mono_pow
from .pfrac import partial_fractions, up_trim, upoly_to_ratfn
from .ratfun import (
    KernelError,
    RatFn,
    _factor_key,
    _one_minus_x_pow_factors,
    cyclotomic_coeffs,
)


@dataclass(frozen=True)
class PoleEntry:
    kind: str            # "origin" | "root_of_unity" | "orbit" | "unclassified"
    order: int
    m: int | None = None          # cyclotomic order / cover multiplicity
    orbit_label: object = None    # caller's key for the orbit character
    detail: str = ""


@dataclass
class PoleProfile:
    entries: list[PoleEntry]
    infinity_decay: Fraction | None

    @property
    def unclassified(self) -> list[PoleEntry]:
        return [e for e in self.entries if e.kind == "unclassified"]

    def orbit_entries(self):
        return [e for e in self.entries if e.kind == "orbit"]

    def root_of_unity_entries(self):
        return [e for e in self.entries if e.kind == "root_of_unity"]

    def max_root_of_unity_order(self) -> int:
        return max((e.order for e in self.root_of_unity_entries()), default=0)


def _classify_cyclotomic(factor: MPoly) -> int | None:
    """d such that factor is the canonical block of 1 - q^_ at level d."""
    deg = factor.q_degrees()[1]
    if deg != int(deg):
        return None
    deg = int(deg)
    x = (Fraction(1),) + (Fraction(0),) * (factor.nvars - 1)
    for d in range(1, 6 * deg + 7):
        if d == 1:
            block = MPoly(factor.nvars, {mono_one(factor.nvars): Fraction(1), x: Fraction(-1)})
        else:
            coeffs = cyclotomic_coeffs(d)
            if len(coeffs) - 1 != deg:
                continue
            sign = 1 if coeffs[0] > 0 else -1
            block = MPoly(factor.nvars, {mono_pow(x, j): Fraction(sign * c)
                                         for j, c in enumerate(coeffs) if c})
        if block == factor:
            return d
    return None


def pole_profile(f: RatFn, orbit_characters=None, m_max: int = 6) -> PoleProfile:
    """Classify every pole of f.

    orbit_characters: mapping label -> q-free character monomial lambda
    (the tangent character at the fixed point along the orbit).  A factor
    matching a block of 1 - q^m lambda^{-1} is an orbit pole (label, m).
    """
    if f.is_zero():
        return PoleProfile([], None)
    orbit_characters = orbit_characters or {}
    nvars = f.nvars

    orbit_blocks: dict[tuple, tuple[object, int]] = {}
    for label, lam in orbit_characters.items():
        for m in range(1, m_max + 1):
            x = mono_pow(lam, Fraction(-1, m))
            x = ((Fraction(1),) + tuple(x[1:]))  # q * lambda^{-1/m}
            for block in _one_minus_x_pow_factors(nvars, x, m):
                orbit_blocks.setdefault(_factor_key(block), (label, m))

    from collections import Counter
    counts = Counter(_factor_key(fac) for fac in f.den)
    by_key = {_factor_key(fac): fac for fac in f.den}

    entries: list[PoleEntry] = []
    origin = f.origin_order()
    if origin < 0:
        entries.append(PoleEntry("origin", int(-origin)))
    for key in sorted(counts):
        fac = by_key[key]
        if fac.is_q_free():
            continue
        mult = counts[key]
        d = _classify_cyclotomic(fac)
        if d is not None:
            entries.append(PoleEntry("root_of_unity", mult, m=d))
            continue
        hit = orbit_blocks.get(key)
        if hit is not None:
            label, m = hit
            entries.append(PoleEntry("orbit", mult, m=m, orbit_label=label))
            continue
        entries.append(PoleEntry("unclassified", mult, detail=repr(fac)))
    return PoleProfile(entries, f.infinity_decay())


def assert_lemma_taxonomy(f: RatFn, orbit_characters, m_max: int = 6, context: str = "") -> PoleProfile:
    """Poles only at 0, infinity, roots of unity, simple orbit poles."""
    prof = pole_profile(f, orbit_characters, m_max=m_max)
    if prof.unclassified:
        raise KernelError(f"unclassified pole {prof.unclassified[0].detail} {context}")
    bad = [e for e in prof.orbit_entries() if e.order != 1]
    if bad:
        raise KernelError(f"orbit pole of order {bad[0].order} (must be simple) {context}")
    return prof


def double_pole_space_member(f: RatFn) -> bool:
    """Membership in (1/(1-q))^2 * Q[q/(1-q)].

    Equivalent analytic test: poles only at q = 1 and decay of order >= 2
    at q = infinity (which also forces regularity at q = 0).
    """
    if f.is_zero():
        return True
    one_minus_q = MPoly(f.nvars, {mono_one(f.nvars): Fraction(1),
                                  (Fraction(1),) + (Fraction(0),) * (f.nvars - 1): Fraction(-1)})
    for fac in f.den:
        if fac.is_q_free():
            continue
        if fac != one_minus_q:
            return False
    return f.origin_order() >= 0 and f.infinity_decay() >= 2


@dataclass
class UnityExpansion:
    """f = sum_i c_i q^i/(1-q)^{i+1} + higher-root blocks + remainder."""

    nvars: int
    xi_one: list[RatFn]                       # c_i by i, coefficients q-free
    blocks: list[tuple[int, int, list[RatFn]]]  # (d, power, numerator) for d >= 2
    remainder: RatFn

    def reassemble(self) -> RatFn:
        nv = self.nvars
        one = mono_one(nv)
        qm = (Fraction(1),) + (Fraction(0),) * (nv - 1)
        one_minus_q = MPoly(nv, {one: Fraction(1), qm: Fraction(-1)})
        out = self.remainder
        for i, c in enumerate(self.xi_one):
            if c.is_zero():
                continue
            num = MPoly.monomial(nv, mono_pow(qm, i))
            out = out + c * RatFn.fraction(num, (one_minus_q,) * (i + 1))
        for d, power, numer in self.blocks:
            coeffs = cyclotomic_coeffs(d)
            sign = 1 if coeffs[0] > 0 else -1
            block = MPoly(nv, {mono_pow(qm, j): Fraction(sign * c)
                               for j, c in enumerate(coeffs) if c})
            out = out + upoly_to_ratfn(numer, nv) * RatFn.fraction(MPoly.one(nv), (block,) * power)
        return out


def expand_at_one(f: RatFn, order_cap: int) -> UnityExpansion:
    """Decompose the root-of-unity poles of f into the standard basis.

    The xi = 1 part is returned in the basis (q^i/(1-q)^{i+1})_i; deeper
    roots of unity stay grouped per cyclotomic block.  The remainder is
    regular at every root of unity.  A pole order above order_cap is an
    error naming the offending factor.
    """
    nvars = f.nvars
    pf = partial_fractions(f)

    remainder = RatFn.zero(nvars)
    for k, c in pf.laurent.items():
        remainder = remainder + c * RatFn.monomial(
            nvars, (Fraction(k),) + (Fraction(0),) * (nvars - 1))

    xi_one: list[RatFn] = []
    blocks: list[tuple[int, int, list[RatFn]]] = []
    for key in sorted(pf.parts):
        fac = pf.factors[key]
        d = _classify_cyclotomic(fac)
        by_pow = pf.parts[key]
        if d is None:
            for j, numer in by_pow.items():
                remainder = remainder + upoly_to_ratfn(numer, nvars) * \
                    RatFn.fraction(MPoly.one(nvars), (fac,) * j)
            continue
        top = max(by_pow)
        if top > order_cap:
            raise KernelError(
                f"pole order {top} at root-of-unity block d={d} exceeds cap {order_cap}")
        if d == 1:
            # b_k / (1-q)^k  ->  c_i q^i / (1-q)^{i+1}, triangular from the top
            b = [RatFn.zero(nvars) for _ in range(top + 1)]
            for j, numer in by_pow.items():
                b[j] = numer[0]
            c = [RatFn.zero(nvars) for _ in range(top)]
            from math import comb
            for i in range(top - 1, -1, -1):
                c[i] = b[i + 1]
                for j in range(1, i + 1):
                    b[i + 1 - j] = b[i + 1 - j] - c[i].scale(comb(i, j) * (-1) ** j)
            xi_one = c
        else:
            for j in sorted(by_pow):
                blocks.append((d, j, by_pow[j]))
    return UnityExpansion(nvars, up_trim(list(xi_one)), blocks, remainder)


def substitute_q(f: RatFn, value, *, residue: bool = False) -> RatFn:
    """Kernel substitution op: value is "1/q", an integer power m (q -> q^m),
    or a q-free character monomial; with residue=True the simple-pole
    residue coefficient at q = value is returned instead.
    """
    nvars = f.nvars
    if residue:
        if isinstance(value, str):
            raise KernelError("residue requests need an explicit monomial")
        rho = mono_inv(value)
        return f.residue_at(rho)
    if value == "1/q":
        return f.subs_q_inverse()
    if isinstance(value, int):
        return f.subs_q(MPoly.monomial(nvars, mono_pow(
            (Fraction(1),) + (Fraction(0),) * (nvars - 1), value)))
    return f.subs_q(MPoly.monomial(nvars, value))


def qrat_arith(a: RatFn, b: RatFn, op: str) -> RatFn:
    """Spec-surface arithmetic entry point."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise KernelError("division by zero")
        return a / b
    raise KernelError(f"unknown op {op!r}")
