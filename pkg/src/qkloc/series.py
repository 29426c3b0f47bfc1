"""Novikov-graded, t-order-truncated series of exact rational functions.

A TruncSeries stores coefficients keyed by (effective class d, t-order k,
t-direction i).  The t-order cap is 1 throughout this artifact: inputs are
constant K-classes and everything is kept to linear order in t, which is
why a direction index (one slot per fixed-point basis element) is all the
t-bookkeeping needed.  Multiplication re-truncates eagerly on both the
theta-degree of d and the t-order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .chars import MPoly, mono_pow
from .ratfun import KernelError, RatFn

Novikov = tuple  # tuple[int, ...]
Key = tuple      # (Novikov, k, i) with i = -1 when k = 0


@dataclass(frozen=True)
class Caps:
    """Run-wide truncation data shared by every series in a computation."""

    nvars: int                 # 1 + number of torus characters
    novikov_rank: int
    theta: tuple[int, ...]     # theta-degree of each Novikov generator
    d_max: int
    t_order: int               # 0 or 1
    n_directions: int          # number of t-directions (fixed-point basis)

    def theta_degree(self, d: Novikov) -> int:
        return sum(w * x for w, x in zip(self.theta, d))

    def classes(self) -> list[Novikov]:
        """All effective classes with theta-degree <= d_max, sorted."""
        ranges = [range(0, self.d_max + 1)] * self.novikov_rank
        out = [d for d in product(*ranges) if self.theta_degree(d) <= self.d_max]
        return sorted(out)

    def keys(self) -> list[Key]:
        out: list[Key] = []
        for d in self.classes():
            out.append((d, 0, -1))
            if self.t_order >= 1:
                out.extend((d, 1, i) for i in range(self.n_directions))
        return out

    def zero_class(self) -> Novikov:
        return (0,) * self.novikov_rank

    def add_classes(self, a: Novikov, b: Novikov) -> Novikov:
        return tuple(x + y for x, y in zip(a, b))


class TruncSeries:
    """Map from series keys to RatFn coefficients; absent keys are zero."""

    __slots__ = ("caps", "coeff")

    def __init__(self, caps: Caps, coeff: dict[Key, RatFn] | None = None):
        self.caps = caps
        clean: dict[Key, RatFn] = {}
        if coeff:
            for k, v in coeff.items():
                if v.is_zero():
                    continue
                d, t_k, _ = k
                if caps.theta_degree(d) > caps.d_max or t_k > caps.t_order:
                    continue
                clean[k] = v
        self.coeff = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(caps: Caps) -> TruncSeries:
        return TruncSeries(caps)

    @staticmethod
    def const(caps: Caps, value: RatFn) -> TruncSeries:
        return TruncSeries(caps, {(caps.zero_class(), 0, -1): value})

    @staticmethod
    def one(caps: Caps) -> TruncSeries:
        return TruncSeries.const(caps, RatFn.one(caps.nvars))

    @staticmethod
    def t_direction(caps: Caps, i: int, value: RatFn | None = None) -> TruncSeries:
        v = value if value is not None else RatFn.one(caps.nvars)
        return TruncSeries(caps, {(caps.zero_class(), 1, i): v})

    # -- access ------------------------------------------------------------

    def get(self, key: Key) -> RatFn:
        return self.coeff.get(key, RatFn.zero(self.caps.nvars))

    def get_parts(self, d: Novikov):
        """(t0 coefficient, [t1 coefficients by direction]) at class d."""
        t0 = self.get((d, 0, -1))
        t1 = [self.get((d, 1, i)) for i in range(self.caps.n_directions)]
        return t0, t1

    def is_zero(self) -> bool:
        return not self.coeff

    def sorted_items(self):
        return sorted(self.coeff.items(), key=lambda kv: kv[0])

    def bidegree_of(self, key: Key) -> tuple[int, int]:
        d, k, _ = key
        return (k, self.caps.theta_degree(d))

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: TruncSeries) -> TruncSeries:
        out = dict(self.coeff)
        for k, v in other.coeff.items():
            w = out.get(k)
            s = v if w is None else w + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return TruncSeries(self.caps, out)

    def __neg__(self) -> TruncSeries:
        return TruncSeries(self.caps, {k: -v for k, v in self.coeff.items()})

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        return self + (-other)

    def scale(self, c: RatFn) -> TruncSeries:
        if c.is_zero():
            return TruncSeries(self.caps)
        return TruncSeries(self.caps, {k: v * c for k, v in self.coeff.items()})

    def __mul__(self, other: TruncSeries) -> TruncSeries:
        caps = self.caps
        out: dict[Key, RatFn] = {}
        for (d1, k1, i1), v1 in self.coeff.items():
            for (d2, k2, i2), v2 in other.coeff.items():
                k = k1 + k2
                if k > caps.t_order:
                    continue
                d = caps.add_classes(d1, d2)
                if caps.theta_degree(d) > caps.d_max:
                    continue
                i = i1 if k1 else i2
                key = (d, k, i if k else -1)
                v = v1 * v2
                w = out.get(key)
                s = v if w is None else w + v
                if s.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = s
        return TruncSeries(caps, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("TruncSeries is not hashable")

    # -- coefficient maps ----------------------------------------------------

    def map_coeffs(self, fn) -> TruncSeries:
        return TruncSeries(self.caps, {k: fn(v) for k, v in self.coeff.items()})

    def subs_q(self, value: MPoly) -> TruncSeries:
        return self.map_coeffs(lambda v: v.subs_q(value))

    def subs_q_inverse(self) -> TruncSeries:
        return self.map_coeffs(lambda v: v.subs_q_inverse())

    def novikov_twist(self, a: int) -> TruncSeries:
        """Q^d -> Q^d (1/q)^{a d(L_theta)} (the D(S) twist)."""
        caps = self.caps
        out = {}
        for (d, k, i), v in self.coeff.items():
            l = caps.theta_degree(d)
            if a and l:
                v = v * RatFn.monomial(caps.nvars, mono_pow(
                    (Fraction(1),) + (Fraction(0),) * (caps.nvars - 1), -a * l))
            out[(d, k, i)] = v
        return TruncSeries(caps, out)

    def adams(self, m: int) -> TruncSeries:
        """Psi^m on the series: Q^d -> Q^{md}, q -> q^m, characters to m-th powers.

        Classes pushed beyond d_max are re-truncated away (documented cap).
        """
        if m < 1:
            raise KernelError("Adams operations need a positive integer")
        caps = self.caps
        out: dict[Key, RatFn] = {}
        for (d, k, i), v in self.coeff.items():
            md = tuple(m * x for x in d)
            if caps.theta_degree(md) > caps.d_max:
                continue
            out[(md, k, i)] = v.adams(m)
        return TruncSeries(caps, out)

    def __repr__(self):
        bits = [f"{k}: {v!r}" for k, v in self.sorted_items()]
        return "TruncSeries{" + ", ".join(bits) + "}"


def adams(series: TruncSeries, m: int) -> TruncSeries:
    """Spec-surface Adams operation."""
    return series.adams(m)
