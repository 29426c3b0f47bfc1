"""Section-space localization on quasimap graph spaces (the F_0 oracle).

For a product of projective spaces the degree-d quasimap graph space with
no markings is the product of projectivized section spaces P(V_{d_f}),
V_{d_f} = H^0(P^1, O(d_f))^{n_f + 1}.  Its T x C*-fixed points are the
monomial sections; the locus F_0 (all degree concentrated in a base point
at 0) carries the unstable terms of the small J-function.

Conventions: q is the character of the cotangent line of P^1 at 0, so the
monomial section x_0^a x_1^{d-a} carries q^a and the coordinate vector
e_s carries L_s^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .. import target as target_mod
from ..chars import Mono, mono_div, mono_mul, mono_one
from ..ratfun import KernelError, RatFn
from ..soperator import EpsilonChamber


@dataclass(frozen=True)
class GraphFixedPoint:
    """Monomial fixed point of prod_f P(V_{d_f})."""

    label: tuple            # per factor: (coordinate s, x_0-exponent a)
    weight: Mono            # T x C* character of the monomial section
    tangent_chars: tuple[Mono, ...]
    base_length_at_zero: tuple[int, ...]   # per factor: a
    target_point: int       # id of the fixed point the section sits over


def _section_weight(target, f: int, s: int, a: int) -> Mono:
    """Character of e_s x_0^a x_1^{d-a} in factor f: L_{f,s}^{-1} q^a."""
    e = [Fraction(0)] * target.nvars
    e[0] = Fraction(a)
    off, _ = target.factor_offsets[f]
    e[1 + off + s] = Fraction(-1)
    return tuple(e)


def graph_space_fixed_points(target: target_mod.TargetData, d: tuple[int, ...]) -> list[GraphFixedPoint]:
    """Complete enumeration of the T x C* fixed points at class d."""
    if not hasattr(target, "factor_offsets"):
        raise KernelError("graph-space oracle needs a built-in product target")
    if len(d) != target.novikov_rank or any(x < 0 for x in d):
        raise KernelError(f"bad effective class {d!r}")
    dims = target.dims
    per_factor = []
    for f, n in enumerate(dims):
        per_factor.append([(s, a) for s in range(n + 1) for a in range(d[f] + 1)])
    label_of = {fp.label: fp.id for fp in target.fixed_points}

    out = []
    for label in iproduct(*per_factor) if dims else [()]:
        weight = mono_one(target.nvars)
        for f, (s, a) in enumerate(label):
            weight = mono_mul(weight, _section_weight(target, f, s, a))
        tangent = []
        for f, n in enumerate(dims):
            for s in range(n + 1):
                for a in range(d[f] + 1):
                    if (s, a) == label[f]:
                        continue
                    tangent.append(mono_div(_section_weight(target, f, s, a),
                                            _section_weight(target, f, *label[f])))
        out.append(GraphFixedPoint(
            label=tuple(label),
            weight=weight,
            tangent_chars=tuple(tangent),
            base_length_at_zero=tuple(lab[1] for lab in label),
            target_point=label_of[tuple(lab[0] for lab in label)],
        ))
    return out


def graph_space_dimension(target, d: tuple[int, ...]) -> int:
    return sum((n + 1) * (df + 1) for n, df in zip(target.dims, d)) - len(target.dims)


def residue_sum_of_structure_sheaf(target, d: tuple[int, ...]) -> RatFn:
    """Localization sum of 1/eu(T) over all fixed points; equals chi(QG, O) = 1."""
    total = RatFn.zero(target.nvars)
    for pt in graph_space_fixed_points(target, d):
        total = total + RatFn.euler_inverse(target.nvars, pt.tangent_chars)
    return total


def unstable_J_terms(target, chamber: EpsilonChamber, d: tuple[int, ...]) -> dict[int, RatFn]:
    """Q^d coefficient of J^eps at t = 0, restricted to each fixed point.

    Defined only while eps * d(L_theta) <= 1 (the term is unstable in the
    chamber); otherwise the caller must assemble the coefficient from the
    two-point recursion data instead.
    """
    theta_deg = target.theta_degree(d)
    if theta_deg < 1:
        raise KernelError("unstable terms need d != 0")
    if not chamber.term_is_unstable(theta_deg):
        raise KernelError(
            f"degree {d} is stable in chamber {chamber}; use the recursion engine")
    out: dict[int, RatFn] = {}
    for pt in graph_space_fixed_points(target, d):
        if pt.base_length_at_zero != tuple(d):
            continue  # not in F_0
        beta = pt.target_point
        val = target.euler(beta) * RatFn.euler_inverse(target.nvars, pt.tangent_chars)
        out[beta] = out.get(beta, RatFn.zero(target.nvars)) + val
    return out
