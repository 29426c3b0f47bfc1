"""Wall-crossing: tau extraction, chamber reconstruction, theorem checks.

The degree-by-degree solver realizes the uniqueness induction: at each
bi-degree (t-order, theta-degree), the orbit-pole part of every S-matrix
entry is forced by the recursion relation from lower degrees, the unknown
initial part is a finite combination sum_i c_i q^i/(1-q)^{i+1}, and the
c's (together with the Laurent coefficients of the P-series) are pinned by
exact linear constraints: the J = S(P) composite against the independently
computed J anchor, regularity of D(S) at roots of unity for a family of
integer twists, the string-equation link between the t-slices, and the
symmetry of the two-point double bracket.  Inconsistent or underdetermined
systems abort with the bi-degree and residual, never silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .chars import MPoly, mono_one, mono_pow
from .pfrac import partial_fractions
from .poles import double_pole_space_member, pole_profile
from .ratfun import KernelError, RatFn, _factor_key
from .series import Caps, TruncSeries
from .soperator import (
    CheckReport,
    EpsilonChamber,
    SSystem,
    apply_S,
    apply_S_adjoint,
    basis_class,
    metric_G,
    one_minus_q_rho,
    one_over_one_minus_q,
    recursion_rhs,
    unit_class,
)


class SolverError(KernelError):
    """Constraint system inconsistent or underdetermined at a bi-degree."""


# ---------------------------------------------------------------------------
# tau extraction and tau maps
# ---------------------------------------------------------------------------

def _one_minus_q_poly(nvars: int) -> MPoly:
    return one_minus_q_rho(nvars, mono_one(nvars))


def tau_coefficient(f: RatFn) -> RatFn:
    """Coefficient of 1/(1-q) in the canonical partial-fraction split."""
    pf = partial_fractions(f)
    return pf.part_at(_one_minus_q_poly(f.nvars), 1)


def split_off_tau(f: RatFn, orbit_chars, m_max: int = 6):
    """f = const + tau/(1-q) + double-pole part + orbit/root-of-unity rest.

    Returns (const, tau, dps, rest); raises when the residual after removing
    the prescribed parts is not a double-pole-space member.
    """
    nvars = f.nvars
    pf = partial_fractions(f)
    one_mq = _one_minus_q_poly(nvars)
    const = pf.laurent.get(0, RatFn.zero(nvars))
    tau = RatFn.zero(nvars)
    dps = RatFn.zero(nvars)
    rest = RatFn.zero(nvars)
    for k, c in pf.laurent.items():
        if k != 0:
            rest = rest + c * RatFn.monomial(nvars, (Fraction(k),) + (Fraction(0),) * (nvars - 1))
    for key, by_pow in pf.parts.items():
        fac = pf.factors[key]
        for j, numer in by_pow.items():
            term = RatFn.zero(nvars)
            for i, cc in enumerate(numer):
                term = term + cc * RatFn.monomial(
                    nvars, (Fraction(i),) + (Fraction(0),) * (nvars - 1))
            term = term * RatFn.fraction(MPoly.one(nvars), (fac,) * j)
            if _factor_key(fac) == _factor_key(one_mq):
                if j == 1:
                    tau = tau + numer[0]
                else:
                    dps = dps + term
            else:
                rest = rest + term
    if not double_pole_space_member(dps):
        raise KernelError("double-pole residual failed membership (upstream bug)")
    return const, tau, dps, rest


def extract_tau(s: SSystem, gamma: list[TruncSeries]) -> dict:
    """tau_gamma: per key (d, k, i) the 1/(1-q)-coefficient class vector.

    The decomposition S(gamma) = gamma + tau/(1-q) + double-pole part is
    checked structurally on the residual (orbit and root-of-unity parts are
    removed first, per the pole taxonomy).
    """
    caps, t = s.caps, s.target
    image = apply_S(s, gamma)
    out: dict = {}
    for b in range(t.n_points):
        diff = image[b] - gamma[b]
        for key, v in diff.sorted_items():
            const, tau, dps, rest = split_off_tau(v, t.orbit_characters(b))
            prof = pole_profile(rest, t.orbit_characters(b))
            if prof.unclassified:
                raise KernelError(f"tau residual unclassified at {b} {key}")
            out.setdefault(key, [RatFn.zero(t.nvars) for _ in range(t.n_points)])
            out[key][b] = tau
    return out


@dataclass
class TauMap:
    """t -> t + sum_d Q^d (const_d + linear_d(t)), truncated at the caps.

    const_d is a class (vector of basis coefficients), linear_d a matrix
    acting on basis coefficients.
    """

    caps: Caps
    n: int
    const: dict = field(default_factory=dict)   # d -> list[RatFn]
    linear: dict = field(default_factory=dict)  # d -> matrix[list[list[RatFn]]]

    def is_identity(self) -> bool:
        return all(all(c.is_zero() for c in v) for v in self.const.values()) and \
            all(all(c.is_zero() for c in row) for m in self.linear.values() for row in m)

    def compose(self, other: TauMap) -> TauMap:
        """self after other: t -> self(other(t)), truncated."""
        caps, n = self.caps, self.n
        nv = caps.nvars
        out = TauMap(caps, n)
        zero = caps.zero_class()

        def add_const(d, vec):
            cur = out.const.setdefault(d, [RatFn.zero(nv) for _ in range(n)])
            for i in range(n):
                cur[i] = cur[i] + vec[i]

        def add_lin(d, mat):
            cur = out.linear.setdefault(
                d, [[RatFn.zero(nv) for _ in range(n)] for _ in range(n)])
            for i in range(n):
                for j in range(n):
                    cur[i][j] = cur[i][j] + mat[i][j]

        for d, vec in other.const.items():
            add_const(d, vec)
        for d, mat in other.linear.items():
            add_lin(d, mat)
        for d1, vec in self.const.items():
            add_const(d1, vec)
        for d1, mat in self.linear.items():
            add_lin(d1, mat)
            # linear part applied to other's corrections
            for d2, vec in other.const.items():
                d = caps.add_classes(d1, d2)
                if caps.theta_degree(d) <= caps.d_max:
                    add_const(d, [sum((mat[i][j] * vec[j] for j in range(n)),
                                      RatFn.zero(nv)) for i in range(n)])
            for d2, mat2 in other.linear.items():
                d = caps.add_classes(d1, d2)
                if caps.theta_degree(d) <= caps.d_max:
                    add_lin(d, [[sum((mat[i][k] * mat2[k][j] for k in range(n)),
                                     RatFn.zero(nv)) for j in range(n)]
                                for i in range(n)])
        out.const.pop(zero, None)
        out.linear.pop(zero, None)
        return out

    def inverse(self) -> TauMap:
        """Inverse modulo the caps, by degree-by-degree Neumann iteration."""
        out = TauMap(self.caps, self.n)
        cur = self
        # tau = id + N with N of positive degree; tau^{-1} = id - N + N^2 ...
        neg = TauMap(self.caps, self.n,
                     {d: [-c for c in v] for d, v in self.const.items()},
                     {d: [[-c for c in row] for row in m] for d, m in self.linear.items()})
        term = neg
        for _ in range(self.caps.d_max + 1):
            out = _tau_add(out, term)
            term = _tau_positive_part(neg.compose(term), self.caps, self.n)
            if term.is_identity():
                break
        return out


def _tau_add(a: TauMap, b: TauMap) -> TauMap:
    out = TauMap(a.caps, a.n, dict(), dict())
    nv = a.caps.nvars
    for src in (a, b):
        for d, v in src.const.items():
            cur = out.const.setdefault(d, [RatFn.zero(nv) for _ in range(a.n)])
            for i in range(a.n):
                cur[i] = cur[i] + v[i]
        for d, m in src.linear.items():
            cur = out.linear.setdefault(
                d, [[RatFn.zero(nv) for _ in range(a.n)] for _ in range(a.n)])
            for i in range(a.n):
                for j in range(a.n):
                    cur[i][j] = cur[i][j] + m[i][j]
    return out


def _tau_positive_part(t: TauMap, caps: Caps, n: int) -> TauMap:
    zero = caps.zero_class()
    return TauMap(caps, n,
                  {d: v for d, v in t.const.items() if d != zero},
                  {d: m for d, m in t.linear.items() if d != zero})


def tau_from_extraction(caps: Caps, n: int, table: dict) -> TauMap:
    """Build the map t -> tau(t) from extract_tau output on gamma = 1."""
    out = TauMap(caps, n)
    zero = caps.zero_class()
    for (d, k, i), vec in table.items():
        if d == zero and k == 1:
            continue  # the identity part tau = t + O(Q)
        if k == 0:
            if any(not v.is_zero() for v in vec):
                out.const[d] = list(vec)
        else:
            mat = out.linear.setdefault(
                d, [[RatFn.zero(caps.nvars) for _ in range(n)] for _ in range(n)])
            for b in range(n):
                mat[b][i] = mat[b][i] + vec[b]
    return out


def apply_tau_matrix(s: SSystem, tau: TauMap) -> SSystem:
    """The system S_{tau(t)}: recombine the t-slices along the tau map."""
    caps, t = s.caps, s.target
    n = t.n_points
    matrix = {}
    for (b, a), series in s.matrix.items():
        out = dict(series.coeff)

        def add(key, val):
            if val.is_zero():
                return
            cur = out.get(key)
            s2 = val if cur is None else cur + val
            if s2.is_zero():
                out.pop(key, None)
            else:
                out[key] = s2

        for (d, k, i), v in series.coeff.items():
            if k != 1:
                continue
            # t-slot receives tau's corrections
            for d2, vec in tau.const.items():
                dd = caps.add_classes(d, d2)
                if caps.theta_degree(dd) <= caps.d_max and not vec[i].is_zero():
                    add((dd, 0, -1), v * vec[i])
            for d2, mat in tau.linear.items():
                dd = caps.add_classes(d, d2)
                if caps.theta_degree(dd) > caps.d_max:
                    continue
                for j in range(n):
                    if not mat[i][j].is_zero():
                        add((dd, 1, j), v * mat[i][j])
        matrix[(b, a)] = TruncSeries(caps, out)
    return SSystem(t, caps, s.chamber, matrix, s.c_table, s.c_inv_table,
                   provenance=s.provenance + " | tau-transformed")


def apply_tau_vector(caps: Caps, n: int, vec: list[TruncSeries], tau: TauMap) -> list[TruncSeries]:
    """Transform a class vector v(t) -> v(tau(t))."""
    out = []
    for b in range(n):
        series = vec[b]
        res = dict(series.coeff)

        def add(key, val):
            if val.is_zero():
                return
            cur = res.get(key)
            s2 = val if cur is None else cur + val
            if s2.is_zero():
                res.pop(key, None)
            else:
                res[key] = s2

        for (d, k, i), v in series.coeff.items():
            if k != 1:
                continue
            for d2, vecc in tau.const.items():
                dd = caps.add_classes(d, d2)
                if caps.theta_degree(dd) <= caps.d_max and not vecc[i].is_zero():
                    add((dd, 0, -1), v * vecc[i])
            for d2, mat in tau.linear.items():
                dd = caps.add_classes(d, d2)
                if caps.theta_degree(dd) > caps.d_max:
                    continue
                for j in range(n):
                    if not mat[i][j].is_zero():
                        add((dd, 1, j), v * mat[i][j])
        out.append(TruncSeries(caps, res))
    return out
