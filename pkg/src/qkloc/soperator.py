"""The S-operator engine: storage, application, adjoints, and verification.

An SSystem holds the fixed-point restrictions beta^* S^eps_t(phi_alpha) as
a matrix of truncated series, together with the chamber label and the
(chamber-independent) recursion-coefficient table.  The operator identities
checked here are exact: unitarity S*(q) o S(1/q) = Id, the recursion
relation residues at orbit poles, and J = S(P).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chars import MPoly, Mono, mono_one, mono_pow
from .poles import assert_lemma_taxonomy, pole_profile
from .ratfun import KernelError, RatFn
from .series import Caps, Key, TruncSeries
from .target import TargetData


# ---------------------------------------------------------------------------
# stability chambers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonChamber:
    """"0+", an interval chamber (1/(e+1), 1/e], or "inf" (eps > 1)."""

    kind: str
    e: int | None = None

    @staticmethod
    def parse(text) -> EpsilonChamber:
        if isinstance(text, EpsilonChamber):
            return text
        s = str(text).strip().lower()
        if s in ("0+", "0plus", "zero+"):
            return EpsilonChamber("0+")
        if s in ("inf", "infinity", "oo"):
            return EpsilonChamber("inf")
        eps = Fraction(s)
        if eps <= 0:
            raise KernelError(f"bad chamber {text!r}")
        if eps > 1:
            return EpsilonChamber("inf")
        return EpsilonChamber("interval", int(Fraction(1) / eps))

    def term_is_unstable(self, theta_degree: int) -> bool:
        """Whether the degree-d one-point term is an F_0 (unstable) term."""
        if self.kind == "0+":
            return True
        if self.kind == "inf":
            return False
        return theta_degree <= self.e

    def __str__(self):
        return f"1/{self.e}" if self.kind == "interval" else self.kind


# ---------------------------------------------------------------------------
# class vectors (fixed-point restrictions / basis coefficients)
# ---------------------------------------------------------------------------

def unit_class(target: TargetData, caps: Caps) -> list[TruncSeries]:
    return [TruncSeries.one(caps) for _ in range(target.n_points)]


def basis_class(target: TargetData, caps: Caps, alpha: int) -> list[TruncSeries]:
    return [TruncSeries.const(caps, target.basis[alpha][b])
            for b in range(target.n_points)]


def vector_sub(a, b):
    return [x - y for x, y in zip(a, b)]


def vector_eq(a, b) -> bool:
    return all((x - y).is_zero() for x, y in zip(a, b))


def one_minus_q_rho(nvars: int, rho: Mono) -> MPoly:
    """The factor 1 - q * rho for a q-free monomial rho."""
    qrho = (rho[0] + 1,) + tuple(rho[1:])
    return MPoly(nvars, {mono_one(nvars): Fraction(1), qrho: Fraction(-1)})


def one_over_one_minus_q(nvars: int) -> RatFn:
    return RatFn.fraction(MPoly.one(nvars),
                          (one_minus_q_rho(nvars, mono_one(nvars)),))


# ---------------------------------------------------------------------------
# the S system
# ---------------------------------------------------------------------------

class SSystem:
    """beta^* S^eps_t applied to each basis class, plus recursion data."""

    def __init__(self, target: TargetData, caps: Caps, chamber: EpsilonChamber,
                 matrix: dict[tuple[int, int], TruncSeries],
                 c_table: dict[tuple[int, int, int], RatFn],
                 c_inv_table: dict[tuple[int, int, int], RatFn],
                 provenance: str = ""):
        self.target = target
        self.caps = caps
        self.chamber = chamber
        self.matrix = matrix
        self.c_table = c_table
        self.c_inv_table = c_inv_table
        self.provenance = provenance

    def entry(self, beta: int, alpha: int) -> TruncSeries:
        return self.matrix.get((beta, alpha), TruncSeries.zero(self.caps))

    def column(self, alpha: int) -> list[TruncSeries]:
        return [self.entry(b, alpha) for b in range(self.target.n_points)]

    def c_inv(self, beta: int, mu: int, m: int) -> RatFn:
        v = self.c_inv_table.get((beta, mu, m))
        if v is None:
            raise KernelError(f"missing recursion coefficient ({beta},{mu},{m})")
        return v

    def map_q(self, fn) -> SSystem:
        return SSystem(self.target, self.caps, self.chamber,
                       {k: v.map_coeffs(fn) for k, v in self.matrix.items()},
                       self.c_table, self.c_inv_table, self.provenance)

    def check_base(self) -> None:
        """Q^0 t^0 part must be the restriction matrix of the basis."""
        d0 = (self.caps.zero_class(), 0, -1)
        for b in range(self.target.n_points):
            for a in range(self.target.n_points):
                if not (self.entry(b, a).get(d0) - self.target.basis[a][b]).is_zero():
                    raise KernelError(f"S matrix Q^0 part wrong at ({b},{a})")


def apply_S(s: SSystem, gamma: list[TruncSeries]) -> list[TruncSeries]:
    """Restrictions of S_t(q)(gamma) for gamma given by basis coefficients.

    The built-in basis is the idempotent fixed-point basis, so coefficients
    and restrictions coincide there.
    """
    if len(gamma) != s.target.n_points:
        raise KernelError("class vector has the wrong length")
    out = []
    for b in range(s.target.n_points):
        acc = TruncSeries.zero(s.caps)
        for a in range(s.target.n_points):
            acc = acc + s.entry(b, a) * gamma[a]
        out.append(acc)
    return out


def correlator_part(s: SSystem, beta: int, alpha: int) -> TruncSeries:
    """Corr in M = restriction + e_beta * Corr (the double-bracket block)."""
    caps = s.caps
    d0 = (caps.zero_class(), 0, -1)
    base = TruncSeries(caps, {d0: s.target.basis[alpha][beta]})
    return (s.entry(beta, alpha) - base).scale(s.target.euler_inv(beta))


def metric_G(s: SSystem):
    """G^eps = g + <<phi_a, phi_b>>_{0,2} and its inverse tensor.

    The double bracket is the q = 0 specialization of the correlator block;
    the inverse is the Neumann series of the paper, truncated at the caps.
    """
    t, caps = s.target, s.caps
    n = t.n_points
    q_zero = MPoly.zero(t.nvars)
    corr0 = [[correlator_part(s, x, b).subs_q(q_zero) for b in range(n)] for x in range(n)]
    gmat = [[t.pairing(a, b) for b in range(n)] for a in range(n)]
    G = [[TruncSeries.const(caps, gmat[a][b]) for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            for x in range(n):
                G[a][b] = G[a][b] + corr0[x][b].scale(t.basis[a][x])
    ginv = _invert_scalar_matrix(gmat, t.nvars)
    delta = [[G[a][b] - TruncSeries.const(caps, gmat[a][b]) for b in range(n)]
             for a in range(n)]
    # Ghat = ginv - ginv delta ginv + ginv delta ginv delta ginv - ...
    ginv_s = [[TruncSeries.const(caps, ginv[a][b]) for b in range(n)] for a in range(n)]
    left = [[_sum_series([delta[a][k].scale(ginv[x][a]) for a in range(n)], caps)
             for k in range(n)] for x in range(n)]  # ginv * delta
    out = [row[:] for row in ginv_s]
    term = _mat_mul_series(left, ginv_s, caps)
    sign = -1
    for _ in range(caps.d_max + caps.t_order + 2):
        if all(term[a][b].is_zero() for a in range(n) for b in range(n)):
            break
        for a in range(n):
            for b in range(n):
                out[a][b] = out[a][b] + (term[a][b] if sign > 0 else -term[a][b])
        term = _mat_mul_series(left, term, caps)
        sign = -sign
    return G, out


def _invert_scalar_matrix(m: list[list[RatFn]], nvars: int) -> list[list[RatFn]]:
    n = len(m)
    a = [[m[i][j] for j in range(n)] + [RatFn.const(nvars, 1 if i == j else 0)
                                        for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise KernelError("metric g is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col].inv()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [[a[i][n + j] for j in range(n)] for i in range(n)]


def _mat_mul_series(a, b, caps: Caps):
    n = len(a)
    return [[_sum_series([a[i][k] * b[k][j] for k in range(n)], caps)
             for j in range(n)] for i in range(n)]


def _sum_series(items, caps: Caps) -> TruncSeries:
    out = TruncSeries.zero(caps)
    for x in items:
        out = out + x
    return out


def apply_S_adjoint(s: SSystem, gamma: list[TruncSeries],
                    metric_inv=None) -> list[TruncSeries]:
    """Restrictions of (S^eps_t)*(q)(gamma), using the inverse tensor."""
    t, caps = s.target, s.caps
    n = t.n_points
    if metric_inv is None:
        _, metric_inv = metric_G(s)
    bracket = []
    for a in range(n):
        acc = TruncSeries.zero(caps)
        for x in range(n):
            acc = acc + gamma[x].scale(t.basis[a][x] * t.euler_inv(x))
            acc = acc + correlator_part(s, x, a) * gamma[x]
        bracket.append(acc)
    out = []
    for b in range(n):
        acc = TruncSeries.zero(caps)
        for a in range(n):
            acc = acc + bracket[a] * metric_inv[a][b]
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool
    first_failure: tuple | None = None
    residual: str = ""

    def __str__(self):
        if self.passed:
            return f"PASS {self.name}"
        return f"FAIL {self.name} at {self.first_failure}: {self.residual}"


def _first_key(caps: Caps, series: TruncSeries):
    return min(series.coeff, key=lambda k: (k[1], caps.theta_degree(k[0]), k))


def verify_unitarity(s: SSystem) -> CheckReport:
    """(S*)(q) o S(1/q) = Id, applied to every basis class."""
    caps, t = s.caps, s.target
    s_inv_q = s.map_q(lambda v: v.subs_q_inverse())
    _, metric_inv = metric_G(s)
    for alpha in range(t.n_points):
        v = apply_S(s_inv_q, basis_class(t, caps, alpha))
        w = apply_S_adjoint(s, v, metric_inv)
        want = basis_class(t, caps, alpha)
        for b in range(t.n_points):
            diff = w[b] - want[b]
            if not diff.is_zero():
                key = _first_key(caps, diff)
                return CheckReport("unitarity", False, (alpha, b, key),
                                   repr(diff.get(key)))
    return CheckReport("unitarity", True)


def verify_SP(s: SSystem, p: list[TruncSeries], j: list[TruncSeries]) -> CheckReport:
    """J = S(P) per fixed point, plus the structural side conditions."""
    caps, t = s.caps, s.target
    got = apply_S(s, p)
    for b in range(t.n_points):
        diff = got[b] - j[b]
        if not diff.is_zero():
            key = _first_key(caps, diff)
            return CheckReport("J=S(P)", False, (b, key), repr(diff.get(key)))
    for b in range(t.n_points):
        for key, v in p[b].sorted_items():
            prof = pole_profile(v, t.all_orbit_characters())
            if any(e.kind == "root_of_unity" and e.m == 1 for e in prof.entries):
                return CheckReport("J=S(P)", False, (b, key), "P has a pole at q=1")
    # J - 1 - t/(1-q) stays within the allowed pole taxonomy
    inv_1mq = one_over_one_minus_q(t.nvars)
    for b in range(t.n_points):
        t_term = TruncSeries(caps, {(caps.zero_class(), 1, i): t.basis[i][b] * inv_1mq
                                    for i in range(caps.n_directions)})
        rest = j[b] - TruncSeries.one(caps) - t_term
        for key, v in rest.sorted_items():
            try:
                assert_lemma_taxonomy(v, t.all_orbit_characters(),
                                      context=f"J at {b} {key}")
            except KernelError as exc:
                return CheckReport("J=S(P)", False, (b, key), str(exc))
    return CheckReport("J=S(P)", True)


def recursion_rhs(s: SSystem, beta: int, key: Key, column: int) -> RatFn:
    """Orbit-pole part of beta^* S(phi_column) at a series key, assembled
    from strictly lower Novikov degrees via the recursion relation.

    Every m-cover term is the branch average over the deck group's twisted
    sectors (the 1/m of the single-branch formula is the averaging weight).
    """
    from .galois import galois_average

    caps, t = s.caps, s.target
    d, tk, ti = key
    out = RatFn.zero(t.nvars)
    for mu, d_orb, lam in t.orbits_at(beta):
        for m in range(1, caps.d_max + 1):
            md = tuple(m * x for x in d_orb)
            rem = tuple(x - y for x, y in zip(d, md))
            if any(x < 0 for x in rem):
                continue
            mu_entry = s.entry(mu, column).get((rem, tk, ti))
            if mu_entry.is_zero():
                continue
            mu_eval = mu_entry.subs_q(MPoly.monomial(
                t.nvars, mono_pow(lam, Fraction(1, m))))
            pole = RatFn.fraction(MPoly.one(t.nvars), (one_minus_q_rho(
                t.nvars, mono_pow(lam, Fraction(-1, m))),))
            term = t.euler(beta) * s.c_inv(beta, mu, m) * pole * mu_eval
            out = out + galois_average(term, lam, m)
    return out


def verify_recursion(s: SSystem) -> CheckReport:
    """Residues of beta^*S at orbit poles match the recursion relation."""
    caps, t = s.caps, s.target
    for (beta, alpha), series in sorted(s.matrix.items()):
        for key, value in series.sorted_items():
            d, tk, ti = key
            for mu, d_orb, lam in t.orbits_at(beta):
                for m in range(1, caps.d_max + 1):
                    md = tuple(m * x for x in d_orb)
                    rem = tuple(x - y for x, y in zip(d, md))
                    if any(x < 0 for x in rem):
                        continue
                    rho = mono_pow(lam, Fraction(-1, m))
                    try:
                        got = value.residue_at(rho)
                    except KernelError:
                        got = RatFn.zero(t.nvars)
                    mu_entry = s.entry(mu, alpha).get((rem, tk, ti))
                    want = RatFn.zero(t.nvars)
                    if not mu_entry.is_zero():
                        want = (t.euler(beta) * s.c_inv(beta, mu, m) *
                                mu_entry.subs_q(MPoly.monomial(t.nvars, mono_pow(
                                    lam, Fraction(1, m))))).scale(Fraction(1, m))
                    if not (got - want).is_zero():
                        return CheckReport("recursion", False,
                                           (beta, alpha, key, mu, m), repr(got - want))
    return CheckReport("recursion", True)


def verify_pole_taxonomy(s: SSystem, m_max: int) -> CheckReport:
    """Lemma 4.1 taxonomy for every stored coefficient."""
    t = s.target
    for (beta, alpha), series in sorted(s.matrix.items()):
        chars = t.orbit_characters(beta)
        for key, value in series.sorted_items():
            try:
                assert_lemma_taxonomy(value, chars, m_max=m_max,
                                      context=f"S[{beta},{alpha}] {key}")
            except KernelError as exc:
                return CheckReport("pole-taxonomy", False, (beta, alpha, key), str(exc))
    return CheckReport("pole-taxonomy", True)
