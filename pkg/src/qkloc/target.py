"""Torus fixed-point and orbit data for the built-in GIT targets.

Built-ins are products of projective spaces (point, P^n, P^a x P^b, ...)
with the diagonal torus convention: the tautological line on the f-th
factor restricts to L_{f,i}^{-1} at the fixed point with coordinate i, so
the tangent characters at a fixed point are L_i / L_j and the orbit
between coordinate points i and j in one factor carries the tangent
character L_i / L_j at the i-side.

The data model is file-loadable: anything with isolated fixed points and
isolated one-dimensional orbits that supplies consistent tangent/orbit
characters works; build-time validation checks the orbit symmetry and the
residue-weight sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chars import MPoly, Mono, mono_div, mono_inv, mono_is_one, mono_mul, mono_one, mono_pow
from .ratfun import KernelError, RatFn


@dataclass(frozen=True)
class FixedPoint:
    id: int
    label: tuple
    tangent_chars: tuple[Mono, ...]


@dataclass(frozen=True)
class Orbit:
    """One-dimensional orbit; lam is the tangent character at ends[0]."""

    ends: tuple[int, int]
    degree: tuple[int, ...]
    lam: Mono


class TargetError(ValueError):
    pass


class TargetData:
    """Immutable localization data of a toric GIT quotient."""

    def __init__(self, name: str, n_chars: int, fixed_points: list[FixedPoint],
                 orbits: list[Orbit], novikov_rank: int, theta: tuple[int, ...],
                 basis: list[list[RatFn]] | None = None):
        self.name = name
        self.n_chars = n_chars
        self.nvars = 1 + n_chars
        self.fixed_points = tuple(fixed_points)
        self.orbits = tuple(orbits)
        self.novikov_rank = novikov_rank
        self.theta = theta
        self.n_points = len(fixed_points)
        if basis is None:
            basis = [[RatFn.const(self.nvars, 1 if a == b else 0)
                      for b in range(self.n_points)] for a in range(self.n_points)]
        self.basis = basis  # basis[alpha][beta] = restriction of phi_alpha at beta
        self._euler = {fp.id: self._euler_class(fp) for fp in self.fixed_points}
        self._euler_inv = {fp.id: RatFn.euler_inverse(self.nvars, fp.tangent_chars)
                           for fp in self.fixed_points}
        self._orbits_at: dict[int, list[tuple[int, tuple[int, ...], Mono]]] = {
            fp.id: [] for fp in self.fixed_points}
        for o in self.orbits:
            b, mu = o.ends
            self._orbits_at[b].append((mu, o.degree, o.lam))
            self._orbits_at[mu].append((b, o.degree, mono_inv(o.lam)))
        for k in self._orbits_at:
            self._orbits_at[k].sort()
        self.dim = len(self.fixed_points[0].tangent_chars) if self.fixed_points else 0
        self._validate()

    # -- basic localization data ------------------------------------------

    def _euler_class(self, fp: FixedPoint) -> RatFn:
        out = RatFn.one(self.nvars)
        for lam in fp.tangent_chars:
            out = out * RatFn.from_poly(MPoly(self.nvars, {
                mono_one(self.nvars): Fraction(1), mono_inv(lam): Fraction(-1)}))
        return out

    def euler(self, beta: int) -> RatFn:
        """K-theoretic Euler class of the tangent space at beta."""
        return self._euler[beta]

    def euler_inv(self, beta: int) -> RatFn:
        """1/euler(beta) with the denominator kept in factored form."""
        return self._euler_inv[beta]

    def orbits_at(self, beta: int):
        """Oriented orbit list [(mu, degree class, tangent char at beta)]."""
        return self._orbits_at[beta]

    def orbit_between(self, beta: int, mu: int):
        for m, d, lam in self._orbits_at[beta]:
            if m == mu:
                return d, lam
        raise TargetError(f"no orbit between {beta} and {mu}")

    def orbit_characters(self, beta: int) -> dict:
        """label -> tangent character at beta, for pole classification."""
        return {("orbit", beta, mu): lam for mu, _, lam in self._orbits_at[beta]}

    def all_orbit_characters(self) -> dict:
        out = {}
        for fp in self.fixed_points:
            out.update(self.orbit_characters(fp.id))
        return out

    def theta_degree(self, d: tuple[int, ...]) -> int:
        return sum(w * x for w, x in zip(self.theta, d))

    def orbit_normal_data(self, beta: int, mu: int):
        """Pairs (nu, a): tangent characters at beta normal to the orbit and
        the degree of that direction's line bundle on the orbit closure.

        Derived by matching tangent multisets: nu at beta corresponds to
        nu * lam^{-a} at mu for a unique a >= 0.
        """
        d, lam = self.orbit_between(beta, mu)
        at_beta = list(self.fixed_points[beta].tangent_chars)
        at_mu = list(self.fixed_points[mu].tangent_chars)
        at_beta.remove(lam)
        at_mu.remove(mono_inv(lam))
        out = []
        for nu in at_beta:
            found = None
            for a in range(0, 2 * self.dim + 3):
                cand = mono_div(nu, mono_pow(lam, a))
                if cand in at_mu:
                    found = (nu, a)
                    at_mu.remove(cand)
                    break
            if found is None:
                raise TargetError(
                    f"cannot match normal direction {nu} along orbit {beta}-{mu}")
            out.append(found)
        return out

    # -- pairing and metric --------------------------------------------------

    def pairing_vectors(self, a: list[RatFn], b: list[RatFn]) -> RatFn:
        """chi(X; a ox b) by fixed-point residues of restriction vectors."""
        out = RatFn.zero(self.nvars)
        for fp in self.fixed_points:
            out = out + a[fp.id] * b[fp.id] * self.euler_inv(fp.id)
        return out

    def pairing(self, alpha: int, beta: int) -> RatFn:
        return self.pairing_vectors(self.basis[alpha], self.basis[beta])

    def metric_g(self) -> list[list[RatFn]]:
        n = self.n_points
        return [[self.pairing(a, b) for b in range(n)] for a in range(n)]

    def line_bundle(self, powers: tuple[int, ...] | int) -> list[RatFn]:
        """Restrictions of O(k_1, ..., k_r); only for built-in product targets."""
        if isinstance(powers, int):
            powers = (powers,) * self.novikov_rank
        if not hasattr(self, "factor_offsets"):
            raise TargetError("line bundles are only built in for product targets")
        out = []
        for fp in self.fixed_points:
            m = mono_one(self.nvars)
            for f, (off, _n) in enumerate(self.factor_offsets):
                idx = fp.label[f]
                lam_char = [Fraction(0)] * self.nvars
                lam_char[1 + off + idx] = Fraction(powers[f])
                m = mono_mul(m, tuple(lam_char))
            out.append(RatFn.monomial(self.nvars, m))
        return out

    # -- validation ------------------------------------------------------------

    def _validate(self) -> None:
        for fp in self.fixed_points:
            if any(mono_is_one(c) for c in fp.tangent_chars):
                raise TargetError(f"trivial tangent character at {fp.id}")
            if len(fp.tangent_chars) != self.dim:
                raise TargetError("tangent dimensions disagree between fixed points")
        for o in self.orbits:
            b, mu = o.ends
            if b == mu:
                raise TargetError("orbit endpoints must differ")
            if o.lam not in self.fixed_points[b].tangent_chars:
                raise TargetError(f"orbit character missing from tangent chars at {b}")
            if mono_inv(o.lam) not in self.fixed_points[mu].tangent_chars:
                raise TargetError(f"inverse orbit character missing at {mu}")
            if self.theta_degree(o.degree) < 1:
                raise TargetError("orbit degree must be theta-positive")
        # residue weights of O sum to chi(X, O) = 1
        if self.fixed_points:
            total = RatFn.zero(self.nvars)
            for fp in self.fixed_points:
                total = total + self.euler_inv(fp.id)
            if not total.is_one():
                raise TargetError("residue weights do not sum to 1")


# ---------------------------------------------------------------------------
# built-in targets
# ---------------------------------------------------------------------------

def _product_target(name: str, dims: list[int]) -> TargetData:
    n_chars = sum(n + 1 for n in dims)
    nvars = 1 + n_chars
    offsets = []
    off = 0
    for n in dims:
        offsets.append((off, n))
        off += n + 1

    def char(f: int, i: int, j: int) -> Mono:
        """L_{f,i} / L_{f,j} as a monomial."""
        e = [Fraction(0)] * nvars
        e[1 + offsets[f][0] + i] += 1
        e[1 + offsets[f][0] + j] -= 1
        return tuple(e)

    from itertools import product as iproduct
    labels = list(iproduct(*[range(n + 1) for n in dims]))
    fixed_points = []
    for pid, label in enumerate(labels):
        chars = []
        for f, n in enumerate(dims):
            i = label[f]
            chars.extend(char(f, i, j) for j in range(n + 1) if j != i)
        fixed_points.append(FixedPoint(pid, label, tuple(chars)))

    id_of = {label: pid for pid, label in enumerate(labels)}
    orbits = []
    for pid, label in enumerate(labels):
        for f, n in enumerate(dims):
            i = label[f]
            for j in range(i + 1, n + 1):
                other = list(label)
                other[f] = j
                degree = tuple(1 if g == f else 0 for g in range(len(dims)))
                orbits.append(Orbit((pid, id_of[tuple(other)]), degree, char(f, i, j)))

    t = TargetData(name, n_chars, fixed_points, orbits,
                   novikov_rank=len(dims), theta=(1,) * len(dims))
    t.factor_offsets = offsets
    t.dims = tuple(dims)
    return t


def _point_target() -> TargetData:
    t = TargetData("pt", 0, [FixedPoint(0, (), ())], [], novikov_rank=1, theta=(1,))
    t.factor_offsets = []
    t.dims = ()
    return t


def build_target(spec: str) -> TargetData:
    """Build a named target: "pt", "p<n>", or products like "p1xp1"."""
    s = spec.strip().lower()
    if s in ("pt", "point"):
        return _point_target()
    dims = []
    for piece in s.split("x"):
        if not piece.startswith("p") or not piece[1:].isdigit():
            raise TargetError(f"unsupported target spec {spec!r}")
        n = int(piece[1:])
        if n < 1:
            raise TargetError("projective factors need dimension >= 1")
        dims.append(n)
    if not dims:
        raise TargetError(f"unsupported target spec {spec!r}")
    return _product_target(s, dims)
