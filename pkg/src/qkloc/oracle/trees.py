"""Stable-map fixed-point graph sums: the independent eps = infinity oracle.

Genus-zero torus-fixed stable maps are decorated trees: edges are m-fold
orbit covers, vertices are fixed points carrying contracted components
(when three or more special points meet) whose integrals are K-theoretic
psi-classes on M-bar_{0,n}.  Those integrals reduce to chi(M-bar_{0,3}) = 1
through the genus-zero K-theoretic string equation

    chi(M_{0,n+1}, prod L_i^{k_i}) = chi(M_{0,n}, prod L_i^{k_i} (1 + sum_i
                                         sum_{a=1..k_i} L_i^{-a})),

derived from pushing the twisted dualizing sheaf down the forgetful map.
Multiple-cover edges are branch-averaged (see galois.py); the averaging
weight 1/m is the edge's deck factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement, product as iproduct
from math import comb

from .. import target as target_mod
from ..chars import MPoly, Mono, mono_inv, mono_pow
from ..galois import galois_average
from ..ratfun import KernelError, RatFn
from ..series import Caps, TruncSeries
from ..soperator import EpsilonChamber, SSystem, one_minus_q_rho, one_over_one_minus_q
from .recursion_coeff import coefficient_table, edge_characters, recursion_coefficient_inv

TREE_DEGREE_CAP = 2  # combinatorial blowup guard for the oracle


# ---------------------------------------------------------------------------
# K-theoretic psi integrals on M-bar_{0,n}
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def chi_mbar(ks: tuple[int, ...]) -> Fraction:
    """chi(M-bar_{0,n}, prod L_i^{k_i}) for k_i >= 0, by the string equation."""
    n = len(ks)
    if n < 3:
        raise KernelError("M-bar_{0,n} needs n >= 3")
    if n == 3:
        return Fraction(1)  # cotangent lines are trivial on a point
    if ks[0] != 0:
        raise KernelError("string recursion needs an undecorated marking")
    rest = ks[1:]
    total = chi_mbar(tuple(sorted(rest)))
    for i, k in enumerate(rest):
        for a in range(1, k + 1):
            dropped = rest[:i] + (k - a,) + rest[i + 1:]
            total += chi_mbar(tuple(sorted(dropped)))
    return total


@lru_cache(maxsize=None)
def chi_mbar_nilpotent(js: tuple[int, ...]) -> Fraction:
    """chi(M-bar_{0,n}, prod (L_i - 1)^{j_i}); vanishes for sum j > n - 3."""
    n = len(js)
    if sum(js) > n - 3:
        return Fraction(0)
    total = Fraction(0)
    ranges = [range(j + 1) for j in js]
    for ks in iproduct(*ranges):
        sign = (-1) ** (sum(js) - sum(ks))
        mult = 1
        for j, k in zip(js, ks):
            mult *= comb(j, k)
        total += sign * mult * chi_mbar(tuple(sorted(ks)))
    return total


@lru_cache(maxsize=None)
def chi_mbar_twisted(fixed_ks: tuple[int, ...], a: int, b: int) -> Fraction:
    """Lefschetz trace of the two-marking swap on chi(M-bar_{0,n}, L-powers).

    Markings: len(fixed_ks) swap-fixed slots with cotangent powers fixed_ks,
    plus the swapped pair with powers (a, b).  Computed by the same string
    recursion as chi_mbar (the pushforward identity is equivariant for the
    swap); at the 3-pointed base the fixed marking is a fixed point of an
    involution of P^1, so its cotangent fiber has eigenvalue -1, while the
    product of the paired cotangent fibers has eigenvalue +1.
    """
    n = len(fixed_ks) + 2
    if n < 3 or any(k < 0 for k in fixed_ks) or a < 0 or b < 0:
        raise KernelError("bad twisted trace arguments")
    if n == 3:
        if a != b:
            return Fraction(0)
        return Fraction((-1) ** fixed_ks[0])
    drop = next((i for i, k in enumerate(fixed_ks) if k == 0 and len(fixed_ks) > 1), None)
    if drop is None:
        raise KernelError("twisted string recursion needs an undecorated fixed slot")
    rest = fixed_ks[:drop] + fixed_ks[drop + 1:]
    total = chi_mbar_twisted(rest, a, b)
    for i, k in enumerate(rest):
        for c in range(1, k + 1):
            total += chi_mbar_twisted(rest[:i] + (k - c,) + rest[i + 1:], a, b)
    # corrections along the swapped pair are interchanged by the involution,
    # hence traceless, and do not enter the twisted recursion
    return total


def chi_mbar_twisted_nilpotent(fixed_js: tuple[int, ...], j4: int, j5: int) -> Fraction:
    """Swap-twisted trace of prod (L-1)^j, fixed slots plus the swapped pair."""
    total = Fraction(0)
    ranges = [range(j + 1) for j in fixed_js] + [range(j4 + 1), range(j5 + 1)]
    for ks in iproduct(*ranges):
        sign = (-1) ** (sum(fixed_js) + j4 + j5 - sum(ks))
        mult = 1
        for j, k in zip(tuple(fixed_js) + (j4, j5), ks):
            mult *= comb(j, k)
        total += sign * mult * chi_mbar_twisted(tuple(ks[:-2]), ks[-2], ks[-1])
    return total


# ---------------------------------------------------------------------------
# decorated trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeGraph:
    points: tuple[int, ...]                  # fixed-point id per node
    edges: tuple[tuple[int, int, int], ...]  # (node, node, multiplicity)
    markings: tuple[int, ...]                # node index per marking

    def aut_order(self) -> int:
        """Automorphisms fixing markings, fixed-point labels, and edges."""
        n = len(self.points)
        if n == 1:
            return 1
        from itertools import permutations
        count = 0
        edge_set = sorted((min(u, v), max(u, v), m) for u, v, m in self.edges)
        for perm in permutations(range(n)):
            if any(self.points[perm[i]] != self.points[i] for i in range(n)):
                continue
            if any(perm[v] != v for v in self.markings):
                continue
            mapped = sorted((min(perm[u], perm[v]), max(perm[u], perm[v]), m)
                            for u, v, m in self.edges)
            if mapped == edge_set:
                count += 1
        return count

    def canonical_key(self):
        """Isomorphism-class key (minimum over node relabelings)."""
        n = len(self.points)
        from itertools import permutations
        best = None
        for perm in permutations(range(n)):
            pts = tuple(self.points[perm.index(i)] for i in range(n))
            edges = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v]), m)
                                 for u, v, m in self.edges))
            marks = tuple(perm[v] for v in self.markings)
            key = (pts, edges, marks)
            if best is None or key < best:
                best = key
        return best


def enumerate_graphs(target: target_mod.TargetData, d: tuple[int, ...],
                     n_markings: int):
    """All decorated trees of total class d with the markings distributed."""
    deg = target.theta_degree(d)
    zero = tuple(0 for _ in d)
    graphs: list[TreeGraph] = []
    if deg == 0:
        if d != zero:
            return []
        if n_markings >= 3:
            for fp in target.fixed_points:
                graphs.append(TreeGraph((fp.id,), (), (0,) * n_markings))
        return graphs

    def marking_splits(n_nodes):
        return iproduct(*[range(n_nodes)] * n_markings)

    # single edge of multiplicity m
    for o in target.orbits:
        b, mu = o.ends
        for m in range(1, deg + 1):
            if tuple(m * x for x in o.degree) != d:
                continue
            for marks in marking_splits(2):
                graphs.append(TreeGraph((b, mu), ((0, 1, m),), tuple(marks)))

    # two edges sharing a middle node
    if deg >= 2:
        for c in range(target.n_points):
            options = []
            for mu, d_orb, _ in target.orbits_at(c):
                for m in range(1, deg):
                    options.append((mu, m, tuple(m * x for x in d_orb)))
            for (mu1, m1, d1), (mu2, m2, d2) in combinations_with_replacement(options, 2):
                if tuple(x + y for x, y in zip(d1, d2)) != d:
                    continue
                for marks in marking_splits(3):
                    graphs.append(TreeGraph((mu1, c, mu2),
                                            ((1, 0, m1), (1, 2, m2)), tuple(marks)))
    if deg >= 3:
        raise KernelError(f"tree oracle capped at degree {TREE_DEGREE_CAP}")
    # one representative per isomorphism class
    seen = {}
    for g in graphs:
        seen.setdefault(g.canonical_key(), g)
    return list(seen.values())


def _edge_lambda_at(target, graph: TreeGraph, node: int, edge) -> Mono:
    u, v, m = edge
    other = graph.points[v] if node == u else graph.points[u]
    _, lam = target.orbit_between(graph.points[node], other)
    return lam


def graph_contribution(target: target_mod.TargetData, graph: TreeGraph,
                       insertions: list[tuple[list[RatFn], bool]]) -> RatFn:
    """Localization contribution of one decorated tree.

    insertions[k] = (restriction vector, carries_L); a True flag means the
    1/(1 - q L_k) insertion sits at marking k.  Graphs with a nontrivial
    automorphism average over its twisted sectors (inertia), exactly like
    the deck groups of multiple covers.
    """
    aut = graph.aut_order()
    base = _untwisted_contribution(target, graph, insertions)
    if aut == 1:
        return base
    if aut == 2:
        tw = _swap_sector_contribution(target, graph, insertions)
        return (base + tw).scale(Fraction(1, 2))
    raise KernelError(f"unsupported automorphism group of order {aut}")


def _untwisted_contribution(target: target_mod.TargetData, graph: TreeGraph,
                            insertions: list[tuple[list[RatFn], bool]]) -> RatFn:
    nvars = target.nvars
    out = RatFn.one(nvars)
    q_mono = (Fraction(1),) + (Fraction(0),) * (nvars - 1)

    for node in range(len(graph.points)):
        beta = graph.points[node]
        node_edges = [e for e in graph.edges if node in (e[0], e[1])]
        node_marks = [k for k, v in enumerate(graph.markings) if v == node]
        val = len(node_edges) + len(node_marks)
        for k in node_marks:
            out = out * insertions[k][0][beta]
        # expandable flags: (x monomial, unused-label)
        flags: list[Mono] = []
        for e in node_edges:
            lam = _edge_lambda_at(target, graph, node, e)
            flags.append(mono_pow(lam, Fraction(-1, e[2])))
        for k in node_marks:
            if insertions[k][1]:
                flags.append(q_mono)

        if val >= 3:
            n_e = len(node_edges)
            for _ in range(n_e - 1):
                out = out * target.euler(beta)
            if n_e < 1:
                out = out * target.euler_inv(beta)  # lone vertex, no nodes
            vertex = RatFn.zero(nvars)
            budget = val - 3
            for js in _assignments(len(flags), budget):
                chi = chi_mbar_nilpotent(tuple(sorted(tuple(js) + (0,) * (val - len(flags)))))
                if chi == 0:
                    continue
                term = RatFn.const(nvars, chi)
                for x, j in zip(flags, js):
                    num = MPoly.monomial(nvars, mono_pow(x, j))
                    term = term * RatFn.fraction(num, (_one_minus_mono(nvars, x),) * (j + 1))
                vertex = vertex + term
            out = out * vertex
        elif val == 2 and len(node_edges) == 2:
            out = out * target.euler(beta)
            x1, x2 = flags[0], flags[1]
            prod = tuple(a + b for a, b in zip(x1, x2))
            out = out * RatFn.fraction(MPoly.one(nvars), (_one_minus_mono(nvars, prod),))
        elif val == 2 and len(node_edges) == 1:
            k = node_marks[0]
            if insertions[k][1]:
                x_e = flags[0]
                qx = tuple(a + b for a, b in zip(q_mono, x_e))
                out = out * RatFn.fraction(MPoly.one(nvars), (_one_minus_mono(nvars, qx),))
        elif val == 1 and not node_marks:
            out = out * RatFn.from_poly(_one_minus_mono(nvars, flags[0]))
        elif val == 1 and node_marks:
            k = node_marks[0]
            if insertions[k][1]:
                x_e = flags[0]
                qx = tuple(a + b for a, b in zip(q_mono, x_e))
                out = out * RatFn.fraction(MPoly.one(nvars), (_one_minus_mono(nvars, qx),))
        else:
            raise KernelError(f"unstable vertex in graph {graph}")

    big_edges = []
    for u, v, m in graph.edges:
        out = out * recursion_coefficient_inv(target, graph.points[u],
                                              graph.points[v], m)
        if m >= 2:
            _, lam = target.orbit_between(graph.points[u], graph.points[v])
            big_edges.append((lam, m))
    if len(big_edges) > 1:
        raise KernelError("multiple fractional-cover edges exceed the supported caps")
    for lam, m in big_edges:
        out = galois_average(out, lam, m)
    return out


def _swap_sector_contribution(target: target_mod.TargetData, graph: TreeGraph,
                              insertions: list[tuple[list[RatFn], bool]]) -> RatFn:
    """Twisted sector of the automorphism swapping the two halves of a
    symmetric two-edge chain (both ends unmarked, same fixed point, m = 1).

    Character bookkeeping: swapped pairs (w, +), (w, -) contribute
    (1 - w^{-2}); the single middle contracted component leaves a net
    -(u, -) per tangent character u at the middle fixed point (two swapped
    node restrictions minus one H^0); the vertex integral is the swap-
    twisted Lefschetz trace on M-bar_{0,val}.
    """
    nvars = target.nvars
    from ..chars import mono_one
    if len(graph.edges) != 2:
        raise KernelError("swap sector only supported for two-edge chains")
    (a1, b1, m1), (a2, b2, m2) = graph.edges
    common = {a1, b1} & {a2, b2}
    if len(common) != 1:
        raise KernelError("swap sector needs a single shared node")
    mid = common.pop()
    ends = [x for x in (a1, b1, a2, b2) if x != mid]
    if (m1, m2) != (1, 1) or graph.points[ends[0]] != graph.points[ends[1]]:
        raise KernelError("swap sector only supported for symmetric m=1 chains")
    if any(v == e for v in graph.markings for e in ends):
        raise KernelError("swap sector requires unmarked ends")
    gamma = graph.points[mid]
    beta_end = graph.points[ends[0]]
    _, lam_mid = target.orbit_between(gamma, beta_end)

    out = RatFn.one(nvars)
    for k, (vec, _) in enumerate(insertions):
        out = out * vec[gamma]

    # net character multiset: swapped pairs minus edge automorphisms,
    # then the node/vertex tangent bookkeeping
    from collections import Counter
    pairs = Counter(edge_characters(target, gamma, beta_end, 1))
    pairs[mono_one(nvars)] -= 1
    pairs[mono_inv(lam_mid)] -= 1  # translation at the free end
    for w, mult in sorted(pairs.items()):
        if mult == 0:
            continue
        if mult < 0:
            raise KernelError("unexpected automorphism character")
        fac = MPoly(nvars, {mono_one(nvars): Fraction(1), mono_pow(w, -2): Fraction(-1)})
        out = out * RatFn.fraction(MPoly.one(nvars), (fac,) * mult)
    for u in target.fixed_points[gamma].tangent_chars:
        plus = MPoly(nvars, {mono_one(nvars): Fraction(1), mono_inv(u): Fraction(1)})
        out = out * RatFn.from_poly(plus)

    # twisted vertex integral at the middle.  Unlike the untwisted case,
    # (L-1)-nilpotency does not truncate swap-twisted traces, so the full
    # geometric series is summed in closed form through the equivariant
    # string recursion:
    #   tr chi(M_{0,3}; L_1^k (L_4 L_5)^a) = (-1)^k [storing a=b],
    # giving base 1/((1+q)(1-x^2)) and one factor
    #   1 + q/(1-q) + 2x/(1-x)
    # per forgotten undecorated marking.
    q_mono = (Fraction(1),) + (Fraction(0),) * (nvars - 1)
    x_edge = mono_inv(lam_mid)
    marks = [k for k, v in enumerate(graph.markings) if v == mid]
    if len(marks) != len(graph.markings):
        raise KernelError("swap sector requires all markings at the middle")
    l_slots = [k for k in marks if insertions[k][1]]
    one_plus_q = MPoly(nvars, {mono_one(nvars): Fraction(1), q_mono: Fraction(1)})
    one_minus_x2 = MPoly(nvars, {mono_one(nvars): Fraction(1),
                                 mono_pow(x_edge, 2): Fraction(-1)})
    vertex = RatFn.fraction(MPoly.one(nvars), (one_minus_x2,))
    if l_slots:
        vertex = vertex * RatFn.fraction(MPoly.one(nvars), (one_plus_q,))
    # one marking is the kept slot of the M_{0,3} base (the L-carrying one
    # when present); the others are forgotten through the twisted string
    # recursion, whose paired-slot corrections are traceless, leaving only
    # the kept-slot factor 1 + q/(1-q) = 1/(1-q) per forgotten marking.
    n_forgotten = len(marks) - 1
    if n_forgotten and l_slots:
        corr = RatFn.fraction(MPoly.one(nvars), (_one_minus_mono(nvars, q_mono),))
        for _ in range(n_forgotten):
            vertex = vertex * corr
    return out * vertex


def _one_minus_mono(nvars: int, x: Mono) -> MPoly:
    from ..chars import mono_one
    return MPoly(nvars, {mono_one(nvars): Fraction(1), x: Fraction(-1)})


def _assignments(n_flags: int, budget: int):
    """All tuples of length n_flags with entries >= 0 summing to <= budget."""
    if n_flags == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _assignments(n_flags - 1, budget - first):
            yield (first,) + rest


def correlator(target: target_mod.TargetData, d: tuple[int, ...],
               insertions: list[tuple[list[RatFn], bool]]) -> RatFn:
    """Sum of graph contributions at class d (no Q power, no e_beta factor)."""
    total = RatFn.zero(target.nvars)
    for graph in enumerate_graphs(target, d, len(insertions)):
        total = total + graph_contribution(target, graph, insertions)
    return total


# ---------------------------------------------------------------------------
# assembled oracle series at eps = infinity
# ---------------------------------------------------------------------------

def stable_map_S_matrix(target: target_mod.TargetData, caps: Caps) -> SSystem:
    """The full S-matrix at eps = infinity from decorated-tree sums."""
    if caps.d_max > TREE_DEGREE_CAP:
        raise KernelError(f"tree oracle capped at degree {TREE_DEGREE_CAP}")
    n = target.n_points
    zero = caps.zero_class()
    matrix: dict[tuple[int, int], TruncSeries] = {}
    classes = [d for d in caps.classes() if d != zero]
    for beta in range(n):
        ins_row = [target.basis[beta][b] for b in range(n)]
        for alpha in range(n):
            ins_col = [target.basis[alpha][b] for b in range(n)]
            coeff = {(zero, 0, -1): target.basis[alpha][beta]}
            for d in classes:
                val = correlator(target, d, [(ins_row, True), (ins_col, False)])
                if not val.is_zero():
                    coeff[(d, 0, -1)] = target.euler(beta) * val
            if caps.t_order >= 1:
                for i in range(caps.n_directions):
                    ins_t = [target.basis[i][b] for b in range(n)]
                    for d in [zero] + classes:
                        val = correlator(target, d, [(ins_row, True),
                                                     (ins_col, False), (ins_t, False)])
                        if not val.is_zero():
                            coeff[(d, 1, i)] = target.euler(beta) * val
            matrix[(beta, alpha)] = TruncSeries(caps, coeff)
    c_tab = coefficient_table(target, m_max=caps.d_max)
    c_inv = {k: recursion_coefficient_inv(target, *k) for k in c_tab}
    return SSystem(target, caps, EpsilonChamber("inf"), matrix, c_tab, c_inv,
                   provenance="stable-map tree oracle")


def j_function_infinity(target: target_mod.TargetData, caps: Caps,
                        s_sys: SSystem | None = None) -> list[TruncSeries]:
    """J^infinity: one-point tree sums plus the t-part (1/(1-q)) S^{t0}(t)."""
    n = target.n_points
    zero = caps.zero_class()
    inv_1mq = one_over_one_minus_q(target.nvars)
    out = []
    for beta in range(n):
        coeff = {(zero, 0, -1): RatFn.one(target.nvars)}
        ins_row = [target.basis[beta][b] for b in range(n)]
        for d in caps.classes():
            if d == zero:
                continue
            val = correlator(target, d, [(ins_row, True)])
            if not val.is_zero():
                coeff[(d, 0, -1)] = target.euler(beta) * val * inv_1mq
        out.append(TruncSeries(caps, coeff))
    if caps.t_order >= 1:
        if s_sys is None:
            s_sys = stable_map_S_matrix(target, caps)
        for beta in range(n):
            extra = {}
            for i in range(caps.n_directions):
                t0_col = s_sys.entry(beta, i)
                for (d, k, _), v in t0_col.coeff.items():
                    if k != 0:
                        continue
                    extra[(d, 1, i)] = extra.get((d, 1, i), RatFn.zero(target.nvars)) \
                        + v * inv_1mq
            out[beta] = out[beta] + TruncSeries(caps, extra)
    return out
