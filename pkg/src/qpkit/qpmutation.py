"""Mutation of quivers with potentials through matchings.

A matching at a vertex k pairs some length-2 paths alpha.beta through k
with arrows gamma closing them into 3-cycles. Given a matching, the mutated
quiver and potential are written down directly (no reduction search).

New arrows are named ``[a·b]`` for the composite of ``a`` and ``b`` and
``a*`` for the reversal of ``a``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import (
    DecompositionFails,
    InvalidMatching,
    InvalidQuiver,
    LoopAtVertex,
    NameClash,
    NotAdmissible,
    NotMaximal,
    StarDecompositionInvalid,
    TwoCycleThroughVertex,
)
from .pathalg import AlgElem, Potential, _add_into, as_potential, rotate_away_from
from .quiver import Quiver


def bracket(a: str, b: str) -> str:
    return f"[{a}·{b}]"


def star(a: str) -> str:
    return f"{a}*"


# ---------------------------------------------------------------- matchings


@dataclass(frozen=True)
class MatchPair:
    alpha: str
    beta: str
    gamma: str


@dataclass(frozen=True)
class Matching:
    vertex: int
    pairs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(p if isinstance(p, MatchPair) else MatchPair(*p) for p in self.pairs))

    @property
    def cprime(self) -> set:
        return {(p.alpha, p.beta) for p in self.pairs}

    @property
    def gammas(self) -> set:
        return {p.gamma for p in self.pairs}

    def gamma_of(self) -> dict:
        return {(p.alpha, p.beta): p.gamma for p in self.pairs}

    def pair_of(self) -> dict:
        return {p.gamma: (p.alpha, p.beta) for p in self.pairs}

    def validate(self, q: Quiver) -> None:
        k = self.vertex
        if k not in q.vertices:
            raise InvalidMatching(f"vertex {k} not in quiver")
        seen_g, seen_c = set(), set()
        for p in self.pairs:
            for a in (p.alpha, p.beta, p.gamma):
                if not q.has_arrow(a):
                    raise InvalidMatching(f"unknown arrow {a!r}")
            (sa, ta), (sb, tb), (sg, tg) = q.ends[p.alpha], q.ends[p.beta], q.ends[p.gamma]
            if ta != k or sb != k:
                raise InvalidMatching(f"({p.alpha}, {p.beta}) is not a path through {k}")
            if sa == k or tb == k:
                raise InvalidMatching(f"({p.alpha}, {p.beta}) has an endpoint at {k}")
            if (sg, tg) != (tb, sa):
                raise InvalidMatching(f"{p.gamma!r} does not close ({p.alpha}, {p.beta}) into a 3-cycle")
            if p.gamma in seen_g or (p.alpha, p.beta) in seen_c:
                raise InvalidMatching("matched arrows and paths must be distinct")
            seen_g.add(p.gamma)
            seen_c.add((p.alpha, p.beta))

    def encoding(self, q: Quiver, trunc: int = 12, ring=None) -> Potential:
        """W_rho: the sum of the matched 3-cycles."""
        from .rings import QQ

        return Potential(q, {(p.alpha, p.beta, p.gamma): 1 for p in self.pairs}, trunc, ring or QQ)

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "pairs": [{"alpha": p.alpha, "beta": p.beta, "gamma": p.gamma} for p in self.pairs]}

    @classmethod
    def from_json(cls, data) -> "Matching":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(int(data["vertex"]), tuple(MatchPair(p["alpha"], p["beta"], p["gamma"]) for p in data["pairs"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidMatching(f"malformed matching JSON: {exc}") from exc


def incoming(q: Quiver, k: int) -> list:
    """Arrow ids ending at k (the set A), declared order."""
    return [a.id for a in q.arrows if a.tgt == k and a.src != k]


def outgoing(q: Quiver, k: int) -> list:
    """Arrow ids starting at k (the set B), declared order."""
    return [a.id for a in q.arrows if a.src == k and a.tgt != k]


def composable_pairs(q: Quiver, k: int) -> list:
    """C = A x B in (A-order, B-order)."""
    return [(a, b) for a in incoming(q, k) for b in outgoing(q, k)]


def closing_arrows(q: Quiver, k: int, alpha: str, beta: str) -> list:
    i, j = q.ends[alpha][0], q.ends[beta][1]
    return [a.id for a in q.arrows if a.src == j and a.tgt == i and k not in (a.src, a.tgt)]


def _check_at_vertex(q: Quiver, k: int) -> None:
    if q.has_loops_at(k):
        raise LoopAtVertex(f"loop at vertex {k}")
    if q.has_two_cycle_through(k):
        raise TwoCycleThroughVertex(f"2-cycle through vertex {k}")


def is_maximal(q: Quiver, m: Matching) -> bool:
    m.validate(q)
    k = m.vertex
    c_count, g_count, cp_count = {}, {}, {}
    for a, b in composable_pairs(q, k):
        key = (q.ends[a][0], q.ends[b][1])
        c_count[key] = c_count.get(key, 0) + 1
    for arr in q.arrows:
        if k in (arr.src, arr.tgt):
            continue
        key = (arr.tgt, arr.src)  # Gamma_ij: arrows j -> i
        g_count[key] = g_count.get(key, 0) + 1
    for p in m.pairs:
        key = (q.ends[p.alpha][0], q.ends[p.beta][1])
        cp_count[key] = cp_count.get(key, 0) + 1
    keys = set(c_count) | set(g_count)
    return all(cp_count.get(key, 0) == min(c_count.get(key, 0), g_count.get(key, 0)) for key in keys)


# ---------------------------------------------------------------- dual quiver


@dataclass
class DualData:
    dual_quiver: Quiver
    dual_matching: Matching
    name_map: dict  # new arrow id -> ("bracket", a, b) or ("star", a)
    source: Quiver = field(repr=False, default=None)
    matching: Matching = field(repr=False, default=None)


def _fresh(q: Quiver, names) -> None:
    clash = [n for n in names if q.has_arrow(n)]
    if clash:
        raise NameClash(f"generated arrow names already in use: {clash}")


def premutation_quiver(q: Quiver, k: int) -> Quiver:
    """Reverse the arrows at k and add a bracket arrow for every path through k."""
    _check_at_vertex(q, k)
    arrows, new = [], []
    for a in q.arrows:
        if a.tgt == k:
            arrows.append((star(a.id), k, a.src))
            new.append(star(a.id))
        elif a.src == k:
            arrows.append((star(a.id), a.tgt, k))
            new.append(star(a.id))
        else:
            arrows.append(a)
    for a, b in composable_pairs(q, k):
        arrows.append((bracket(a, b), q.ends[a][0], q.ends[b][1]))
        new.append(bracket(a, b))
    _fresh(q, new)
    return Quiver(q.vertices, arrows, q.frozen)


def dualize(q: Quiver, m: Matching) -> DualData:
    m.validate(q)
    k = m.vertex
    _check_at_vertex(q, k)
    gam = m.gammas
    cp = m.cprime
    arrows, names = [], {}
    for a in q.arrows:
        if a.id in gam:
            continue
        if a.tgt == k:
            arrows.append((star(a.id), k, a.src))
            names[star(a.id)] = ("star", a.id)
        elif a.src == k:
            arrows.append((star(a.id), a.tgt, k))
            names[star(a.id)] = ("star", a.id)
        else:
            arrows.append(a)
    dual_pairs = []
    for a, b in composable_pairs(q, k):
        if (a, b) in cp:
            continue
        nm = bracket(a, b)
        arrows.append((nm, q.ends[a][0], q.ends[b][1]))
        names[nm] = ("bracket", a, b)
        dual_pairs.append(MatchPair(star(b), star(a), nm))
    _fresh(q, names)
    dq = Quiver(q.vertices, arrows, q.frozen)
    return DualData(dq, Matching(k, tuple(dual_pairs)), names, q, m)


def double_dual_map(q: Quiver, m: Matching) -> tuple:
    """Arrow map Q -> (Q*)* realizing the canonical isomorphism, plus (Q*)*."""
    d1 = dualize(q, m)
    d2 = dualize(d1.dual_quiver, d1.dual_matching)
    k = m.vertex
    pair_of = m.pair_of()
    phi = {}
    for a in q.arrows:
        if a.id in pair_of:
            al, be = pair_of[a.id]
            phi[a.id] = bracket(star(be), star(al))
        elif k in (a.src, a.tgt):
            phi[a.id] = star(star(a.id))
        else:
            phi[a.id] = a.id
    return phi, d2


def double_dual_signs(q: Quiver, m: Matching) -> dict:
    """Signs making the map of double_dual_map carry S to (S*)*.

    Each passage through k picks up a -1 from the bracket substitution, as
    does each matched arrow, so arrows into k and matched arrows flip sign.
    """
    k = m.vertex
    gam = m.gammas
    return {a.id: (-1 if (a.tgt == k and a.src != k) or a.id in gam else 1) for a in q.arrows}


# ---------------------------------------------------------------- potentials


def _rotated_terms(w: AlgElem, k: int) -> dict:
    return rotate_away_from(w, k).terms if w.terms else {}


def is_admissible(s: AlgElem, m: Matching) -> bool:
    """No term is stuck at k and no matched path alpha.beta occurs (cyclically)."""
    q = s.quiver
    k = m.vertex
    cp = m.cprime
    for w in s.terms:
        if all(q.ends[a][0] == k for a in w):
            return False
        n = len(w)
        for i in range(n):
            if (w[i], w[(i + 1) % n]) in cp:
                return False
    return True


def bracketed(s: AlgElem, k: int, target: Quiver) -> dict:
    """[S]: words with every alpha.beta through k replaced by its bracket arrow."""
    q = s.quiver
    out = {}
    for w, c in _rotated_terms(s, k).items():
        res = []
        i = 0
        while i < len(w):
            a = w[i]
            if q.ends[a][1] == k:
                res.append(bracket(a, w[i + 1]))
                i += 2
            else:
                res.append(a)
                i += 1
        res = tuple(res)
        for x in res:
            if not target.has_arrow(x):
                raise NotAdmissible(f"{x!r} is not an arrow of the target quiver")
        _add_into(out, res, c, s.ring)
    return out


def star_potential(s: AlgElem, m: Matching, d: DualData | None = None) -> Potential:
    """S* = sub_{gamma <- -beta*_gamma alpha*_gamma}([S]) on the dual quiver."""
    q = s.quiver
    if d is None:
        d = dualize(q, m)
    if not is_admissible(s, m):
        raise NotAdmissible("potential is not admissible for the matching")
    k = m.vertex
    pair_of = m.pair_of()
    ring = s.ring
    out = {}
    for w, c in bracketed(s, k, _ambient(q, k, d)).items():
        res = []
        sign = 1
        for a in w:
            if a in pair_of:
                al, be = pair_of[a]
                res.extend((star(be), star(al)))
                sign = -sign
            else:
                res.append(a)
        if len(res) <= s.trunc:
            _add_into(out, tuple(res), ring.norm(sign * c), ring)
    return Potential(d.dual_quiver, out, s.trunc, ring)


def _ambient(q: Quiver, k: int, d: DualData) -> Quiver:
    """Quiver containing both Q* and the matched arrows (used while bracketing)."""
    key = ("ambient", k, d.dual_quiver)
    amb = q.cache.get(key)
    if amb is None:
        extra = [a for a in q.arrows if a.id in d.matching.gammas]
        amb = Quiver(q.vertices, list(d.dual_quiver.arrows) + extra, q.frozen)
        q.cache[key] = amb
    return amb


def dual_encoding(d: DualData, trunc: int, ring) -> Potential:
    """W_{rho*} = sum over unmatched (alpha, beta) of [alpha beta] beta* alpha*."""
    terms = {}
    for p in d.dual_matching.pairs:
        # dual pair is (beta*, alpha*) <-> [alpha.beta]
        terms[(p.gamma, p.alpha, p.beta)] = 1
    return Potential(d.dual_quiver, terms, trunc, ring)


@dataclass
class QPMutation:
    quiver: Quiver
    potential: Potential
    dual: DualData
    s: Potential  # the admissible remainder w - W_rho

    def __iter__(self):
        return iter((self.quiver, self.potential))


def mutate_qp(q: Quiver, w: AlgElem, k: int, m: Matching) -> QPMutation:
    """(Q*, W_{rho*} + S*) for w = W_rho + S. Unpacks as (quiver, potential)."""
    if q.has_loops():
        raise LoopAtVertex("quiver has loops")
    if q.has_two_cycle_through(k):
        raise TwoCycleThroughVertex(f"2-cycle through vertex {k}")
    if q.has_two_cycles():
        raise InvalidQuiver("quiver has 2-cycles")
    if m.vertex != k:
        raise InvalidMatching(f"matching is at vertex {m.vertex}, not {k}")
    if not is_maximal(q, m):
        raise NotMaximal("matching is not maximal")
    w = as_potential(w)
    s = w - m.encoding(q, w.trunc, w.ring)
    if not is_admissible(s, m):
        raise DecompositionFails("w - W_rho is not admissible for the matching")
    d = dualize(q, m)
    wstar = dual_encoding(d, w.trunc, w.ring) + star_potential(s, m, d)
    return QPMutation(d.dual_quiver, wstar, d, s)


def premutate_qp(q: Quiver, w: AlgElem, k: int) -> tuple:
    """(tilde mu_k(Q), sum_C [ab] b* a* + [W]) with no reduction."""
    pq = premutation_quiver(q, k)
    terms = {(bracket(a, b), star(b), star(a)): 1 for a, b in composable_pairs(q, k)}
    tilde = Potential(pq, terms, w.trunc, w.ring)
    tilde = tilde + Potential(pq, bracketed(w, k, pq), w.trunc, w.ring)
    return pq, tilde


def mutation_two_cycles(q: Quiver, w: AlgElem, k: int) -> list:
    """2-cycles left in the reduced part of the pre-mutation at k.

    The quadratic part of the pre-mutated potential pairs arrows i -> j
    with arrows j -> i; its rank r is the number of 2-cycles split off.
    Returns ``[(i, j, n_ij - r, n_ji - r)]`` for pairs where both survive.
    """
    from .exactlinalg import ExactMatrix, rank

    pq, tilde = premutate_qp(q, w, k)
    quad = {}
    for word, c in tilde.terms.items():
        if len(word) == 2:
            a, b = word
            i, j = pq.ends[a]
            if i > j:
                a, b, i, j = b, a, j, i
            quad.setdefault((i, j), {})[(a, b)] = c
    out = []
    verts = pq.vertices
    for x, i in enumerate(verts):
        for j in verts[x + 1 :]:
            lo, hi = min(i, j), max(i, j)
            fwd = [a.id for a in pq.arrows_between(lo, hi)]
            bwd = [a.id for a in pq.arrows_between(hi, lo)]
            if not fwd or not bwd:
                continue
            entries = quad.get((lo, hi), {})
            mat = ExactMatrix.from_rows(
                [[entries.get((a, b), 0) for b in bwd] for a in fwd], ring=w.ring
            )
            r = rank(mat)
            if len(fwd) - r > 0 and len(bwd) - r > 0:
                out.append((lo, hi, len(fwd) - r, len(bwd) - r))
    return out


# ---------------------------------------------------------------- signs


def star_product(q: Quiver, k: int, aprime, bprime) -> set:
    """A' * B' = (A' x (B - B')) u ((A - A') x B')."""
    A, B = incoming(q, k), outgoing(q, k)
    ap, bp = set(aprime), set(bprime)
    return {(a, b) for a in A for b in B if (a in ap) != (b in bp)}


def sign_eliminate(wstar: AlgElem, q: Quiver, m: Matching, aprime, bprime) -> Potential:
    """Apply the sign change eps_{A',B'} to W*; returns W*_+.

    ``q`` is the quiver before mutation; A and B are read off it.
    """
    k = m.vertex
    ap, bp = set(aprime), set(bprime)
    if not ap <= set(incoming(q, k)) or not bp <= set(outgoing(q, k)):
        raise StarDecompositionInvalid("A' and B' must consist of arrows into and out of k")
    sp = star_product(q, k, ap, bp)
    if sp != m.cprime:
        raise StarDecompositionInvalid("C' is not A' * B' for the given sets")
    neg = {star(a) for a in ap} | {star(b) for b in bp} | {bracket(a, b) for a, b in sp}
    ring = wstar.ring
    out = {}
    for w, c in wstar.terms.items():
        n = sum(1 for a in w if a in neg)
        out[w] = ring.norm(-c) if n % 2 else c
    return Potential(wstar.quiver, out, wstar.trunc, ring)


def find_star_decomposition(q: Quiver, m: Matching):
    """Least (A', B') with C' = A' * B', ordered by total size then declared order."""
    m.validate(q)
    k = m.vertex
    A, B = incoming(q, k), outgoing(q, k)
    target = m.cprime
    for total in range(len(A) + len(B) + 1):
        for na in range(max(0, total - len(B)), min(total, len(A)) + 1):
            for ac in itertools.combinations(A, na):
                for bc in itertools.combinations(B, total - na):
                    if star_product(q, k, ac, bc) == target:
                        return set(ac), set(bc)
    return None


# ---------------------------------------------------------------- finding matchings


def _candidate_triangles(q: Quiver, w: AlgElem, k: int) -> list:
    """(alpha, beta, gamma) for unit-coefficient 3-cycle terms through k."""
    out = []
    one = w.ring.coerce(1)
    for word, c in as_potential(w).terms.items():
        if len(word) != 3 or c != one:
            continue
        for i in range(3):
            r = word[i:] + word[:i]
            if q.ends[r[0]][1] == k:
                a, b, g = r
                if q.ends[a][0] != k and q.ends[b][1] != k and k not in q.ends[g]:
                    out.append((a, b, g))
                break
    order = q._order
    out.sort(key=lambda t: (order[t[2]], order[t[0]], order[t[1]]))
    return out


def _max_bipartite(edges) -> dict:
    """Augmenting-path matching gamma -> (alpha, beta); edges pre-sorted."""
    adj = {}
    for a, b, g in edges:
        adj.setdefault(g, []).append((a, b))
    owner = {}  # (alpha, beta) -> gamma

    def augment(g, seen):
        for ab in adj[g]:
            if ab in seen:
                continue
            seen.add(ab)
            if ab not in owner or augment(owner[ab], seen):
                owner[ab] = g
                return True
        return False

    for g in adj:
        augment(g, set())
    return {g: ab for ab, g in owner.items()}


def find_matching_for(q: Quiver, w: AlgElem, k: int):
    """A maximal matching read off the 3-cycles of w with admissible remainder, or None."""
    if q.has_loops_at(k) or q.has_two_cycle_through(k):
        return None
    edges = _candidate_triangles(q, w, k)
    order = q._order
    wp = as_potential(w)

    def build(sel):
        pairs = sorted(sel, key=lambda t: (order[t[2]], order[t[0]], order[t[1]]))
        return Matching(k, tuple(MatchPair(a, b, g) for a, b, g in pairs))

    def works(m):
        if not is_maximal(q, m):
            return False
        return is_admissible(wp - m.encoding(q, wp.trunc, wp.ring), m)

    if not edges:
        m = Matching(k, ())
        return m if works(m) else None
    chosen = _max_bipartite(edges)
    m = build([(ab[0], ab[1], g) for g, ab in chosen.items()])
    if works(m):
        return m
    # exhaustive fallback over sub-collections of size |chosen|, lex by edge order
    size = len(chosen)
    for combo in itertools.combinations(edges, size):
        if len({g for _, _, g in combo}) < size or len({(a, b) for a, b, _ in combo}) < size:
            continue
        m = build(combo)
        if works(m):
            return m
    return None
