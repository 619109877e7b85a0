"""Dimension profiles of quotients of free noncommutative power-series rings.

For an ideal generated by polynomials rho_1..rho_t in m^e (m = the ideal of
the variables), d_s is the dimension of (I + m^s) / (I + m^(s+1)). The
profile is computed from the ranks of the nested blocks of one matrix M_r
whose rows are the products u * rho_i * v truncated below length r.

Also here: transferring a rational vanishing result to all but finitely many
primes via a lattice index, and combinatorial certificates that a graded
Jacobian algebra is infinite-dimensional.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import (
    AugmentationNotFullRank,
    ConstantTerm,
    HypothesisViolated,
    InhomogeneousRelation,
    InputError,
    ProfileInvariantViolated,
    RingMismatch,
    RTooSmall,
)
from .exactlinalg import ExactMatrix, Infinite, lattice_index, pivot_columns_q, prime_factors, rank
from .pathalg import AlgElem, Potential, cyclic_derivative, is_lazy
from .quiver import Quiver
from .rings import QQ, PrimeField, Ring
from .series import FreeSeries


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def free_cyclic_derivative(f: FreeSeries, i: int) -> FreeSeries:
    if not 1 <= i <= f.n:
        raise InputError(f"variable index {i} out of range 1..{f.n}")
    letter = i - 1
    out = {}
    for w, c in f.terms.items():
        for k, x in enumerate(w):
            if x == letter:
                rot = w[k + 1 :] + w[:k]
                out[rot] = f.ring.norm(out.get(rot, 0) + c)
    out = {w: c for w, c in out.items() if not f.ring.is_zero(c)}
    return f._new(out, max(f.degree_cap - 1, 0))


@dataclass
class IdealPresentation:
    n: int
    gens: list
    e: int | None = None
    ring: Ring = QQ
    from_potential: bool = False

    def __post_init__(self):
        for g in self.gens:
            if g.n != self.n:
                raise InputError("generator has the wrong number of variables")
            if g.uses_y and any(x >= self.n for w in g.terms for x in w):
                raise InputError("generators must be polynomials in x only")
            self.ring.check_same(g.ring)
        vals = [g.valuation() for g in self.gens if not g.is_zero()]
        low = min(vals, default=0)
        if self.e is None:
            self.e = low
        if self.e < 0 or (vals and low < self.e):
            raise InputError(f"some generator is not in m^{self.e}")

    @property
    def t(self) -> int:
        return len(self.gens)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "e": self.e,
            "gens": [{"terms": g.to_json()["terms"]} for g in self.gens],
        }

    @classmethod
    def from_json(cls, data, ring: Ring | None = None) -> "IdealPresentation":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n = int(data["n"])
            gens = [
                FreeSeries.from_json({"n": n, "terms": g["terms"] if isinstance(g, dict) else g, "degree_cap": 10**6}, ring)
                for g in data["gens"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed presentation JSON: {exc}") from exc
        rings = {g.ring for g in gens}
        if len(rings) > 1:
            raise RingMismatch("generators over different rings")
        r = ring or (rings.pop() if rings else QQ)
        return cls(n, gens, data.get("e"), r)


def jacobi_generators(f: FreeSeries, drop_one: bool = True) -> IdealPresentation:
    """x_i^2 and [x_i, d_i f]; the last commutator is redundant and dropped by default."""
    if f.has_constant():
        raise ConstantTerm("the series has a constant term")
    if f.uses_y and any(x >= f.n for w in f.terms for x in w):
        raise InputError("series must be in the x variables only")
    n, cap = f.n, 10**6
    gens = [FreeSeries.monomial(n, (i, i), 1, cap, ring=f.ring) for i in range(n)]
    last = n - 1 if drop_one else n
    for i in range(1, last + 1):
        xi = FreeSeries.var(n, i, cap, ring=f.ring)
        d = free_cyclic_derivative(f, i)
        d.degree_cap = cap
        comm = xi.commutator(d)
        if not comm.is_zero():
            gens.append(comm)
    return IdealPresentation(n, gens, None, f.ring, from_potential=True)


# --------------------------------------------------------------------------
# the matrix M_r
# --------------------------------------------------------------------------


def _offsets(n: int, e: int, r: int) -> dict:
    off, acc = {}, 0
    for length in range(e, r):
        off[length] = acc
        acc += n**length
    off[r] = acc
    return off


def _word_number(w, n: int) -> int:
    v = 0
    for x in w:
        v = v * n + x
    return v


def word_column(w, n: int, e: int) -> int:
    """Column of the word w in every M_r (r > len(w))."""
    if len(w) < e:
        raise InputError(f"word shorter than e={e} has no column")
    return sum(n**j for j in range(e, len(w))) + _word_number(w, n)


def matrix_shape(n: int, t: int, e: int, r: int) -> tuple:
    rows = t * sum((j + 1) * n**j for j in range(max(r - e, 0)))
    cols = sum(n**j for j in range(e, r))
    return rows, cols


def build_Mr(p: IdealPresentation, r: int) -> ExactMatrix:
    """Rows (u, v, i) ordered by l(u)+l(v), then l(u), u, v, i; columns by length then lex."""
    n, e = p.n, p.e
    if r <= e:
        raise RTooSmall(f"need r > e = {e}")
    off = _offsets(n, e, r)
    ring = p.ring
    gens = [sorted(g.terms.items()) for g in p.gens]
    # per-length: contributions of each generator term, split as (length, number)
    prepared = [[(len(w), _word_number(w, n), c) for w, c in g] for g in gens]
    rows = []
    for j in range(r - e):
        room = r - j  # generator terms must be shorter than this
        for lu in range(j + 1):
            lv = j - lu
            nv = n**lv
            for u in range(n**lu):
                for v in range(nv):
                    for terms in prepared:
                        row = {}
                        for lw, num, c in terms:
                            if lw >= room:
                                continue
                            length = lu + lw + lv
                            col = off[length] + (u * n**lw + num) * nv + v
                            row[col] = c
                        rows.append(row)
    return ExactMatrix._raw(rows, off[r], ring)


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------


def ring_tag(ring: Ring) -> str:
    return f"F{ring.p}" if isinstance(ring, PrimeField) else "Q"


@dataclass(frozen=True)
class Finite:
    total: int

    def to_json(self) -> dict:
        return {"finite": True, "dim": self.total}


@dataclass(frozen=True)
class Unknown:
    sum_so_far: int

    def to_json(self) -> dict:
        return {"finite": False, "sum_so_far": self.sum_so_far}


@dataclass
class DimProfile:
    d: list
    ring: Ring = QQ
    ranks: dict = field(default_factory=dict)  # s -> rank of M_s
    from_potential: bool = False

    def check_invariants(self, n: int) -> None:
        seen_zero = False
        for s, ds in enumerate(self.d):
            if not 0 <= ds <= n**s:
                raise ProfileInvariantViolated(f"d_{s} = {ds} outside [0, {n}^{s}]")
            if seen_zero and ds != 0:
                raise ProfileInvariantViolated(f"d_{s} = {ds} after an earlier zero")
            seen_zero = seen_zero or ds == 0

    def to_json(self) -> dict:
        out = {"ring": ring_tag(self.ring), "d": list(self.d), "conclusion": conclude_dimension(self).to_json()}
        if self.from_potential and isinstance(conclude_dimension(self), Finite):
            # e_0-corner finite  <=>  whole Jacobian algebra on Q_n finite
            out["jacobian_algebra_finite"] = True
        return out


def conclude_dimension(d) -> Finite | Unknown:
    vals = d.d if isinstance(d, DimProfile) else list(d)
    total = sum(vals)
    return Finite(total) if 0 in vals else Unknown(total)


def _rank_ring(p: IdealPresentation, ring: Ring | None) -> Ring:
    if ring is None or ring == p.ring:
        return p.ring
    if isinstance(ring, PrimeField) and p.ring == QQ:
        return ring
    raise RingMismatch(f"cannot compute over {ring!r} from generators over {p.ring!r}")


def dimension_profile(p: IdealPresentation, r: int, ring: Ring | None = None, method: str = "auto") -> DimProfile:
    if r < p.e:
        raise RTooSmall(f"need r >= e = {p.e}")
    target = _rank_ring(p, ring)
    n, e = p.n, p.e
    big = build_Mr(p, r + 1)
    if target != big.ring:
        big = big.over(target)
    ranks = {}
    for s in range(e + 1, r + 2):
        rows, cols = matrix_shape(n, p.t, e, s)
        ranks[s] = rank(big.submatrix(rows, cols), method)
    d = []
    for s in range(r + 1):
        if s < e:
            d.append(n**s)
        elif s == e:
            d.append(n**s - ranks[e + 1])
        else:
            d.append(n**s - ranks[s + 1] + ranks[s])
    prof = DimProfile(d, target, ranks, p.from_potential)
    prof.check_invariants(n)
    return prof


def check_prime_consistency(over_q: DimProfile, over_p: DimProfile) -> None:
    """Reduction mod p can only lower ranks; equal ranks carry d_r = 0 across."""
    for s, rq in over_q.ranks.items():
        rp = over_p.ranks.get(s)
        if rp is None:
            continue
        if rp > rq:
            raise ProfileInvariantViolated(f"rank of M_{s} grew under reduction mod p")
        r = s - 1
        if rp == rq and r < min(len(over_q.d), len(over_p.d)):
            if over_q.d[r] == 0 and over_p.d[r] != 0:
                raise ProfileInvariantViolated(f"d_{r} vanishes over Q with equal ranks but not mod p")


# --------------------------------------------------------------------------
# transfer to primes
# --------------------------------------------------------------------------


@dataclass
class PrimeTransfer:
    rank_q: int
    index: int
    bad_primes: set
    aug_words: list
    n: int

    def to_json(self) -> dict:
        return {
            "rank": self.rank_q,
            "columns": self.rank_q + len(self.aug_words),
            "aug_words": ["".join(f"x{x + 1}" for x in w) for w in self.aug_words],
            "index": self.index,
            "bad_primes": sorted(self.bad_primes),
        }


def parse_word(text, n: int) -> tuple:
    """A word given as ['x1', 'x2'] or as the string 'x1x2' / 'x1*x2'."""
    if isinstance(text, str):
        parts = re.findall(r"x(\d+)", text)
        if not parts or re.sub(r"x\d+|\*|\s", "", text):
            raise InputError(f"bad word {text!r}")
    else:
        parts = []
        for s in text:
            m = re.fullmatch(r"x(\d+)", str(s).strip())
            if not m:
                raise InputError(f"bad letter {s!r}")
            parts.append(m.group(1))
    w = tuple(int(x) - 1 for x in parts)
    if any(not 0 <= x < n for x in w):
        raise InputError(f"word {text!r} uses a variable outside 1..{n}")
    return w


def transfer_to_primes(p: IdealPresentation, r: int, aug_words=None) -> PrimeTransfer:
    """Primes at which the rank of M_{r+1} might drop below its rational rank.

    The row lattice of M_{r+1}, completed by unit vectors at aug_words, must
    have full rank; the primes dividing its index are the only candidates.
    Without aug_words the non-pivot columns of a rational echelon form are used.
    """
    if p.ring != QQ:
        raise InputError("transfer to primes needs generators over Q")
    for g in p.gens:
        if any(getattr(c, "denominator", 1) != 1 for c in g.terms.values()):
            raise InputError("transfer to primes needs integer coefficients")
    n, e = p.n, p.e
    m = build_Mr(p, r + 1)
    rk = rank(m)
    prof = dimension_profile(p, r, QQ)
    if prof.d[r] != 0:
        raise HypothesisViolated("d_r", f"d_{r} over Q is {prof.d[r]}, not 0")
    if aug_words is None:
        pivots = set(pivot_columns_q(m))
        cols = [c for c in range(m.ncols) if c not in pivots]
        words = [_column_word(c, n, e) for c in cols]
    else:
        words = [w if isinstance(w, tuple) else parse_word(w, n) for w in aug_words]
        cols = [word_column(w, n, e) for w in words]
        if any(c >= m.ncols for c in cols):
            raise InputError(f"augmentation word longer than {r}")
    if len(set(cols)) != m.ncols - rk:
        raise AugmentationNotFullRank(
            f"need {m.ncols - rk} distinct augmentation words, got {len(set(cols))}"
        )
    aug = ExactMatrix._raw(m.rows + [{c: 1} for c in cols], m.ncols, QQ)
    idx = lattice_index(aug)
    if idx is Infinite:
        raise AugmentationNotFullRank("augmented row lattice is not of full rank")
    return PrimeTransfer(rk, idx, prime_factors(idx), words, n)


def _column_word(c: int, n: int, e: int) -> tuple:
    length = e
    while c >= n**length:
        c -= n**length
        length += 1
    w = []
    for _ in range(length):
        c, x = divmod(c, n)
        w.append(x)
    return tuple(reversed(w))


# --------------------------------------------------------------------------
# graded quivers with potential
# --------------------------------------------------------------------------


@dataclass
class GradedQP:
    quiver: Quiver
    degrees: dict
    potential: Potential
    signs: dict | None = None  # cycle word -> coefficient; overrides the potential's coefficients

    def __post_init__(self):
        unknown = set(self.degrees) - set(self.quiver.arrow_ids)
        if unknown:
            raise InputError(f"degrees for unknown arrows {sorted(unknown)}")
        if self.signs is not None:
            terms = {tuple(w): c for w, c in self.signs.items()}
            self.potential = Potential(self.quiver, terms, self.potential.trunc, self.potential.ring)

    def degree(self, word) -> int:
        return sum(self.degrees[a] for a in word)

    def to_json(self) -> dict:
        return {
            "quiver": self.quiver.to_json(),
            "degrees": dict(self.degrees),
            "potential": self.potential.to_json(),
        }

    @classmethod
    def from_json(cls, data) -> "GradedQP":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            q = Quiver.from_json(data["quiver"])
            degrees = {a: int(v) for a, v in data["degrees"].items()}
            pot = Potential.from_elem(AlgElem.from_json(q, data["potential"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed graded QP JSON: {exc}") from exc
        return cls(q, degrees, pot)


@dataclass
class InfiniteCertificate:
    degree: int
    relations: dict  # arrow -> cyclic derivative of the potential
    pairs: dict  # arrow -> (p, p') with the relation p ~ p'

    def relation_pairs(self) -> list:
        return list(self.pairs.values())

    def to_json(self) -> dict:
        return {
            "result": "infinite",
            "cycle_degree": self.degree,
            "relations": {a: r.to_json() for a, r in sorted(self.relations.items())},
            "pairs": {a: [list(p), list(q)] for a, (p, q) in sorted(self.pairs.items())},
        }


@dataclass
class Inconclusive:
    reason: str

    def to_json(self) -> dict:
        return {"result": "inconclusive", "reason": self.reason}


def graded_infinite_check(g: GradedQP) -> InfiniteCertificate | Inconclusive:
    q, w, ring = g.quiver, g.potential, g.potential.ring
    missing = [a for a in q.arrow_ids if g.degrees.get(a, 0) <= 0]
    if missing:
        return Inconclusive(f"not positively graded: {', '.join(missing)}")
    if q.is_acyclic():
        return Inconclusive("acyclic")
    cycles = {c: v for c, v in w.terms.items() if not is_lazy(c)}
    for c in cycles:
        if len(set(c)) != len(c):
            return Inconclusive(f"cycle {' '.join(c)} is not simple")
    # cycles are stored in a canonical rotation, so distinct keys are inequivalent
    degs = {g.degree(c) for c in cycles}
    if len(degs) > 1:
        return Inconclusive(f"cycles of different degrees {sorted(degs)}")
    occurs = {}
    for c in cycles:
        for a in c:
            occurs.setdefault(a, []).append(c)
    pairs = {}
    for a in sorted(occurs):
        cs = occurs[a]
        if len(cs) != 2:
            return Inconclusive(f"arrow {a} lies in {len(cs)} cycles, not two")
        c1, c2 = cs
        if not ring.is_zero(ring.norm(cycles[c1] + cycles[c2])):
            return Inconclusive(f"signs of the two cycles through {a} do not cancel")
        pairs[a] = tuple(_rest_after(c, a) for c in (c1, c2))
    relations = {a: cyclic_derivative(w, a) for a in pairs}
    return InfiniteCertificate(degs.pop() if degs else 0, relations, pairs)


def _rest_after(cycle, a):
    i = cycle.index(a)
    return cycle[i + 1 :] + cycle[:i]


def paths_of_degree(q: Quiver, degrees: dict, d: int) -> list:
    if d == 0:
        return [(v,) for v in q.vertices]
    if any(degrees.get(a, 0) <= 0 for a in q.arrow_ids):
        raise InputError("degrees must be positive")
    out = []

    def grow(path, end, left):
        if left == 0:
            out.append(path)
            return
        for arr in q.arrows_out_of(end):
            k = degrees[arr.id]
            if k <= left:
                grow(path + (arr.id,), arr.tgt, left - k)

    for v in q.vertices:
        grow((), v, d)
    return out


def graded_class_dimension(q: Quiver, degrees, relations, d: int) -> int:
    """dim of KQ_d / I_d where I is spanned by the differences of the relation pairs."""
    rels = []
    for p1, p2 in relations:
        p1, p2 = tuple(p1), tuple(p2)
        for word in (p1, p2):
            for a in word:
                if not q.has_arrow(a):
                    raise InputError(f"unknown arrow {a!r} in relation")
        deg1 = sum(degrees[a] for a in p1)
        deg2 = sum(degrees[a] for a in p2)
        if deg1 != deg2 or not p1 or not p2:
            raise InhomogeneousRelation(f"{p1} and {p2} have degrees {deg1} and {deg2}")
        if (q.src(p1[0]), q.tgt(p1[-1])) != (q.src(p2[0]), q.tgt(p2[-1])):
            raise InhomogeneousRelation(f"{p1} and {p2} are not parallel")
        rels.append((p1, p2))
        rels.append((p2, p1))
    paths = paths_of_degree(q, degrees, d)
    index = {w: i for i, w in enumerate(paths)}
    parent = list(range(len(paths)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_first = {}
    for lhs, rhs in rels:
        by_first.setdefault(lhs[0], []).append((lhs, rhs))
    for w, i in index.items():
        if d == 0:
            break
        for pos, a in enumerate(w):
            for lhs, rhs in by_first.get(a, ()):
                if w[pos : pos + len(lhs)] == lhs:
                    j = index[w[:pos] + rhs + w[pos + len(lhs) :]]
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
    return sum(1 for i in range(len(paths)) if find(i) == i)


__all__ = [
    "free_cyclic_derivative",
    "IdealPresentation",
    "jacobi_generators",
    "build_Mr",
    "matrix_shape",
    "word_column",
    "DimProfile",
    "dimension_profile",
    "conclude_dimension",
    "Finite",
    "Unknown",
    "check_prime_consistency",
    "PrimeTransfer",
    "transfer_to_primes",
    "GradedQP",
    "InfiniteCertificate",
    "Inconclusive",
    "graded_infinite_check",
    "paths_of_degree",
    "graded_class_dimension",
]
