"""Truncated arithmetic in the complete path algebra of a quiver.

A word is a tuple of arrow ids read left to right, so ``(a, b)`` is the path
that first follows ``a`` and then ``b``. The lazy path at a vertex ``v`` is
the one-element tuple ``(v,)`` holding the integer vertex id.

Every element carries a truncation order N: words longer than N are zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import (
    CannotAvoidVertex,
    HypothesisViolated,
    InvalidQuiver,
    NotACycle,
    NotComposable,
    NotParallel,
    QuiverMismatch,
    RuleHasConstantTerm,
    TruncationMismatch,
    UnknownArrow,
)
from .quiver import Quiver
from .rings import QQ, Ring, infer_ring

# ---------------------------------------------------------------- words


def is_lazy(w) -> bool:
    return len(w) == 1 and isinstance(w[0], int)


def word_len(w) -> int:
    return 0 if is_lazy(w) else len(w)


def word_start(q: Quiver, w) -> int:
    return w[0] if is_lazy(w) else q.ends[w[0]][0]


def word_end(q: Quiver, w) -> int:
    return w[0] if is_lazy(w) else q.ends[w[-1]][1]


def check_word(q: Quiver, w) -> tuple:
    w = tuple(w)
    if not w:
        raise NotComposable("empty word must be given as a lazy path (v,)")
    if is_lazy(w):
        if w[0] not in q.vertices:
            raise InvalidQuiver(f"lazy path at unknown vertex {w[0]}")
        return w
    ends = q.ends
    for a in w:
        if a not in ends:
            raise UnknownArrow(f"no arrow {a!r} in quiver")
    for a, b in zip(w, w[1:]):
        if ends[a][1] != ends[b][0]:
            raise NotComposable(f"{a!r} does not compose with {b!r}")
    return w


def _concat(wa, wb):
    if is_lazy(wa):
        return wb
    if is_lazy(wb):
        return wa
    return wa + wb


def _add_into(out: dict, w, c, ring: Ring):
    if ring.is_zero(c):
        return
    v = out.get(w)
    if v is None:
        out[w] = c
    else:
        v = ring.norm(v + c)
        if ring.is_zero(v):
            del out[w]
        else:
            out[w] = v


def _mul_terms(q: Quiver, A: dict, B: dict, limit: int, ring: Ring) -> dict:
    ends = q.ends
    out = {}
    blist = []
    for wb, cb in B.items():
        blist.append((wb, cb, word_len(wb), wb[0] if is_lazy(wb) else ends[wb[0]][0]))
    for wa, ca in A.items():
        la = word_len(wa)
        ta = wa[0] if is_lazy(wa) else ends[wa[-1]][1]
        for wb, cb, lb, sb in blist:
            if sb != ta or la + lb > limit:
                continue
            _add_into(out, _concat(wa, wb), ring.norm(ca * cb), ring)
    return out


# ---------------------------------------------------------------- elements


class AlgElem:
    """Element of the complete path algebra modulo paths of length > trunc."""

    __slots__ = ("quiver", "terms", "trunc", "ring")

    def __init__(self, quiver: Quiver, terms=None, trunc: int = 12, ring: Ring = QQ, *, _raw=False):
        self.quiver = quiver
        self.trunc = int(trunc)
        self.ring = ring
        if _raw:
            self.terms = terms
            return
        if self.trunc < 0:
            raise TruncationMismatch("truncation must be non-negative")
        out = {}
        for w, c in (terms or {}).items():
            w = check_word(quiver, w)
            if word_len(w) > self.trunc:
                continue
            _add_into(out, w, ring.coerce(c), ring)
        self.terms = out

    # ---- constructors
    @classmethod
    def zero(cls, q: Quiver, trunc: int = 12, ring: Ring = QQ):
        return cls(q, {}, trunc, ring)

    @classmethod
    def arrow(cls, q: Quiver, aid: str, trunc: int = 12, ring: Ring = QQ, coeff=1):
        return cls(q, {(aid,): coeff}, trunc, ring)

    @classmethod
    def path(cls, q: Quiver, word, coeff=1, trunc: int = 12, ring: Ring = QQ):
        return cls(q, {tuple(word): coeff}, trunc, ring)

    @classmethod
    def lazy(cls, q: Quiver, v: int, trunc: int = 12, ring: Ring = QQ, coeff=1):
        return cls(q, {(v,): coeff}, trunc, ring)

    def _new(self, terms, trunc=None, quiver=None):
        return type(self)(quiver or self.quiver, terms, self.trunc if trunc is None else trunc, self.ring, _raw=True)

    def as_elem(self) -> "AlgElem":
        return AlgElem(self.quiver, dict(self.terms), self.trunc, self.ring, _raw=True)

    # ---- arithmetic
    def _common(self, other) -> int:
        if not isinstance(other, AlgElem):
            raise TypeError(f"cannot combine AlgElem with {type(other).__name__}")
        if other.quiver != self.quiver:
            raise QuiverMismatch("elements live on different quivers")
        self.ring.check_same(other.ring)
        return min(self.trunc, other.trunc)

    def __add__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        n = self._common(other)
        out = {w: c for w, c in self.terms.items() if word_len(w) <= n}
        for w, c in other.terms.items():
            if word_len(w) <= n:
                _add_into(out, w, c, self.ring)
        return self._combine_type(other)(self.quiver, out, n, self.ring, _raw=True)

    def _combine_type(self, other):
        return type(self) if type(self) is type(other) else AlgElem

    def __neg__(self):
        return self._new({w: self.ring.norm(-c) for w, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        c = self.ring.coerce(c)
        if self.ring.is_zero(c):
            return self._new({})
        return self._new({w: self.ring.norm(c * x) for w, x in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, AlgElem):
            n = self._common(other)
            return AlgElem(self.quiver, _mul_terms(self.quiver, self.terms, other.terms, n, self.ring), n, self.ring, _raw=True)
        if isinstance(other, (int, str)) or hasattr(other, "denominator"):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, AlgElem):
            return NotImplemented
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        return (
            self.quiver == other.quiver
            and self.ring == other.ring
            and self.trunc == other.trunc
            and self.terms == other.terms
        )

    __hash__ = None

    # ---- queries
    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def items(self):
        """Terms sorted by (length, arrow order)."""
        key = _order_key(self.quiver)
        return sorted(self.terms.items(), key=lambda wc: (word_len(wc[0]), key(wc[0])))

    def coeff(self, word) -> object:
        return self.terms.get(tuple(word), 0)

    def min_length(self):
        return min((word_len(w) for w in self.terms), default=None)

    def arrows_used(self) -> set:
        out = set()
        for w in self.terms:
            if not is_lazy(w):
                out.update(w)
        return out

    def contains_arrow(self, aid: str) -> bool:
        return any(aid in w for w in self.terms if not is_lazy(w))

    def is_parallel_to(self, s: int, t: int) -> bool:
        q = self.quiver
        return all(word_start(q, w) == s and word_end(q, w) == t for w in self.terms)

    def truncate(self, n: int):
        n = min(n, self.trunc)
        return self._new({w: c for w, c in self.terms.items() if word_len(w) <= n}, trunc=n)

    # ---- io
    def to_json(self) -> dict:
        return {
            "trunc": self.trunc,
            "terms": [
                {"coeff": self.ring.fmt(c), "word": [] if is_lazy(w) else list(w), **({"vertex": w[0]} if is_lazy(w) else {})}
                for w, c in self.items()
            ],
        }

    @classmethod
    def from_json(cls, q: Quiver, data, ring: Ring | None = None):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            raw = data["terms"]
            trunc = int(data.get("trunc", 12))
            if ring is None:
                ring = infer_ring([str(t["coeff"]) for t in raw])
            terms = {}
            for t in raw:
                w = tuple(t["word"]) if t["word"] else (int(t["vertex"]),)
                c = ring.parse(str(t["coeff"]))
                terms[w] = ring.norm(terms.get(w, 0) + c)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidQuiver(f"malformed element JSON: {exc}") from exc
        return cls(q, terms, trunc, ring)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.items():
            name = f"e{w[0]}" if is_lazy(w) else " ".join(w)
            parts.append(f"{self.ring.fmt(c)}*[{name}]")
        return " + ".join(parts)


def _order_key(q: Quiver):
    cache = q.cache.setdefault("order_key", {})
    order = q._order

    def key(w):
        k = cache.get(w)
        if k is None:
            k = (-1, w[0]) if is_lazy(w) else tuple(order[a] for a in w)
            cache[w] = k
        return k

    return key


# ---------------------------------------------------------------- potentials


def canonical_rotation(q: Quiver, w: tuple) -> tuple:
    """Least rotation of a cycle with respect to the declared arrow order."""
    cache = q.cache.setdefault("rotation", {})
    r = cache.get(w)
    if r is not None:
        return r
    order = q._order
    keys = [order[a] for a in w]
    n = len(w)
    best = 0
    best_key = keys
    for i in range(1, n):
        k = keys[i:] + keys[:i]
        if k < best_key:
            best, best_key = i, k
    r = w[best:] + w[:best]
    cache[w] = r
    return r


class Potential(AlgElem):
    """Linear combination of cycles, each stored in its canonical rotation."""

    __slots__ = ()

    def __init__(self, quiver: Quiver, terms=None, trunc: int = 12, ring: Ring = QQ, *, _raw=False):
        if _raw:
            super().__init__(quiver, terms, trunc, ring, _raw=True)
            return
        base = AlgElem(quiver, terms, trunc, ring)
        out = {}
        for w, c in base.terms.items():
            if is_lazy(w) or word_start(quiver, w) != word_end(quiver, w):
                raise NotACycle(f"{w!r} is not a cycle")
            _add_into(out, canonical_rotation(quiver, w), c, ring)
        super().__init__(quiver, out, trunc, ring, _raw=True)

    @classmethod
    def from_elem(cls, e: AlgElem) -> "Potential":
        return cls(e.quiver, e.terms, e.trunc, e.ring)

    def _combine_type(self, other):
        return Potential if isinstance(other, Potential) else AlgElem

    def is_potential(self) -> bool:
        return all(len(w) >= 2 for w in self.terms)

    def is_reduced(self) -> bool:
        return all(len(w) >= 3 for w in self.terms)

    def part_of_length(self, n: int) -> "Potential":
        return self._new({w: c for w, c in self.terms.items() if len(w) == n})


def as_potential(x) -> Potential:
    return x if isinstance(x, Potential) else Potential.from_elem(x)


def cyclically_equivalent(w1: AlgElem, w2: AlgElem) -> bool:
    if w1.trunc != w2.trunc:
        raise TruncationMismatch(f"truncations differ: {w1.trunc} vs {w2.trunc}")
    if w1.quiver != w2.quiver:
        raise QuiverMismatch("potentials live on different quivers")
    w1.ring.check_same(w2.ring)
    return as_potential(w1).terms == as_potential(w2).terms


# ---------------------------------------------------------------- substitution


def _check_rules(q: Quiver, rules: dict, ring: Ring) -> dict:
    out = {}
    for aid, val in rules.items():
        s, t = q.arrow(aid).src, q.arrow(aid).tgt
        if val.quiver != q:
            raise QuiverMismatch(f"rule for {aid!r} lives on another quiver")
        ring.check_same(val.ring)
        if any(is_lazy(w) for w in val.terms):
            raise RuleHasConstantTerm(f"rule for {aid!r} has a length-0 term")
        if not val.is_parallel_to(s, t):
            raise NotParallel(f"rule for {aid!r} is not parallel to it")
        out[aid] = val
    return out


def _apply_homomorphism(src_q, terms, images, vmap, target_q, trunc, ring):
    """Image of a term dict under the algebra map given on arrows.

    ``images[a]`` is a term dict on ``target_q`` with every word of length
    at least 1, so a prefix can be cut as soon as the letters still to
    come would push it past ``trunc``.
    """
    out = {}
    cache = {}
    for w, c in terms.items():
        if is_lazy(w):
            _add_into(out, (vmap[w[0]],), c, ring)
            continue
        n = len(w)
        cur = images[w[0]]
        for pos in range(1, n):
            limit = trunc - (n - pos - 1)
            key = (w[: pos + 1], limit)
            hit = cache.get(key)
            if hit is not None:
                cur = hit
                continue
            cur = _mul_terms(target_q, cur, images[w[pos]], limit, ring)
            cache[key] = cur
            if not cur:
                break
        for wd, cd in cur.items():
            if word_len(wd) <= trunc:
                _add_into(out, wd, ring.norm(c * cd), ring)
    return out


def substitute(elem: AlgElem, rules: dict) -> AlgElem:
    """Simultaneously replace each keyed arrow by its rule value."""
    q = elem.quiver
    rules = _check_rules(q, rules, elem.ring)
    trunc = min([elem.trunc] + [v.trunc for v in rules.values()])
    images = {a: (rules[a].terms if a in rules else {(a,): 1}) for a in q.arrow_ids}
    vmap = {v: v for v in q.vertices}
    terms = _apply_homomorphism(q, elem.terms, images, vmap, q, trunc, elem.ring)
    if isinstance(elem, Potential):
        return Potential(q, terms, trunc, elem.ring)
    return AlgElem(q, terms, trunc, elem.ring, _raw=True)


def map_arrows(elem: AlgElem, images: dict, target: Quiver, vertex_map: dict | None = None) -> AlgElem:
    """Apply the algebra homomorphism KQ -> KQ' given by arrow images.

    Arrows missing from ``images`` go to the same-named arrow of ``target``.
    Images may be AlgElems on ``target``, arrow-id strings, or words. The
    induced vertex map must be consistent (identity on vertices untouched
    by any arrow unless ``vertex_map`` says otherwise).
    """
    q = elem.quiver
    ring = elem.ring
    vmap = dict(vertex_map or {})
    img_terms = {}
    trunc = elem.trunc
    for a in q.arrows:
        val = images.get(a.id, a.id)
        if isinstance(val, str):
            val = AlgElem(target, {(val,): 1}, trunc, ring)
        elif isinstance(val, (tuple, list)):
            val = AlgElem(target, {tuple(val): 1}, trunc, ring)
        if val.quiver != target:
            raise QuiverMismatch(f"image of {a.id!r} is not on the target quiver")
        ring.check_same(val.ring)
        trunc = min(trunc, val.trunc)
        if any(is_lazy(w) for w in val.terms):
            raise RuleHasConstantTerm(f"image of {a.id!r} has a length-0 term")
        for w in val.terms:
            s, t = word_start(target, w), word_end(target, w)
            for v, img in ((a.src, s), (a.tgt, t)):
                if vmap.setdefault(v, img) != img:
                    raise NotParallel(f"image of {a.id!r} is inconsistent with the vertex map")
        img_terms[a.id] = val.terms
    for v in q.vertices:
        vmap.setdefault(v, v)
        if vmap[v] not in target.vertices:
            raise InvalidQuiver(f"vertex {v} has no image in the target quiver")
    terms = _apply_homomorphism(q, elem.terms, img_terms, vmap, target, trunc, ring)
    if isinstance(elem, Potential):
        return Potential(target, terms, trunc, ring)
    return AlgElem(target, terms, trunc, ring, _raw=True)


def rename_arrows(elem: AlgElem, names: dict, target: Quiver) -> AlgElem:
    """Shorthand for map_arrows where every image is a single arrow."""
    return map_arrows(elem, {a: names.get(a, a) for a in elem.quiver.arrow_ids}, target)


# ---------------------------------------------------------------- derivatives, rotation


def cyclic_derivative(w: AlgElem, a: str) -> AlgElem:
    q = w.quiver
    if not q.has_arrow(a):
        raise UnknownArrow(f"no arrow {a!r} in quiver")
    out = {}
    for word, c in w.terms.items():
        if is_lazy(word):
            continue
        for i, x in enumerate(word):
            if x != a:
                continue
            rest = word[i + 1 :] + word[:i]
            if not rest:
                rest = (q.ends[a][1],)
            _add_into(out, rest, c, w.ring)
    return AlgElem(q, out, max(w.trunc - 1, 0), w.ring, _raw=True)


def rotate_away_from(w: AlgElem, k: int) -> AlgElem:
    """Representatives of the cycles of ``w`` that do not start at ``k``.

    For each term the least rotation (in arrow order) not starting at ``k``
    is chosen. The result is a plain element: its words are deliberately
    not in canonical rotation.
    """
    q = w.quiver
    order = q._order
    out = {}
    for word, c in w.terms.items():
        if is_lazy(word) or word_start(q, word) != word_end(q, word):
            raise NotACycle(f"{word!r} is not a cycle")
        best = None
        for i in range(len(word)):
            r = word[i:] + word[:i]
            if q.ends[r[0]][0] == k:
                continue
            key = tuple(order[x] for x in r)
            if best is None or key < best[0]:
                best = (key, r)
        if best is None:
            raise CannotAvoidVertex(f"cycle {word!r} only visits vertex {k}")
        _add_into(out, best[1], c, w.ring)
    return AlgElem(q, out, w.trunc, w.ring, _raw=True)


# ---------------------------------------------------------------- 2-cycle reduction


@dataclass
class TwoCycleReduction:
    """Outcome of reducing sum(gamma_i delta_i) + sum(T_i delta_i) + S.

    ``witness`` holds two substitution rule dicts; applying the first and
    then the second to ``source`` yields ``potential`` up to rotation.
    """

    source: Potential
    potential: Potential
    witness: list

    def replay(self) -> Potential:
        cur = self.source
        for rules in self.witness:
            cur = substitute(cur, rules)
        return as_potential(cur)


def two_cycle_reduce(gammas, deltas, ts, s: Potential) -> TwoCycleReduction:
    q = s.quiver
    ring = s.ring
    N = s.trunc
    gammas, deltas, ts = list(gammas), list(deltas), list(ts)
    if not (len(gammas) == len(deltas) == len(ts)):
        raise HypothesisViolated("i", "gammas, deltas and ts must have equal length")
    if len(set(gammas) | set(deltas)) != 2 * len(gammas):
        raise HypothesisViolated("i", "the arrows gamma_i, delta_i must be distinct")
    for g, d, t in zip(gammas, deltas, ts):
        gs, gt = q.arrow(g).src, q.arrow(g).tgt
        ds, dt = q.arrow(d).src, q.arrow(d).tgt
        if (ds, dt) != (gt, gs):
            raise HypothesisViolated("i", f"{d!r} is not anti-parallel to {g!r}")
        if t.quiver != q:
            raise QuiverMismatch("T lives on another quiver")
        if any(is_lazy(w) for w in t.terms) or not t.is_parallel_to(gs, gt):
            raise HypothesisViolated("i", f"T for {g!r} is not a parallel element of the arrow ideal")
    banned = set(gammas) | set(deltas)
    for t in ts:
        bad = banned & t.arrows_used()
        if bad:
            raise HypothesisViolated("ii", f"{sorted(bad)} appear in some T_j")
    bad = set(deltas) & s.arrows_used()
    if bad:
        raise HypothesisViolated("iii", f"{sorted(bad)} appear in S")
    N = min([N] + [t.trunc for t in ts])

    def arrow(a):
        return AlgElem(q, {(a,): 1}, N, ring, _raw=True)

    source = Potential.from_elem(s.truncate(N))
    for g, d, t in zip(gammas, deltas, ts):
        source = source + Potential.from_elem(arrow(g) * arrow(d) + t.truncate(N) * arrow(d))
    neg_rules = {g: -t.truncate(N) for g, t in zip(gammas, ts)}
    shift_rules = {g: arrow(g) - t.truncate(N) for g, t in zip(gammas, ts)}
    reduced_s = as_potential(substitute(s.truncate(N), neg_rules)) if neg_rules else s.truncate(N)
    shifted_s = as_potential(substitute(s.truncate(N), shift_rules)) if shift_rules else s.truncate(N)
    diff = shifted_s - reduced_s
    gset = set(gammas)
    tprime = {g: {} for g in gammas}
    for w, c in diff.terms.items():
        i = next(i for i, x in enumerate(w) if x in gset)
        r = w[i:] + w[:i]
        rest = r[1:] if len(r) > 1 else (q.ends[r[0]][1],)
        _add_into(tprime[r[0]], rest, c, ring)
    delta_rules = {}
    for g, d in zip(gammas, deltas):
        tp = AlgElem(q, tprime[g], N, ring, _raw=True)
        if tp.terms:
            delta_rules[d] = arrow(d) - tp
    result = reduced_s
    for g, d in zip(gammas, deltas):
        result = result + Potential.from_elem(arrow(g) * arrow(d))
    return TwoCycleReduction(source, result, [shift_rules, delta_rules])
