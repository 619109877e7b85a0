"""Quivers, exchange matrices, framed quivers and reddening search."""

from __future__ import annotations

import enum
import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    AlreadyFramed,
    FrozenVertex,
    InvalidQuiver,
    LoopAtVertex,
    NameClash,
    NotFramed,
    SignCoherenceViolation,
    TwoCycleThroughVertex,
    UnknownArrow,
)


@dataclass(frozen=True)
class Arrow:
    id: str
    src: int
    tgt: int


class Quiver:
    """Finite directed multigraph with named arrows.

    Arrow order is significant: it fixes the normal form of potentials.
    Instances are treated as immutable.
    """

    __slots__ = ("vertices", "arrows", "frozen", "_by_id", "_order", "_counts", "_hash", "ends", "cache")

    def __init__(self, vertices: Iterable[int], arrows: Iterable, frozen: Iterable[int] = ()):
        self.vertices = tuple(int(v) for v in vertices)
        arrs = []
        for a in arrows:
            if isinstance(a, Arrow):
                arrs.append(a)
            else:
                aid, s, t = a
                arrs.append(Arrow(str(aid), int(s), int(t)))
        self.arrows = tuple(arrs)
        self.frozen = frozenset(int(v) for v in frozen)
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidQuiver("duplicate vertex id")
        if any(v < 0 for v in self.vertices):
            raise InvalidQuiver("vertex ids must be non-negative")
        vs = set(self.vertices)
        if not self.frozen <= vs:
            raise InvalidQuiver("frozen vertex not declared")
        self._by_id = {}
        self._order = {}
        counts = Counter()
        for pos, a in enumerate(self.arrows):
            if a.id in self._by_id:
                raise InvalidQuiver(f"duplicate arrow id {a.id!r}")
            if a.src not in vs or a.tgt not in vs:
                raise InvalidQuiver(f"arrow {a.id!r} has an undeclared endpoint")
            self._by_id[a.id] = a
            self._order[a.id] = pos
            counts[(a.src, a.tgt)] += 1
        self._counts = counts
        self._hash = None
        self.ends = {a.id: (a.src, a.tgt) for a in self.arrows}
        self.cache = {}  # scratch space for derived data (normal-form keys etc.)

    # ---- lookup
    def arrow(self, aid: str) -> Arrow:
        try:
            return self._by_id[aid]
        except KeyError:
            raise UnknownArrow(f"no arrow {aid!r} in quiver") from None

    def has_arrow(self, aid: str) -> bool:
        return aid in self._by_id

    def src(self, aid: str) -> int:
        return self.arrow(aid).src

    def tgt(self, aid: str) -> int:
        return self.arrow(aid).tgt

    def order(self, aid: str) -> int:
        """Position of the arrow in the declared order."""
        try:
            return self._order[aid]
        except KeyError:
            raise UnknownArrow(f"no arrow {aid!r} in quiver") from None

    @property
    def arrow_ids(self) -> tuple:
        return tuple(a.id for a in self.arrows)

    @property
    def mutable_vertices(self) -> tuple:
        return tuple(v for v in self.vertices if v not in self.frozen)

    def count(self, i: int, j: int) -> int:
        """Number of arrows i -> j."""
        return self._counts.get((i, j), 0)

    def arrows_between(self, i: int, j: int) -> list:
        return [a for a in self.arrows if a.src == i and a.tgt == j]

    def arrows_into(self, k: int) -> list:
        return [a for a in self.arrows if a.tgt == k]

    def arrows_out_of(self, k: int) -> list:
        return [a for a in self.arrows if a.src == k]

    # ---- structural queries
    def has_loops(self) -> bool:
        return any(a.src == a.tgt for a in self.arrows)

    def has_loops_at(self, k: int) -> bool:
        return self.count(k, k) > 0

    def has_two_cycles(self) -> bool:
        return any(i != j and self.count(j, i) for (i, j) in self._counts)

    def has_two_cycle_through(self, k: int) -> bool:
        return any(self.count(k, j) and self.count(j, k) for j in self.vertices if j != k)

    def is_acyclic(self) -> bool:
        succ = defaultdict(set)
        for a in self.arrows:
            succ[a.src].add(a.tgt)
        state = {}

        def visit(v):
            state[v] = 1
            for w in succ[v]:
                s = state.get(w)
                if s == 1 or (s is None and not visit(w)):
                    return False
            state[v] = 2
            return True

        return all(state.get(v) == 2 or visit(v) for v in self.vertices)

    def opposite(self) -> "Quiver":
        return Quiver(self.vertices, [(a.id, a.tgt, a.src) for a in self.arrows], self.frozen)

    def full_subquiver(self, vs: Iterable[int]) -> "Quiver":
        keep = set(vs)
        return Quiver(
            [v for v in self.vertices if v in keep],
            [a for a in self.arrows if a.src in keep and a.tgt in keep],
            self.frozen & keep,
        )

    # ---- equality / io
    def __eq__(self, other):
        return (
            isinstance(other, Quiver)
            and self.vertices == other.vertices
            and self.arrows == other.arrows
            and self.frozen == other.frozen
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vertices, self.arrows, self.frozen))
        return self._hash

    def __repr__(self):
        return f"Quiver({len(self.vertices)} vertices, {len(self.arrows)} arrows, frozen={sorted(self.frozen)})"

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "frozen": sorted(self.frozen),
            "arrows": [{"id": a.id, "src": a.src, "tgt": a.tgt} for a in self.arrows],
        }

    @classmethod
    def from_json(cls, data) -> "Quiver":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(
                data["vertices"],
                [(a["id"], a["src"], a["tgt"]) for a in data["arrows"]],
                data.get("frozen", ()),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidQuiver(f"malformed quiver JSON: {exc}") from exc


# ---------------------------------------------------------------- B-matrices


@dataclass(frozen=True)
class ExchangeMatrix:
    """b[i][j] = #(j -> i) - #(i -> j), indexed by position in ``vertices``."""

    vertices: tuple
    b: tuple
    frozen: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_quiver(cls, q: Quiver) -> "ExchangeMatrix":
        pos = {v: i for i, v in enumerate(q.vertices)}
        n = len(q.vertices)
        b = [[0] * n for _ in range(n)]
        for a in q.arrows:
            if a.src == a.tgt:
                continue
            b[pos[a.tgt]][pos[a.src]] += 1
            b[pos[a.src]][pos[a.tgt]] -= 1
        return cls(q.vertices, tuple(map(tuple, b)), q.frozen)

    def entry(self, i: int, j: int) -> int:
        return self.b[self.vertices.index(i)][self.vertices.index(j)]

    def mutate(self, k: int) -> "ExchangeMatrix":
        if k in self.frozen:
            raise FrozenVertex(f"vertex {k} is frozen")
        kk = self.vertices.index(k)
        return ExchangeMatrix(self.vertices, _fz_mutate(self.b, kk), self.frozen)

    def to_quiver(self, loops: Iterable[int] = ()) -> Quiver:
        """Materialize arrows with ids ordered by (source, target, index).

        Arrows between two frozen vertices are dropped. ``loops`` lists one
        vertex per loop to re-attach.
        """
        edges = []
        n = len(self.vertices)
        for si in range(n):
            for ti in range(n):
                s, t = self.vertices[si], self.vertices[ti]
                if si != ti and s in self.frozen and t in self.frozen:
                    continue
                cnt = max(self.b[ti][si], 0) if si != ti else 0
                edges.extend((s, t, idx) for idx in range(cnt))
        for v, c in sorted(Counter(loops).items()):
            edges.extend((v, v, idx) for idx in range(c))
        edges.sort()
        return Quiver(self.vertices, [(f"a{s}_{t}_{i}", s, t) for s, t, i in edges], self.frozen)


def _fz_mutate(b, k):
    n = len(b)
    bk = b[k]
    out = []
    for i in range(n):
        row = b[i]
        bik = row[k]
        if i == k:
            out.append(tuple(-x for x in row))
            continue
        new = list(row)
        for j in range(n):
            if j == k:
                new[j] = -bik
            else:
                bkj = bk[j]
                new[j] = row[j] + (abs(bik) * bkj + bik * abs(bkj)) // 2
        out.append(tuple(new))
    return tuple(out)


def b_matrix(q: Quiver) -> ExchangeMatrix:
    return ExchangeMatrix.from_quiver(q)


def mutate_quiver(q: Quiver, k: int) -> Quiver:
    if k not in q.vertices:
        raise InvalidQuiver(f"vertex {k} not in quiver")
    if k in q.frozen:
        raise FrozenVertex(f"vertex {k} is frozen")
    if q.has_loops_at(k):
        raise LoopAtVertex(f"loop at vertex {k}")
    if q.has_two_cycle_through(k):
        raise TwoCycleThroughVertex(f"2-cycle through vertex {k}")
    loops = [a.src for a in q.arrows if a.src == a.tgt]
    return b_matrix(q).mutate(k).to_quiver(loops)


# ---------------------------------------------------------------- isomorphism


def quiver_isomorphic(q1: Quiver, q2: Quiver):
    """Vertex bijection q1 -> q2 preserving arrow multiplicities and frozen set, or None."""
    if len(q1.vertices) != len(q2.vertices) or len(q1.arrows) != len(q2.arrows):
        return None
    if len(q1.frozen) != len(q2.frozen):
        return None

    def signature(q, v):
        out = sorted(q.count(v, w) for w in q.vertices if w != v)
        inc = sorted(q.count(w, v) for w in q.vertices if w != v)
        return (v in q.frozen, q.count(v, v), tuple(out), tuple(inc))

    sig1 = {v: signature(q1, v) for v in q1.vertices}
    sig2 = {v: signature(q2, v) for v in q2.vertices}
    if Counter(sig1.values()) != Counter(sig2.values()):
        return None
    by_sig = defaultdict(list)
    for v in q2.vertices:
        by_sig[sig2[v]].append(v)
    # most constrained vertices first
    order = sorted(q1.vertices, key=lambda v: (len(by_sig[sig1[v]]), q1.vertices.index(v)))
    assign = {}
    used = set()

    def extend(pos):
        if pos == len(order):
            return True
        v = order[pos]
        for w in by_sig[sig1[v]]:
            if w in used:
                continue
            if all(
                q1.count(v, u) == q2.count(w, assign[u]) and q1.count(u, v) == q2.count(assign[u], w)
                for u in assign
            ):
                assign[v] = w
                used.add(w)
                if extend(pos + 1):
                    return True
                del assign[v]
                used.discard(w)
        return False

    if extend(0):
        return {v: assign[v] for v in q1.vertices}
    return None


# ---------------------------------------------------------------- framing


def frame(q: Quiver) -> Quiver:
    """Add a frozen copy v' of each vertex and an arrow v -> v'."""
    if q.frozen:
        raise AlreadyFramed("quiver already has frozen vertices")
    base = max(q.vertices, default=-1) + 1
    copies = {v: base + idx for idx, v in enumerate(q.vertices)}
    new_arrows = [(f"fr{v}", v, copies[v]) for v in q.vertices]
    clash = {aid for aid, _, _ in new_arrows} & set(q.arrow_ids)
    if clash:
        raise NameClash(f"framing arrow ids already used: {sorted(clash)}")
    return Quiver(
        list(q.vertices) + list(copies.values()),
        list(q.arrows) + new_arrows,
        copies.values(),
    )


class Color(str, enum.Enum):
    GREEN = "green"
    RED = "red"


@dataclass(frozen=True)
class GreenRedState:
    quiver: Quiver
    colors: dict

    @property
    def all_red(self) -> bool:
        return all(c is Color.RED for c in self.colors.values())


def _color_from_row(row_frozen, v):
    green = all(x <= 0 for x in row_frozen)
    red = all(x >= 0 for x in row_frozen)
    if green == red:
        raise SignCoherenceViolation(f"vertex {v} is {'both' if green else 'neither'} green and red")
    return Color.GREEN if green else Color.RED


def classify_vertices(q: Quiver) -> GreenRedState:
    if not q.frozen:
        raise NotFramed("quiver has no frozen vertices")
    bm = b_matrix(q)
    fz = [j for j, v in enumerate(q.vertices) if v in q.frozen]
    colors = {}
    for i, v in enumerate(q.vertices):
        if v in q.frozen:
            continue
        colors[v] = _color_from_row([bm.b[i][j] for j in fz], v)
    return GreenRedState(q, colors)


# ---------------------------------------------------------------- reddening search


@dataclass(frozen=True)
class ReddeningResult:
    sequence: tuple | None  # vertex ids, applied left to right
    explored_depth: int
    states: int  # distinct states (up to relabelling) visited

    @property
    def found(self) -> bool:
        return self.sequence is not None

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "sequence": list(self.sequence) if self.sequence is not None else None,
            "explored_depth": self.explored_depth,
            "states": self.states,
        }


def _mutate_extended(rows, k, n):
    """FZ mutation of the mutable rows (n x 2n) of a framed exchange matrix."""
    rk = rows[k]
    out = []
    for i, row in enumerate(rows):
        if i == k:
            out.append(tuple(-x for x in row))
            continue
        bik = row[k]
        if bik == 0:
            out.append(row)
            continue
        new = list(row)
        for j, bkj in enumerate(rk):
            if j == k:
                new[j] = -bik
            elif bkj:
                new[j] += (abs(bik) * bkj + bik * abs(bkj)) // 2
        out.append(tuple(new))
    return tuple(out)


def _canonical_key(rows, n):
    """Representative of rows under simultaneous permutation of mutable indices.

    Rows are sorted by their frozen part (the c-vectors). These are pairwise
    distinct whenever the frozen block is invertible, which is always the
    case after framing; ties, if any, are broken by trying every order.
    """
    cvec = [row[n:] for row in rows]
    idx = sorted(range(n), key=lambda i: cvec[i])
    groups = [list(g) for _, g in itertools.groupby(idx, key=lambda i: cvec[i])]

    def apply(perm):
        return tuple(tuple(rows[p][q] for q in perm) + cvec[p] for p in perm)

    if all(len(g) == 1 for g in groups):
        return apply(idx)
    best = None
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        key = apply([i for g in choice for i in g])
        if best is None or key < best:
            best = key
    return best


def _all_red(rows, n):
    return all(all(x >= 0 for x in row[n:]) for row in rows)


def search_reddening(q: Quiver, max_depth: int) -> ReddeningResult:
    """Breadth-first search for the lexicographically least shortest reddening sequence."""
    if q.frozen:
        raise AlreadyFramed("search_reddening expects an unframed quiver")
    if max_depth < 1:
        raise InvalidQuiver("max_depth must be positive")
    if q.has_two_cycles():
        raise TwoCycleThroughVertex("quiver has 2-cycles")
    verts = q.vertices
    n = len(verts)
    if n == 0:
        return ReddeningResult((), 0, 1)
    bm = b_matrix(frame(q))
    start = tuple(bm.b[i][: 2 * n] for i in range(n))
    for row in start:  # sanity: colour check on the initial framing
        _color_from_row(row[n:], None)
    seen = {_canonical_key(start, n)}
    level = [(start, ())]
    depth = 0
    while level and depth < max_depth:
        depth += 1
        nxt = []
        for rows, seq in level:
            for k in range(n):
                if seq and seq[-1] == k:
                    continue  # mutating twice is the identity
                child = _mutate_extended(rows, k, n)
                key = _canonical_key(child, n)
                if key in seen:
                    continue
                seen.add(key)
                cseq = seq + (k,)
                if _all_red(child, n):
                    return ReddeningResult(tuple(verts[i] for i in cseq), depth, len(seen))
                nxt.append((child, cseq))
        level = nxt
    return ReddeningResult(None, depth, len(seen))
