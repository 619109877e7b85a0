"""Hypothesis strategies and small independent helpers shared by the tests."""

from fractions import Fraction

import hypothesis.strategies as st

from qpkit.pathalg import AlgElem, Potential
from qpkit.quiver import Quiver
from qpkit.rings import QQ
from qpkit.series import FreeSeries

coeffs = st.integers(-3, 3).filter(bool)


@st.composite
def two_acyclic_quivers(draw, max_vertices=8, max_mult=3, min_vertices=1):
    n = draw(st.integers(min_vertices, max_vertices))
    arrows = []
    for i in range(n):
        for j in range(i + 1, n):
            m = draw(st.integers(-max_mult, max_mult))
            s, t = (i, j) if m > 0 else (j, i)
            arrows += [(f"e{s}_{t}_{c}", s, t) for c in range(abs(m))]
    return Quiver(range(n), arrows)


@st.composite
def acyclic_quivers(draw, max_vertices=3, max_mult=2):
    n = draw(st.integers(1, max_vertices))
    arrows = []
    for i in range(n):
        for j in range(i + 1, n):
            m = draw(st.integers(0, max_mult))
            arrows += [(f"e{i}_{j}_{c}", i, j) for c in range(m)]
    return Quiver(range(n), arrows)


def fz_mutate(b, k):
    """Matrix mutation written out entrywise; used as an oracle."""
    n = len(b)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == k or j == k:
                out[i][j] = -b[i][j]
            else:
                bik, bkj = b[i][k], b[k][j]
                out[i][j] = b[i][j] + (abs(bik) * bkj + bik * abs(bkj)) // 2
    return out


def walks(q: Quiver, start: int, length: int):
    """All paths of the given length starting at a vertex."""
    cur = [((), start)]
    for _ in range(length):
        cur = [(w + (a.id,), a.tgt) for w, v in cur for a in q.arrows if a.src == v]
    return cur


def paths_between(q: Quiver, s: int, t: int, lo: int, hi: int):
    out = []
    for n in range(lo, hi + 1):
        out += [w for w, v in walks(q, s, n) if v == t]
    return out


def cycles_up_to(q: Quiver, hi: int, lo: int = 2):
    out = []
    for v in q.vertices:
        out += paths_between(q, v, v, lo, hi)
    return out


@st.composite
def elements_from(draw, q: Quiver, pool, trunc=12, max_terms=4, ring=QQ):
    if not pool:
        return AlgElem.zero(q, trunc, ring)
    words = draw(st.lists(st.sampled_from(pool), min_size=0, max_size=max_terms))
    return AlgElem(q, {w: draw(coeffs) for w in words}, trunc, ring)


@st.composite
def potentials_from(draw, q: Quiver, pool, trunc=12, max_terms=4, ring=QQ):
    if not pool:
        return Potential(q, {}, trunc, ring)
    words = draw(st.lists(st.sampled_from(pool), min_size=0, max_size=max_terms))
    return Potential(q, {w: draw(coeffs) for w in words}, trunc, ring)


@st.composite
def free_series(draw, n=3, max_deg=6, max_terms=6, min_deg=1, uses_y=False):
    letters = 2 * n if uses_y else n
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        d = draw(st.integers(min_deg, max_deg))
        w = tuple(draw(st.lists(st.integers(0, letters - 1), min_size=d, max_size=d)))
        terms[w] = Fraction(draw(coeffs))
    return FreeSeries(n, terms, 10**6, uses_y)
