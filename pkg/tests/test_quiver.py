import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpkit.errors import AlreadyFramed, FrozenVertex, InvalidQuiver, LoopAtVertex, NotFramed, TwoCycleThroughVertex
from qpkit.quiver import (
    Color,
    Quiver,
    b_matrix,
    classify_vertices,
    frame,
    mutate_quiver,
    quiver_isomorphic,
    search_reddening,
)
from qpkit.x7family import X7, X7_PRIME, make_Qn, make_Qn_prime
from strategies import acyclic_quivers, fz_mutate, two_acyclic_quivers

A2 = Quiver([1, 2], [("a", 1, 2)])


def colors_from_matrix(b, vertices, frozen):
    """Green/red straight from the sign of the frozen columns."""
    fz = [j for j, v in enumerate(vertices) if v in frozen]
    out = {}
    for i, v in enumerate(vertices):
        if v in frozen:
            continue
        row = [b[i][j] for j in fz]
        out[v] = "green" if all(x <= 0 for x in row) else "red" if all(x >= 0 for x in row) else "mixed"
    return out


# ---------------------------------------------------------------- construction


def test_quiver_rejects_bad_input():
    with pytest.raises(InvalidQuiver):
        Quiver([0, 0], [])
    with pytest.raises(InvalidQuiver):
        Quiver([0, 1], [("a", 0, 2)])
    with pytest.raises(InvalidQuiver):
        Quiver([0, 1], [("a", 0, 1), ("a", 1, 0)])


def test_loop_and_two_cycle_queries():
    q = Quiver([0, 1, 2], [("a", 0, 1), ("b", 1, 0), ("l", 2, 2)])
    assert q.has_loops() and q.has_loops_at(2) and not q.has_loops_at(0)
    assert q.has_two_cycles() and q.has_two_cycle_through(0) and not q.has_two_cycle_through(2)


def test_json_round_trip():
    q = frame(X7)
    assert Quiver.from_json(json.loads(json.dumps(q.to_json()))) == q


def test_b_matrix_entries():
    b = b_matrix(Quiver([0, 1], [("a", 0, 1), ("b", 0, 1)]))
    assert b.entry(1, 0) == 2 and b.entry(0, 1) == -2


# ---------------------------------------------------------------- mutation


@settings(max_examples=1000, deadline=None)
@given(two_acyclic_quivers(), st.data())
def test_mutation_is_an_involution(q, data):
    k = data.draw(st.sampled_from(q.vertices))
    back = mutate_quiver(mutate_quiver(q, k), k)
    assert b_matrix(back).b == b_matrix(q).b
    assert quiver_isomorphic(back, q) is not None


@settings(max_examples=300, deadline=None)
@given(two_acyclic_quivers(), st.data())
def test_mutation_matches_matrix_mutation(q, data):
    k = data.draw(st.sampled_from(q.vertices))
    expected = fz_mutate([list(r) for r in b_matrix(q).b], q.vertices.index(k))
    assert [list(r) for r in b_matrix(mutate_quiver(q, k)).b] == expected


def test_mutation_errors():
    with pytest.raises(LoopAtVertex):
        mutate_quiver(Quiver([0], [("l", 0, 0)]), 0)
    with pytest.raises(TwoCycleThroughVertex):
        mutate_quiver(Quiver([0, 1], [("a", 0, 1), ("b", 1, 0)]), 0)
    with pytest.raises(FrozenVertex):
        mutate_quiver(frame(A2), 3)


def test_mu0_of_T3_is_affine_A2():
    t3 = make_Qn(1)
    affine = Quiver([0, 1, 2], [("x", 0, 2), ("y", 1, 0), ("z", 1, 2)])
    assert quiver_isomorphic(mutate_quiver(t3, 0), affine) is not None
    assert quiver_isomorphic(mutate_quiver(t3, 0), make_Qn_prime(1)) is not None


def test_mu0_of_X7_is_X7_prime():
    out = mutate_quiver(X7, 0)
    assert len(out.vertices) == 7 and len(out.arrows) == 15
    assert quiver_isomorphic(out, X7_PRIME) is not None


@pytest.mark.parametrize(
    "q1, q2, found",
    [
        (X7, X7, True),
        (X7, X7_PRIME, False),
        (mutate_quiver(make_Qn(2), 0), make_Qn_prime(2), True),
        (A2, A2.opposite(), True),
        (Quiver([0, 1, 2], [("a", 0, 1), ("b", 1, 2)]), Quiver([0, 1, 2], [("a", 0, 1), ("b", 2, 1)]), False),
    ],
)
def test_isomorphism_examples(q1, q2, found):
    bij = quiver_isomorphic(q1, q2)
    assert (bij is not None) == found
    if found:
        for i in q1.vertices:
            for j in q1.vertices:
                assert q1.count(i, j) == q2.count(bij[i], bij[j])


def test_identity_isomorphism_on_X7():
    bij = quiver_isomorphic(X7, X7)
    assert all(X7.count(i, j) == X7.count(bij[i], bij[j]) for i in X7.vertices for j in X7.vertices)


# ---------------------------------------------------------------- framing and colours


@pytest.mark.parametrize("q, nv, na, nf", [(X7, 14, 19, 7), (make_Qn_prime(1), 6, 6, 3)])
def test_frame_counts(q, nv, na, nf):
    f = frame(q)
    assert (len(f.vertices), len(f.arrows), len(f.frozen)) == (nv, na, nf)


def test_frame_twice_fails():
    with pytest.raises(AlreadyFramed):
        frame(frame(A2))


def test_classify_needs_frame():
    with pytest.raises(NotFramed):
        classify_vertices(A2)


def test_framed_quiver_is_all_green():
    state = classify_vertices(frame(X7))
    assert set(state.colors.values()) == {Color.GREEN}


def test_mu0_frame_X7_colours():
    fq = frame(X7)
    expected = colors_from_matrix(fz_mutate([list(r) for r in b_matrix(fq).b], 0), fq.vertices, fq.frozen)
    assert expected == {0: "red", **{v: "green" for v in range(1, 7)}}
    state = classify_vertices(mutate_quiver(fq, 0))
    assert {v: c.value for v, c in state.colors.items()} == expected


def test_A2_mutated_at_source_then_sink_is_all_red():
    q = mutate_quiver(mutate_quiver(frame(A2), 1), 2)
    assert classify_vertices(q).all_red


@settings(max_examples=100, deadline=None)
@given(two_acyclic_quivers(max_vertices=5, max_mult=2), st.data())
def test_sign_coherence_along_random_sequences(q, data):
    cur = frame(q)
    b = [list(r) for r in b_matrix(cur).b]
    seq = data.draw(st.lists(st.sampled_from(q.vertices), max_size=10))
    for k in seq:
        cur = mutate_quiver(cur, k)
        b = fz_mutate(b, cur.vertices.index(k))
        state = classify_vertices(cur)
        assert {v: c.value for v, c in state.colors.items()} == colors_from_matrix(b, cur.vertices, cur.frozen)


# ---------------------------------------------------------------- reddening


def least_reddening(q, max_len):
    """Lexicographically least shortest reddening sequence by plain enumeration."""
    for length in range(1, max_len + 1):
        for seq in itertools.product(sorted(q.vertices), repeat=length):
            cur = frame(q)
            for k in seq:
                cur = mutate_quiver(cur, k)
            if classify_vertices(cur).all_red:
                return seq
    return None


@settings(max_examples=60, deadline=None)
@given(acyclic_quivers(max_vertices=3))
def test_reddening_on_acyclic_quivers_matches_enumeration(q):
    res = search_reddening(q, 3 * len(q.vertices))
    assert res.found
    assert res.sequence == least_reddening(q, len(res.sequence))


def test_reddening_A2():
    res = search_reddening(A2, 4)
    assert res.sequence == (1, 2)
    assert res.sequence == least_reddening(A2, 4)


def test_reddening_single_vertex():
    assert search_reddening(Quiver([5], []), 1).sequence == (5,)


def test_reddening_result_json():
    out = search_reddening(A2, 4).to_json()
    assert out["found"] is True and out["sequence"] == [1, 2]
