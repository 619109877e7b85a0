import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qpkit.errors import (
    ConstantTerm,
    ContainsY1,
    HypothesisViolated,
    InputError,
    NotAdmissible,
    TruncationTooSmall,
    ViolatesAvoidance,
)
from qpkit.pathalg import Potential, canonical_rotation
from qpkit.quiver import mutate_quiver, quiver_isomorphic
from qpkit.rings import QQ
from qpkit.series import FreeSeries
from qpkit.x7family import (
    X7,
    X7_PRIME,
    B_word,
    Delta_word,
    apply_deformation,
    avoids_i1i,
    build_h_witness,
    f_for_P,
    h_defect,
    is_admissible_word,
    make_Qn,
    make_Qn_prime,
    make_WP,
    mutate_center,
    mutate_side,
    phi,
    psi,
    psi_word,
    quadratic_part,
    reduce_series,
    reduction_deformation,
    sum_B,
    theta2,
    theta_of_bracketed,
    triangles,
    verify_nondegeneracy_round,
    W_F,
)
from strategies import free_series

CAP = 10**6


def series(n, terms, uses_y=False):
    return FreeSeries(n, terms, CAP, uses_y)


def pot(q, words, trunc=12):
    """Potential from {word: coeff}, rotating each word independently of the library."""
    return Potential(q, {canonical_rotation(q, tuple(w)): c for w, c in words.items()}, trunc)


W0 = make_WP([])


# ---------------------------------------------------------------- quivers


@pytest.mark.parametrize("n", range(1, 6))
def test_arrow_counts(n):
    assert len(make_Qn(n).arrows) == 4 * n
    assert len(make_Qn_prime(n).arrows) == n * (n + 2)


@pytest.mark.parametrize("n", range(1, 6))
def test_both_families_are_self_opposite(n):
    for q in (make_Qn(n), make_Qn_prime(n)):
        assert quiver_isomorphic(q.opposite(), q) is not None


@pytest.mark.parametrize("n", range(1, 6))
def test_every_cycle_of_Qn_passes_the_centre(n):
    q = make_Qn(n)
    assert q.full_subquiver(range(1, 2 * n + 1)).is_acyclic()
    assert not q.is_acyclic()
    # in Q'_n the d_i b_ij d_j b_ji squares avoid the centre
    assert make_Qn_prime(n).full_subquiver(range(1, 2 * n + 1)).is_acyclic() == (n == 1)


@pytest.mark.parametrize("n", range(2, 5))
def test_centre_mutation_links_the_families(n):
    assert quiver_isomorphic(mutate_quiver(make_Qn(n), 0), make_Qn_prime(n)) is not None


def test_X7_sizes():
    assert (len(X7.vertices), len(X7.arrows), len(X7_PRIME.arrows)) == (7, 12, 15)


def test_bad_n():
    with pytest.raises(InputError):
        make_Qn(0)


# ---------------------------------------------------------------- Phi and Psi


def test_phi_of_letters():
    x1 = series(3, {(0,): 1}, uses_y=True)
    y2 = series(3, {(4,): 1}, uses_y=True)
    assert phi(x1) == pot(X7, {Delta_word(1): 1})
    assert phi(y2) == pot(X7, {B_word(2): 1})
    assert phi(x1 * y2) == pot(X7, {Delta_word(1) + B_word(2): 1})


def test_phi_rejects_constants():
    with pytest.raises(ConstantTerm):
        phi(FreeSeries.constant(3))


@settings(max_examples=200, deadline=None)
@given(free_series(n=3, max_deg=4, uses_y=True), free_series(n=3, max_deg=3, uses_y=True))
def test_phi_sees_exactly_the_cyclic_class(f, g):
    # Delta_i and B_i are distinct first-return loops at 0, so Phi is injective up to rotation
    assert phi(f).is_zero() == f.cyclic_normal_form().is_zero()
    assert phi(f + f.commutator(g)) == phi(f)


@pytest.mark.parametrize(
    "word, expected",
    [
        ((4, 2), (-1, ("c2", "a2", "b23", "d3", "b32"))),
        ((0, 1), (1, ("d1", "b12", "d2", "b21"))),
        ((0, 1, 2), (1, ("d1", "b12", "d2", "b23", "d3", "b31"))),
        ((3, 4), (1, ("c1", "a1", "b12", "c2", "a2", "b21"))),
    ],
)
def test_psi_words(word, expected):
    assert psi_word(word, 3) == expected


def test_psi_rejects_repeated_indices():
    with pytest.raises(NotAdmissible):
        psi_word((0, 3), 3)  # x1 y1


def test_W_F_of_zero_is_the_triangles():
    assert W_F(series(3, {})) == triangles(3)
    assert len(triangles(3).terms) == 6


def test_admissibility():
    assert is_admissible_word((0, 1, 2), 3)
    assert not is_admissible_word((0, 1, 0), 3)  # cyclic x1 ... x1
    assert not is_admissible_word((0,), 3)
    f = series(3, {(0,): 1, (0, 1): 1, (1, 1, 2): 1})
    assert reduce_series(f) == series(3, {(0, 1): 1})


@pytest.mark.parametrize(
    "word, ok", [((1, 0, 1), False), ((1, 0, 2), True), ((1, 0, 2, 0), True), ((0, 1, 2, 0, 2), False), ((2, 0, 2, 1), False)]
)
def test_avoidance(word, ok):
    assert avoids_i1i(word, 3) == ok


# ---------------------------------------------------------------- theta_2


@pytest.mark.parametrize(
    "word, image",
    [
        ((0, 1, 2), {(4, 2): -1}),
        ((2, 1, 0), {(5, 1): -1}),
        ((1, 2), {(1, 2): 1}),
        ((4, 2), {(1, 0, 2): -1}),
    ],
)
def test_theta2_examples(word, image):
    assert theta2(series(3, {word: 1}, uses_y=True)).terms == image


@pytest.mark.parametrize(
    "word, err", [((3, 1), ContainsY1), ((1, 1), NotAdmissible), ((1, 0, 1, 2), ViolatesAvoidance)]
)
def test_theta2_domain(word, err):
    with pytest.raises(err):
        theta2(series(3, {word: 1}, uses_y=True))


@st.composite
def theta_domain_words(draw):
    """Admissible monomials in x1..x3, y2, y3 that avoid the window i 1 i."""
    letters = [0, 1, 2, 4, 5]
    length = draw(st.integers(2, 4))
    w = tuple(draw(st.lists(st.sampled_from(letters), min_size=length, max_size=length)))
    assume(is_admissible_word(w, 3) and avoids_i1i(w, 3))
    return w


@settings(max_examples=200, deadline=None)
@given(theta_domain_words(), st.integers(-3, 3).filter(bool))
def test_theta_square_commutes(w, c):
    f = series(3, {w: c}, uses_y=True)
    s = psi(f, 30)
    assert psi(theta2(f), 30) == theta_of_bracketed(s)


# ---------------------------------------------------------------- W_P and h


def test_WP_of_zero():
    assert len(W0.terms) == 6
    assert W0 == sum_B(3) + phi(quadratic_part(3))


def test_WP_of_x():
    d123 = Delta_word(1) + Delta_word(2) + Delta_word(3)
    assert make_WP([1]) == W0 + pot(X7, {d123: 1})


def test_WP_square_needs_truncation_18():
    long_terms = lambda w: [t for t in w.terms if len(t) == 18]
    assert long_terms(make_WP([0, 1], trunc=18)) and not long_terms(make_WP([0, 1], trunc=17))


def test_f_for_P():
    assert f_for_P([0, 2]) == series(3, {(0, 1): 1, (1, 2): 1, (2, 0): 1, (0, 1, 2) * 2: 2})
    assert f_for_P([1], quadratic=False) == series(3, {(0, 1, 2): 1})


@pytest.mark.parametrize(
    "p, terms",
    [([1], {(): 1}), ([0, 1], {(0,): 1, (1,): 1}), ([0, 0, 1], {(1, 1): 1, (1, 0): 1, (0, 0): 1})],
)
def test_h_witness(p, terms):
    assert build_h_witness(p).terms == terms


def test_h_defect_is_a_commutator_not_zero():
    d = h_defect([0, 1])
    assert d.terms == {(0, 1): 1, (1, 0): -1}
    assert d.cyclic_normal_form().is_zero()


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=0, max_size=5))
def test_h_defect_vanishes_cyclically(p):
    assert h_defect(p).cyclic_normal_form().is_zero()


# ---------------------------------------------------------------- deformations


def test_empty_deformation_is_the_identity():
    d = apply_deformation(W0, [])
    assert d.result == W0 and d.rules == {}


def test_lambda_prime_adds_Delta():
    d = apply_deformation(W0, [1], {1: 1}, {1: 1})
    assert d.result == W0 + pot(X7, {Delta_word(1): 1})
    assert d.replay() == d.result


def test_lambda_scales_B():
    d = apply_deformation(W0, [2], {2: 3})
    assert d.result == W0 + pot(X7, {B_word(2): 2})


def test_single_block():
    # S'''' = Delta_1 gives beta1 -> beta1 + delta1 gamma1 Delta_1 alpha1 delta1
    d = apply_deformation(W0, [1], s_blocks={1: (None, None, None, {Delta_word(1): 1})})
    assert d.result == W0 + pot(X7, {Delta_word(1) * 3: 1})
    assert d.replay() == d.result


def test_deformation_hypotheses():
    extra = W0 + pot(X7, {B_word(1) + Delta_word(2): 1})
    with pytest.raises(HypothesisViolated):
        apply_deformation(extra, [1])
    with pytest.raises(HypothesisViolated):
        apply_deformation(W0, [2], {2: 0})
    with pytest.raises(InputError):
        apply_deformation(W0, [4])
    with pytest.raises(InputError):
        apply_deformation(W0, [1], s_blocks={1: ({("beta1",): 1},)})


@pytest.mark.parametrize(
    "terms",
    [
        {(0, 1): 1, (1, 2): 1, (2, 0): 1},
        {(0, 1): 1, (0,): 2},
        {(0, 1): 1, (0, 0, 1): 1, (1, 1): -1},
        {(0, 1, 2): 1, (2, 2, 0, 1): 3},
    ],
)
def test_reduction_deformation_restores_the_full_series(terms):
    f = series(3, terms)
    d = reduction_deformation(f)
    assert d.source == sum_B(3) + phi(reduce_series(f))
    assert d.result == sum_B(3) + phi(f)
    assert d.replay() == d.result


# ---------------------------------------------------------------- mutation steps


@pytest.mark.parametrize("n", [2, 3])
def test_side_mutations_fix_the_base_potential(n):
    w = sum_B(n) + phi(quadratic_part(n))
    for k in range(1, 2 * n + 1):
        assert mutate_side(w, k) == w


def test_centre_mutation_of_W0():
    assert mutate_center(W0) == W_F(quadratic_part(3))


# ---------------------------------------------------------------- the round


@pytest.mark.parametrize("p", [[], [1], [2], [-1]])
def test_round_passes(p):
    rep = verify_nondegeneracy_round(p)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert rep.to_json()["verified_at_truncation"] == 12


def test_round_without_quadratic_terms_finds_two_cycles():
    rep = verify_nondegeneracy_round([], quadratic=False)
    assert not rep.passed
    assert rep.two_cycles
    assert rep.to_json()["two_cycles"][0]["count"]


def test_round_needs_truncation_12():
    with pytest.raises(TruncationTooSmall):
        verify_nondegeneracy_round([], trunc=11)


def test_ring_is_rational():
    assert W0.ring == QQ
