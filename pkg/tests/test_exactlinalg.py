from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qpkit.errors import InputError, IntegerRingUnsupported, RankDeficient
from qpkit.exactlinalg import (
    ExactMatrix,
    Infinite,
    bad_primes,
    determinant,
    hnf,
    lattice_index,
    prime_factors,
    rank,
)
from qpkit.rings import GF, QQ, ZZ


@st.composite
def int_matrices(draw, max_rows=7, max_cols=7, lo=-4, hi=4, square=False):
    r = draw(st.integers(1, max_rows))
    c = r if square else draw(st.integers(1, max_cols))
    # small entries with plenty of zeros, so rank deficiency happens often
    entry = st.one_of(st.just(0), st.integers(lo, hi))
    return [[draw(entry) for _ in range(c)] for _ in range(r)]


def sympy_rank(rows, p=None):
    m = sympy.Matrix(rows)
    if p is None:
        return m.rank()
    from sympy.polys.matrices import DomainMatrix

    return DomainMatrix.from_Matrix(m).convert_to(sympy.GF(p)).rank()


# ---------------------------------------------------------------- rank


def test_identity_rank():
    assert rank(ExactMatrix.identity(5)) == 5


def test_rank_over_Z_is_refused():
    with pytest.raises(IntegerRingUnsupported):
        rank(ExactMatrix.from_rows([[1]], ZZ))


@settings(max_examples=200, deadline=None)
@given(int_matrices())
def test_rank_matches_sympy_over_Q(rows):
    m = ExactMatrix.from_rows(rows)
    expected = sympy_rank(rows)
    assert rank(m) == expected
    assert rank(m, "bareiss") == expected


@settings(max_examples=200, deadline=None)
@given(int_matrices(), st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p(rows, p):
    m = ExactMatrix.from_rows(rows)
    rp = rank(m.reduce_mod(p))
    assert rp == sympy_rank(rows, p)
    assert rank(m.reduce_mod(p), "sparse") == rp
    assert rp <= rank(m)


@settings(max_examples=200, deadline=None)
@given(int_matrices(), st.sampled_from([None, 2, 3]))
def test_rank_of_transpose(rows, p):
    m = ExactMatrix.from_rows(rows)
    if p:
        m = m.reduce_mod(p)
    assert rank(m) == rank(m.transpose())


def test_rational_entries():
    m = ExactMatrix.from_rows([[Fraction(1, 2), Fraction(1, 3)], [3, 2]])
    assert rank(m) == 1
    assert determinant(m) == 0


def test_prime_field_reduction_of_fractions():
    m = ExactMatrix.from_rows([[Fraction(1, 2), 1], [1, 2]], QQ)
    assert rank(m.over(GF(3))) == 1


def test_dump_and_load_round_trip():
    m = ExactMatrix.from_rows([[1, 0, -2], [0, Fraction(3, 4), 0]])
    back = ExactMatrix.load(m.dump())
    assert back.to_dense() == m.to_dense()
    assert m.dump().splitlines()[0].split() == ["2", "3"]


# ---------------------------------------------------------------- Hermite form and lattices


def test_hnf_small_examples():
    h, _ = hnf(ExactMatrix.from_rows([[2, 0], [0, 3]], ZZ))
    assert h.to_dense() == [[2, 0], [0, 3]]
    h, _ = hnf(ExactMatrix.from_rows([[2, 0], [0, 0], [0, 3]], ZZ))
    assert h.to_dense() == [[2, 0], [0, 3], [0, 0]]


def is_hnf(h):
    last = -1
    zero_seen = False
    for row in h:
        nz = [c for c, v in enumerate(row) if v]
        if not nz:
            zero_seen = True
            continue
        if zero_seen:
            return False
        c = nz[0]
        if c <= last or row[c] <= 0:
            return False
        if any(not 0 <= other[c] < row[c] for other in h[: h.index(row)]):
            return False
        last = c
    return True


@settings(max_examples=200, deadline=None)
@given(int_matrices(max_rows=6, max_cols=4, lo=-6, hi=6))
def test_hnf_contract(rows):
    m = ExactMatrix.from_rows(rows, ZZ)
    h, u = hnf(m)
    hd = h.to_dense()
    assert is_hnf(hd)
    # U m = H with U unimodular
    assert (sympy.Matrix(u.to_dense()) * sympy.Matrix(rows)).tolist() == hd
    assert abs(sympy.Matrix(u.to_dense()).det()) == 1
    # each row of m is an integer combination of the rows of H (solve by back-substitution)
    piv = [(i, next(c for c, v in enumerate(r) if v)) for i, r in enumerate(hd) if any(r)]
    for row in rows:
        rest = list(row)
        for i, c in piv:
            q, rem = divmod(rest[c], hd[i][c])
            assert rem == 0
            rest = [a - q * b for a, b in zip(rest, hd[i])]
        assert not any(rest)
    assert hnf(h)[0].to_dense() == hd


@pytest.mark.parametrize(
    "rows, index",
    [
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 1),
        ([[2, 0, 0], [0, 2, 0], [0, 0, 2]], 8),
        ([[2, 0], [0, 0]], Infinite),
        ([[1, 1], [1, -1]], 2),
    ],
)
def test_lattice_index_examples(rows, index):
    assert lattice_index(ExactMatrix.from_rows(rows, ZZ)) == index


@settings(max_examples=200, deadline=None)
@given(int_matrices(max_rows=6, square=True, lo=-5, hi=5))
def test_lattice_index_is_abs_det(rows):
    det = sympy.Matrix(rows).det()
    idx = lattice_index(ExactMatrix.from_rows(rows, ZZ))
    assert idx == (Infinite if det == 0 else abs(det))
    assert determinant(ExactMatrix.from_rows(rows)) == det


def test_lattice_index_extra_rows_keep_the_lattice():
    rows = [[2, 0], [0, 2], [1, 1]]
    assert lattice_index(ExactMatrix.from_rows(rows, ZZ)) == 2


@pytest.mark.parametrize("n, primes", [(256, {2}), (1, set()), (12, {2, 3}), (97, {97}), (2 * 3 * 5 * 7 * 11, {2, 3, 5, 7, 11})])
def test_prime_factors(n, primes):
    assert prime_factors(n) == primes
    assert bad_primes(n) == primes


def test_bad_primes_of_a_lattice():
    m = ExactMatrix.from_rows([[4, 0], [0, 3]], ZZ)
    assert bad_primes(m) == {2, 3}
    with pytest.raises(RankDeficient):
        bad_primes(ExactMatrix.from_rows([[1, 0], [2, 0]], ZZ))


def test_non_integer_lattice_is_rejected():
    with pytest.raises(InputError):
        lattice_index(ExactMatrix.from_rows([[Fraction(1, 2)]], QQ))
