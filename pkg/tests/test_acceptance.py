"""Acceptance checks. Each test prints one PASS/FAIL line with its wall time.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import contextlib
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qpkit.jacdim import (  # noqa: E402
    Finite,
    Inconclusive,
    InfiniteCertificate,
    Unknown,
    build_Mr,
    conclude_dimension,
    dimension_profile,
    graded_class_dimension,
    graded_infinite_check,
    jacobi_generators,
    transfer_to_primes,
)
from qpkit.exactlinalg import rank  # noqa: E402
from qpkit.pathalg import cyclically_equivalent  # noqa: E402
from qpkit.qpmutation import mutate_qp  # noqa: E402
from qpkit.quiver import quiver_isomorphic, search_reddening  # noqa: E402
from qpkit.rings import GF, QQ  # noqa: E402
from qpkit.series import FreeSeries  # noqa: E402
from qpkit.x7family import (  # noqa: E402
    X7,
    X7_PRIME,
    W_F,
    central_matching,
    central_renaming,
    f_for_P,
    make_WP,
    reduce_series,
    verify_nondegeneracy_round,
    x7prime_graded,
)
from qpkit.pathalg import map_arrows, as_potential  # noqa: E402
from qpkit.quiver import Quiver  # noqa: E402

F0 = FreeSeries.parse("x1*x2 + x2*x3 + x3*x1", n=3, degree_cap=10**6)
F1 = FreeSeries.parse("x1*x2 + x2*x3 + x3*x1 + x1*x2*x3", n=3, degree_cap=10**6)
AUG8 = ["x1x2", "x1x3", "x2x1", "x2x3", "x1x2x1", "x1x3x2", "x2x1x2", "x1x2x1x2"]

ROWS = [
    ("Q", F0, QQ, [1, 3, 4, 3, 1, 0, 0]),
    ("Q", F1, QQ, [1, 3, 4, 3, 1, 0, 0]),
    ("F2", F0, GF(2), [1, 3, 4, 4, 4, 4, 4]),
    ("F2", F1, GF(2), [1, 3, 4, 4, 3, 1, 0]),
]


@pytest.fixture
def report(capsys):
    """Context manager factory: times a block and prints its verdict past pytest's capture."""

    @contextlib.contextmanager
    def criterion(number, title):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                verdict = "PASS" if ok else "FAIL"
                print(f"\n[{verdict}] criterion {number}: {title} ({time.perf_counter() - start:.1f}s)")

    return criterion


def test_criterion_1_dimension_table(report):
    with report(1, "dimension profiles of f0, f1 over Q and F2 at r = 6"):
        for _, f, ring, row in ROWS:
            start = time.perf_counter()
            assert dimension_profile(jacobi_generators(f), 6, ring).d == row
            assert time.perf_counter() - start < 60


def test_criterion_2_dimension_conclusions(report):
    with report(2, "finite dimension 12, 12, 16 and unknown over F2 for f0"):
        got = [conclude_dimension(dimension_profile(jacobi_generators(f), 6, ring)) for _, f, ring, _ in ROWS]
        assert got[:3] == [Finite(12), Finite(12), Unknown(24)]
        assert got[3] == Finite(16)
        assert isinstance(got[2], Unknown)


def test_criterion_3_lattice_transfer(report):
    with report(3, "rank 352, index 256, bad primes {2}, d5 = 0 at p = 3, 5, 7"):
        start = time.perf_counter()
        p = jacobi_generators(F0)
        assert rank(build_Mr(p, 6)) == 352
        tr = transfer_to_primes(p, 5, AUG8)
        assert (tr.rank_q, tr.rank_q + len(tr.aug_words)) == (352, 360)
        assert (tr.index, tr.bad_primes) == (256, {2})
        for prime in (3, 5, 7):
            assert dimension_profile(p, 5, GF(prime)).d[5] == 0
        assert time.perf_counter() - start < 120


def test_criterion_4_characteristic_two(report):
    with report(4, "graded certificate over F2, inconclusive over Q, d7 = d8 = 4 over F2"):
        g2 = x7prime_graded(ring=GF(2))
        cert = graded_infinite_check(g2)
        assert isinstance(cert, InfiniteCertificate)
        for d in (cert.degree, 2 * cert.degree):
            assert graded_class_dimension(g2.quiver, g2.degrees, cert.relation_pairs(), d) > 0
        assert isinstance(graded_infinite_check(x7prime_graded(ring=QQ)), Inconclusive)
        d = dimension_profile(jacobi_generators(F0), 8, GF(2)).d
        assert d[7] == 4 and d[8] == 4


def _on_prime_names(res):
    """Rename the dual quiver's arrows onto X'_7 so results can be compared with W_F."""
    return as_potential(map_arrows(res.potential, central_renaming(3), X7_PRIME))


def test_criterion_5_mutation_pipeline(report):
    from test_qpmutation import W0_prime_on_dual

    with report(5, "mutating X7 at 0 gives X'7 with the expected potentials"):
        res0 = mutate_qp(X7, make_WP([]), 0, central_matching(3))
        assert quiver_isomorphic(res0.quiver, X7_PRIME) is not None
        # route one: the target written by hand on the dual names
        assert cyclically_equivalent(res0.potential, W0_prime_on_dual(res0.quiver))
        res1 = mutate_qp(X7, make_WP([1]), 0, central_matching(3))
        psi_f1 = ("d1", "b12", "d2", "b23", "d3", "b31")
        assert cyclically_equivalent(res1.potential, W0_prime_on_dual(res1.quiver, [psi_f1]))
        # route two: the library's Psi of the reduced series
        for res, p in ((res0, []), (res1, [1])):
            expected = W_F(reduce_series(f_for_P(p)))
            assert _on_prime_names(res).truncate(12) == expected.truncate(12)


def test_criterion_6_nondegeneracy_round(report):
    with report(6, "non-degeneracy round passes for P = 0 and P = x at truncation 12"):
        start = time.perf_counter()
        for p in ([], [1]):
            rep = verify_nondegeneracy_round(p, 12)
            assert rep.passed, [c.name for c in rep.checks if not c.passed]
            assert not rep.two_cycles
            names = " ".join(c.name for c in rep.checks)
            for family in ("mu_1(X7", "mu_0(X7, W)", "mu_2 result", "explicit substitutions"):
                assert family in names
        assert time.perf_counter() - start < 300


def test_criterion_7_property_suites(report):
    import test_jacdim
    import test_pathalg
    import test_qpmutation
    import test_quiver

    with report(7, "involution, commutator sum, brute-force profiles, double dual, substitution laws"):
        test_quiver.test_mutation_is_an_involution()  # 1000 cases
        test_jacdim.test_sum_of_commutators_with_derivatives_vanishes()  # 200
        test_jacdim.test_profile_matches_brute_force()  # 50
        test_qpmutation.test_double_dual_identity()  # 100
        test_pathalg.test_shift_by_T_is_inverted_by_shift_by_minus_T()  # 200 each
        test_pathalg.test_commuting_substitutions_compose_to_the_joint_one()
        test_pathalg.test_shift_substitution_shape()


def test_criterion_8_reddening(report):
    with report(8, "reddening sequence on A2 within depth 4, none on X7 within depth 6"):
        start = time.perf_counter()
        a2 = Quiver([1, 2], [("a", 1, 2)])
        found = search_reddening(a2, 4)
        assert found.found and found.sequence == (1, 2)
        none = search_reddening(X7, 6)
        assert not none.found and none.explored_depth == 6
        assert search_reddening(X7, 6).to_json() == none.to_json()
        assert time.perf_counter() - start < 600


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
