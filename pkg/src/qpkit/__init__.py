"""Quivers with potentials: mutation, the X_7 family, and dimension profiles of Jacobian algebras."""

from .errors import CheckFailure, InputError, QPError
from .exactlinalg import ExactMatrix, bad_primes, hnf, lattice_index, prime_factors, rank
from .jacdim import (
    DimProfile,
    Finite,
    GradedQP,
    IdealPresentation,
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
from .pathalg import AlgElem, Potential, cyclic_derivative, cyclically_equivalent, map_arrows, substitute
from .qpmutation import Matching, MatchPair, dualize, find_matching_for, mutate_qp, mutation_two_cycles, sign_eliminate
from .quiver import Quiver, b_matrix, frame, mutate_quiver, quiver_isomorphic, search_reddening
from .rings import GF, QQ, ZZ
from .series import FreeSeries
from .x7family import (
    X7,
    X7_PRIME,
    apply_deformation,
    make_Qn,
    make_Qn_prime,
    make_WP,
    phi,
    psi,
    theta2,
    verify_nondegeneracy_round,
)

__version__ = "0.1.0"
