"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* ``InputError`` -- a precondition on the arguments was violated.
* ``CheckFailure`` -- a mathematical consistency check did not hold.
"""


class QPError(Exception):
    """Base class for every error raised by this package."""


class InputError(QPError):
    pass


class CheckFailure(QPError):
    pass


# rings / algebra plumbing
class RingMismatch(InputError, TypeError):
    pass


class QuiverMismatch(InputError):
    pass


class TruncationMismatch(InputError):
    pass


class InvalidQuiver(InputError):
    pass


class UnknownArrow(InputError, KeyError):
    def __str__(self):  # KeyError quotes its message otherwise
        return Exception.__str__(self)


class NotComposable(InputError):
    pass


class NotACycle(InputError):
    pass


# quiver mutation
class LoopAtVertex(InputError):
    pass


class TwoCycleThroughVertex(InputError):
    pass


class FrozenVertex(InputError):
    pass


class AlreadyFramed(InputError):
    pass


class NotFramed(InputError):
    pass


class SignCoherenceViolation(CheckFailure):
    pass


# substitutions
class NotParallel(InputError):
    pass


class RuleHasConstantTerm(InputError):
    pass


class CannotAvoidVertex(InputError):
    pass


class HypothesisViolated(InputError):
    def __init__(self, which, detail=""):
        self.which = which
        super().__init__(f"hypothesis {which} violated" + (f": {detail}" if detail else ""))


# QP mutation
class InvalidMatching(InputError):
    pass


class NotAdmissible(InputError):
    pass


class NotMaximal(InputError):
    pass


class DecompositionFails(InputError):
    pass


class StarDecompositionInvalid(InputError):
    pass


class NameClash(InputError):
    pass


# series / x7 family
class ConstantTerm(InputError):
    pass


class ContainsY1(InputError):
    pass


class ViolatesAvoidance(InputError):
    pass


class TruncationTooSmall(InputError):
    pass


# linear algebra / jacdim
class IntegerRingUnsupported(InputError):
    pass


class RankDeficient(InputError):
    pass


class RTooSmall(InputError):
    pass


class AugmentationNotFullRank(CheckFailure):
    pass


class InhomogeneousRelation(InputError):
    pass


class ProfileInvariantViolated(CheckFailure):
    pass
