"""Exact coefficient rings: the rationals, prime fields and the integers."""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from .errors import InputError, RingMismatch


class Ring:
    name = "?"

    def coerce(self, x):
        raise NotImplementedError

    def norm(self, x):
        """Bring the result of native arithmetic back into canonical form."""
        return x

    def is_zero(self, x) -> bool:
        return x == 0

    def fmt(self, x) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    @property
    def characteristic(self) -> int:
        return 0

    def check_same(self, other: "Ring"):
        if self != other:
            raise RingMismatch(f"cannot mix coefficients over {self.name} and {other.name}")


class _Rationals(Ring):
    name = "Q"

    # Integral values are kept as plain ints: much faster than Fraction for
    # the unit coefficients that dominate potentials.
    def coerce(self, x):
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, int):
            return x
        return self.norm(Fraction(x))

    def norm(self, x):
        if type(x) is Fraction and x.denominator == 1:
            return x.numerator
        return x

    def fmt(self, x) -> str:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def parse(self, s: str):
        s = s.strip()
        if "mod" in s:
            raise RingMismatch(f"residue {s!r} given where a rational was expected")
        try:
            return self.norm(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational coefficient {s!r}") from exc

    def __eq__(self, other):
        return isinstance(other, _Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class _Integers(Ring):
    name = "Z"

    def coerce(self, x):
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise InputError(f"{x} is not an integer")
            return x.numerator
        return int(x)

    def fmt(self, x) -> str:
        return str(int(x))

    def parse(self, s: str):
        try:
            return int(s.strip())
        except ValueError as exc:
            raise InputError(f"bad integer {s!r}") from exc

    def __eq__(self, other):
        return isinstance(other, _Integers)

    def __hash__(self):
        return hash("Z")

    def __repr__(self):
        return "ZZ"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class PrimeField(Ring):
    def __init__(self, p: int):
        if not _is_prime(p):
            raise InputError(f"{p} is not prime")
        self.p = p
        self.name = f"F{p}"

    @property
    def characteristic(self) -> int:
        return self.p

    def coerce(self, x):
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise InputError(f"{x} has no image in F_{self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x % self.p

    def fmt(self, x) -> str:
        return f"{x % self.p} mod {self.p}"

    def parse(self, s: str):
        m = re.fullmatch(r"\s*(-?\d+)\s*mod\s*(\d+)\s*", s)
        if m:
            if int(m.group(2)) != self.p:
                raise RingMismatch(f"residue {s!r} is not over F_{self.p}")
            return int(m.group(1)) % self.p
        return self.coerce(QQ.parse(s))

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"GF({self.p})"


QQ = _Rationals()
ZZ = _Integers()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def ring_from_name(name: str, p: int | None = None) -> Ring:
    """Accepts 'Q', 'Z', 'Fp' (with p), or 'F7' style names."""
    if name in ("Q", "QQ"):
        return QQ
    if name in ("Z", "ZZ"):
        return ZZ
    if name == "Fp":
        if p is None:
            raise InputError("ring Fp needs a prime p")
        return GF(p)
    m = re.fullmatch(r"F_?(\d+)", name)
    if m:
        return GF(int(m.group(1)))
    raise InputError(f"unknown ring {name!r}")


def infer_ring(coeff_strings) -> Ring:
    """Guess the ring from serialized coefficients ('k mod p' means F_p)."""
    primes = set()
    plain = False
    for s in coeff_strings:
        m = re.fullmatch(r"\s*-?\d+\s*mod\s*(\d+)\s*", s)
        if m:
            primes.add(int(m.group(1)))
        else:
            plain = True
    if len(primes) > 1 or (primes and plain):
        raise RingMismatch("coefficients mix several rings")
    return GF(primes.pop()) if primes else QQ
