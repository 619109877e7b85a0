"""Noncommutative polynomials (truncated series) in x_1..x_n and optionally y_1..y_n.

Letters are integers: x_i is ``i - 1`` and y_i is ``n + i - 1``. A word is a
tuple of letters; the empty tuple is the constant monomial.
"""

from __future__ import annotations

import json
import re

from .errors import InputError
from .pathalg import _add_into
from .rings import QQ, Ring, infer_ring


class FreeSeries:
    __slots__ = ("n", "uses_y", "terms", "degree_cap", "ring")

    def __init__(self, n: int, terms=None, degree_cap: int = 12, uses_y: bool = False, ring: Ring = QQ):
        if n < 1:
            raise InputError("need at least one variable")
        self.n = int(n)
        self.uses_y = bool(uses_y)
        self.degree_cap = int(degree_cap)
        self.ring = ring
        nletters = 2 * n if uses_y else n
        out = {}
        for w, c in (terms or {}).items():
            w = tuple(int(x) for x in w)
            if any(not 0 <= x < nletters for x in w):
                raise InputError(f"letter out of range in {w}")
            if len(w) > self.degree_cap:
                continue
            _add_into(out, w, ring.coerce(c), ring)
        self.terms = out

    def _new(self, terms, cap=None):
        s = FreeSeries.__new__(FreeSeries)
        s.n, s.uses_y, s.ring = self.n, self.uses_y, self.ring
        s.degree_cap = self.degree_cap if cap is None else cap
        s.terms = terms
        return s

    # ---- letters
    def x(self, i: int) -> int:
        return i - 1

    def y(self, i: int) -> int:
        return self.n + i - 1

    def is_y(self, letter: int) -> bool:
        return letter >= self.n

    def index(self, letter: int) -> int:
        """1-based variable index of a letter (x_i and y_i both give i)."""
        return letter % self.n + 1

    def letter_name(self, letter: int) -> str:
        return f"{'y' if self.is_y(letter) else 'x'}{self.index(letter)}"

    # ---- arithmetic
    def _check(self, other):
        if not isinstance(other, FreeSeries):
            raise TypeError("expected FreeSeries")
        if other.n != self.n:
            raise InputError("variable counts differ")
        self.ring.check_same(other.ring)

    def _merged(self, other):
        s = self._new({}, min(self.degree_cap, other.degree_cap))
        s.uses_y = self.uses_y or other.uses_y
        return s

    def __add__(self, other):
        self._check(other)
        res = self._merged(other)
        cap = res.degree_cap
        out = {w: c for w, c in self.terms.items() if len(w) <= cap}
        for w, c in other.terms.items():
            if len(w) <= cap:
                _add_into(out, w, c, self.ring)
        res.terms = out
        return res

    def __neg__(self):
        return self._new({w: self.ring.norm(-c) for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.ring.coerce(c)
        if self.ring.is_zero(c):
            return self._new({})
        return self._new({w: self.ring.norm(c * v) for w, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, FreeSeries):
            return self.scale(other)
        self._check(other)
        res = self._merged(other)
        cap = res.degree_cap
        out = {}
        for wa, ca in self.terms.items():
            for wb, cb in other.terms.items():
                if len(wa) + len(wb) <= cap:
                    _add_into(out, wa + wb, self.ring.norm(ca * cb), self.ring)
        res.terms = out
        return res

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = FreeSeries.constant(self.n, 1, self.degree_cap, self.uses_y, self.ring)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, FreeSeries):
            return NotImplemented
        return self.n == other.n and self.ring == other.ring and self.terms == other.terms

    __hash__ = None

    def commutator(self, other) -> "FreeSeries":
        return self * other - other * self

    # ---- constructors
    @classmethod
    def constant(cls, n, c=1, degree_cap=12, uses_y=False, ring: Ring = QQ):
        return cls(n, {(): c}, degree_cap, uses_y, ring)

    @classmethod
    def var(cls, n, i, degree_cap=12, uses_y=False, ring: Ring = QQ, y=False):
        letter = n + i - 1 if y else i - 1
        return cls(n, {(letter,): 1}, degree_cap, uses_y or y, ring)

    @classmethod
    def monomial(cls, n, word, c=1, degree_cap=12, uses_y=False, ring: Ring = QQ):
        return cls(n, {tuple(word): c}, degree_cap, uses_y, ring)

    # ---- queries
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self):
        return max((len(w) for w in self.terms), default=None)

    def valuation(self):
        return min((len(w) for w in self.terms), default=None)

    def has_constant(self) -> bool:
        return () in self.terms

    def contains_letter(self, letter: int) -> bool:
        return any(letter in w for w in self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda wc: (len(wc[0]), wc[0]))

    def truncate(self, cap: int) -> "FreeSeries":
        cap = min(cap, self.degree_cap)
        return self._new({w: c for w, c in self.terms.items() if len(w) <= cap}, cap)

    def cyclic_normal_form(self) -> "FreeSeries":
        """Every word replaced by its least rotation (image in the commutator quotient)."""
        out = {}
        for w, c in self.terms.items():
            r = min((w[i:] + w[:i] for i in range(len(w))), default=w)
            _add_into(out, r, c, self.ring)
        return self._new(out)

    # ---- io
    def word_names(self, w) -> list:
        return [self.letter_name(x) for x in w]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "uses_y": self.uses_y,
            "degree_cap": self.degree_cap,
            "terms": [{"coeff": self.ring.fmt(c), "word": self.word_names(w)} for w, c in self.items()],
        }

    @classmethod
    def from_json(cls, data, ring: Ring | None = None) -> "FreeSeries":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n = int(data["n"])
            raw = data.get("terms", [])
            if ring is None:
                ring = infer_ring([str(t["coeff"]) for t in raw])
            uses_y = bool(data.get("uses_y", False))
            cap = int(data.get("degree_cap", 12))
            terms = {}
            for t in raw:
                w = tuple(_parse_letter(s, n) for s in t["word"])
                terms[w] = ring.norm(terms.get(w, 0) + ring.parse(str(t["coeff"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed series JSON: {exc}") from exc
        if any(x >= n for w in terms for x in w):
            uses_y = True
        return cls(n, terms, cap, uses_y, ring)

    @classmethod
    def parse(cls, text: str, n: int | None = None, degree_cap: int = 12, ring: Ring = QQ) -> "FreeSeries":
        """Parse strings like ``"x1*x2 - 2 y3 x1 + 1/2 x^2"``.

        A bare ``x`` (or ``y``) means index 1. ``n`` defaults to the largest
        index that occurs.
        """
        src = text.replace(" ", "")
        if not src:
            raise InputError("empty polynomial")
        if src in ("0", "+0", "-0"):
            return cls(n or 1, {}, degree_cap, False, ring)
        term_re = re.compile(r"([+-]?)([^+-]+)")
        pos = 0
        parsed = []
        max_idx = 1
        for m in term_re.finditer(src):
            if m.start() != pos:
                raise InputError(f"cannot parse {text!r}")
            pos = m.end()
            sign = -1 if m.group(1) == "-" else 1
            coeff, word = _parse_monomial(m.group(2), text)
            for letter_kind, idx in word:
                max_idx = max(max_idx, idx)
            parsed.append((sign, coeff, word))
        if pos != len(src):
            raise InputError(f"cannot parse {text!r}")
        n = n or max_idx
        if max_idx > n:
            raise InputError(f"index {max_idx} exceeds n={n}")
        terms = {}
        uses_y = False
        for sign, coeff, word in parsed:
            w = []
            for kind, idx in word:
                if kind == "y":
                    uses_y = True
                    w.append(n + idx - 1)
                else:
                    w.append(idx - 1)
            c = ring.norm(sign * ring.parse(coeff))
            terms[tuple(w)] = ring.norm(terms.get(tuple(w), 0) + c)
        return cls(n, terms, degree_cap, uses_y, ring)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.items():
            mono = "*".join(self.word_names(w)) if w else "1"
            parts.append(f"{self.ring.fmt(c)}*{mono}" if w else self.ring.fmt(c))
        return " + ".join(parts)


def _parse_letter(s: str, n: int) -> int:
    m = re.fullmatch(r"([xy])(\d*)", s.strip())
    if not m:
        raise InputError(f"bad letter {s!r}")
    idx = int(m.group(2) or 1)
    if not 1 <= idx <= n:
        raise InputError(f"letter {s!r} out of range for n={n}")
    return idx - 1 if m.group(1) == "x" else n + idx - 1


def _parse_monomial(body: str, text: str):
    factors = body.split("*")
    if not all(factors):
        raise InputError(f"dangling '*' in {text!r}")
    coeff = "1"
    word = []
    first = True
    for f in factors:
        m = re.fullmatch(r"(\d+(?:/\d+)?)?((?:[xy]\d*(?:\^\d+)?)*)", f)
        if not m:
            raise InputError(f"cannot parse {text!r}")
        if m.group(1):
            if not first or word:
                raise InputError(f"coefficient must lead the monomial in {text!r}")
            coeff = m.group(1)
        for lm in re.finditer(r"([xy])(\d*)(?:\^(\d+))?", m.group(2)):
            idx = int(lm.group(2) or 1)
            word.extend([(lm.group(1), idx)] * int(lm.group(3) or 1))
        first = False
    return coeff, word
