"""Exact matrices over Q, F_p and Z: rank, Hermite normal form, lattice index.

Matrices are stored as sparse rows (dicts column -> nonzero value). The
matrices produced by the dimension-profile algorithm are large but have
many monomial rows, so every rank routine first peels off single-entry
rows (and the columns they kill) before doing real elimination.
"""

from __future__ import annotations

import io
import math
from fractions import Fraction

import numpy as np

from .errors import InputError, IntegerRingUnsupported, RankDeficient
from .rings import QQ, ZZ, GF, PrimeField, Ring


class ExactMatrix:
    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, rows, ncols: int, ring: Ring = QQ):
        self.ring = ring
        self.ncols = int(ncols)
        out = []
        for r in rows:
            d = {}
            for c, v in r.items():
                if not 0 <= c < self.ncols:
                    raise InputError(f"column {c} out of range")
                v = ring.coerce(v)
                if not ring.is_zero(v):
                    d[c] = v
            out.append(d)
        self.rows = out
        self.nrows = len(out)

    @classmethod
    def _raw(cls, rows, ncols, ring):
        m = cls.__new__(cls)
        m.ring, m.ncols, m.rows, m.nrows = ring, ncols, rows, len(rows)
        return m

    @classmethod
    def from_rows(cls, dense, ring: Ring = QQ, ncols: int | None = None):
        dense = [list(r) for r in dense]
        if ncols is None:
            ncols = len(dense[0]) if dense else 0
        if any(len(r) != ncols for r in dense):
            raise InputError("ragged matrix")
        return cls([{c: v for c, v in enumerate(r) if v != 0} for r in dense], ncols, ring)

    @classmethod
    def identity(cls, n: int, ring: Ring = QQ):
        return cls._raw([{i: ring.coerce(1)} for i in range(n)], n, ring)

    def to_dense(self) -> list:
        return [[r.get(c, 0) for c in range(self.ncols)] for r in self.rows]

    def entry(self, i: int, j: int):
        return self.rows[i].get(j, 0)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def transpose(self) -> "ExactMatrix":
        cols = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for c, v in r.items():
                cols[c][i] = v
        return ExactMatrix._raw(cols, self.nrows, self.ring)

    def submatrix(self, nrows: int, ncols: int) -> "ExactMatrix":
        """Upper-left block."""
        return ExactMatrix._raw(
            [{c: v for c, v in r.items() if c < ncols} for r in self.rows[:nrows]], ncols, self.ring
        )

    def vstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if other.ncols != self.ncols:
            raise InputError("column counts differ")
        self.ring.check_same(other.ring)
        return ExactMatrix._raw([dict(r) for r in self.rows] + [dict(r) for r in other.rows], self.ncols, self.ring)

    def over(self, ring: Ring) -> "ExactMatrix":
        """Same entries read in another ring (integers reduce mod p)."""
        return ExactMatrix(self.rows, self.ncols, ring)

    def reduce_mod(self, p: int) -> "ExactMatrix":
        return self.over(GF(p))

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ncols != other.nrows:
            raise InputError("shape mismatch")
        ring = self.ring
        out = []
        for r in self.rows:
            acc = {}
            for k, a in r.items():
                for c, b in other.rows[k].items():
                    acc[c] = ring.norm(acc.get(c, 0) + a * b)
            out.append({c: v for c, v in acc.items() if not ring.is_zero(v)})
        return ExactMatrix._raw(out, other.ncols, ring)

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.shape == other.shape
            and self.ring == other.ring
            and self.rows == other.rows
        )

    __hash__ = None

    def __repr__(self):
        return f"ExactMatrix({self.nrows}x{self.ncols} over {self.ring!r}, nnz={self.nnz()})"

    # ---- text exchange format: "rows cols" then one row per line
    def dump(self, fh=None) -> str | None:
        buf = io.StringIO() if fh is None else fh
        buf.write(f"{self.nrows} {self.ncols}\n")
        fmt = _plain_fmt(self.ring)
        for r in self.rows:
            buf.write(" ".join(fmt(r.get(c, 0)) for c in range(self.ncols)))
            buf.write("\n")
        return buf.getvalue() if fh is None else None

    @classmethod
    def load(cls, text, ring: Ring = QQ) -> "ExactMatrix":
        if not isinstance(text, str):
            text = text.read()
        tokens = text.split()
        if len(tokens) < 2:
            raise InputError("missing 'rows cols' header")
        nr, nc = int(tokens[0]), int(tokens[1])
        body = tokens[2:]
        if len(body) != nr * nc:
            raise InputError(f"expected {nr * nc} entries, found {len(body)}")
        rows = []
        for i in range(nr):
            chunk = body[i * nc : (i + 1) * nc]
            rows.append({c: Fraction(x) for c, x in enumerate(chunk) if x not in ("0", "-0")})
        return cls(rows, nc, ring)


def _plain_fmt(ring):
    if isinstance(ring, PrimeField):
        return lambda v: str(int(v) % ring.p)
    return lambda v: QQ.fmt(v) if ring == QQ else str(int(v))


# ---------------------------------------------------------------- unit peeling


def _peel_units(rows, is_unit):
    """Remove rows with a single entry satisfying ``is_unit`` and their columns.

    Repeats until no such row is left. Returns (number of unit columns, rest)
    where ``rest`` are the remaining nonzero rows restricted to the other
    columns. Valid for rank over a field (any nonzero single entry) and for
    lattices (single entry equal to +-1).
    """
    killed = set()
    rest = [r for r in rows if r]
    while True:
        new = set()
        keep = []
        for r in rest:
            if len(r) == 1:
                (c, v), = r.items()
                if is_unit(v):
                    new.add(c)
                    continue
            keep.append(r)
        if not new:
            return len(killed), rest
        killed |= new
        rest = []
        for r in keep:
            if any(c in killed for c in r):
                r = {c: v for c, v in r.items() if c not in killed}
            if r:
                rest.append(r)


# ---------------------------------------------------------------- rank over Q


def _integer_rows(rows):
    """Scale rational rows to primitive integer rows."""
    out = []
    for r in rows:
        den = 1
        for v in r.values():
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
        ir = {c: int(v * den) for c, v in r.items()}
        g = 0
        for v in ir.values():
            g = math.gcd(g, v)
        if g > 1:
            ir = {c: v // g for c, v in ir.items()}
        out.append(ir)
    return out


def _echelon_insert_q(rows, track_pivots=False):
    """Fraction-free sparse echelon over Z-as-Q; returns pivot dict col -> row."""
    pivots = {}
    for r in sorted(rows, key=len):
        r = dict(r)
        while r:
            c = min(r)
            p = pivots.get(c)
            if p is None:
                g = 0
                for v in r.values():
                    g = math.gcd(g, v)
                if g > 1:
                    r = {k: v // g for k, v in r.items()}
                pivots[c] = r
                break
            a, b = p[c], r[c]
            g = math.gcd(a, b)
            fa, fb = a // g, b // g
            new = {}
            for k, v in r.items():
                if k != c:
                    new[k] = fa * v
            for k, v in p.items():
                if k == c:
                    continue
                x = new.get(k, 0) - fb * v
                if x:
                    new[k] = x
                else:
                    new.pop(k, None)
            g = 0
            for v in new.values():
                g = math.gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                new = {k: v // g for k, v in new.items()}
            r = new
    return pivots


def rank_sparse_q(m: ExactMatrix) -> int:
    units, rest = _peel_units(m.rows, lambda v: True)
    return units + len(_echelon_insert_q(_integer_rows(rest)))


def rank_bareiss(m: ExactMatrix) -> int:
    """Dense fraction-free Gaussian elimination (Bareiss); for small matrices."""
    a = [[r.get(c, 0) for c in range(m.ncols)] for r in _integer_rows(m.rows)]
    nr, nc = len(a), m.ncols
    rank = 0
    prev = 1
    for c in range(nc):
        piv = next((i for i in range(rank, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        pr = a[rank]
        pc = pr[c]
        for i in range(rank + 1, nr):
            row = a[i]
            x = row[c]
            for j in range(c + 1, nc):
                row[j] = (pc * row[j] - x * pr[j]) // prev
            row[c] = 0
        prev = pc
        rank += 1
        if rank == nr:
            break
    return rank


# ---------------------------------------------------------------- rank over F_p


def _echelon_insert_p(rows, p):
    pivots = {}
    for r in sorted(rows, key=len):
        r = {c: v % p for c, v in r.items() if v % p}
        while r:
            c = min(r)
            piv = pivots.get(c)
            if piv is None:
                inv = pow(r[c], -1, p)
                pivots[c] = {k: v * inv % p for k, v in r.items()}
                break
            f = r[c]
            for k, v in piv.items():
                x = (r.get(k, 0) - f * v) % p
                if x:
                    r[k] = x
                else:
                    r.pop(k, None)
    return pivots


def rank_sparse_p(m: ExactMatrix) -> int:
    p = m.ring.p
    units, rest = _peel_units(m.rows, lambda v: v % p != 0)
    return units + len(_echelon_insert_p(rest, p))


def _rref_block(block, p):
    """Row-reduce a small int64 block mod p; returns (rows, pivot columns)."""
    block = block[np.any(block, axis=1)]
    out_rows, cols = [], []
    while block.shape[0]:
        row = block[0]
        c = int(np.flatnonzero(row)[0])
        row = row * pow(int(row[c]), -1, p) % p
        rest = block[1:]
        if rest.shape[0]:
            rest = (rest - np.outer(rest[:, c], row)) % p
        if out_rows:
            prev = np.array(out_rows)
            prev = (prev - np.outer(prev[:, c], row)) % p
            out_rows = list(prev)
        out_rows.append(row)
        cols.append(c)
        block = rest[np.any(rest, axis=1)] if rest.shape[0] else rest
    return (np.array(out_rows, dtype=np.int64) if out_rows else None), cols


def rank_dense_p(m: ExactMatrix, chunk: int = 256) -> int:
    """Blocked elimination mod p with numpy.

    Keeps a reduced row-echelon basis and processes rows in chunks: each
    chunk is first cleared against the basis with one float64 product
    (exact because every partial sum stays below 2**53), then reduced on
    its own.
    """
    p = m.ring.p
    units, rest = _peel_units(m.rows, lambda v: v % p != 0)
    if not rest:
        return units
    cols = sorted({c for r in rest for c in r})
    n = len(cols)
    if n * p * p >= 2**53:
        return units + len(_echelon_insert_p(rest, p))
    pos = {c: i for i, c in enumerate(cols)}
    basis = np.zeros((0, n), dtype=np.float64)
    piv: list = []
    for start in range(0, len(rest), chunk):
        blk = np.zeros((min(chunk, len(rest) - start), n), dtype=np.float64)
        for i, r in enumerate(rest[start : start + chunk]):
            for c, v in r.items():
                blk[i, pos[c]] = v % p
        if piv:
            blk = np.mod(blk - blk[:, piv] @ basis, p)
        new_rows, new_piv = _rref_block(blk.astype(np.int64), p)
        if new_piv:
            nf = new_rows.astype(np.float64)
            if piv:
                basis = np.mod(basis - basis[:, new_piv] @ nf, p)
            basis = np.vstack([basis, nf])
            piv.extend(new_piv)
            if len(piv) == n:
                break
    return units + len(piv)


def rank(m: ExactMatrix, method: str = "auto") -> int:
    """Exact rank over Q or F_p.

    method: 'auto', 'sparse' (fraction-free / mod-p insertion echelon),
    'bareiss' (dense, Q only) or 'dense' (numpy, F_p only).
    """
    if m.ring == ZZ:
        raise IntegerRingUnsupported("rank over Z is not defined here; use m.over(QQ)")
    if isinstance(m.ring, PrimeField):
        if method in ("auto", "dense"):
            return rank_dense_p(m)
        if method == "sparse":
            return rank_sparse_p(m)
        raise InputError(f"method {method!r} not available over F_p")
    if method in ("auto", "sparse"):
        return rank_sparse_q(m)
    if method == "bareiss":
        return rank_bareiss(m)
    raise InputError(f"method {method!r} not available over Q")


def pivot_columns_q(m: ExactMatrix) -> list:
    """Columns carrying a pivot in an echelon form over Q (sorted)."""
    rows = _integer_rows(m.rows)
    return sorted(_echelon_insert_q(rows))


def determinant(m: ExactMatrix):
    """Determinant of a square matrix by Bareiss elimination (exact)."""
    if m.nrows != m.ncols:
        raise InputError("determinant of a non-square matrix")
    n = m.nrows
    a = [[Fraction(r.get(c, 0)) for c in range(n)] for r in m.rows]
    den = 1
    for row in a:
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
    a = [[int(v * den) for v in row] for row in a]
    sign, prev = 1, 1
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    det = Fraction(sign * a[n - 1][n - 1], den**n) if n else Fraction(1)
    return m.ring.norm(det) if m.ring == QQ else det


# ---------------------------------------------------------------- integer lattices


def hnf(m: ExactMatrix):
    """Row Hermite normal form: returns (H, U) with U unimodular and U*m = H.

    H is in row echelon form with positive pivots, entries above each pivot
    reduced into [0, pivot), zero rows last.
    """
    nr, nc = m.nrows, m.ncols
    a = [[int(r.get(c, 0)) for c in range(nc)] for r in m.rows]
    u = [[int(i == j) for j in range(nr)] for i in range(nr)]

    def sub(dst, src, q):  # row dst -= q * row src
        if q:
            ad, as_ = a[dst], a[src]
            for j in range(nc):
                ad[j] -= q * as_[j]
            ud, us = u[dst], u[src]
            for j in range(nr):
                ud[j] -= q * us[j]

    r = 0
    for c in range(nc):
        if r == nr:
            break
        while True:
            nz = [i for i in range(r, nr) if a[i][c] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: (abs(a[i][c]), i))
            a[r], a[best] = a[best], a[r]
            u[r], u[best] = u[best], u[r]
            done = True
            for i in range(r + 1, nr):
                if a[i][c]:
                    sub(i, r, a[i][c] // a[r][c])
                    if a[i][c]:
                        done = False
            if done:
                break
        if a[r][c] == 0:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            sub(i, r, a[i][c] // a[r][c])
        r += 1
    return ExactMatrix.from_rows(a, ZZ, nc), ExactMatrix.from_rows(u, ZZ, nr)


class _Infinite:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Infinite"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("Infinite")


Infinite = _Infinite()


def _lattice_echelon(rows, ncols):
    """Integer row echelon by gcd insertion; pivot rows span the same lattice.

    Once every column carries a pivot, the product D of the pivots is a
    multiple of the current index, so D*Z^n lies in the lattice and entries
    off the pivot positions can be reduced mod D; this keeps numbers small.
    """
    pivots = {}
    modulus = None

    def reduce(r):
        if modulus is None:
            return r
        c0 = min(r)
        out = {}
        for k, v in r.items():
            v = v if k == c0 else v % modulus
            if v:
                out[k] = v
        return out

    for r in sorted(rows, key=len):
        r = {c: int(v) for c, v in r.items() if v}
        while r:
            r = reduce(r)
            if not r:
                break
            c = min(r)
            p = pivots.get(c)
            if p is None:
                if r[c] < 0:
                    r = {k: -v for k, v in r.items()}
                pivots[c] = r
                break
            a, b = p[c], r[c]
            if b % a == 0:
                q = b // a
                new = dict(r)
                for k, v in p.items():
                    x = new.get(k, 0) - q * v
                    if x:
                        new[k] = x
                    else:
                        new.pop(k, None)
                r = new
                continue
            g, s, t = _xgcd(a, b)
            # [s t; -b/g a/g] is unimodular
            keys = set(p) | set(r)
            new_p, new_r = {}, {}
            for k in keys:
                pv, rv = p.get(k, 0), r.get(k, 0)
                x = s * pv + t * rv
                y = (a // g) * rv - (b // g) * pv
                if x:
                    new_p[k] = x
                if y:
                    new_r[k] = y
            pivots[c] = reduce(new_p)
            r = new_r
        if modulus is None and len(pivots) == ncols:
            modulus = math.prod(abs(pivots[c][c]) for c in pivots)
            for c in pivots:
                pivots[c] = reduce(pivots[c])
        elif modulus is not None:
            modulus = math.prod(abs(pivots[c][c]) for c in pivots)
    return pivots


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lattice_index(basis_rows: ExactMatrix):
    """Index [Z^n : L] of the lattice spanned by the rows, or Infinite."""
    if isinstance(basis_rows.ring, PrimeField):
        raise InputError("lattice index needs integer entries")
    rows = []
    for r in basis_rows.rows:
        if any(isinstance(v, Fraction) and v.denominator != 1 for v in r.values()):
            raise InputError("lattice index needs integer entries")
        rows.append({c: int(v) for c, v in r.items()})
    units, rest = _peel_units(rows, lambda v: abs(v) == 1)
    remaining = basis_rows.ncols - units
    piv = _lattice_echelon(rest, remaining)
    if len(piv) < remaining:
        return Infinite
    return math.prod(abs(p[c]) for c, p in piv.items())


def prime_factors(n: int) -> set:
    n = abs(int(n))
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.add(n)
    return out


def bad_primes(basis_rows) -> set:
    """Primes dividing the lattice index (the only ones where rank can drop)."""
    idx = basis_rows if isinstance(basis_rows, int) else lattice_index(basis_rows)
    if idx is Infinite:
        raise RankDeficient("lattice is not of full rank")
    return prime_factors(idx)
