"""Exact linear algebra over prime fields.

Everything downstream (filtrations, idempotent images, summand certificates)
is compared through one currency: subspaces of F_p^N in canonical reduced
row echelon form.  Two subspaces are equal iff their canonical bases are
identical, so no tolerance ever enters.

Two storage backends, chosen by the modulus:

* ``p == 2``: a row is a Python int, bit ``j`` = column ``j``.  Big-int XOR
  makes 4096-dimensional eliminations cheap.
* odd ``p``: rows are numpy ``int64`` arrays reduced mod p.

A third, Fraction-based path (``p == 0``) exists for small characteristic-0
oracle checks only.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "GFScalar",
    "Mat",
    "Subspace",
    "GroupAction",
    "SpanBuilder",
    "rref",
    "is_direct_sum",
    "solve_equivariant_projection",
    "affine_projection_family",
    "check_prime",
    "word_to_index",
    "index_to_word",
    "word_weight",
    "format_subspace",
    "parse_subspace",
    "parse_terms",
    "format_terms",
]


def check_prime(p):
    """Validate that p is a prime (or 0 for the rational oracle mode)."""
    if p == 0:
        return p
    if not isinstance(p, int) or p < 2:
        raise ValueError(f"modulus must be a prime, got {p!r}")
    d = 2
    while d * d <= p:
        if p % d == 0:
            raise ValueError(f"modulus must be a prime, got {p}")
        d += 1
    return p


class GFScalar:
    """An element of GF(p), value kept reduced.  Convenience type for small
    examples; bulk code works on raw ints for speed."""

    __slots__ = ("value", "p")

    def __init__(self, value, p):
        check_prime(p)
        self.value = value % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, GFScalar):
            if other.p != self.p:
                raise ValueError("mixed moduli")
            return other.value
        return other % self.p

    def __add__(self, other):
        return GFScalar(self.value + self._coerce(other), self.p)

    def __sub__(self, other):
        return GFScalar(self.value - self._coerce(other), self.p)

    def __mul__(self, other):
        return GFScalar(self.value * self._coerce(other), self.p)

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse")
        return GFScalar(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise ZeroDivisionError
        return GFScalar(self.value * pow(o, self.p - 2, self.p), self.p)

    def __neg__(self):
        return GFScalar(-self.value, self.p)

    def __eq__(self, other):
        if isinstance(other, GFScalar):
            return self.p == other.p and self.value == other.value
        return self.value == other % self.p

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"GFScalar({self.value}, p={self.p})"


# ---------------------------------------------------------------------------
# packed-row kernels, p == 2


def _pack2(vec):
    x = 0
    for j, a in enumerate(vec):
        if a & 1:
            x |= 1 << j
    return x


def _unpack2(x, n):
    return [(x >> j) & 1 for j in range(n)]


def _ech2(vecs):
    """Canonical RREF of int-packed rows.  Returns (rows, pivot columns)."""
    if not isinstance(vecs, (list, tuple)):
        vecs = list(vecs)
    if len(vecs) >= 512:
        width = 0
        for v in vecs:
            b = v.bit_length()
            if b > width:
                width = b
        if width >= 512:
            rows, pivots = _rref2_words(_rows_to_words(vecs, width), width)
            return _words_to_rows(rows), pivots
    piv = {}
    mask = 0
    for v in vecs:
        while True:
            inter = v & mask
            if not inter:
                break
            c = (inter & -inter).bit_length() - 1
            v ^= piv[c]
        if v:
            c = (v & -v).bit_length() - 1
            piv[c] = v
            mask |= 1 << c
    fin = {}
    fmask = 0
    for c in sorted(piv, reverse=True):
        v = piv[c]
        while True:
            inter = v & fmask
            if not inter:
                break
            c2 = (inter & -inter).bit_length() - 1
            v ^= fin[c2]
        fin[c] = v
        fmask |= 1 << c
    pivots = sorted(fin)
    return [fin[c] for c in pivots], pivots


def _red2(v, piv_by_col, mask):
    while True:
        inter = v & mask
        if not inter:
            return v
        c = (inter & -inter).bit_length() - 1
        v ^= piv_by_col[c]


def _mul2_tables(arows, brows):
    nb = len(brows)
    tables = []
    for g0 in range(0, nb, 8):
        grp = brows[g0:g0 + 8]
        tab = [0] * (1 << len(grp))
        for t in range(1, len(tab)):
            low = t & -t
            tab[t] = tab[t ^ low] ^ grp[low.bit_length() - 1]
        tables.append(tab)
    out = []
    for a in arows:
        acc = 0
        gi = 0
        while a:
            byte = a & 255
            if byte:
                acc ^= tables[gi][byte]
            a >>= 8
            gi += 1
        out.append(acc)
    return out


def _mul2(arows, brows, pad_to=None):
    """C = A*B for packed rows; bit j of arows[i] selects brows[j].

    Small products go through 8-bit combination tables; big ones through
    the uint64 word kernels below.
    """
    nb = len(brows)
    for a in arows:
        if a < 0 or a.bit_length() > nb:
            raise ValueError("row width exceeds left factor's column count")
    if nb >= 512 and len(arows) >= 256:
        bw = max((r.bit_length() for r in brows), default=1)
        C = _mul2_words(_rows_to_words(arows, nb), _rows_to_words(brows, bw))
        return _words_to_rows(C)
    return _mul2_tables(arows, brows)


# ---------------------------------------------------------------------------
# wide GF(2) kernels (numpy uint64 word arrays)
#
# Python-int bitsets are convenient, but the quadratic loops dominate once
# matrices reach tensor rank 9 and beyond (4096 columns at rank 12), so
# the dense product and echelon dispatch to vectorized word arithmetic.
# Bit j of a row lives in word j // 64 at position j % 64.


def _rows_to_words(rows, ncols):
    nw = max(1, (ncols + 63) // 64)
    out = np.zeros((len(rows), nw), dtype=np.uint64)
    nbytes = nw * 8
    for i, r in enumerate(rows):
        out[i] = np.frombuffer(int(r).to_bytes(nbytes, "little"),
                               dtype=np.uint64)
    return out


def _words_to_rows(words):
    return [int.from_bytes(w.tobytes(), "little") for w in np.ascontiguousarray(words)]


def _mul2_words(A, B):
    """Row-convention product: out row i = XOR of the B rows selected by
    the set bits of A row i.  Eight B-rows at a time are expanded into a
    256-entry XOR table and gathered by the byte view of A."""
    n_b, nw_b = B.shape
    out = np.zeros((A.shape[0], nw_b), dtype=np.uint64)
    Ab = np.ascontiguousarray(A).view(np.uint8)
    nbytes = min(Ab.shape[1], (n_b + 7) // 8)
    lut = np.zeros((256, nw_b), dtype=np.uint64)
    for bp in range(nbytes):
        base = 8 * bp
        hi = min(8, n_b - base)
        col = Ab[:, bp]
        if not col.any():
            continue
        for m in range(1, 256):
            low = m & -m
            bit = low.bit_length() - 1
            if bit < hi:
                lut[m] = lut[m ^ low] ^ B[base + bit]
            else:
                lut[m] = lut[m ^ low]
        out ^= lut[col]
    return out


def _rref2_words(W, ncols):
    """Gauss-Jordan on word rows; returns (canonical rows, pivots)."""
    A = W.copy()
    n = A.shape[0]
    pivots = []
    rank = 0
    one = np.uint64(1)
    for c in range(ncols):
        if rank == n:
            break
        w, b = divmod(c, 64)
        shift = np.uint64(b)
        colbits = (A[rank:, w] >> shift) & one
        cand = np.nonzero(colbits)[0]
        if cand.size == 0:
            continue
        piv = rank + int(cand[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        allbits = (A[:, w] >> shift) & one
        rows = np.nonzero(allbits)[0]
        rows = rows[rows != rank]
        if rows.size:
            A[rows] ^= A[rank]
        pivots.append(c)
        rank += 1
    return A[:rank], pivots


# ---------------------------------------------------------------------------
# numpy kernels, odd p


def _echp(a, p):
    """Canonical RREF in place; returns (matrix, pivot columns)."""
    a = np.asarray(a, dtype=np.int64) % p
    nr, nc = a.shape
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        rows = np.nonzero(a[:, c])[0]
        rows = rows[rows != r]
        if rows.size:
            a[rows] = (a[rows] - np.outer(a[rows, c], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _redp(v, rows, pivots, p):
    v = v % p
    for i, c in enumerate(pivots):
        f = int(v[c])
        if f:
            v = (v - f * rows[i]) % p
    return v


# ---------------------------------------------------------------------------
# Fraction kernel (char 0, oracle scale only)


def _echq(rows):
    rows = [list(map(Fraction, r)) for r in rows]
    nc = len(rows[0]) if rows else 0
    out = []
    pivots = []
    for v in rows:
        for r, c in zip(out, pivots):
            if v[c]:
                f = v[c]
                v = [a - f * b for a, b in zip(v, r)]
        lead = next((j for j, a in enumerate(v) if a), None)
        if lead is None:
            continue
        inv = 1 / v[lead]
        v = [a * inv for a in v]
        out.append(v)
        pivots.append(lead)
    order = sorted(range(len(out)), key=lambda i: pivots[i])
    out = [out[i] for i in order]
    pivots = [pivots[i] for i in order]
    for i in range(len(out) - 1, -1, -1):
        for j in range(i):
            f = out[j][pivots[i]]
            if f:
                out[j] = [a - f * b for a, b in zip(out[j], out[i])]
    return out, pivots


class Mat:
    """Dense matrix over GF(p) (or Q when p == 0).

    Entries are conceptually a row-major grid; storage is packed per
    backend.  Row vectors act on the right: ``v -> v @ M``.
    """

    __slots__ = ("p", "nrows", "ncols", "_d")

    def __init__(self, p, nrows, ncols, payload):
        self.p = p
        self.nrows = nrows
        self.ncols = ncols
        self._d = payload

    # -- construction

    @classmethod
    def from_rows(cls, p, rows, ncols=None):
        check_prime(p)
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        if p == 2:
            payload = [_pack2(r) for r in rows]
        elif p == 0:
            payload = [[Fraction(a) for a in r] for r in rows]
        else:
            payload = np.array(rows, dtype=np.int64).reshape(len(rows), ncols) % p
        return cls(p, len(rows), ncols, payload)

    @classmethod
    def zeros(cls, p, nrows, ncols):
        check_prime(p)
        if p == 2:
            return cls(p, nrows, ncols, [0] * nrows)
        if p == 0:
            return cls(p, nrows, ncols, [[Fraction(0)] * ncols for _ in range(nrows)])
        return cls(p, nrows, ncols, np.zeros((nrows, ncols), dtype=np.int64))

    @classmethod
    def identity(cls, p, n):
        m = cls.zeros(p, n, n)
        if p == 2:
            m._d = [1 << i for i in range(n)]
        elif p == 0:
            for i in range(n):
                m._d[i][i] = Fraction(1)
        else:
            m._d = np.eye(n, dtype=np.int64)
        return m

    @classmethod
    def _wrap2(cls, rows, ncols):
        return cls(2, len(rows), ncols, list(rows))

    @classmethod
    def _wrapp(cls, p, arr):
        arr = np.asarray(arr, dtype=np.int64)
        return cls(p, arr.shape[0], arr.shape[1], arr)

    # -- access

    def __getitem__(self, ij):
        i, j = ij
        if self.p == 2:
            return (self._d[i] >> j) & 1
        if self.p == 0:
            return self._d[i][j]
        return int(self._d[i, j])

    def row(self, i):
        if self.p == 2:
            return _unpack2(self._d[i], self.ncols)
        if self.p == 0:
            return list(self._d[i])
        return [int(a) for a in self._d[i]]

    def to_lists(self):
        return [self.row(i) for i in range(self.nrows)]

    # -- arithmetic

    def __matmul__(self, other):
        if self.p != other.p or self.ncols != other.nrows:
            raise ValueError("shape/modulus mismatch")
        if self.p == 2:
            return Mat._wrap2(_mul2(self._d, other._d), other.ncols)
        if self.p == 0:
            rows = []
            for r in self._d:
                acc = [Fraction(0)] * other.ncols
                for j, a in enumerate(r):
                    if a:
                        for k, b in enumerate(other._d[j]):
                            acc[k] += a * b
                rows.append(acc)
            return Mat(0, self.nrows, other.ncols, rows)
        return Mat._wrapp(self.p, (self._d @ other._d) % self.p)

    def __add__(self, other):
        if self.p != other.p or (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape/modulus mismatch")
        if self.p == 2:
            return Mat._wrap2([a ^ b for a, b in zip(self._d, other._d)], self.ncols)
        if self.p == 0:
            return Mat(0, self.nrows, self.ncols,
                       [[a + b for a, b in zip(r, s)] for r, s in zip(self._d, other._d)])
        return Mat._wrapp(self.p, (self._d + other._d) % self.p)

    def __sub__(self, other):
        if self.p == 2:
            return self + other
        if self.p == 0:
            return Mat(0, self.nrows, self.ncols,
                       [[a - b for a, b in zip(r, s)] for r, s in zip(self._d, other._d)])
        return Mat._wrapp(self.p, (self._d - other._d) % self.p)

    def scale(self, c):
        if self.p == 2:
            return self if c % 2 else Mat.zeros(2, self.nrows, self.ncols)
        if self.p == 0:
            return Mat(0, self.nrows, self.ncols, [[c * a for a in r] for r in self._d])
        return Mat._wrapp(self.p, (self._d * (c % self.p)) % self.p)

    def apply(self, vec):
        """Row vector times matrix, plain-list boundary."""
        if self.p == 2:
            x = vec if isinstance(vec, int) else _pack2(vec)
            out = 0
            i = 0
            while x:
                if x & 1:
                    out ^= self._d[i]
                x >>= 1
                i += 1
            return _unpack2(out, self.ncols) if not isinstance(vec, int) else out
        if self.p == 0:
            acc = [Fraction(0)] * self.ncols
            for a, r in zip(vec, self._d):
                if a:
                    for k, b in enumerate(r):
                        acc[k] += a * b
            return acc
        v = np.asarray(vec, dtype=np.int64)
        return (v @ self._d) % self.p

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if self.p != other.p or (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        if self.p == 2 or self.p == 0:
            return self._d == other._d
        return bool(np.array_equal(self._d, other._d))

    def __hash__(self):
        if self.p == 2:
            return hash((self.p, self.ncols, tuple(self._d)))
        return hash((self.p, self.ncols, tuple(tuple(r) for r in self.to_lists())))

    def __repr__(self):
        return f"Mat({self.p}, {self.nrows}x{self.ncols})"


def rref(mat):
    """Canonical reduced row echelon form, shape preserved.

    Returns (rref_matrix, rank).  Pivot entries are 1, pivot columns are
    cleared elsewhere, pivot columns strictly increase, zero rows sink to
    the bottom.
    """
    if mat.p == 2:
        rows, pivots = _ech2(mat._d)
        rows = rows + [0] * (mat.nrows - len(rows))
        return Mat._wrap2(rows, mat.ncols), len(pivots)
    if mat.p == 0:
        rows, pivots = _echq(mat._d)
        rows = rows + [[Fraction(0)] * mat.ncols for _ in range(mat.nrows - len(rows))]
        return Mat(0, mat.nrows, mat.ncols, rows), len(pivots)
    a, pivots = _echp(mat._d.copy(), mat.p)
    out = np.zeros((mat.nrows, mat.ncols), dtype=np.int64)
    out[: len(pivots)] = a[: len(pivots)]
    return Mat._wrapp(mat.p, out), len(pivots)


class Subspace:
    """A subspace of F_p^N held as its canonical RREF basis.

    Equality of subspaces is literal equality of the stored bases; the
    canonical form makes that a complete test.
    """

    __slots__ = ("p", "ambient", "_rows", "_pivots")

    def __init__(self, p, ambient, rows, pivots, _internal=False):
        if not _internal:
            raise TypeError("use Subspace.from_vectors / from_packed")
        self.p = p
        self.ambient = ambient
        self._rows = rows
        self._pivots = pivots

    @classmethod
    def from_vectors(cls, p, ambient, vectors):
        check_prime(p)
        if p == 2:
            rows, piv = _ech2(_pack2(v) if not isinstance(v, int) else v
                              for v in vectors)
        else:
            vl = list(vectors)
            if not vl:
                rows, piv = np.zeros((0, ambient), dtype=np.int64), []
            else:
                a = np.array([np.asarray(v, dtype=np.int64) for v in vl])
                a, piv = _echp(a, p)
                rows = a[: len(piv)].copy()
        return cls(p, ambient, rows, list(piv), _internal=True)

    @classmethod
    def from_packed(cls, p, ambient, packed_rows):
        """Packed rows: ints for p = 2, numpy rows otherwise."""
        if p == 2:
            rows, piv = _ech2(packed_rows)
        else:
            pl = list(packed_rows)
            if not pl:
                rows, piv = np.zeros((0, ambient), dtype=np.int64), []
            else:
                a, piv = _echp(np.array(pl, dtype=np.int64), p)
                rows = a[: len(piv)].copy()
        return cls(p, ambient, rows, list(piv), _internal=True)

    @classmethod
    def zero(cls, p, ambient):
        return cls.from_vectors(p, ambient, [])

    @property
    def dim(self):
        return len(self._pivots)

    @property
    def pivots(self):
        return list(self._pivots)

    def basis_rows(self):
        """Canonical basis as plain coefficient lists."""
        if self.p == 2:
            return [_unpack2(r, self.ambient) for r in self._rows]
        return [[int(a) for a in r] for r in self._rows]

    def packed_rows(self):
        if self.p == 2:
            return list(self._rows)
        return [r.copy() for r in self._rows]

    def basis_matrix(self):
        if self.p == 2:
            return Mat._wrap2(list(self._rows), self.ambient)
        if self.dim == 0:
            return Mat.zeros(self.p, 0, self.ambient)
        return Mat._wrapp(self.p, np.array(self._rows, dtype=np.int64))

    def contains(self, vec):
        if self.p == 2:
            x = vec if isinstance(vec, int) else _pack2(vec)
            piv = dict(zip(self._pivots, self._rows))
            mask = 0
            for c in self._pivots:
                mask |= 1 << c
            return _red2(x, piv, mask) == 0
        v = np.asarray(vec, dtype=np.int64)
        return not _redp(v, self._rows, self._pivots, self.p).any()

    def contains_space(self, other):
        if self.p == 2:
            piv = dict(zip(self._pivots, self._rows))
            mask = 0
            for c in self._pivots:
                mask |= 1 << c
            return all(_red2(r, piv, mask) == 0 for r in other._rows)
        return all(not _redp(r, self._rows, self._pivots, self.p).any()
                   for r in other._rows)

    def coords(self, vec):
        """Coordinates of vec in the canonical basis, or None if outside."""
        if self.p == 2:
            x = vec if isinstance(vec, int) else _pack2(vec)
            piv = dict(zip(self._pivots, self._rows))
            out = 0
            for i, c in enumerate(self._pivots):
                if (x >> c) & 1:
                    x ^= piv[c]
                    out |= 1 << i
            return [(out >> i) & 1 for i in range(self.dim)] if x == 0 else None
        v = np.asarray(vec, dtype=np.int64) % self.p
        out = []
        for i, c in enumerate(self._pivots):
            f = int(v[c])
            out.append(f)
            if f:
                v = (v - f * self._rows[i]) % self.p
        return out if not v.any() else None

    def sum(self, other):
        self._check_compat(other)
        if self.p == 2:
            return Subspace.from_packed(2, self.ambient, list(self._rows) + list(other._rows))
        rows = list(self._rows) + list(other._rows)
        return Subspace.from_packed(self.p, self.ambient, rows)

    def intersect(self, other):
        """Zassenhaus: echelonize [A|A ; B|0]; zero-left rows carry the
        intersection on the right."""
        self._check_compat(other)
        N = self.ambient
        if self.p == 2:
            aug = [r | (r << N) for r in self._rows] + list(other._rows)
            rows, _ = _ech2(aug)
            lowmask = (1 << N) - 1
            inter = [r >> N for r in rows if r & lowmask == 0]
            return Subspace.from_packed(2, N, inter)
        na, nb = len(self._rows), len(other._rows)
        aug = np.zeros((na + nb, 2 * N), dtype=np.int64)
        if na:
            aug[:na, :N] = self._rows
            aug[:na, N:] = self._rows
        if nb:
            aug[na:, :N] = other._rows
        a, piv = _echp(aug, self.p)
        a = a[: len(piv)]
        zero_left = ~a[:, :N].any(axis=1)
        return Subspace.from_packed(self.p, N, a[zero_left, N:])

    def _check_compat(self, other):
        if self.p != other.p or self.ambient != other.ambient:
            raise ValueError("subspaces live in different ambients")

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if (self.p, self.ambient, self._pivots) != (other.p, other.ambient, other._pivots):
            return False
        if self.p == 2:
            return self._rows == other._rows
        return all(np.array_equal(a, b) for a, b in zip(self._rows, other._rows))

    def __hash__(self):
        if self.p == 2:
            return hash((self.p, self.ambient, tuple(self._rows)))
        return hash((self.p, self.ambient, tuple(tuple(int(x) for x in r) for r in self._rows)))

    def __repr__(self):
        return f"Subspace(p={self.p}, ambient={self.ambient}, dim={self.dim})"


class SpanBuilder:
    """Incremental span with cheap membership, for closure loops."""

    def __init__(self, p, ambient):
        check_prime(p)
        self.p = p
        self.ambient = ambient
        self._piv = {}

    @property
    def dim(self):
        return len(self._piv)

    def add(self, vec):
        """Insert a vector; True if the span grew."""
        if self.p == 2:
            x = vec if isinstance(vec, int) else _pack2(vec)
            while x:
                c = (x & -x).bit_length() - 1
                if c in self._piv:
                    x ^= self._piv[c]
                else:
                    self._piv[c] = x
                    return True
            return False
        v = np.asarray(vec, dtype=np.int64) % self.p
        for c, r in self._piv.items():
            f = int(v[c])
            if f:
                v = (v - f * r) % self.p
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        c = int(nz[0])
        inv = pow(int(v[c]), self.p - 2, self.p)
        self._piv[c] = (v * inv) % self.p
        return True

    def contains(self, vec):
        if self.p == 2:
            x = vec if isinstance(vec, int) else _pack2(vec)
            while x:
                c = (x & -x).bit_length() - 1
                if c not in self._piv:
                    return False
                x ^= self._piv[c]
            return True
        v = np.asarray(vec, dtype=np.int64) % self.p
        for c, r in self._piv.items():
            f = int(v[c])
            if f:
                v = (v - f * r) % self.p
        return not v.any()

    def subspace(self):
        return Subspace.from_packed(self.p, self.ambient, list(self._piv.values()))


def is_direct_sum(parts, whole):
    """True iff the parts are independent and together span the whole."""
    if not parts:
        return whole.dim == 0
    total = 0
    acc = SpanBuilder(whole.p, whole.ambient)
    for s in parts:
        total += s.dim
        for r in (s._rows if s.p == 2 else s.packed_rows()):
            acc.add(r)
    return total == whole.dim and acc.dim == whole.dim and acc.subspace() == whole


class GroupAction:
    """A finite list of invertible generators acting on row vectors of
    F_p^dim on the right."""

    __slots__ = ("p", "dim", "generators")

    def __init__(self, p, dim, generators):
        check_prime(p)
        for g in generators:
            if g.p != p or g.nrows != dim or g.ncols != dim:
                raise ValueError("generator shape/modulus mismatch")
            _, rank = rref(g)
            if rank != dim:
                raise ValueError("generators must be invertible")
        self.p = p
        self.dim = dim
        self.generators = list(generators)

    def apply(self, i, vec):
        return self.generators[i].apply(vec)


# ---------------------------------------------------------------------------
# equivariant projections


def _action_on_domain(action, domain):
    """Matrices of each generator restricted to domain coordinates.

    Raises ValueError if the domain is not invariant.
    """
    mats = []
    rows = domain.packed_rows()
    for gi in range(len(action.generators)):
        out = []
        for r in rows:
            img = action.apply(gi, r)
            co = domain.coords(img)
            if co is None:
                raise ValueError("domain is not invariant under the action")
            out.append(co)
        mats.append(Mat.from_rows(domain.p, out, domain.dim))
    return mats


def _solve_linear_system(p, rows, rhs, nunk):
    """Solve x . A^T = b style stacked equations.

    ``rows`` are packed equation rows over the unknowns, ``rhs`` the
    right-hand sides.  Returns (particular, kernel_basis) with packed
    vectors, or None if inconsistent.
    """
    if p == 2:
        aug = [(r | (b << nunk)) for r, b in zip(rows, rhs)]
        ech, piv = _ech2(aug)
        for r, c in zip(ech, piv):
            if c == nunk:
                return None
        part = 0
        pivset = set(piv)
        for r, c in zip(ech, piv):
            if (r >> nunk) & 1:
                part |= 1 << c
        kern = []
        for j in range(nunk):
            if j in pivset:
                continue
            v = 1 << j
            for r, c in zip(ech, piv):
                if (r >> j) & 1:
                    v |= 1 << c
            kern.append(v)
        return part, kern
    nr = len(rows)
    aug = np.zeros((nr, nunk + 1), dtype=np.int64)
    for i, (r, b) in enumerate(zip(rows, rhs)):
        aug[i, :nunk] = r
        aug[i, nunk] = b
    a, piv = _echp(aug, p)
    a = a[: len(piv)]
    if nunk in piv:
        return None
    part = np.zeros(nunk, dtype=np.int64)
    for r, c in zip(a, piv):
        part[c] = r[nunk]
    pivset = set(piv)
    kern = []
    for j in range(nunk):
        if j in pivset:
            continue
        v = np.zeros(nunk, dtype=np.int64)
        v[j] = 1
        for r, c in zip(a, piv):
            if r[j]:
                v[c] = (-int(r[j])) % p
        kern.append(v)
    return part, kern


def _projection_problem(action, image, domain, labels=None):
    """Shared setup for the equivariant projection solver.

    Returns None if the image is not an invariant subspace (then no
    projection with that image can commute with the action), otherwise a
    dict of the adapted-coordinate data.
    """
    p = domain.p
    d = domain.dim
    if not domain.contains_space(image):
        raise ValueError("image must lie inside the domain")
    gmats = _action_on_domain(action, domain)  # raises if domain not invariant

    # image in domain coordinates
    im_rows = []
    for r in image.packed_rows():
        co = domain.coords(r)
        im_rows.append(co)
    im = Subspace.from_vectors(p, d, im_rows)
    m = im.dim
    for g in gmats:
        for r in im.packed_rows():
            if not im.contains(g.apply(r)):
                return None  # image not invariant: infeasible
    pivset = set(im.pivots)
    free_cols = [j for j in range(d) if j not in pivset]

    # adapted basis: image rows first, then unit vectors on free columns
    tr = im.basis_rows() + [[1 if k == j else 0 for k in range(d)] for j in free_cols]
    T = Mat.from_rows(p, tr, d)
    Tinv = _invert(T)

    blocks = []
    for g in gmats:
        gad = T @ g @ Tinv
        a = [[gad[i, j] for j in range(m)] for i in range(m)]
        b_zero = all(gad[i, j] == 0 for i in range(m) for j in range(m, d))
        if not b_zero:
            return None  # cannot happen if image invariant; belt and braces
        c = [[gad[i, j] for j in range(m)] for i in range(m, d)]
        dd = [[gad[i, j] for j in range(m, d)] for i in range(m, d)]
        blocks.append((a, c, dd))

    lab_free = lab_im = None
    if labels is not None:
        lab = list(labels)
        lab_free = [lab[j] for j in free_cols]
        lab_im = []
        for r in im.basis_rows():
            ls = {lab[j] for j, a in enumerate(r) if a}
            lab_im.append(ls.pop() if len(ls) == 1 else None)
        if any(l is None for l in lab_im):
            lab_free = lab_im = None

    return {
        "p": p, "d": d, "m": m, "T": T, "Tinv": Tinv,
        "blocks": blocks, "lab_free": lab_free, "lab_im": lab_im,
    }


def _invert(mat):
    p, n = mat.p, mat.nrows
    if p == 2:
        aug = [mat._d[i] | (1 << (n + i)) for i in range(n)]
        ech, piv = _ech2(aug)
        if piv != list(range(n)):
            raise ValueError("matrix not invertible")
        return Mat._wrap2([r >> n for r in ech], n)
    a = np.zeros((n, 2 * n), dtype=np.int64)
    a[:, :n] = mat._d
    a[:, n:] = np.eye(n, dtype=np.int64)
    a, piv = _echp(a, p)
    if piv != list(range(n)):
        raise ValueError("matrix not invertible")
    return Mat._wrapp(p, a[:n, n:])


def _assemble_projection_system(prob, allowed=None):
    """Equations X*A - D*X = C per generator, mapped onto the flattened
    unknown X[(u, v)] with v an image coordinate, u a complement one."""
    p, d, m = prob["p"], prob["d"], prob["m"]
    k = d - m
    if allowed is None:
        unk_index = {(u, v): u * m + v for u in range(k) for v in range(m)}
    else:
        unk_index = {}
        for u in range(k):
            for v in range(m):
                if allowed(u, v):
                    unk_index[(u, v)] = len(unk_index)
    nunk = len(unk_index)
    rows, rhs = [], []
    for (a, c, dd) in prob["blocks"]:
        for i in range(k):
            for j in range(m):
                coeff = {}
                for v in range(m):
                    f = a[v][j]
                    if f:
                        coeff[(i, v)] = (coeff.get((i, v), 0) + f) % p
                for u in range(k):
                    f = dd[i][u]
                    if f:
                        coeff[(u, j)] = (coeff.get((u, j), 0) - f) % p
                # unknowns outside the ansatz are pinned to zero: drop them
                if p == 2:
                    rv = 0
                    for key, f in coeff.items():
                        if f and key in unk_index:
                            rv |= 1 << unk_index[key]
                else:
                    rv = np.zeros(nunk, dtype=np.int64)
                    for key, f in coeff.items():
                        if f and key in unk_index:
                            rv[unk_index[key]] = f
                rows.append(rv)
                rhs.append(c[i][j] % p)
    # many generator equations repeat; dedupe before elimination
    seen = set()
    drows, drhs = [], []
    for rv, b in zip(rows, rhs):
        key = (rv, b) if p == 2 else (rv.tobytes(), b)
        if key in seen:
            continue
        seen.add(key)
        if p == 2:
            if rv == 0 and b == 0:
                continue
        elif not rv.any() and b == 0:
            continue
        drows.append(rv)
        drhs.append(b)
    return unk_index, nunk, drows, drhs


def _projection_from_x(prob, xvals, unk_index):
    p, d, m = prob["p"], prob["d"], prob["m"]
    k = d - m
    rows = [[1 if j == i else 0 for j in range(d)] for i in range(m)]
    xrows = [[0] * d for _ in range(k)]
    for (u, v), idx in unk_index.items():
        xrows[u][v] = (xvals >> idx) & 1 if p == 2 else int(xvals[idx])
    pad = Mat.from_rows(p, rows + xrows, d)
    return prob["Tinv"] @ pad @ prob["T"]


def solve_equivariant_projection(action, image, domain, labels=None):
    """Find an idempotent projection of the domain onto the image that
    commutes with every generator.

    The answer is a Mat in domain coordinates, or None when the linear
    system is infeasible (no equivariant projection exists).  Precondition
    violations (image outside domain, non-invariant domain) raise
    ValueError instead.

    ``labels`` optionally assigns a hashable grade to each domain basis
    row; when given, a solution preserving the grading is tried first and
    the unrestricted system is kept as fallback.
    """
    prob = _projection_problem(action, image, domain, labels=labels)
    if prob is None:
        return None
    attempts = []
    if prob["lab_free"] is not None:
        lf, li = prob["lab_free"], prob["lab_im"]
        attempts.append(lambda u, v: lf[u] == li[v])
    attempts.append(None)
    for allowed in attempts:
        sys_ = _assemble_projection_system(prob, allowed)
        if sys_ is None:
            continue
        unk_index, nunk, rows, rhs = sys_
        sol = _solve_linear_system(prob["p"], rows, rhs, nunk)
        if sol is not None:
            part, _ = sol
            return _projection_from_x(prob, part, unk_index)
    return None


def affine_projection_family(action, image, domain, labels=None, max_kernel=None):
    """The full affine family of solutions of the projection system.

    Returns (particular Mat, [kernel-direction Mats]) or None if
    infeasible.  Used by exhaustive fallback searches; ``max_kernel``
    truncates the direction list.
    """
    prob = _projection_problem(action, image, domain, labels=labels)
    if prob is None:
        return None
    sys_ = _assemble_projection_system(prob, None)
    if sys_ is None:
        return None
    unk_index, nunk, rows, rhs = sys_
    sol = _solve_linear_system(prob["p"], rows, rhs, nunk)
    if sol is None:
        return None
    part, kern = sol
    if max_kernel is not None:
        kern = kern[:max_kernel]
    base = _projection_from_x(prob, part, unk_index)
    dirs = []
    for v in kern:
        zero = 0 if prob["p"] == 2 else np.zeros(nunk, dtype=np.int64)
        m1 = _projection_from_x(prob, v, unk_index)
        m0 = _projection_from_x(prob, zero, unk_index)
        dirs.append(m1 - m0)
    return base, dirs


# ---------------------------------------------------------------------------
# word indexing and the shared text format


def word_to_index(word, n):
    """Words are tuples of letters 1..n; the index is big-endian base n."""
    idx = 0
    for a in word:
        if not 1 <= a <= n:
            raise ValueError(f"letter {a} outside 1..{n}")
        idx = idx * n + (a - 1)
    return idx


def index_to_word(idx, n, r):
    out = []
    for _ in range(r):
        out.append(idx % n + 1)
        idx //= n
    return tuple(reversed(out))


def word_weight(word, n):
    """Multidegree of a word: how often each letter occurs."""
    w = [0] * n
    for a in word:
        w[a - 1] += 1
    return tuple(w)


def format_terms(pairs, n, r):
    """Render [(word, coeff), ...] as 'c w c w ...'."""
    bits = []
    for word, c in pairs:
        bits.append(str(c))
        bits.append("".join(str(a) for a in word))
    return " ".join(bits)


def parse_terms(line, n, r):
    toks = line.split()
    if len(toks) % 2:
        raise ValueError(f"dangling token in term line: {line!r}")
    out = []
    for i in range(0, len(toks), 2):
        c = int(toks[i])
        w = toks[i + 1]
        if len(w) != r:
            raise ValueError(f"word {w!r} has length {len(w)}, expected {r}")
        word = tuple(int(ch) for ch in w)
        for a in word:
            if not 1 <= a <= n:
                raise ValueError(f"letter {a} outside alphabet 1..{n}")
        out.append((word, c))
    return out


def format_subspace(space, n, r, comment=None):
    """Serialize a subspace of the word space T^r(V_n).

    Header 'p n r', then one line per canonical basis vector listing
    coefficient/word pairs.  '#' starts a comment.
    """
    if space.ambient != n ** r:
        raise ValueError("ambient does not match n^r")
    lines = []
    if comment:
        for ln in comment.splitlines():
            lines.append(f"# {ln}")
    lines.append(f"{space.p} {n} {r}")
    for row in space.basis_rows():
        pairs = [(index_to_word(j, n, r), c) for j, c in enumerate(row) if c]
        lines.append(format_terms(pairs, n, r))
    return "\n".join(lines) + "\n"


def parse_subspace(text):
    """Inverse of format_subspace: returns (Subspace, n, r)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty subspace text")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header {lines[0]!r}, want 'p n r'")
    p, n, r = (int(t) for t in head)
    check_prime(p)
    vecs = []
    for ln in lines[1:]:
        v = [0] * (n ** r)
        for word, c in parse_terms(ln, n, r):
            v[word_to_index(word, n)] = (v[word_to_index(word, n)] + c) % p
        vecs.append(v)
    return Subspace.from_vectors(p, n ** r, vecs), n, r
