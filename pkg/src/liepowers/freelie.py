"""Free Lie algebra machinery inside tensor powers.

Words are tuples over the alphabet 1..n and index the monomial basis of
T^r(V) through ``word_to_index``.  Lie elements are expanded once over the
integers (bracketed Lyndon words are triangular with unit diagonal against
the lex order, so they stay independent after reduction mod any prime) and
reduced mod p on demand.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement, product

import numpy as np

from .combinat import higher_lie_dim, partitions, witt_dim
from .linalg import (
    Mat,
    SpanBuilder,
    Subspace,
    check_prime,
    index_to_word,
    word_to_index,
    word_weight,
)

__all__ = [
    "Tensor",
    "lyndon_words",
    "standard_factorization",
    "lyndon_expansion",
    "lie_element",
    "lie_power",
    "pbw_monomials",
    "pbw_monomial_vector",
    "filtration_subspace",
    "weight_columns",
    "weight_component",
    "weight_labels",
    "truncate_vector",
    "truncate_subspace",
    "extend_vector",
    "letter_permutation_map",
    "apply_letter_permutation",
    "symmetrize_extend",
    "concat_packed",
    "bracket_packed",
    "pack_tensor",
    "unpack_tensor",
    "dynkin_matrix",
    "subalgebra_generated",
    "bracket_products",
    "lazard_pieces",
]


class Tensor:
    """Sparse element of T^r(V_n) over GF(p): a dict word -> coefficient,
    zero coefficients dropped."""

    __slots__ = ("p", "n", "r", "coeffs")

    def __init__(self, p, n, r, coeffs=None):
        check_prime(p)
        self.p = p
        self.n = n
        self.r = r
        self.coeffs = {}
        if coeffs:
            for w, c in coeffs.items():
                if len(w) != r:
                    raise ValueError(f"word {w} has wrong length for degree {r}")
                c %= p
                if c:
                    self.coeffs[tuple(w)] = c

    @classmethod
    def from_word(cls, p, n, word):
        return cls(p, n, len(word), {tuple(word): 1})

    @classmethod
    def letter(cls, p, n, a):
        return cls.from_word(p, n, (a,))

    def __add__(self, other):
        self._compat(other, same_degree=True)
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = (out.get(w, 0) + c) % self.p
        return Tensor(self.p, self.n, self.r, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return Tensor(self.p, self.n, self.r,
                      {w: c * v for w, v in self.coeffs.items()})

    def __mul__(self, other):
        """Concatenation product."""
        self._compat(other)
        out = {}
        for w1, c1 in self.coeffs.items():
            for w2, c2 in other.coeffs.items():
                w = w1 + w2
                out[w] = (out.get(w, 0) + c1 * c2) % self.p
        return Tensor(self.p, self.n, self.r + other.r, out)

    def bracket(self, other):
        return self * other - other * self

    def _compat(self, other, same_degree=False):
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("mixed ground data")
        if same_degree and self.r != other.r:
            raise ValueError("degree mismatch")

    def is_zero(self):
        return not self.coeffs

    def to_packed(self):
        return pack_tensor(self.p, self.n, self.r, self.coeffs)

    @classmethod
    def from_packed(cls, p, n, r, vec):
        return cls(p, n, r, unpack_tensor(p, n, r, vec))

    def __eq__(self, other):
        return isinstance(other, Tensor) and \
            (self.p, self.n, self.r) == (other.p, other.n, other.r) and \
            self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.n, self.r, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        terms = " + ".join(f"{c}*{''.join(map(str, w))}"
                           for w, c in sorted(self.coeffs.items()))
        return f"Tensor({terms or '0'})"


def pack_tensor(p, n, r, coeffs):
    if p == 2:
        v = 0
        for w, c in coeffs.items():
            if c % 2:
                v ^= 1 << word_to_index(w, n)
        return v
    v = np.zeros(n ** r, dtype=np.int64)
    for w, c in coeffs.items():
        v[word_to_index(w, n)] = c % p
    return v


def unpack_tensor(p, n, r, vec):
    out = {}
    if p == 2:
        v = vec
        while v:
            low = v & -v
            i = low.bit_length() - 1
            out[index_to_word(i, n, r)] = 1
            v ^= low
        return out
    for i in np.nonzero(np.asarray(vec))[0]:
        out[index_to_word(int(i), n, r)] = int(vec[i]) % p
    return out


# ---------------------------------------------------------------------------
# Lyndon words and bracketed expansions


@lru_cache(maxsize=None)
def lyndon_words(n, r):
    """Lyndon words of length exactly r over 1..n, in lex order (Duval)."""
    out = []
    w = [1]
    while True:
        if len(w) == r:
            out.append(tuple(w))
        # extend w periodically to length r, then bump the last free letter
        x = [w[i % len(w)] for i in range(r)]
        while x and x[-1] == n:
            x.pop()
        if not x:
            break
        x[-1] += 1
        w = x
    return tuple(out)


def standard_factorization(w):
    """w = u v with v the lex-least proper suffix; for Lyndon w both halves
    are again Lyndon."""
    if len(w) < 2:
        raise ValueError("need length at least 2")
    v = min(w[i:] for i in range(1, len(w)))
    return w[: len(w) - len(v)], v


_expansion_cache = {}


def lyndon_expansion(n, w):
    """Integer expansion of the bracketed Lyndon word w in the word basis.

    Bracketing follows the standard factorization recursively; the result
    is cached per (n, w) and shared by every modulus.
    """
    w = tuple(w)
    key = (n, w)
    hit = _expansion_cache.get(key)
    if hit is not None:
        return hit
    if len(w) == 1:
        out = {w: 1}
    else:
        u, v = standard_factorization(w)
        a = lyndon_expansion(n, u)
        b = lyndon_expansion(n, v)
        out = {}
        for wa, ca in a.items():
            for wb, cb in b.items():
                c = ca * cb
                k1 = wa + wb
                k2 = wb + wa
                out[k1] = out.get(k1, 0) + c
                out[k2] = out.get(k2, 0) - c
        out = {k: c for k, c in out.items() if c}
    _expansion_cache[key] = out
    return out


def lie_element(p, n, w):
    """The bracketed Lyndon word as a Tensor mod p."""
    return Tensor(p, n, len(w), lyndon_expansion(n, w))


@lru_cache(maxsize=None)
def _lie_power_packed(p, n, r):
    return tuple(pack_tensor(p, n, r, lyndon_expansion(n, w))
                 for w in lyndon_words(n, r))


@lru_cache(maxsize=None)
def lie_power(p, n, r):
    """The degree-r homogeneous piece of the free Lie algebra, as a
    subspace of T^r(V_n)."""
    s = Subspace.from_packed(p, n ** r, list(_lie_power_packed(p, n, r)))
    # triangularity of bracketed Lyndon words keeps them independent mod p
    assert s.dim == witt_dim(n, r)
    return s


# ---------------------------------------------------------------------------
# PBW monomials and the lexicographic filtration


@lru_cache(maxsize=None)
def pbw_monomials(n, lam):
    """All products of bracketed Lyndon words of type lam, one per multiset
    of factors, factors sorted by (degree, word)."""
    lam = tuple(sorted(lam, reverse=True))
    by_size = {}
    for part in lam:
        by_size[part] = by_size.get(part, 0) + 1
    pools = []
    for size in sorted(by_size):
        pools.append(list(combinations_with_replacement(lyndon_words(n, size),
                                                        by_size[size])))
    out = []
    for pick in product(*pools):
        factors = tuple(w for grp in pick for w in grp)
        out.append(factors)
    return tuple(sorted(out))


def pbw_monomial_vector(p, n, monomial):
    """Packed vector of a product of bracketed Lyndon words."""
    r0 = len(monomial[0])
    vec = pack_tensor(p, n, r0, {w: c % p for w, c in
                                 lyndon_expansion(n, monomial[0]).items()})
    deg = r0
    for w in monomial[1:]:
        rw = len(w)
        nxt = pack_tensor(p, n, rw, {u: c % p for u, c in
                                     lyndon_expansion(n, w).items()})
        vec = concat_packed(p, n, deg, vec, rw, nxt)
        deg += rw
    return vec


@lru_cache(maxsize=None)
def filtration_subspace(p, n, r, lam):
    """Span of all PBW monomials whose type is >= lam in lex.

    These spans decrease as lam grows; the top one is the Lie power
    itself, the bottom one is all of T^r, and consecutive quotients have
    the higher Lie module dimensions.  Reordering a product only creates
    commutator terms of lex-larger type, which keeps each span closed
    under the substitution action.
    """
    lam = tuple(sorted(lam, reverse=True))
    if sum(lam) != r:
        raise ValueError(f"{lam} is not a partition of {r}")
    sb = SpanBuilder(p, n ** r)
    for mu in partitions(r):
        if mu < lam:
            continue
        for mono in pbw_monomials(n, mu):
            sb.add(pbw_monomial_vector(p, n, mono))
    return sb.subspace()


# ---------------------------------------------------------------------------
# weights (multidegrees) and alphabet truncation


@lru_cache(maxsize=None)
def weight_columns(n, r, weight):
    return tuple(i for i in range(n ** r)
                 if word_weight(index_to_word(i, n, r), n) == tuple(weight))


def weight_labels(n, r):
    """Multidegree of every column of T^r(V_n), in column order."""
    return [word_weight(index_to_word(i, n, r), n) for i in range(n ** r)]


def weight_component(space, n, r, weight):
    """Intersection of a subspace with one multidegree block.

    Canonical bases of graded subspaces are themselves homogeneous, so the
    usual case is a cheap row filter; a genuine intersection covers the
    rest.
    """
    cols = set(weight_columns(n, r, tuple(weight)))
    keep, mixed = [], False
    for row, piv in zip(space.packed_rows(), space.pivots):
        if space.p == 2:
            support = set()
            v = row
            while v:
                low = v & -v
                support.add(low.bit_length() - 1)
                v ^= low
        else:
            support = set(int(i) for i in np.nonzero(row)[0])
        if support <= cols:
            keep.append(row)
        elif piv in cols:
            mixed = True
            break
    if not mixed:
        return Subspace.from_packed(space.p, space.ambient, keep)
    block = Subspace.from_vectors(
        space.p, space.ambient,
        [[1 if j == c else 0 for j in range(space.ambient)] for c in cols])
    return space.intersect(block)


def truncate_vector(p, n_from, n_to, r, vec):
    """Image under the substitution killing letters above n_to, re-indexed
    into T^r(V_{n_to})."""
    if n_to > n_from:
        raise ValueError("truncation cannot grow the alphabet")
    if p == 2:
        out = 0
        v = vec
        while v:
            low = v & -v
            i = low.bit_length() - 1
            v ^= low
            w = index_to_word(i, n_from, r)
            if all(a <= n_to for a in w):
                out ^= 1 << word_to_index(w, n_to)
        return out
    out = np.zeros(n_to ** r, dtype=np.int64)
    for i in np.nonzero(np.asarray(vec))[0]:
        w = index_to_word(int(i), n_from, r)
        if all(a <= n_to for a in w):
            out[word_to_index(w, n_to)] = int(vec[i]) % p
    return out


def truncate_subspace(space, n_from, n_to, r):
    vecs = [truncate_vector(space.p, n_from, n_to, r, v)
            for v in space.packed_rows()]
    return Subspace.from_packed(space.p, n_to ** r, vecs)


# ---------------------------------------------------------------------------
# alphabet extension and letter symmetrization


def extend_vector(p, n_from, n_to, r, vec):
    """Re-index a packed vector into the tensor space on a larger alphabet."""
    if n_to < n_from:
        raise ValueError("extension cannot shrink the alphabet")
    if n_to == n_from:
        return vec
    if p == 2:
        out = 0
        v = vec
        while v:
            low = v & -v
            i = low.bit_length() - 1
            v ^= low
            out ^= 1 << word_to_index(index_to_word(i, n_from, r), n_to)
        return out
    out = np.zeros(n_to ** r, dtype=np.int64)
    for i in np.nonzero(np.asarray(vec))[0]:
        out[word_to_index(index_to_word(int(i), n_from, r), n_to)] = \
            int(vec[i]) % p
    return out


def letter_permutation_map(n, r, images):
    """Index map on basis words of the substitution sending letter a to
    images[a-1]."""
    out = []
    for i in range(n ** r):
        w = index_to_word(i, n, r)
        out.append(word_to_index(tuple(images[a - 1] for a in w), n))
    return out


def apply_letter_permutation(p, n, r, vec, imap):
    if p == 2:
        out = 0
        v = vec
        while v:
            low = v & -v
            i = low.bit_length() - 1
            v ^= low
            out ^= 1 << imap[i]
        return out
    out = np.zeros(n ** r, dtype=np.int64)
    for i in np.nonzero(np.asarray(vec))[0]:
        out[imap[int(i)]] = int(vec[i]) % p
    return out


def symmetrize_extend(space, n_from, n_to, r):
    """Sum of all letter-permutation images of ``space`` inside
    T^r(V_{n_to}).

    The embedded space is closed under the substitution action of
    Sym(n_to), generated by the transposition of the first two letters
    and the full cycle.  Spans such as Lie powers or images of descent
    idempotents are already permutation-stable, so for those inputs
    truncating the result back to n_from letters recovers the original
    space.
    """
    p = space.p
    swap = list(range(1, n_to + 1))
    if n_to >= 2:
        swap[0], swap[1] = swap[1], swap[0]
    cyc = list(range(2, n_to + 1)) + [1]
    gens = [letter_permutation_map(n_to, r, g) for g in (swap, cyc)]
    sb = SpanBuilder(p, n_to ** r)
    queue = []
    for v in space.packed_rows():
        w = extend_vector(p, n_from, n_to, r, v)
        if sb.add(w):
            queue.append(w)
    qi = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        for imap in gens:
            w = apply_letter_permutation(p, n_to, r, v, imap)
            if sb.add(w):
                queue.append(w)
    return sb.subspace()


# ---------------------------------------------------------------------------
# packed concatenation and bracket


def concat_packed(p, n, r1, v1, r2, v2):
    """Concatenation product on packed vectors: index(uv) = index(u)*n^r2
    + index(v)."""
    if p == 2:
        out = 0
        shift_unit = n ** r2
        v = v1
        while v:
            low = v & -v
            i = low.bit_length() - 1
            v ^= low
            out ^= v2 << (i * shift_unit)
        return out
    return np.outer(np.asarray(v1), np.asarray(v2)).ravel() % p


def bracket_packed(p, n, r1, v1, r2, v2):
    a = concat_packed(p, n, r1, v1, r2, v2)
    b = concat_packed(p, n, r2, v2, r1, v1)
    if p == 2:
        return a ^ b
    return (a - b) % p


# ---------------------------------------------------------------------------
# left-normed bracketing


@lru_cache(maxsize=None)
def dynkin_matrix(p, n, r):
    """Matrix (rows act on the right) of w = a_1...a_r |->
    [...[[a_1,a_2],a_3]...,a_r].

    On the degree-r Lie piece this operator is multiplication by r, so
    dividing by r (possible when p does not divide r) yields a projection
    certifying the Lie power as a direct summand.
    """
    N = n ** r
    rows = []
    for i in range(N):
        w = index_to_word(i, n, r)
        cur = {(w[0],): 1}
        for a in w[1:]:
            nxt = {}
            for u, c in cur.items():
                k1 = u + (a,)
                k2 = (a,) + u
                nxt[k1] = nxt.get(k1, 0) + c
                nxt[k2] = nxt.get(k2, 0) - c
            cur = {k: v % p for k, v in nxt.items() if v % p}
        rows.append(pack_tensor(p, n, r, cur))
    if p == 2:
        return Mat._wrap2(rows, N)
    return Mat._wrapp(p, np.array(rows, dtype=np.int64))


# ---------------------------------------------------------------------------
# graded subalgebra closure


def subalgebra_generated(p, n, generators, max_degree):
    """Graded Lie subalgebra generated by packed homogeneous elements.

    ``generators`` maps degree -> list of packed vectors.  Returns degree
    -> Subspace for every degree up to max_degree where the closure is
    nonzero.  Elements are bracketed pairwise until the spans stop
    growing.
    """
    spans = {}
    elements = []

    def push(deg, vec):
        sb = spans.get(deg)
        if sb is None:
            sb = spans[deg] = SpanBuilder(p, n ** deg)
        if sb.add(vec):
            elements.append((deg, vec))
            return True
        return False

    queue = []
    for deg in sorted(generators):
        if deg > max_degree:
            continue
        for v in generators[deg]:
            if push(deg, v):
                queue.append(len(elements) - 1)
    qi = 0
    while qi < len(queue):
        idx = queue[qi]
        qi += 1
        deg1, v1 = elements[idx]
        # each unordered pair is bracketed once, when its later element is
        # dequeued; [x, x] vanishes identically so the diagonal is skipped
        for jdx in range(idx):
            deg2, v2 = elements[jdx]
            if deg1 + deg2 > max_degree:
                continue
            w = bracket_packed(p, n, deg1, v1, deg2, v2)
            if push(deg1 + deg2, w):
                queue.append(len(elements) - 1)
    return {deg: sb.subspace() for deg, sb in spans.items() if sb.dim}


def bracket_products(p, n, deg_x, x_rows, deg_b, b_rows):
    """All brackets [x, b] with x from the first list and b from the
    second, as packed vectors of degree deg_x + deg_b."""
    return [bracket_packed(p, n, deg_x, x, deg_b, b)
            for x in x_rows for b in b_rows]


def lazard_pieces(p, n, deg_x, x_rows, deg_b, b_rows, max_degree):
    """Left-normed pieces [x, b, ..., b] of a Lazard elimination.

    Returns {m: Subspace} for each count m >= 0 of appended b-factors
    with deg_x + m*deg_b <= max_degree.  When B is a free factor being
    eliminated and X is complementary, the pieces freely generate the
    kernel of the elimination, so the piece with m factors has dimension
    dim(X) * dim(B)**m.  A piece of smaller rank means the elimination
    hypothesis fails, which is reported as ArithmeticError.
    """
    pieces = {}
    cur_rows = list(x_rows)
    cur_deg = deg_x
    m = 0
    while cur_deg <= max_degree:
        sp = Subspace.from_packed(p, n ** cur_deg, cur_rows)
        want = len(x_rows) * len(b_rows) ** m
        if sp.dim != want:
            raise ArithmeticError(
                "piece with %d appended factors has dimension %d, "
                "expected %d" % (m, sp.dim, want))
        pieces[m] = sp
        m += 1
        cur_deg += deg_b
        if cur_deg > max_degree or not b_rows:
            break
        cur_rows = bracket_products(
            p, n, cur_deg - deg_b, cur_rows, deg_b, b_rows)
    return pieces
