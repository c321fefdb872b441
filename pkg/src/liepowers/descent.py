"""Solomon's descent algebra, its class-function map, and tensor actions.

Elements are stored on the basis X^c indexed by compositions c of r,
where X^c is the sum of all permutations whose descent set is contained
in the partial-sum set of c.  Products follow the nonnegative-integer-
matrix rule (validated against the group algebra in the test suite); the
map onto class functions sends X^c to the Young character of c and has
nilpotent kernel, which is what makes idempotent lifting work.

Permutations act on tensors by place permutation, (w.sigma)_i =
w_{sigma(i)}, so X^c acts by splitting off subsequences: X^c(w) is the
sum over ways to pick disjoint subsequences of sizes c_1, c_2, ... whose
concatenation rearranges w.  Action matrices are assembled from that
description block by block rather than by expanding permutations, which
keeps rank 9 and 12 within reach.
"""

from collections import Counter
from functools import lru_cache
from itertools import combinations
import random

import numpy as np

from .combinat import (
    ClassFunction,
    compositions,
    p_equivalence_classes,
    partitions,
    young_character,
)
from .linalg import Mat, check_prime, index_to_word, word_to_index, \
    _solve_linear_system

__all__ = [
    "DescentElement",
    "xnu_as_permutation_sum",
    "apply_place_permutation",
    "x_action_matrix",
    "element_action_matrix",
    "act_on_tensor",
    "act_on_tensors",
    "lift_idempotents",
    "lift_matrix_idempotent",
    "IdempotentFamily",
    "gr_action_check",
]


# ---------------------------------------------------------------------------
# permutation expansion (small ranks; the oracle side of everything)


@lru_cache(maxsize=None)
def xnu_as_permutation_sum(nu):
    """The permutations (one-line tuples) summing to X^nu, for sum(nu) <= 8.

    Each permutation arises from an ordered set partition of {1..r} into
    blocks of sizes nu: sort each block and concatenate.  The result is
    exactly the set of permutations whose descent set lies in the partial
    sums of nu.
    """
    nu = tuple(nu)
    r = sum(nu)
    if r > 8:
        raise ValueError("permutation expansion is capped at rank 8")
    if any(c <= 0 for c in nu):
        raise ValueError("composition parts must be positive")
    out = []

    def rec(remaining, parts, acc):
        if not parts:
            out.append(tuple(acc))
            return
        k = parts[0]
        for pick in combinations(remaining, k):
            rest = tuple(x for x in remaining if x not in pick)
            rec(rest, parts[1:], acc + list(pick))

    rec(tuple(range(1, r + 1)), nu, [])
    return tuple(out)


def apply_place_permutation(p, n, r, vec, sigma):
    """Place permutation on a packed tensor: position i of the image word
    holds letter sigma(i) of the source word."""
    if p == 2:
        out = 0
        v = vec
        while v:
            low = v & -v
            i = low.bit_length() - 1
            v ^= low
            w = index_to_word(i, n, r)
            out ^= 1 << word_to_index(tuple(w[s - 1] for s in sigma), n)
        return out
    out = np.zeros(n ** r, dtype=np.int64)
    for i in np.nonzero(np.asarray(vec))[0]:
        w = index_to_word(int(i), n, r)
        j = word_to_index(tuple(w[s - 1] for s in sigma), n)
        out[j] = (out[j] + int(vec[i])) % p
    return out


# ---------------------------------------------------------------------------
# structure constants


@lru_cache(maxsize=None)
def _x_product_table(alpha, beta):
    """Integer expansion of X^alpha * X^beta.

    Sum over nonnegative integer matrices with row sums beta and column
    sums alpha of X^(row-wise reading of the nonzero entries).  Returns a
    tuple of (composition, multiplicity) pairs; multiplicities are plain
    integers, reduced mod p by the caller.
    """
    t = len(alpha)
    out = Counter()

    def fill(ri, cols, acc):
        if ri == len(beta):
            out[tuple(acc)] += 1
            return
        target = beta[ri]
        row = [0] * t

        def cells(j, left, acc2):
            if j == t:
                if left == 0:
                    fill(ri + 1,
                         tuple(c - row[k] for k, c in enumerate(cols)),
                         acc2)
                return
            hi = min(left, cols[j])
            for v in range(hi + 1):
                row[j] = v
                cells(j + 1, left - v, acc2 + ([v] if v else []))
            row[j] = 0

        cells(0, target, acc)

    fill(0, tuple(alpha), [])
    return tuple(sorted(out.items()))


class DescentElement:
    """An element of the descent algebra of S_r over GF(p)."""

    __slots__ = ("r", "p", "coeffs")

    def __init__(self, r, p, coeffs=None):
        check_prime(p)
        self.r = r
        self.p = p
        self.coeffs = {}
        if coeffs:
            for c, v in coeffs.items():
                c = tuple(c)
                if sum(c) != r or any(x <= 0 for x in c):
                    raise ValueError(f"{c} is not a composition of {r}")
                v = v % p if p else v
                if v:
                    self.coeffs[c] = v

    @classmethod
    def x_basis(cls, r, p, comp):
        return cls(r, p, {tuple(comp): 1})

    @classmethod
    def one(cls, r, p):
        return cls(r, p, {(r,): 1})

    def is_zero(self):
        return not self.coeffs

    def _check(self, other):
        if self.r != other.r or self.p != other.p:
            raise ValueError("mixed descent algebras")

    def __add__(self, other):
        self._check(other)
        vals = dict(self.coeffs)
        for c, v in other.coeffs.items():
            vals[c] = vals.get(c, 0) + v
        return DescentElement(self.r, self.p, vals)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, a):
        return DescentElement(self.r, self.p,
                              {c: a * v for c, v in self.coeffs.items()})

    def __mul__(self, other):
        self._check(other)
        vals = {}
        for ca, va in self.coeffs.items():
            for cb, vb in other.coeffs.items():
                w = va * vb
                for comp, mult in _x_product_table(ca, cb):
                    vals[comp] = vals.get(comp, 0) + w * mult
        return DescentElement(self.r, self.p, vals)

    def __eq__(self, other):
        return isinstance(other, DescentElement) and \
            (self.r, self.p, self.coeffs) == (other.r, other.p, other.coeffs)

    def __hash__(self):
        return hash((self.r, self.p, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        terms = " + ".join(f"{v}*X{list(c)}"
                           for c, v in sorted(self.coeffs.items()))
        return f"DescentElement(r={self.r}, p={self.p}: {terms or '0'})"

    def c_map(self):
        """Image in the algebra of functions on cycle types: X^c goes to
        the Young character of c."""
        vals = {}
        for lam in partitions(self.r):
            tot = 0
            for c, v in self.coeffs.items():
                tot += v * young_character(c, lam)
            tot = tot % self.p if self.p else tot
            if tot:
                vals[lam] = tot
        return ClassFunction(self.r, vals)

    def as_permutation_counter(self):
        """Expansion into permutations (rank capped at 8); used as the
        multiplication oracle."""
        out = Counter()
        for c, v in self.coeffs.items():
            for sigma in xnu_as_permutation_sum(c):
                out[sigma] += v
        if self.p:
            out = Counter({s: v % self.p for s, v in out.items() if v % self.p})
        return out


def multiply_permutation_oracle(a, b):
    """Product computed in the group algebra; (sigma tau)(i) =
    sigma(tau(i)) matches composition of right-acting place permutations.
    """
    a._check(b)
    out = Counter()
    pa = a.as_permutation_counter()
    pb = b.as_permutation_counter()
    for sig, va in pa.items():
        for tau, vb in pb.items():
            comp = tuple(sig[t - 1] for t in tau)
            out[comp] += va * vb
    if a.p:
        out = Counter({s: v % a.p for s, v in out.items() if v % a.p})
    return out


# ---------------------------------------------------------------------------
# action on tensor space


@lru_cache(maxsize=None)
def _digit_table(n, r):
    N = n ** r
    D = np.empty((N, r), dtype=np.int64)
    idx = np.arange(N)
    for pos in range(r - 1, -1, -1):
        D[:, pos] = idx % n
        idx = idx // n
    return D


@lru_cache(maxsize=None)
def _first_block_unshuffle(p, n, r, c):
    """Matrix of w -> sum over subsequences S of size c of w_S . w_rest."""
    N = n ** r
    D = _digit_table(n, r)
    counts = np.zeros((N, N), dtype=np.int64)
    rows_idx = np.arange(N)
    for S in combinations(range(r), c):
        w = np.zeros(r, dtype=np.int64)
        rest = [pos for pos in range(r) if pos not in S]
        for j, pos in enumerate(S):
            w[pos] = n ** (r - 1 - j)
        for j, pos in enumerate(rest):
            w[pos] = n ** (r - c - 1 - j)
        target = D @ w
        np.add.at(counts, (rows_idx, target), 1)
    if p == 2:
        bits = (counts & 1).astype(np.uint8)
        rows = []
        for i in range(N):
            packed = np.packbits(bits[i], bitorder="little")
            rows.append(int.from_bytes(packed.tobytes(), "little"))
        return Mat._wrap2(rows, N)
    return Mat._wrapp(p, counts % p)


@lru_cache(maxsize=None)
def x_action_matrix(p, n, r, comp):
    """Matrix (row convention) of X^comp on T^r of an n-dimensional space.

    Assembled by splitting off the first block: X^(c, tail) equals the
    first-block unshuffle of size c followed by X^tail on the trailing
    r - c positions.
    """
    comp = tuple(comp)
    if sum(comp) != r:
        raise ValueError(f"{comp} is not a composition of {r}")
    if len(comp) <= 1:
        return Mat.identity(p, n ** r)
    c = comp[0]
    B = _first_block_unshuffle(p, n, r, c)
    Mt = x_action_matrix(p, n, r - c, comp[1:])
    return B @ _kron_identity_left(p, n ** c, Mt)


def _kron_identity_left(p, m, M):
    """I_m tensor M; with big-endian word indexing this is a block shift."""
    if p == 2:
        rows = []
        w = M.ncols
        for a in range(m):
            shift = a * w
            rows.extend(row << shift for row in M._d)
        return Mat._wrap2(rows, m * w)
    return Mat._wrapp(p, np.kron(np.eye(m, dtype=np.int64), M._d) % p)


def element_action_matrix(n, elem):
    """Action matrix of a descent element on T^r(V_n)."""
    p, r = elem.p, elem.r
    out = None
    for c, v in sorted(elem.coeffs.items()):
        term = x_action_matrix(p, n, r, c).scale(v)
        out = term if out is None else out + term
    if out is None:
        size = n ** r
        return Mat.zeros(p, size, size)
    return out


def act_on_tensor(elem, n, vec):
    """Apply a descent element to one packed tensor."""
    return element_action_matrix(n, elem).apply(vec)


def act_on_tensors(elem, n, vecs):
    mat = element_action_matrix(n, elem)
    return [mat.apply(v) for v in vecs]


# ---------------------------------------------------------------------------
# idempotent lifting


class IdempotentFamily:
    """Orthogonal primitive idempotents of the descent algebra mod p,
    one per p-equivalence class of partitions, summing to the identity."""

    __slots__ = ("r", "p", "classes", "idempotents")

    def __init__(self, r, p, classes, idempotents):
        self.r = r
        self.p = p
        self.classes = tuple(classes)
        self.idempotents = tuple(idempotents)

    def items(self):
        return list(zip(self.classes, self.idempotents))

    def idempotent_for(self, lam):
        """The idempotent whose class contains the partition lam."""
        lam = tuple(sorted(lam, reverse=True))
        for cl, e in zip(self.classes, self.idempotents):
            if lam in cl:
                return e
        raise KeyError(f"{lam} is not a partition of {self.r}")

    def __iter__(self):
        return iter(zip(self.classes, self.idempotents))


def _lift_in_algebra(y, max_rounds=12):
    """Newton lifting e <- 3e^2 - 2e^3 until e is idempotent."""
    e = y
    for _ in range(max_rounds):
        s = e * e
        if s == e:
            return e
        e = s.scale(3) - (s * e).scale(2)
    raise ArithmeticError("idempotent lifting did not converge")


def solve_class_indicator(r, p, members):
    """A descent element whose class-function image is the indicator of
    the given set of partitions, supported on partition-shaped X^lam."""
    parts = partitions(r)
    cols = parts  # unknowns a_lam, one per partition-shaped basis element
    want = {tuple(sorted(m, reverse=True)) for m in members}
    if p == 2:
        rows = []
        rhs = []
        for lam in parts:
            bits = 0
            for j, mu in enumerate(cols):
                if young_character(mu, lam) % p:
                    bits |= 1 << j
            rows.append(bits)
            rhs.append(1 if lam in want else 0)
        sol = _solve_linear_system(p, rows, rhs, len(cols))
        if sol is None:
            raise ArithmeticError("indicator is not in the image of c")
        part = sol[0]
        coeffs = {cols[j]: 1 for j in range(len(cols)) if part >> j & 1}
    else:
        rows = []
        rhs = []
        for lam in parts:
            rows.append(np.array([young_character(mu, lam) % p
                                  for mu in cols], dtype=np.int64))
            rhs.append(1 if lam in want else 0)
        sol = _solve_linear_system(p, rows, rhs, len(cols))
        if sol is None:
            raise ArithmeticError("indicator is not in the image of c")
        part = sol[0]
        coeffs = {cols[j]: int(part[j]) for j in range(len(cols))
                  if int(part[j])}
    return DescentElement(r, p, coeffs)


def lift_idempotents(r, p):
    """The orthogonal primitive idempotent family of the descent algebra
    of S_r over GF(p).

    For each p-equivalence class, in ascending order of smallest member:
    solve for an element mapping to the class indicator, Newton-lift it
    to an idempotent, then orthogonalize against the already-accepted
    ones by the two-sided product with (1 - partial sum) and re-lift.
    The family is verified to consist of orthogonal idempotents with
    indicator images summing to the identity.
    """
    classes = p_equivalence_classes(r, p)
    one = DescentElement.one(r, p)
    done = []
    partial = DescentElement(r, p, {})
    for cl in classes:
        y = solve_class_indicator(r, p, cl.members)
        e = _lift_in_algebra(y)
        if done:
            resid = one - partial
            e = _lift_in_algebra(resid * e * resid)
        done.append(e)
        partial = partial + e
    fam = IdempotentFamily(r, p, classes, done)
    _verify_family(fam)
    return fam


def _verify_family(fam):
    one = DescentElement.one(fam.r, fam.p)
    total = DescentElement(fam.r, fam.p, {})
    for cl, e in fam:
        if not (e * e == e):
            raise ArithmeticError(f"lift for {cl.smallest} is not idempotent")
        if not e.c_map().is_indicator(cl.members):
            raise ArithmeticError(
                f"lift for {cl.smallest} has the wrong class image")
        total = total + e
    if not (total == one):
        raise ArithmeticError("idempotents do not sum to the identity")
    es = fam.idempotents
    for i in range(len(es)):
        for j in range(len(es)):
            if i != j and not (es[i] * es[j]).is_zero():
                raise ArithmeticError("idempotents are not orthogonal")


def lift_matrix_idempotent(mat, p, max_rounds=12):
    """Newton lifting at the level of an action matrix.

    Mod 2 the step reduces to squaring and mod 3 to cubing, but the
    generic formula is used as stated.
    """
    e = mat
    for _ in range(max_rounds):
        s = e @ e
        if s == e:
            return e
        e = s.scale(3) - ((s @ e).scale(2))
    raise ArithmeticError("matrix idempotent lifting did not converge")


# ---------------------------------------------------------------------------
# graded action check


def gr_action_check(p, n, r, trials=50, seed=0):
    """Check the graded description of the X^nu action on PBW products.

    For a product w = a_1 ... a_l of homogeneous Lie elements of degrees
    lam (non-increasing), X^nu applied to w agrees, modulo the span of
    PBW monomials of lexicographically later type, with the sum over all
    ways of dealing the factors onto blocks with degree sums nu; each
    block keeps its factors in their original order and blocks are
    concatenated in order.  Raises AssertionError with context on the
    first mismatch; returns the number of comparisons on success.
    """
    from .freelie import (concat_packed, filtration_subspace, lie_element,
                          lyndon_words)
    from .combinat import next_partition

    rng = random.Random(seed)
    basis = {}
    for d in range(1, r + 1):
        basis[d] = [lie_element(p, n, w).to_packed() for w in lyndon_words(n, d)]

    def random_lie(d):
        while True:
            if p == 2:
                v = 0
                for b in basis[d]:
                    if rng.randrange(2):
                        v ^= b
                if v:
                    return v
            else:
                v = np.zeros(n ** d, dtype=np.int64)
                for b in basis[d]:
                    v = (v + rng.randrange(p) * np.asarray(b)) % p
                if v.any():
                    return v

    parts_list = partitions(r)
    checked = 0
    for nu in compositions(r):
        mat = x_action_matrix(p, n, r, nu)
        for _ in range(trials):
            lam = parts_list[rng.randrange(len(parts_list))]
            factors = [(d, random_lie(d)) for d in lam]
            w = None
            deg = 0
            for d, v in factors:
                w = v if w is None else concat_packed(p, n, deg, w, d, v)
                deg += d
            lhs = mat.apply(w)
            rhs = _dealt_sum(p, n, nu, factors)
            if p == 2:
                diff = lhs ^ rhs
            else:
                diff = (np.asarray(lhs) - rhs) % p
            nxt = next_partition(lam)
            if nxt is None:
                ok = not diff if p == 2 else not diff.any()
            else:
                ok = filtration_subspace(p, n, r, nxt).contains(diff)
            assert ok, f"graded action mismatch at nu={nu}, type={lam}"
            checked += 1
    return checked


def _dealt_sum(p, n, nu, factors):
    """Sum over ways of dealing the factors onto blocks with degree sums
    nu, of the concatenated block products."""
    from .freelie import concat_packed

    t = len(nu)
    l = len(factors)
    out = None
    assign = [0] * l

    def emit():
        nonlocal out
        blocks = [[] for _ in range(t)]
        for i, (d, v) in enumerate(factors):
            blocks[assign[i]].append((d, v))
        w = None
        deg = 0
        for blk in blocks:
            for d, v in blk:
                w = v if w is None else concat_packed(p, n, deg, w, d, v)
                deg += d
        if out is None:
            out = w if p == 2 else np.array(w)
        else:
            out = (out ^ w) if p == 2 else (out + w) % p

    def rec(i, remaining):
        if i == l:
            if all(x == 0 for x in remaining):
                emit()
            return
        d = factors[i][0]
        for j in range(t):
            if remaining[j] >= d:
                assign[i] = j
                rem = list(remaining)
                rem[j] -= d
                rec(i + 1, rem)

    rec(0, list(nu))
    if out is None:
        size = n ** sum(nu)
        return 0 if p == 2 else np.zeros(size, dtype=np.int64)
    return out
