"""Group actions on tensor powers, for certifying direct summands.

GL(n, F_p) enters through a short generating list: the cyclic letter
permutation, one elementary transvection, and (for p > 2) a primitive
scalar in the first coordinate.  Generation is verified once per (n, p)
by closure enumeration whenever the group order stays below 10^7.

The induced action on T^r(V) substitutes each letter of a word by the
image row of the generator.  Vectors are transformed by r per-position
mixing steps (tensor contractions), so the n^r x n^r matrix of an
induced generator is only materialised on request; the equivariant
solver consumes a TensorAction directly through its apply method.
"""

from functools import lru_cache

import numpy as np

from .linalg import (
    GroupAction,
    Mat,
    SpanBuilder,
    Subspace,
    check_prime,
    rref,
)

__all__ = [
    "primitive_root",
    "group_order_formula",
    "generated_group_order",
    "gl_generators",
    "TensorAction",
    "induce_on_tensor_power",
    "module_closure",
    "is_invariant",
]

# enumerating beyond this is pointless for a sanity check and slow in Python
_CLOSURE_LIMIT = 10 ** 7


def primitive_root(p):
    """Smallest generator of the multiplicative group of F_p."""
    check_prime(p)
    if p == 2:
        return 1
    fac = []
    m = p - 1
    d = 2
    while d * d <= m:
        if m % d == 0:
            fac.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        fac.append(m)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
    raise ArithmeticError("no primitive root found; p is not prime")


def group_order_formula(n, p):
    """|GL(n, F_p)| = prod_{i<n} (p^n - p^i)."""
    pn = p ** n
    out = 1
    for i in range(n):
        out *= pn - p ** i
    return out


def _mul_rows2(arows, brows):
    out = []
    for a in arows:
        acc = 0
        i = 0
        while a:
            if a & 1:
                acc ^= brows[i]
            a >>= 1
            i += 1
        out.append(acc)
    return tuple(out)


def _mul_rowsp(a, b, p, n):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) % p for j in range(n))
        for i in range(n)
    )


def generated_group_order(gens, limit=_CLOSURE_LIMIT):
    """Size of the group generated by the given invertible matrices.

    Plain breadth-first closure with matrices packed as row tuples.
    Raises ArithmeticError if the closure exceeds ``limit`` elements.
    """
    p = gens[0].p
    n = gens[0].nrows
    if p == 2:
        gkeys = [tuple(g._d) for g in gens]
        ident = tuple(1 << i for i in range(n))
        mul = _mul_rows2
    else:
        gkeys = [tuple(tuple(int(x) for x in row) for row in g.to_lists())
                 for g in gens]
        ident = tuple(tuple(1 if i == j else 0 for j in range(n))
                      for i in range(n))
        mul = lambda a, b: _mul_rowsp(a, b, p, n)
    seen = {ident}
    stack = [ident]
    while stack:
        m = stack.pop()
        for g in gkeys:
            prod = mul(m, g)
            if prod not in seen:
                if len(seen) >= limit:
                    raise ArithmeticError(
                        "generated group exceeds %d elements" % limit)
                seen.add(prod)
                stack.append(prod)
    return len(seen)


def _raw_generators(n, p):
    gens = []
    if n == 1:
        gens.append(Mat.from_rows(p, [[primitive_root(p)]]))
        return gens
    cyc = [[0] * n for _ in range(n)]
    for i in range(n):
        cyc[i][(i + 1) % n] = 1
    gens.append(Mat.from_rows(p, cyc))
    trans = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    trans[0][1] = 1
    gens.append(Mat.from_rows(p, trans))
    if p > 2:
        diag = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        diag[0][0] = primitive_root(p)
        gens.append(Mat.from_rows(p, diag))
    return gens


@lru_cache(maxsize=None)
def _gl_generators_checked(n, p):
    gens = _raw_generators(n, p)
    order = group_order_formula(n, p)
    if order <= _CLOSURE_LIMIT:
        got = generated_group_order(gens, limit=order)
        if got != order:
            raise ArithmeticError(
                "generators span a subgroup of order %d inside GL(%d,%d) "
                "of order %d" % (got, n, p, order))
    return tuple(gens)


def gl_generators(n, p):
    """A generating set of GL(n, F_p): letter cycle, one transvection,
    and a primitive diagonal when p > 2.

    Generation is checked by closure enumeration when |GL(n,p)| <= 10^7
    (cached per (n, p)).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    check_prime(p)
    return list(_gl_generators_checked(n, p))


# ---------------------------------------------------------------------------
# induced action on T^r(V)


def _int_to_bits(x, width):
    nb = max(1, (width + 7) // 8)
    raw = np.frombuffer(x.to_bytes(nb, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:width]


def _bits_to_int(bits):
    raw = np.packbits(bits.astype(np.uint8), bitorder="little")
    return int.from_bytes(raw.tobytes(), "little")


class TensorAction:
    """Letter-substitution action of GL(n) generators on T^r(V).

    Duck-types the GroupAction protocol the equivariant solver uses
    (``apply`` plus the length of ``generators``); ``generators`` holds
    the small n x n matrices, with the n^r x n^r induced matrices built
    lazily by ``induced_matrix`` / ``dense_action``.
    """

    __slots__ = ("p", "n", "r", "dim", "generators", "_arrs", "_mats", "_dense")

    def __init__(self, gens, r):
        if not gens:
            raise ValueError("generator list must be nonempty")
        p = gens[0].p
        n = gens[0].nrows
        check_prime(p)
        if r < 0:
            raise ValueError("r must be nonnegative")
        for g in gens:
            if g.p != p or g.nrows != n or g.ncols != n:
                raise ValueError("generator shape/modulus mismatch")
            if rref(g)[1] != n:
                raise ValueError("generators must be invertible")
        self.p = p
        self.n = n
        self.r = r
        self.dim = n ** r
        self.generators = list(gens)
        self._arrs = [np.array(g.to_lists(), dtype=np.int64) for g in gens]
        self._mats = [None] * len(gens)
        self._dense = None

    def apply(self, gi, vec):
        """Image of a packed degree-r tensor under generator gi."""
        g = self._arrs[gi]
        if self.p == 2:
            as_int = isinstance(vec, int)
            if as_int:
                arr = _int_to_bits(vec, self.dim).astype(np.int64)
            else:
                arr = np.asarray(list(vec), dtype=np.int64)
        else:
            arr = np.asarray(vec, dtype=np.int64) % self.p
        arr = arr.reshape((self.n,) * self.r)
        for axis in range(self.r):
            arr = np.moveaxis(
                np.tensordot(arr, g, axes=([axis], [0])), -1, axis) % self.p
        flat = arr.reshape(-1)
        if self.p == 2:
            x = _bits_to_int(flat)
            return x if as_int else [int(b) for b in flat]
        return flat

    def induced_matrix(self, gi):
        """Dense n^r x n^r matrix of generator gi (cached)."""
        if self._mats[gi] is None:
            g = self._arrs[gi]
            if self.p == 2:
                k = np.ones((1, 1), dtype=np.uint8)
                g8 = g.astype(np.uint8)
                for _ in range(self.r):
                    k = np.kron(k, g8)
                packed = np.packbits(k, axis=1, bitorder="little")
                rows = [int.from_bytes(row.tobytes(), "little")
                        for row in packed]
                self._mats[gi] = Mat._wrap2(rows, self.dim)
            else:
                k = np.ones((1, 1), dtype=np.int64)
                for _ in range(self.r):
                    k = np.kron(k, g) % self.p
                self._mats[gi] = Mat._wrapp(self.p, k)
        return self._mats[gi]

    def dense_action(self):
        """The same action as a plain GroupAction with explicit matrices."""
        if self._dense is None:
            self._dense = GroupAction(
                self.p, self.dim,
                [self.induced_matrix(i) for i in range(len(self.generators))])
        return self._dense

    def __repr__(self):
        return "TensorAction(p=%d, n=%d, r=%d, %d generators)" % (
            self.p, self.n, self.r, len(self.generators))


def induce_on_tensor_power(gens, r):
    """Extend generator matrices on V to the degree-r tensor power."""
    return TensorAction(gens, r)


def module_closure(seed, action):
    """Smallest action-invariant subspace containing the seed."""
    sb = SpanBuilder(seed.p, seed.ambient)
    queue = []
    for v in seed.packed_rows():
        if sb.add(v):
            queue.append(v)
    while queue:
        v = queue.pop()
        for gi in range(len(action.generators)):
            w = action.apply(gi, v)
            if sb.add(w):
                queue.append(w)
    return sb.subspace()


def is_invariant(space, action):
    """True iff every generator maps the subspace into itself."""
    for gi in range(len(action.generators)):
        for row in space.packed_rows():
            if not space.contains(action.apply(gi, row)):
                return False
    return True
