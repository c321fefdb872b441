"""Splitting tensor powers: class summands, and the recursive B-family.

Two jobs live here.  ``split_tensor_power`` decomposes T^r(V) into the
images of the lifted class idempotents of the descent algebra and checks
the chain of PBW-filtration ranks inside each summand against the
closed-form dimensions.  ``construct_B_family`` builds, degree by
degree, subspaces B_{sk} of the Lie powers L^{sk}(V) such that every
L^{sk}(V) is the direct sum of the free-Lie-algebra pieces generated by
the lower B's plus the new B_{sk}, and each B_{sk} is certified a direct
summand of T^{sk}(V) by an explicit idempotent equivariant projection.

The complement W_{sk} (the new part of B_{sk} beyond the bracket pieces
carried up from lower degrees) is found by an equivariant-projection
solve inside L^{sk}(V), trying weight-preserving solutions first.  The
direct-summand certificate for B_{sk} inside the full tensor power is
then attempted in three stages:

1. canonical: lift the idempotent of the p-class of the one-part cycle
   type to an operator E on T^q, build the span of class-symmetrised
   products of lower-degree basis elements (the star span), and verify
   that T^q = B + star span + ker E; the projection along the last two
   is the certificate.  This avoids any solve at tensor-power scale.
2. direct: for small dimensions, solve for an equivariant projection of
   T^q onto B outright.
3. search: walk the affine family of equivariant complements W and
   retry both certificates for each candidate, up to a configurable cap.

Exhaustion of stage 3 raises ComplementSearchExhausted; the theorems
predict feasibility, so this is always a loudly-reported failure.
"""

from itertools import product as iter_product

import numpy as np

from .combinat import (
    higher_lie_dim,
    p_equivalence_classes,
    partitions,
    witt_dim,
)
from .descent import (
    element_action_matrix,
    lift_idempotents,
    lift_matrix_idempotent,
    solve_class_indicator,
)
from .freelie import (
    bracket_products,
    concat_packed,
    dynkin_matrix,
    filtration_subspace,
    lie_power,
    pbw_monomial_vector,
    pbw_monomials,
    subalgebra_generated,
    truncate_subspace,
)
from .linalg import (
    Mat,
    SpanBuilder,
    Subspace,
    _invert,
    affine_projection_family,
    check_prime,
    index_to_word,
    is_direct_sum,
    solve_equivariant_projection,
    word_weight,
)
from .modrep import gl_generators, induce_on_tensor_power

__all__ = [
    "ClassSummand",
    "FiltrationReport",
    "split_tensor_power",
    "prop35_check",
    "DegreeData",
    "DecompositionResult",
    "ComplementSearchExhausted",
    "construct_B_family",
    "canonical_complement",
    "certify_decomposition",
]

# stage-2 whole-tensor-power solves are only attempted below this dimension
_DIRECT_CERT_CAP = 256
# default stage-3 candidate budget
_DEFAULT_MAX_SEARCH = 64
# hard dimension cap before any dense allocation
_DIM_CAP = 20000


class ComplementSearchExhausted(RuntimeError):
    """All strategies for an equivariant complement failed."""


def _mat_rows(m):
    return list(m._d)


def _rowspace(m, ambient):
    return Subspace.from_packed(m.p, ambient, _mat_rows(m))


def _full_space(p, ambient):
    if p == 2:
        rows = [1 << i for i in range(ambient)]
    else:
        rows = list(np.eye(ambient, dtype=np.int64))
    return Subspace.from_packed(p, ambient, rows)


# ---------------------------------------------------------------------------
# the filtration of T^r(V) by class summands


class ClassSummand:
    """One class summand e_J T^r(V) with its filtration chain ranks."""

    __slots__ = ("members", "summand", "chain_dims", "factor_dims")

    def __init__(self, members, summand, chain_dims, factor_dims):
        self.members = members
        self.summand = summand
        self.chain_dims = chain_dims
        self.factor_dims = factor_dims

    def __repr__(self):
        return "ClassSummand(members=%s, dim=%d)" % (
            list(self.members), self.summand.dim)


class FiltrationReport:
    """T^r(V) split into class summands, with verified chain dims."""

    __slots__ = ("p", "n", "r", "entries")

    def __init__(self, p, n, r, entries):
        self.p = p
        self.n = n
        self.r = r
        self.entries = entries

    def summand_dims(self):
        return [e.summand.dim for e in self.entries]

    def __repr__(self):
        return "FiltrationReport(p=%d, n=%d, r=%d, summand dims %s)" % (
            self.p, self.n, self.r, self.summand_dims())


def split_tensor_power(n, r, p):
    """Split T^r(V) into the images of the lifted class idempotents.

    Validates, by rank differences, that each summand's PBW chain drops
    exactly by the higher-Lie dimension at the class's own partitions
    and not at all elsewhere.  Any mismatch raises ArithmeticError
    naming the class and partition.
    """
    fam = lift_idempotents(r, p)
    parts = sorted(partitions(r))
    wsubs = [filtration_subspace(p, n, r, lam) for lam in parts]
    N = n ** r
    entries = []
    summands = []
    for cls, e in fam:
        E = element_action_matrix(n, e)
        summand = _rowspace(E, N)
        dims = []
        for w in wsubs:
            img = w.basis_matrix() @ E
            dims.append(Subspace.from_packed(p, N, _mat_rows(img)).dim)
        dims.append(0)
        for t, lam in enumerate(parts):
            drop = dims[t] - dims[t + 1]
            want = higher_lie_dim(n, lam) if lam in cls else 0
            if drop != want:
                raise ArithmeticError(
                    "filtration factor mismatch for class %s at partition "
                    "%s: rank drop %d, expected %d"
                    % (cls.smallest, lam, drop, want))
        members = sorted(cls.members)
        chain = [dims[parts.index(lam)] for lam in members] + [0]
        factors = [higher_lie_dim(n, lam) for lam in members]
        if summand.dim != sum(factors) or chain[0] != summand.dim:
            raise ArithmeticError(
                "summand dimension mismatch for class %s: dim %d, chain "
                "top %d, factor sum %d"
                % (cls.smallest, summand.dim, chain[0], sum(factors)))
        entries.append(ClassSummand(members, summand, chain, factors))
        summands.append(summand)
    if not is_direct_sum(summands, _full_space(p, N)):
        raise ArithmeticError(
            "class summands do not decompose the tensor power (p=%d, "
            "n=%d, r=%d)" % (p, n, r))
    return FiltrationReport(p, n, r, entries)


def prop35_check(n, r, p, J):
    """True iff the idempotent of class J maps the PBW monomials of J's
    partitions to a basis of the class summand."""
    fam = lift_idempotents(r, p)
    e = fam.idempotent_for(J.smallest)
    E = element_action_matrix(n, e)
    vecs = []
    for lam in sorted(J.members):
        for mono in pbw_monomials(n, lam):
            vecs.append(E.apply(pbw_monomial_vector(p, n, mono)))
    N = n ** r
    span = Subspace.from_vectors(p, N, vecs)
    return span.dim == len(vecs) and span == _rowspace(E, N)


# ---------------------------------------------------------------------------
# the B-family


class DegreeData:
    """Everything retained for one constructed degree q = s k."""

    __slots__ = ("degree", "s", "basis", "elim", "complement", "lower",
                 "projection", "stage")

    def __init__(self, degree, s, basis, elim, complement, lower,
                 projection, stage):
        self.degree = degree
        self.s = s
        self.basis = basis            # B_q, a Subspace of T^q(V)
        self.elim = elim              # bracket pieces carried from below
        self.complement = complement  # the new equivariant complement W_q
        self.lower = lower            # [(c, L^{s/c} on the degree-ck basis)]
        self.projection = projection  # certificate: T^q -> T^q onto basis
        self.stage = stage            # which strategy produced it (1/2/3)

    def __repr__(self):
        return "DegreeData(degree=%d, dim B=%d, stage=%d)" % (
            self.degree, self.basis.dim, self.stage)


class DecompositionResult:
    """The family B_k, B_2k, ... up to max_degree, with certificates."""

    __slots__ = ("p", "n", "k", "max_degree", "degrees")

    def __init__(self, p, n, k, max_degree, degrees):
        self.p = p
        self.n = n
        self.k = k
        self.max_degree = max_degree
        self.degrees = degrees

    def b_dims(self):
        return {q: d.basis.dim for q, d in sorted(self.degrees.items())}

    def __repr__(self):
        return "DecompositionResult(p=%d, n=%d, k=%d, B dims %s)" % (
            self.p, self.n, self.k, self.b_dims())


def _proper_divisors(s):
    return [c for c in range(1, s) if s % c == 0]


def _p_part(q, p):
    m = 0
    while q % p == 0:
        q //= p
        m += 1
    return m, q


def _ascending_compositions(total):
    out = []

    def rec(minpart, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(minpart, remaining + 1):
            acc.append(part)
            rec(part, remaining - part, acc)
            acc.pop()

    rec(1, total, [])
    return out


def _weight_labels(space, n, r):
    """Weight of each canonical basis row, read off its pivot word."""
    return [word_weight(index_to_word(c, n, r), n) for c in space.pivots]


def _complement_from(space, proj):
    """Ambient kernel of a projection given in domain coordinates."""
    eye = Mat.identity(space.p, space.dim)
    amb = (eye - proj) @ space.basis_matrix()
    return Subspace.from_packed(space.p, space.ambient, _mat_rows(amb))


class _CanonicalUnavailable(Exception):
    pass


def _multisets_with_slot_sum(elems, total):
    """Non-decreasing index tuples into elems with slot counts summing
    to total; elems is a list of (slots, vector)."""
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for j in range(start, len(elems)):
            if elems[j][0] <= remaining:
                acc.append(j)
                rec(j, remaining - elems[j][0], acc)
                acc.pop()

    rec(0, total, [])
    return out


def _canonical_data(q, k, n, p, family, action):
    """Class projector, its kernel, and the star span at degree q.

    The star span is built from products of lower-degree basis elements:
    for each proper divisor degree d, Lie elements over the degree-d
    basis (of the lengths a p-power ladder prescribes) are multiplied in
    non-decreasing order and hit with the class idempotent of the
    matching p-class, computed in base-d coordinates and then expanded
    into T^q(V).  Raises _CanonicalUnavailable when any rank check
    fails.
    """
    N = n ** q
    m, q1 = _p_part(q, p)
    J = None
    for cls in p_equivalence_classes(q, p):
        if (q,) in cls:
            J = cls
            break
    members = sorted(J.members)
    expect = sum(higher_lie_dim(n, lam) for lam in members)

    e0 = solve_class_indicator(q, p, members)
    try:
        E = lift_matrix_idempotent(element_action_matrix(n, e0), p)
    except ArithmeticError as exc:
        raise _CanonicalUnavailable("projector lifting failed: %s" % exc)
    image = _rowspace(E, N)
    if image.dim != expect:
        raise _CanonicalUnavailable(
            "class projector rank %d, expected %d" % (image.dim, expect))
    kernel = _rowspace(Mat.identity(p, N) - E, N)

    # graded generating sets over each lower degree d
    ds = []
    for d in range(k, q, k):
        if q % d:
            continue
        data = family.get(d)
        if data is None or data.basis.dim == 0:
            continue
        j, d1 = _p_part(d, p)
        step = q1 // d1
        b = data.basis.dim
        brows = data.basis.packed_rows()
        elems = []
        for i in range(j, m + 1):
            ell = p ** (i - j) * step
            for row in lie_power(p, b, ell).packed_rows():
                elems.append((ell, row))
        ds.append((d, step, b, brows, elems))

    # slot budgets: c_d slots of width d per divisor, multiples of step
    sigmas = []

    def rec_sigma(idx, remaining, acc):
        if idx == len(ds):
            if remaining == 0:
                sigmas.append(tuple(acc))
            return
        d, step = ds[idx][0], ds[idx][1]
        c = 0
        while c * d <= remaining:
            acc.append(c)
            rec_sigma(idx + 1, remaining - c * d, acc)
            acc.pop()
            c += step

    rec_sigma(0, q, [])

    embed_memo = {}

    def embed(d, brows, word):
        # word letters are 1-based indices into the degree-d basis rows
        key = (d, word)
        got = embed_memo.get(key)
        if got is None:
            got = brows[word[0] - 1]
            deg = d
            for letter in word[1:]:
                got = concat_packed(p, n, deg, got, d, brows[letter - 1])
                deg += d
            embed_memo[key] = got
        return got

    star_matrix_memo = {}

    def star_matrix(c_d, step):
        key = (c_d, step)
        got = star_matrix_memo.get(key)
        if got is None:
            fam_c = lift_idempotents(c_d, p)
            got = fam_c.idempotent_for((step,) * (c_d // step))
            star_matrix_memo[key] = got
        return got

    star_rows = []
    expected_count = 0
    for sigma in sigmas:
        per_d = []
        for (d, step, b, brows, elems), c_d in zip(ds, sigma):
            if c_d == 0:
                continue
            vectors = []
            for multi in _multisets_with_slot_sum(elems, c_d):
                f = None
                slots = 0
                for j in multi:
                    ell, row = elems[j]
                    if f is None:
                        f = row
                    else:
                        f = concat_packed(p, b, slots, f, ell, row)
                    slots += ell
                starred = element_action_matrix(
                    b, star_matrix(c_d, step)).apply(f)
                if p == 2:
                    amb = 0
                    x = starred
                    while x:
                        low = x & -x
                        idx = low.bit_length() - 1
                        x ^= low
                        amb ^= embed(d, brows, index_to_word(idx, b, c_d))
                else:
                    amb = np.zeros(n ** (c_d * d), dtype=np.int64)
                    arr = np.asarray(starred)
                    for idx in np.nonzero(arr)[0]:
                        word = index_to_word(int(idx), b, c_d)
                        amb = (amb + int(arr[idx])
                               * np.asarray(embed(d, brows, word))) % p
                vectors.append((c_d * d, amb))
            per_d.append(vectors)
        if not per_d:
            continue
        count = 1
        for vectors in per_d:
            count *= len(vectors)
        expected_count += count
        for combo in iter_product(*per_d):
            acc = None
            deg = 0
            for piece_deg, vec in combo:
                if acc is None:
                    acc = vec
                else:
                    acc = concat_packed(p, n, deg, acc, piece_deg, vec)
                deg += piece_deg
            star_rows.append(acc)

    star = Subspace.from_packed(p, N, star_rows)
    if star.dim != expected_count:
        raise _CanonicalUnavailable(
            "star span has rank %d from %d products"
            % (star.dim, expected_count))
    return {
        "members": members,
        "projector": E,
        "image": image,
        "kernel": kernel,
        "star": star,
        "expect": expect,
    }


def _assemble_certificate(p, ambient, basis, star, kernel):
    """Projection onto basis along star + kernel, or None if the three
    do not stack to a basis of the tensor power."""
    rows = (list(basis.packed_rows()) + list(star.packed_rows())
            + list(kernel.packed_rows()))
    if len(rows) != ambient:
        return None
    if p == 2:
        stacked = Mat._wrap2(rows, ambient)
        keep = list(basis.packed_rows()) + [0] * (ambient - basis.dim)
        kept = Mat._wrap2(keep, ambient)
    else:
        stacked = Mat._wrapp(p, np.array(rows, dtype=np.int64))
        arr = np.zeros((ambient, ambient), dtype=np.int64)
        if basis.dim:
            arr[:basis.dim] = np.array(list(basis.packed_rows()),
                                       dtype=np.int64)
        kept = Mat._wrapp(p, arr)
    try:
        inv = _invert(stacked)
    except ValueError:
        return None
    return inv @ kept


def _projection_flaw(proj, basis, action):
    """None when proj certifies basis as an equivariant direct summand
    of the tensor power; otherwise a short description of the failure."""
    if proj @ proj != proj:
        return "projection is not idempotent"
    if _rowspace(proj, proj.ncols) != basis:
        return "projection image differs from the stored basis"
    for gi in range(len(action.generators)):
        g = action.induced_matrix(gi)
        if proj @ g != g @ proj:
            return "projection fails to commute with generator %d" % gi
    return None


def _split_off(q, k, n, p, action, lie, lower_sum, elim, family,
               max_search):
    """Find W complementing the settled part of L^q and certify
    B = elim + W as a direct summand of T^q.  Returns (basis, W,
    projection, stage)."""
    N = n ** q
    known = lower_sum.sum(elim)
    if known.dim != lower_sum.dim + elim.dim:
        raise ArithmeticError(
            "bracket pieces overlap the lower Lie pieces at degree %d" % q)

    canon = None
    canon_reason = None
    try:
        canon = _canonical_data(q, k, n, p, family, action)
    except _CanonicalUnavailable as exc:
        canon_reason = str(exc)
    if canon is not None:
        # the star span must meet the Lie power exactly in the lower
        # Lie pieces, and must stack with it to the full class summand
        if canon["star"].intersect(lie) != lower_sum:
            canon_reason = "star span meets the Lie power incorrectly"
            canon = None
    if canon is not None:
        merged = canon["star"].sum(lie)
        if merged.dim != canon["expect"]:
            canon_reason = ("star span plus Lie power has dimension %d, "
                            "expected %d" % (merged.dim, canon["expect"]))
            canon = None
        else:
            img = merged.basis_matrix() @ canon["projector"]
            if Subspace.from_packed(p, N, _mat_rows(img)).dim != merged.dim:
                canon_reason = ("class projector is not injective on the "
                                "star-extended Lie power")
                canon = None

    def try_canonical(wcand):
        if canon is None:
            return None
        cand = elim.sum(wcand)
        if cand.dim != elim.dim + wcand.dim:
            return None
        proj = _assemble_certificate(p, N, cand, canon["star"],
                                     canon["kernel"])
        if proj is None or _projection_flaw(proj, cand, action) is not None:
            return None
        return cand, proj

    def try_direct(wcand):
        if N > _DIRECT_CERT_CAP:
            return None
        cand = elim.sum(wcand)
        if cand.dim != elim.dim + wcand.dim:
            return None
        proj = solve_equivariant_projection(action, cand, _full_space(p, N))
        if proj is None or _projection_flaw(proj, cand, action) is not None:
            return None
        return cand, proj

    if known.dim == lie.dim:
        first = Subspace.zero(p, N)
    else:
        labels = _weight_labels(lie, n, q)
        sol = solve_equivariant_projection(action, known, lie, labels=labels)
        if sol is None:
            raise ComplementSearchExhausted(
                "degree %d: no equivariant projection of the Lie power "
                "onto the settled part exists" % q)
        first = _complement_from(lie, sol)

    got = try_canonical(first)
    if got is not None:
        return got[0], first, got[1], 1
    got = try_direct(first)
    if got is not None:
        return got[0], first, got[1], 2

    tried = 1
    if known.dim < lie.dim:
        fam = affine_projection_family(action, known, lie)
        if fam is not None:
            base, dirs = fam
            total = p ** len(dirs)
            t = 0
            while t < total and tried < max_search:
                combo = base
                rem = t
                for direction in dirs:
                    digit = rem % p
                    rem //= p
                    if digit:
                        combo = combo + direction.scale(digit)
                wcand = _complement_from(lie, combo)
                if wcand != first:
                    tried += 1
                    got = try_canonical(wcand)
                    if got is not None:
                        return got[0], wcand, got[1], 3
                    got = try_direct(wcand)
                    if got is not None:
                        return got[0], wcand, got[1], 3
                t += 1
    detail = "" if canon_reason is None else (
        "; canonical certificate unavailable (%s)" % canon_reason)
    raise ComplementSearchExhausted(
        "degree %d: %d complement candidates exhausted without a "
        "certified projection%s" % (q, tried, detail))


def construct_B_family(n, p, k, max_degree, max_search=_DEFAULT_MAX_SEARCH):
    """Build the family B_k, B_2k, ... splitting Lie powers off tensor
    powers, with a certified equivariant projection at every degree.

    Requires p prime, p not dividing k, and n^max_degree within the
    dense-dimension cap.  Every verification failure raises
    ArithmeticError; complement-search exhaustion raises
    ComplementSearchExhausted.
    """
    check_prime(p)
    if k < 1:
        raise ValueError("k must be positive")
    if k % p == 0:
        raise ValueError("k must not be divisible by p")
    if n < 1:
        raise ValueError("n must be positive")
    smax = max_degree // k
    if smax < 1:
        raise ValueError("max_degree is below k; nothing to construct")
    if n ** (smax * k) > _DIM_CAP:
        raise ValueError(
            "n^%d = %d exceeds the dense-dimension cap %d"
            % (smax * k, n ** (smax * k), _DIM_CAP))
    gens = gl_generators(n, p)
    degrees = {}
    for s in range(1, smax + 1):
        q = s * k
        N = n ** q
        action = induce_on_tensor_power(gens, q)
        lie = lie_power(p, n, q)
        if s == 1:
            inv_k = pow(q % p, p - 2, p)
            proj = dynkin_matrix(p, n, q).scale(inv_k)
            flaw = _projection_flaw(proj, lie, action)
            if flaw is not None:
                raise ArithmeticError(
                    "degree-%d bracketing projection: %s" % (q, flaw))
            degrees[q] = DegreeData(q, s, lie, Subspace.zero(p, N), lie,
                                    [], proj, 1)
            continue

        lower = []
        lower_sb = SpanBuilder(p, N)
        expected_lower = 0
        for c in _proper_divisors(s):
            bd = degrees[c * k].basis
            if bd.dim == 0:
                lower.append((c, Subspace.zero(p, N)))
                continue
            closure = subalgebra_generated(
                p, n, {c * k: list(bd.packed_rows())}, q)
            piece = closure.get(q, Subspace.zero(p, N))
            want = witt_dim(bd.dim, s // c)
            if piece.dim != want:
                raise ArithmeticError(
                    "free generation fails at degree %d: Lie elements of "
                    "length %d over the degree-%d basis span dimension "
                    "%d, expected %d" % (q, s // c, c * k, piece.dim, want))
            lower.append((c, piece))
            for row in piece.packed_rows():
                lower_sb.add(row)
            expected_lower += want
        if lower_sb.dim != expected_lower:
            raise ArithmeticError(
                "lower Lie pieces overlap at degree %d: joint dimension "
                "%d, expected %d" % (q, lower_sb.dim, expected_lower))
        lower_sum = lower_sb.subspace()

        elim_sb = SpanBuilder(p, N)
        expected_elim = 0
        for total in range(1, s - 1):
            i = s - total
            if i < 2:
                continue
            for tau in _ascending_compositions(total):
                if any(i + sum(tau[:u]) <= tau[u] for u in range(len(tau))):
                    continue
                wpart = degrees[i * k].complement
                if wpart.dim == 0:
                    continue
                rows = list(wpart.packed_rows())
                deg = i * k
                count = wpart.dim
                for t_part in tau:
                    bpart = degrees[t_part * k].basis
                    if bpart.dim == 0:
                        count = 0
                        break
                    rows = bracket_products(p, n, deg, rows, t_part * k,
                                            list(bpart.packed_rows()))
                    deg += t_part * k
                    count *= bpart.dim
                if count == 0:
                    continue
                piece = Subspace.from_packed(p, N, rows)
                if piece.dim != count:
                    raise ArithmeticError(
                        "bracket piece over the degree-%d complement with "
                        "appended degrees %s has dimension %d, expected %d"
                        % (i * k, [t * k for t in tau], piece.dim, count))
                for row in piece.packed_rows():
                    elim_sb.add(row)
                expected_elim += count
        if elim_sb.dim != expected_elim:
            raise ArithmeticError(
                "bracket pieces overlap at degree %d: joint dimension %d, "
                "expected %d" % (q, elim_sb.dim, expected_elim))
        elim = elim_sb.subspace()
        if not lie.contains_space(elim) or not lie.contains_space(lower_sum):
            raise ArithmeticError(
                "settled part escapes the Lie power at degree %d" % q)

        basis, wnew, proj, stage = _split_off(
            q, k, n, p, action, lie, lower_sum, elim, degrees, max_search)
        pieces = [piece for _, piece in lower if piece.dim]
        if not is_direct_sum(pieces + [basis], lie):
            raise ArithmeticError(
                "degree-%d Lie power fails to split into the lower pieces "
                "plus the new basis" % q)
        degrees[q] = DegreeData(q, s, basis, elim, wnew, lower, proj, stage)
    return DecompositionResult(p, n, k, max_degree, degrees)


def canonical_complement(q, k, n, p, family):
    """The new complement W at degree q produced by the canonical
    (stage-1) route, given the family data below q.

    family maps constructed degrees to DegreeData.  Recomputes the
    settled part of L^q from the family, solves for an equivariant
    complement, and verifies the canonical certificate.  Raises
    ComplementSearchExhausted when no certified candidate is found
    within the default search budget.
    """
    action = induce_on_tensor_power(gl_generators(n, p), q)
    lie = lie_power(p, n, q)
    N = n ** q
    s = q // k
    if q % k or s < 2:
        raise ValueError("degree must be a multiple of k of weight >= 2")
    lower_sb = SpanBuilder(p, N)
    for c in _proper_divisors(s):
        data = family.get(c * k)
        if data is None or data.basis.dim == 0:
            continue
        closure = subalgebra_generated(
            p, n, {c * k: list(data.basis.packed_rows())}, q)
        for row in closure.get(q, Subspace.zero(p, N)).packed_rows():
            lower_sb.add(row)
    lower_sum = lower_sb.subspace()
    elim_sb = SpanBuilder(p, N)
    for total in range(1, s - 1):
        i = s - total
        if i < 2:
            continue
        for tau in _ascending_compositions(total):
            if any(i + sum(tau[:u]) <= tau[u] for u in range(len(tau))):
                continue
            wdata = family.get(i * k)
            if wdata is None or wdata.complement.dim == 0:
                continue
            rows = list(wdata.complement.packed_rows())
            deg = i * k
            alive = True
            for t_part in tau:
                bdata = family.get(t_part * k)
                if bdata is None or bdata.basis.dim == 0:
                    alive = False
                    break
                rows = bracket_products(p, n, deg, rows, t_part * k,
                                        list(bdata.basis.packed_rows()))
                deg += t_part * k
            if not alive:
                continue
            for row in rows:
                elim_sb.add(row)
    elim = elim_sb.subspace()
    _, wnew, _, _ = _split_off(q, k, n, p, action, lie, lower_sum, elim,
                               family, _DEFAULT_MAX_SEARCH)
    return wnew


def certify_decomposition(result, companion=None):
    """Re-verify a constructed family from its stored data alone.

    Checks, per degree: the stored projection is an idempotent
    equivariant operator with image the stored basis, and the basis
    lies inside the Lie power.  At degrees k, pk, p^2 k, ... the lower
    Lie pieces are re-derived independently and the exact splitting of
    the Lie power is re-checked.  When companion (a family built at a
    smaller n, same p and k) is given, letters beyond its rank are
    truncated away and the bases compared degree by degree.

    Returns a report dict with per-degree check lists and an overall
    "ok" flag; failures are collected, not raised.
    """
    p, n, k = result.p, result.n, result.k
    gens = gl_generators(n, p)
    report = {"p": p, "n": n, "k": k, "max_degree": result.max_degree,
              "degrees": {}, "ok": True}

    def record(q, name, ok):
        report["degrees"].setdefault(q, []).append((name, bool(ok)))
        if not ok:
            report["ok"] = False

    for q in sorted(result.degrees):
        data = result.degrees[q]
        action = induce_on_tensor_power(gens, q)
        lie = lie_power(p, n, q)
        flaw = _projection_flaw(data.projection, data.basis, action)
        record(q, "projection certificate"
               if flaw is None else "projection certificate (%s)" % flaw,
               flaw is None)
        record(q, "basis lies in the Lie power",
               lie.contains_space(data.basis))

    q = k
    while q <= result.max_degree:
        if q in result.degrees:
            pieces = []
            for c in _proper_divisors(q // k):
                if c * k not in result.degrees:
                    continue
                bd = result.degrees[c * k].basis
                if bd.dim == 0:
                    continue
                closure = subalgebra_generated(
                    p, result.n, {c * k: list(bd.packed_rows())}, q)
                piece = closure.get(q)
                if piece is not None and piece.dim:
                    pieces.append(piece)
            pieces.append(result.degrees[q].basis)
            ok = is_direct_sum(pieces, lie_power(p, result.n, q))
            record(q, "Lie power splits over the lower bases", ok)
        q *= p

    if companion is not None:
        if companion.p != p or companion.k != k or companion.n >= n:
            raise ValueError(
                "companion must share p and k and have smaller rank")
        for q in sorted(set(result.degrees) & set(companion.degrees)):
            trunc = truncate_subspace(result.degrees[q].basis, n,
                                      companion.n, q)
            record(q, "truncation to rank %d matches" % companion.n,
                   trunc == companion.degrees[q].basis)
    return report
