"""Catalogs of torsionfree spectrum points and their invariants.

Two catalogs are provided.

* :func:`catalog_zcp` -- the points over the integral group ring of a
  cyclic group of prime order p: three p-adic lattice points (the trivial
  point, the cyclotomic point, the regular point), two points for every
  chosen prime q different from p, and two rational points.  Every point
  carries the pp-pair that picks it out in the membership matrix.
* :func:`catalog_matrix_order` -- the four points over the 2x2 order
  [[R, R], [p^2 R, R]]: the projectives P1 and P2, the middle lattice P,
  and the simple rational point S.

The fundamental quantity is :func:`invariant`: the index of the subgroup
pair evaluated on a point, a prime power or infinity.  Membership of a
point in a basic open pair means invariant > 1.  All p-adic data is
computed exactly over the dense localization; a truncated mod-p^k
evaluation is kept only as a cross-check oracle
(:func:`truncated_invariant`).
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Lattice, left_kernel, mat_mul, mat_transpose, identity, solve_left, vec_mat
from .modules import PointModule
from .orders import GroupRingOrder, MatrixOrder
from .pp import (
    PpFormula,
    annihilator,
    conjoin,
    divisibility,
    evaluate_point,
    pp_true,
    pp_zero,
    pp_type_generator,
)
from .scalars import INF, QQ, ZZ, Zloc, as_fraction, is_prime, valuation


class InvariantValue:
    """An index |phi(N)/psi(N)|: 1, a prime power, or infinity."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        if exponent == 0:
            base = 1
        self.base = base
        self.exponent = exponent

    @classmethod
    def one(cls):
        return cls(1, 0)

    @classmethod
    def infinite(cls):
        return cls(1, INF)

    @classmethod
    def from_index(cls, n, prime_hint=None):
        if n == INF:
            return cls.infinite()
        n = int(n)
        if n == 1:
            return cls.one()
        if prime_hint and n > 1:
            e = 0
            while n % prime_hint == 0:
                n //= prime_hint
                e += 1
            if n != 1:
                raise ValueError("index is not a power of %d" % prime_hint)
            return cls(prime_hint, e)
        # factor as a prime power
        for p in range(2, n + 1):
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                if n != 1:
                    raise ValueError("index is not a prime power")
                return cls(p, e)
        raise AssertionError

    @property
    def value(self):
        if self.exponent == INF:
            return INF
        return self.base ** self.exponent

    def is_one(self):
        return self.exponent == 0

    def is_infinite(self):
        return self.exponent == INF

    def __mul__(self, other):
        if self.is_infinite() or other.is_infinite():
            return InvariantValue.infinite()
        if self.is_one():
            return other
        if other.is_one():
            return self
        if self.base != other.base:
            raise ValueError("cannot multiply invariants at different primes exactly")
        return InvariantValue(self.base, self.exponent + other.exponent)

    def __ge__(self, threshold):
        if self.exponent == INF:
            return True
        return self.value >= threshold

    def __eq__(self, other):
        if isinstance(other, InvariantValue):
            return self.value == other.value
        return self.value == other

    def __hash__(self):
        return hash(("InvariantValue", self.value))

    def __str__(self):
        if self.is_infinite():
            return "inf"
        if self.is_one():
            return "1"
        return "%d^%d" % (self.base, self.exponent)

    __repr__ = __str__


class CatalogEntry:
    __slots__ = ("point", "cb_rank", "isolating_pairs")

    def __init__(self, point, cb_rank, isolating_pairs):
        self.point = point
        self.cb_rank = cb_rank
        self.isolating_pairs = list(isolating_pairs)

    @property
    def label(self):
        return self.point.label

    def __repr__(self):
        return "CatalogEntry(%s, cb_rank=%d)" % (self.label, self.cb_rank)


# ---------------------------------------------------------------------------
# the group-ring points

def _companion_of_cyclotomic(p):
    """Action of g on Z[zeta_p] in the basis 1, zeta, ..., zeta^(p-2)."""
    n = p - 1
    rows = []
    for i in range(n):
        if i < n - 1:
            row = [Fraction(0)] * n
            row[i + 1] = Fraction(1)
        else:
            row = [Fraction(-1)] * n
        rows.append(row)
    return rows


def trivial_point(p, base_prime=None, order=None):
    """Rank-1 point with g acting as the identity."""
    order = order or GroupRingOrder(p, ZZ)
    q = base_prime or p
    base = Zloc(q)
    kind = "p-lattice" if q == p else "q-lattice"
    label = "Zhat_%d" % q
    return PointModule.group_ring_point(order, base, [[Fraction(1)]], label, kind)


def zeta_point(p, base_prime=None, order=None):
    """Rank p-1 point with g acting as a primitive p-th root of unity."""
    order = order or GroupRingOrder(p, ZZ)
    q = base_prime or p
    base = Zloc(q)
    kind = "p-lattice" if q == p else "q-lattice"
    label = "Zhat_%d(zeta_%d)" % (q, p)
    return PointModule.group_ring_point(order, base, _companion_of_cyclotomic(p), label, kind)


def regular_point(p, order=None):
    """The order itself: rank p, g acting by the cyclic shift."""
    order = order or GroupRingOrder(p, ZZ)
    G = [[Fraction(1) if j == (i + 1) % p else Fraction(0) for j in range(p)] for i in range(p)]
    return PointModule.group_ring_point(order, Zloc(p), G, "Zhat_%dC%d" % (p, p), "p-lattice")


def rational_trivial_point(p, order=None):
    order = order or GroupRingOrder(p, ZZ)
    return PointModule.group_ring_point(order, QQ, [[Fraction(1)]], "Q", "rational")


def rational_zeta_point(p, order=None):
    order = order or GroupRingOrder(p, ZZ)
    return PointModule.group_ring_point(
        order, QQ, _companion_of_cyclotomic(p), "Q(zeta_%d)" % p, "rational"
    )


def catalog_zcp(p, qs=()):
    """The torsionfree spectrum catalog over the integral group ring of C(p).

    Entry order: the three p-adic points (trivial, cyclotomic, regular),
    then two points per q, then the two rational points.
    """
    if not is_prime(p):
        raise ValueError("p must be prime, got %r" % (p,))
    qs = sorted(set(qs))
    for q in qs:
        if not is_prime(q) or q == p:
            raise ValueError("q values must be primes different from p; got %r" % (q,))
    order = GroupRingOrder(p, ZZ)
    phi = order.phi()
    one = order.one()
    g = order.gen()
    pp_p = divisibility(order, order.scalar(p))

    # the three p-adic pairs; idempotent scalars enter multiplied by p so
    # that every coefficient lies in the order
    pair_reg = (divisibility(order, phi), pp_p)
    pair_e1 = (divisibility(order, phi), divisibility(order, p * phi))
    pair_e2 = (
        divisibility(order, order.scalar(p) - phi),
        divisibility(order, p * (one - g)),
    )
    entries = [
        CatalogEntry(trivial_point(p, order=order), 0, [pair_e1]),
        CatalogEntry(zeta_point(p, order=order), 0, [pair_e2]),
        CatalogEntry(regular_point(p, order=order), 0, [pair_reg]),
    ]
    for q in qs:
        pair_q1 = (divisibility(order, phi), divisibility(order, order.scalar(q)))
        pair_q2 = (divisibility(order, one - g), divisibility(order, order.scalar(q)))
        entries.append(CatalogEntry(trivial_point(p, base_prime=q, order=order), 0, [pair_q1]))
        entries.append(CatalogEntry(zeta_point(p, base_prime=q, order=order), 0, [pair_q2]))
    pair_rat1 = (annihilator(order, order.scalar(p) - phi), pp_zero(order))
    pair_rat2 = (annihilator(order, phi), pp_zero(order))
    entries.append(CatalogEntry(rational_trivial_point(p, order=order), 1, [pair_rat1]))
    entries.append(CatalogEntry(rational_zeta_point(p, order=order), 1, [pair_rat2]))
    return entries


# ---------------------------------------------------------------------------
# the matrix-order points

def _matrix_point(order: MatrixOrder, scale_power: int, base, label, kind):
    """Row pair (p^s * R, R) in coordinates (u, v) -> (p^s u, v)."""
    p = order.p
    s = Fraction(p) ** scale_power
    mats = []
    for beta in order.basis_elements():
        a, b, c, d = beta.a, beta.b, beta.c, beta.d
        mats.append([[a, s * b], [c / s, d]])
    return PointModule(order, base, 2, mats, label, kind)


def matrix_point_p1(order):
    return _matrix_point(order, 0, order.base, "P1", "p-lattice")


def matrix_point_p2(order):
    return _matrix_point(order, 2, order.base, "P2", "p-lattice")


def matrix_point_middle(order):
    return _matrix_point(order, 1, order.base, "P", "p-lattice")


def matrix_point_simple(order):
    return _matrix_point(order, 0, QQ, "S", "rational")


def _matrix_lattice_pairs(order):
    """Isolating pairs for P1, P2, P from the left almost-split maps.

    phi generates the pp-type of a cyclic generator; psi the pp-type of its
    image under the irreducible map out of the point.
    """
    p = order.p
    P1 = matrix_point_p1(order)
    P2 = matrix_point_p2(order)
    P = matrix_point_middle(order)
    g1 = [Fraction(1), Fraction(0)]  # (1, 0) in P1
    g2 = [Fraction(0), Fraction(1)]  # (0, 1) in P2
    gm = [Fraction(1), Fraction(1)]  # (p, 1) in P-coordinates
    phi1 = pp_type_generator(P1, [g1], [g1, [Fraction(0), Fraction(1)]])
    phi2 = pp_type_generator(P2, [g2], [[Fraction(1), Fraction(0)], g2])
    phim = pp_type_generator(P, [gm], [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]])
    # images: multiplication by p maps P1 into P; inclusion maps P2 into P
    img1 = [Fraction(1), Fraction(0)]  # p*(1,0) = (p, 0) -> P-coords (1, 0)
    img2 = [Fraction(0), Fraction(1)]  # (0, 1) -> P-coords (0, 1)
    P_gens = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    psi1 = pp_type_generator(P, [img1], P_gens)
    psi2 = pp_type_generator(P, [img2], P_gens)
    # left almost-split map out of P lands in P1 + P2:
    # (p,1) maps to ((p,1),(p^2,p)), i.e. P1-coords (p,1), P2-coords (1,p)
    P12 = P1.direct_sum(P2)
    img_m = [Fraction(p), Fraction(1), Fraction(1), Fraction(p)]
    gens12 = [
        [Fraction(1), Fraction(0), Fraction(0), Fraction(0)],
        [Fraction(0), Fraction(0), Fraction(0), Fraction(1)],
    ]
    psim = pp_type_generator(P12, [img_m], gens12)
    return (phi1, psi1), (phi2, psi2), (phim, psim)


def catalog_matrix_order(p):
    """The four spectrum points of the 2x2 order, with CB ranks 0, 0, 0, 1."""
    order = MatrixOrder(p)
    (pair1, pair2, pairm) = _matrix_lattice_pairs(order)
    pair_s = (annihilator(order, order.e2()), pp_zero(order))
    return [
        CatalogEntry(matrix_point_p1(order), 0, [pair1]),
        CatalogEntry(matrix_point_p2(order), 0, [pair2]),
        CatalogEntry(matrix_point_middle(order), 0, [pairm]),
        CatalogEntry(matrix_point_simple(order), 1, [pair_s]),
    ]


# ---------------------------------------------------------------------------
# invariants

def invariant(phi: PpFormula, psi: PpFormula, N: PointModule) -> InvariantValue:
    """|phi(N) : (phi and psi)(N)| as a prime power or infinity."""
    meet = conjoin(phi, psi)
    A = evaluate_point(phi, N)
    B = evaluate_point(meet, N)
    idx = B.index_in(A)
    return InvariantValue.from_index(idx, prime_hint=N.prime)


def membership_matrix(entries, pairs, require_separation=True):
    """Boolean matrix: rows per point, columns per pair; cell true when the
    point lies in the basic open set of the pair.

    With ``require_separation`` the rows must be pairwise distinct.
    """
    matrix = []
    for entry in entries:
        row = []
        for (phi, psi) in pairs:
            row.append(not invariant(phi, psi, entry.point).is_one())
        matrix.append(row)
    if require_separation:
        seen = {}
        for entry, row in zip(entries, matrix):
            key = tuple(row)
            if key in seen:
                raise SeparationError(
                    "points %s and %s have identical membership rows"
                    % (seen[key], entry.label)
                )
            seen[key] = entry.label
    return matrix


class SeparationError(AssertionError):
    pass


def reconstruct_cb_ranks(entries, matrix):
    """Recompute Cantor-Bendixson ranks from a membership matrix.

    A lattice point is isolated (rank 0) when it sits in a pair that is a
    singleton, or when its row differs from every other lattice point's
    row (signature separation).  Rational points must fail to be isolated
    (every pair containing one contains a lattice point) and be separated
    from each other once the isolated points are removed; they get rank 1.
    """
    ranks = {}
    lattice_idx = [i for i, e in enumerate(entries) if e.point.kind != "rational"]
    rational_idx = [i for i, e in enumerate(entries) if e.point.kind == "rational"]
    ncols = len(matrix[0]) if matrix else 0
    for i in lattice_idx:
        singleton = any(
            matrix[i][j] and all(not matrix[t][j] for t in range(len(entries)) if t != i)
            for j in range(ncols)
        )
        signature = all(matrix[i] != matrix[t] for t in lattice_idx if t != i)
        if not (singleton or signature):
            raise SeparationError("lattice point %s is not isolated by the matrix" % entries[i].label)
        ranks[entries[i].label] = 0
    for i in rational_idx:
        for j in range(ncols):
            if matrix[i][j] and not any(matrix[t][j] for t in lattice_idx):
                raise SeparationError(
                    "rational point %s appears isolated from the lattice points"
                    % entries[i].label
                )
        signature = all(matrix[i] != matrix[t] for t in rational_idx if t != i)
        if not signature:
            raise SeparationError("rational points are not separated at level 1")
        ranks[entries[i].label] = 1
    return ranks


# ---------------------------------------------------------------------------
# the almost-split sequence of the matrix order

def ar_sequence_check(p):
    """Verify the almost-split sequence 0 -> P -> P1 + P2 -> P -> 0.

    Four sub-checks are reported: both maps are homomorphisms over the
    order, the composition is zero, the sequence is exact, and the left
    map admits no retraction.
    """
    order = MatrixOrder(p)
    P = matrix_point_middle(order)
    P1 = matrix_point_p1(order)
    P2 = matrix_point_p2(order)
    P12 = P1.direct_sum(P2)
    base = order.base
    pf = Fraction(p)
    # (pa, b) |-> ((pa, b), (p^2 a, p b)); P/P1/P2 coordinates as documented
    F_left = [
        [pf, 0, 1, 0],
        [0, 1, 0, pf],
    ]
    # ((a', b'), (p^2 c', d')) |-> (p a' - p^2 c', p b' - d') in P-coordinates
    F_right = [
        [Fraction(1), Fraction(0)],
        [Fraction(0), pf],
        [-pf, Fraction(0)],
        [Fraction(0), Fraction(-1)],
    ]
    report = {}
    gens = order.basis_elements()
    report["left_map_is_homomorphism"] = all(
        mat_mul(P.act(lam), F_left) == mat_mul(F_left, P12.act(lam)) for lam in gens
    )
    report["right_map_is_homomorphism"] = all(
        mat_mul(P12.act(lam), F_right) == mat_mul(F_right, P.act(lam)) for lam in gens
    )
    comp = mat_mul(F_left, F_right)
    report["zero_composition"] = all(x == 0 for row in comp for x in row)
    # exactness: injective left, surjective right, kernel = image in the middle
    inj = len(left_kernel(F_left, base)) == 0
    img_right = Lattice(base, 2, F_right)
    surj = img_right.index_in(Lattice.full(base, 2)) == 1
    middle_kernel = Lattice(base, 4, left_kernel(F_right, base))
    middle_image = Lattice(base, 4, F_left)
    middle = middle_kernel.equals(middle_image)
    report["exact"] = inj and surj and middle
    report["example_image"] = vec_mat([Fraction(1), Fraction(1)], F_left)
    # retraction search: X with F_left * X = id and X a homomorphism
    report["non_split"] = not _retraction_exists(order, P, P12, F_left)
    report["all_passed"] = all(
        report[k] for k in
        ("left_map_is_homomorphism", "right_map_is_homomorphism", "zero_composition", "exact", "non_split")
    )
    return report


def _retraction_exists(order, P, P12, F_left):
    base = order.base
    gens = order.basis_elements()
    # unknowns: entries of the 4x2 matrix X, flattened row-major
    cols = []
    rhs = []
    def add_equation(coeffs, value):
        cols.append(coeffs)
        rhs.append(value)
    # F_left @ X = I2
    for i in range(2):
        for j in range(2):
            coeffs = [Fraction(0)] * 8
            for t in range(4):
                coeffs[t * 2 + j] = F_left[i][t]
            add_equation(coeffs, Fraction(1) if i == j else Fraction(0))
    # intertwining: act12(lam) @ X == X @ actP(lam)
    for lam in gens:
        A = P12.act(lam)
        B = P.act(lam)
        for i in range(4):
            for j in range(2):
                coeffs = [Fraction(0)] * 8
                for t in range(4):
                    coeffs[t * 2 + j] += A[i][t]
                for t in range(2):
                    coeffs[i * 2 + t] -= B[t][j]
                add_equation(coeffs, Fraction(0))
    from .linalg import solve_linear

    return solve_linear(cols, rhs, base) is not None


# ---------------------------------------------------------------------------
# truncated cross-check and approximation stabilization

def truncated_invariant(phi: PpFormula, psi: PpFormula, N: PointModule, kmax=8):
    """Invariant recomputed mod p^k for growing k; returns the stabilized
    value, or infinity when the truncated indices keep growing.

    This is the cross-check oracle for the design decision to compute over
    the dense localization instead of a completion.
    """
    p = N.prime
    if p is None:
        raise ValueError("truncated computation needs a point at a finite prime")
    prev = None
    for k in range(1, kmax + 1):
        cur = _truncated_index(phi, psi, N, k)
        if prev is not None and cur == prev:
            return InvariantValue.from_index(cur, prime_hint=p)
        prev = cur
    return InvariantValue.infinite()


def _truncated_index(phi, psi, N, k):
    """|image of phi(N) : image of (phi and psi)(N)| inside N/p^k N."""
    meet = conjoin(phi, psi)
    a = _truncated_subgroup_size(phi, N, k)
    b = _truncated_subgroup_size(meet, N, k)
    assert a % b == 0
    return a // b


def _truncated_subgroup_size(phi, N, k):
    """Number of solution classes of the formula's system mod p^k, projected
    to the free variables; computed by an integer kernel with p^k slack."""
    from .pp import _point_system

    p = N.prime
    rk = N.rank
    amb = phi.n * rk
    pk = p ** k
    if phi.c == 0:
        return pk ** amb
    M = _point_system(phi, N)
    # clear denominators (unit scaling per unknown row is harmless mod p^k)
    rows = []
    for r in M:
        den = 1
        for x in r:
            den = _lcm(den, as_fraction(x).denominator)
        rows.append([int(as_fraction(x) * den) for x in r])
    ncols = len(rows[0]) if rows else 0
    slack = [[0] * ncols for _ in range(ncols)]
    for t in range(ncols):
        slack[t][t] = pk
    ker = left_kernel(rows + slack, ZZ)
    proj = [kv[:amb] for kv in ker]
    lat = Lattice(ZZ, amb, proj + [[pk if t == s else 0 for t in range(amb)] for s in range(amb)])
    idx = lat.index_in(Lattice.full(ZZ, amb))
    return (pk ** amb) // int(idx)


def _lcm(a, b):
    from math import gcd

    return a * b // gcd(a, b)


def approximation_formula(phi: PpFormula, p: int, i: int, perturbation) -> PpFormula:
    """The formula as seen with coefficients known only mod p^i.

    Every entry (s, j) is perturbed by p^i times ``perturbation(s, j)`` and
    every equation is relaxed to divisibility by p^i.  The result always
    lies above phi; stabilization tests check when it stops moving.
    """
    order = phi.order
    zero = order.zero()
    pk = order.scalar(p ** i)
    rows = []
    for s in range(phi.n + phi.l):
        rows.append([phi.rows[s][j] + pk * perturbation(s, j) for j in range(phi.c)])
    # relax each column j: (x, y) * col_j = p^i * z_j
    for j in range(phi.c):
        slack = [zero] * phi.c
        slack[j] = -pk
        rows.append(slack)
    return PpFormula(order, phi.n, phi.l + phi.c, rows)
