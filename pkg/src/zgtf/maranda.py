"""Truncation of the order and of pp-formulas at a power of the prime.

For the local order and k above the bound ``k0``, reduction mod p^k is
faithful enough that pp-membership can be decided in the finite quotient:
``truncate_formula`` sends a formula realized in a lattice to a formula
over the truncated order, and ``untruncate`` lifts a truncated formula
back by wrapping its system in divisibility by p^k.  The bound ``k0`` is
the valuation of the group order for group rings; for the matrix order it
is the smallest k with p^k annihilating every Ext group between lattices,
computed here by an explicit projective-presentation oracle and pinned as
a regression constant.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Lattice, left_kernel, mat_mul, vec_mat
from .modules import PointModule
from .orders import GroupRingOrder, MatrixOrder
from .pp import (
    PpFormula,
    divisibility_all,
    evaluate_point,
    free_realization,
    implies,
    membership_point,
    tf_reduct,
)
from .scalars import INF, ZZ, Zloc, as_fraction, valuation
from .spectrum import regular_point, trivial_point, zeta_point


class TruncatedOrder:
    """The finite quotient of a local group-ring order by p^k."""

    def __init__(self, order: GroupRingOrder, k: int):
        if order.base.prime is None:
            raise ValueError("truncation requires a local base ring")
        if k < 1:
            raise ValueError("k must be positive")
        self.order = order
        self.p = order.base.prime
        self.k = k
        self.modulus = self.p ** k

    def reduce_element(self, lam):
        """Canonical representative: integer coefficients in [0, p^k)."""
        coeffs = []
        for c in lam.coeffs:
            c = as_fraction(c)
            # denominator is a unit mod p^k
            inv = pow(c.denominator, -1, self.modulus)
            coeffs.append((c.numerator * inv) % self.modulus)
        return self.order.element(coeffs)

    def size(self):
        return self.modulus ** self.order.rank

    def __repr__(self):
        return "TruncatedOrder(p=%d, k=%d)" % (self.p, self.k)


class TruncatedPpFormula:
    """A pp-formula over the truncated order: same matrix shape, entries
    reduced to canonical representatives."""

    __slots__ = ("torder", "n", "l", "rows")

    def __init__(self, torder: TruncatedOrder, n, l, rows):
        self.torder = torder
        self.n = n
        self.l = l
        self.rows = tuple(tuple(torder.reduce_element(x) for x in r) for r in rows)

    @property
    def c(self):
        return len(self.rows[0]) if self.rows else 0

    def __repr__(self):
        return "TruncatedPpFormula(n=%d, l=%d, c=%d, k=%d)" % (
            self.n,
            self.l,
            self.c,
            self.torder.k,
        )


class TruncationPreconditionError(ValueError):
    pass


def k0(order) -> int:
    """The annihilation bound for Ext between lattices.

    For a group-ring order this is the p-valuation of the group order; for
    the matrix order it is computed by :func:`k0_ext_oracle`.
    """
    if isinstance(order, GroupRingOrder):
        p = order.base.prime
        if p is None:
            raise ValueError("k0 is defined for local orders; localize first")
        if order.p == 1:
            return 0
        if order.p != p:
            raise ValueError("supported group rings are localized at the group order prime")
        return valuation(order.p, p)
    if isinstance(order, MatrixOrder):
        return k0_ext_oracle(order)
    raise ValueError("unsupported order %r" % (order,))


# ---------------------------------------------------------------------------
# the Ext oracle

def hom_lattice(L: PointModule, N: PointModule):
    """Basis of Hom over the order, as flattened rank_L x rank_N matrices."""
    gens = _order_generators(L.order)
    rows = []
    width = L.rank * N.rank
    # unknown H, row-major; constraints act_L(lam) H = H act_N(lam)
    eqs = []
    for lam in gens:
        A = L.act(lam)
        B = N.act(lam)
        for i in range(L.rank):
            for j in range(N.rank):
                coeffs = [Fraction(0)] * width
                for t in range(L.rank):
                    coeffs[t * N.rank + j] += A[i][t]
                for t in range(N.rank):
                    coeffs[i * N.rank + t] -= B[t][j]
                eqs.append(coeffs)
    if not eqs:
        return [list(r) for r in Lattice.full(L.base, width).basis()]
    ker = left_kernel([[eqs[e][w] for e in range(len(eqs))] for w in range(width)], L.base)
    return ker


def _order_generators(order):
    if isinstance(order, GroupRingOrder):
        return [order.gen()]
    return order.basis_elements()


def ext1_exponents(K: PointModule, Proj: PointModule, incl, N: PointModule):
    """p-valuations of the elementary divisors of Ext^1(L, N), where L is
    presented by 0 -> K -> Proj -> L -> 0 and ``incl`` is the matrix of the
    inclusion in point coordinates (row convention)."""
    base = N.base
    p = base.prime
    hom_proj = hom_lattice(Proj, N)
    hom_k = hom_lattice(K, N)
    if not hom_k:
        return []
    # restriction: H (Proj -> N) composed with incl (K -> Proj) is incl @ H
    restricted = []
    for flat in hom_proj:
        H = [flat[i * N.rank : (i + 1) * N.rank] for i in range(Proj.rank)]
        R = mat_mul(incl, H)
        restricted.append([x for row in R for x in row])
    amb = K.rank * N.rank
    sub = Lattice(base, amb, restricted)
    sup = Lattice(base, amb, hom_k)
    coords = []
    for row in sub.basis():
        c = sup.coords(row)
        if c is None:
            raise AssertionError("restriction does not land in Hom(K, N)")
        coords.append(c)
    from .linalg import smith_form

    if not coords:
        return [INF] * sup.rank()
    sd = smith_form(coords, base)
    diag = sd.diagonal()
    exps = []
    for i in range(sup.rank()):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            exps.append(INF)
        else:
            exps.append(valuation(d, p))
    return [e for e in exps if e != 0]


def k0_ext_oracle(order) -> int:
    """Smallest k with p^k * Ext^1(L, N) = 0 over all indecomposable lattices."""
    if isinstance(order, MatrixOrder):
        from .spectrum import (
            matrix_point_middle,
            matrix_point_p1,
            matrix_point_p2,
        )

        p = order.p
        P = matrix_point_middle(order)
        P1 = matrix_point_p1(order)
        P2 = matrix_point_p2(order)
        P12 = P1.direct_sum(P2)
        incl = [[Fraction(p), 0, 1, 0], [0, 1, 0, Fraction(p)]]
        worst = 0
        # P1, P2 are projective; only L = P contributes
        for N in (P1, P2, P):
            for e in ext1_exponents(P, P12, incl, N):
                if e == INF:
                    raise AssertionError("Ext group has positive rank")
                worst = max(worst, e)
        return worst
    if isinstance(order, GroupRingOrder):
        p = order.base.prime
        if order.p == 1:
            return 0
        reg = regular_point(order.p, order=_localized(order))
        triv = trivial_point(order.p, order=_localized(order))
        zeta = zeta_point(order.p, order=_localized(order))
        # 0 -> zeta-point -> Lambda -> trivial -> 0 via (g-1)g^j
        incl_triv = []
        for j in range(order.p - 1):
            row = [Fraction(0)] * order.p
            row[(j + 1) % order.p] += 1
            row[j] -= 1
            incl_triv.append(row)
        # 0 -> trivial -> Lambda -> zeta-point -> 0 via the norm element
        incl_zeta = [[Fraction(1)] * order.p]
        worst = 0
        for K, incl in ((zeta, incl_triv), (triv, incl_zeta)):
            for N in (triv, zeta, reg):
                for e in ext1_exponents(K, reg, incl, N):
                    if e == INF:
                        raise AssertionError("Ext group has positive rank")
                    worst = max(worst, e)
        return worst
    raise ValueError("unsupported order")


def _localized(order: GroupRingOrder) -> GroupRingOrder:
    if order.base.prime is not None:
        return order
    return GroupRingOrder(order.p, Zloc(order.p))


# ---------------------------------------------------------------------------
# formula truncation

def truncate_formula(phi: PpFormula, k: int, bound=None) -> TruncatedPpFormula:
    """The truncated companion of phi: generator of the pp-type of the
    marked tuple of phi's lattice realization, reduced mod p^k.

    Preconditions (each rejected with its failing clause): k must exceed
    k0; phi must already be its own torsionfree reduct (its free
    realization is a lattice); and phi must lie above divisibility by
    p^(k - k0) in every variable.
    """
    order = phi.order
    if order.base.prime is None:
        raise TruncationPreconditionError("truncation requires a local order")
    kb = k0(order) if bound is None else bound
    if k <= kb:
        raise TruncationPreconditionError("k = %d does not exceed k0 = %d" % (k, kb))
    fr = free_realization(phi)
    if fr.module.torsion_exponents():
        raise TruncationPreconditionError(
            "free realization has torsion; apply the torsionfree reduct first"
        )
    p = order.base.prime
    div = divisibility_all(order, order.scalar(p ** (k - kb)), phi.n)
    if not implies(div, phi):
        raise TruncationPreconditionError(
            "formula does not lie above divisibility by p^%d" % (k - kb)
        )
    torder = TruncatedOrder(order, k)
    return TruncatedPpFormula(torder, phi.n, phi.l, phi.rows)


def untruncate(psi: TruncatedPpFormula, k=None) -> PpFormula:
    """The lifted formula psi*: lift entries to canonical representatives
    and wrap the system in divisibility by p^k.

    For every module N over the order: m satisfies psi* exactly when the
    class of m mod p^k N satisfies psi in N/p^k N.
    """
    torder = psi.torder
    if k is None:
        k = torder.k
    order = torder.order
    pk = order.scalar(torder.p ** k)
    zero = order.zero()
    rows = [list(r) for r in psi.rows]
    for j in range(psi.c):
        slack = [zero] * psi.c
        slack[j] = -pk
        rows.append(slack)
    return PpFormula(order, psi.n, psi.l + psi.c, rows)


def truncated_membership(psi: TruncatedPpFormula, N: PointModule, elements) -> bool:
    """Does the class of the tuple mod p^k N satisfy psi in N/p^k N?"""
    return membership_point(untruncate(psi), N, elements)


def truncated_evaluation(psi: TruncatedPpFormula, N: PointModule) -> Lattice:
    """The preimage in N^n of psi evaluated on N/p^k N (a lattice containing
    p^k N^n); two truncated formulas agree on N_k exactly when these match."""
    return evaluate_point(untruncate(psi), N)


# ---------------------------------------------------------------------------
# property drivers (shared by the test suite and the CLI)

def lemma_membership_biconditional(phi: PpFormula, k: int, N: PointModule, samples, rng):
    """Check: n in phi(N) iff its class satisfies the truncation in N_k.

    Returns the number of (inside, outside) samples exercised; raises on
    any disagreement.
    """
    psi_k = truncate_formula(phi, k)
    inside = outside = 0
    lat = evaluate_point(phi, N)
    basis = lat.basis()
    for _ in range(samples):
        if basis and rng.random() < 0.5:
            coeffs = [rng.randint(-2, 2) for _ in basis]
            v = [sum(c * row[t] for c, row in zip(coeffs, basis)) for t in range(N.rank)]
        else:
            v = [Fraction(rng.randint(-4, 4)) for _ in range(N.rank)]
        direct = membership_point(phi, N, [v])
        trunc = truncated_membership(psi_k, N, [v])
        if direct != trunc:
            raise AssertionError(
                "membership mismatch on %s at k=%d for %r" % (N.label, k, v)
            )
        if direct:
            inside += 1
        else:
            outside += 1
    return inside, outside


def mutual_inverse_roundtrip(phi: PpFormula, k: int, N: PointModule) -> bool:
    """(phi_k)* evaluates like phi on N, and truncating psi* recovers psi
    on N_k; both sides computed as lattices."""
    psi_k = truncate_formula(phi, k)
    lifted = untruncate(psi_k)
    if not evaluate_point(lifted, N).equals(evaluate_point(phi, N)):
        return False
    back = truncate_formula(tf_reduct(lifted), k)
    return truncated_evaluation(back, N).equals(truncated_evaluation(psi_k, N))


def _pk_lattice(phi, k, N):
    p = phi.order.base.prime
    amb = phi.n * N.rank
    pk = Fraction(p) ** k
    rows = []
    for t in range(amb):
        row = [Fraction(0)] * amb
        row[t] = pk
        rows.append(row)
    return Lattice(N.base, amb, rows)


def truncation_order_preserved(phi, phi2, k, N) -> bool:
    """implies(phi, phi2) forces inclusion of the truncated evaluations."""
    a = truncated_evaluation(truncate_formula(phi, k), N)
    b = truncated_evaluation(truncate_formula(phi2, k), N)
    return b.contains_lattice(a)


def hom_lift_exists(L: PointModule, N: PointModule, k: int, kb: int, H_mod) -> bool:
    """Given a matrix H intertwining the actions mod p^k, find a true
    homomorphism F with F = H mod p^(k - k0)."""
    base = L.base
    p = base.prime
    gens = _order_generators(L.order)
    width = L.rank * N.rank
    pk_small = Fraction(p) ** (k - kb)
    # unknowns: F entries (width) plus slack S entries (width) with
    # F - H = p^(k-k0) S; intertwining equations on F alone
    eqs = []
    rhs = []
    for lam in gens:
        A = L.act(lam)
        B = N.act(lam)
        for i in range(L.rank):
            for j in range(N.rank):
                coeffs = [Fraction(0)] * (2 * width)
                for t in range(L.rank):
                    coeffs[t * N.rank + j] += A[i][t]
                for t in range(N.rank):
                    coeffs[i * N.rank + t] -= B[t][j]
                eqs.append(coeffs)
                rhs.append(Fraction(0))
    for w in range(width):
        coeffs = [Fraction(0)] * (2 * width)
        coeffs[w] = 1
        coeffs[width + w] = -pk_small
        eqs.append(coeffs)
        rhs.append(as_fraction(H_mod[w]))
    from .linalg import solve_linear

    return solve_linear(eqs, rhs, base) is not None


def hom_mod_pk_basis(L: PointModule, N: PointModule, k: int):
    """Generators of Hom(L_k, N_k) over Z/p^k, as flattened integer matrices.

    Computed by an integer kernel with p^k slack on every equation.
    """
    p = L.base.prime
    pk = p ** k
    gens = _order_generators(L.order)
    width = L.rank * N.rank
    eqs = []
    for lam in gens:
        A = L.act(lam)
        B = N.act(lam)
        for i in range(L.rank):
            for j in range(N.rank):
                coeffs = [Fraction(0)] * width
                for t in range(L.rank):
                    coeffs[t * N.rank + j] += A[i][t]
                for t in range(N.rank):
                    coeffs[i * N.rank + t] -= B[t][j]
                eqs.append(coeffs)
    if not eqs:
        return [list(r) for r in Lattice.full(ZZ, width).basis()]
    # clear denominators per equation (unit scaling mod p^k) and add slack
    neq = len(eqs)
    dens = []
    for e in range(neq):
        den = 1
        for w in range(width):
            d = as_fraction(eqs[e][w]).denominator
            den = den * d // _gcd(den, d)
        dens.append(den)
    int_rows = [
        [int(as_fraction(eqs[e][w]) * dens[e]) for e in range(neq)] for w in range(width)
    ]
    slack = []
    for e in range(neq):
        srow = [0] * neq
        srow[e] = pk
        slack.append(srow)
    ker = left_kernel(int_rows + slack, ZZ)
    out = []
    for kv in ker:
        out.append([x % pk for x in kv[:width]])
    return out


def _gcd(a, b):
    from math import gcd

    return gcd(a, b)
