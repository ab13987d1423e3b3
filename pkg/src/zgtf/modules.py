"""Module representations: finite presentations and spectrum points.

Two concrete shapes are used everywhere:

* :class:`FpModulePresentation` -- a right module over an order given by k
  generators and a relation matrix over the order (columns are relations).
  Expanded over the base ring it is ``base^(k*r)`` modulo the row lattice
  spanned by all base-ring multiples of the relation columns (r = rank of
  the order over its base ring).
* :class:`PointModule` -- a finite-rank torsionfree (or divisible) module
  with an explicit action: the matrix of every order element acting on
  base-ring coordinates, row-vector convention.

Completions never appear: a p-adic point is modelled by its dense
Z_(p)-form, which gives the same answers for every computation performed
here because all systems are finitely presented over the visible ring.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .scalars import INF, ZZ, QQ, as_fraction
from .linalg import Lattice, identity, mat_mul, smith_form, solve_left, vec_mat


class FpModulePresentation:
    """M = Lambda^k / (column span of Rel), Rel a matrix over the order.

    ``relations`` is a list of columns, each column a sequence of k order
    elements.  Elements of M are represented by base-ring coordinate
    vectors of length ``k * order.rank`` (k consecutive blocks, one per
    generator), well-defined modulo :meth:`relation_lattice`.
    """

    def __init__(self, order, k: int, relations):
        self.order = order
        self.k = k
        self.relations = [tuple(col) for col in relations]
        for col in self.relations:
            if len(col) != k:
                raise ValueError("relation column of length %d, expected %d" % (len(col), k))
        self.ambient = k * order.rank
        self._rel_lattice = None
        self._normal = None

    @property
    def base(self):
        return self.order.base

    def generator(self, i):
        """Coordinates of the i-th generator."""
        v = [Fraction(0)] * self.ambient
        one = self.order.coords(self.order.one())
        r = self.order.rank
        for t in range(r):
            v[i * r + t] = as_fraction(one[t])
        return v

    def element_coords(self, column):
        """Coordinates of sum_i generator_i * column_i for a Lambda^k column."""
        r = self.order.rank
        v = []
        for lam in column:
            v.extend(as_fraction(c) for c in self.order.coords(lam))
        assert len(v) == self.ambient
        return v

    def coords_to_column(self, v):
        """Chunk an ambient coordinate vector back into k order elements."""
        r = self.order.rank
        return tuple(
            self.order.from_coords(v[i * r : (i + 1) * r]) for i in range(self.k)
        )

    def relation_lattice(self) -> Lattice:
        """Base-ring row lattice spanned by all multiples of the relations."""
        if self._rel_lattice is None:
            rows = []
            r = self.order.rank
            basis = [self._basis_element(t) for t in range(r)]
            for col in self.relations:
                for beta in basis:
                    rows.append(self.element_coords([lam * beta for lam in col]))
            self._rel_lattice = Lattice(self.base, self.ambient, rows)
        return self._rel_lattice

    def _basis_element(self, t):
        coords = [0] * self.order.rank
        coords[t] = 1
        return self.order.from_coords(coords)

    def act(self, v, lam):
        """Coordinates of (element v) * lam."""
        r = self.order.rank
        M = self.order.mult_matrix(lam)
        out = []
        for i in range(self.k):
            out.extend(vec_mat(v[i * r : (i + 1) * r], M))
        return out

    # --- structure of the underlying base-ring module -------------------------
    def _normal_form_data(self):
        # Smith decomposition of a full presentation of the abelian group:
        # ambient relations plus nothing else; pad to full square via zero rows.
        if self._normal is None:
            rel = self.relation_lattice().basis()
            if not rel:
                rel = [[Fraction(0)] * self.ambient] if self.ambient else []
            sd = smith_form(rel, self.base)
            self._normal = sd
        return self._normal

    def invariant_factors(self):
        """Elementary divisors of the underlying base module: one entry per
        ambient coordinate, 0 meaning a free summand."""
        sd = self._normal_form_data()
        diag = sd.diagonal()
        out = []
        for i in range(self.ambient):
            d = diag[i] if i < len(diag) else 0
            out.append(abs(d) if d else 0)
        return out

    def is_finite(self):
        return all(d != 0 for d in self.invariant_factors())

    def size(self):
        if not self.is_finite():
            return INF
        prod = 1
        for d in self.invariant_factors():
            prod *= int(d)
        return prod

    def free_rank(self):
        return sum(1 for d in self.invariant_factors() if d == 0)

    def torsion_exponents(self):
        return [d for d in self.invariant_factors() if d not in (0, 1)]

    def normal_form(self, v):
        """Canonical residue tuple of an element (for equality and enumeration)."""
        sd = self._normal_form_data()
        c = vec_mat(list(v), sd.V)
        divisors = self.invariant_factors()
        out = []
        for i in range(self.ambient):
            ci = c[i]
            d = divisors[i]
            if d:
                out.append(int(as_fraction(ci)) % int(d))
            else:
                out.append(as_fraction(ci))
        return tuple(out)

    def from_normal_form(self, nf):
        sd = self._normal_form_data()
        return vec_mat(list(nf), sd.Vinv)

    def is_zero_element(self, v):
        return all(x == 0 for x in self.normal_form(v))

    def elements(self):
        """All elements of a finite module, as ambient coordinate vectors."""
        if not self.is_finite():
            raise ValueError("module is infinite")
        divisors = [int(d) for d in self.invariant_factors()]
        for combo in itertools.product(*[range(d) for d in divisors]):
            yield self.from_normal_form(combo)

    def subgroup_order(self, rows):
        """Order of the subgroup of M generated by ambient coordinate rows."""
        if not self.is_finite():
            raise ValueError("module is infinite")
        rel = self.relation_lattice()
        total = Lattice(self.base, self.ambient, rel.basis() + [list(r) for r in rows])
        # |subgroup| = [L + U : L] = |M| / |ambient / (L+U)|
        m_size = self.size()
        quotient = 1
        sd = smith_form(total.basis(), self.base)
        diag = sd.diagonal()
        for i in range(self.ambient):
            d = diag[i] if i < len(diag) else 0
            if d == 0:
                raise ValueError("module is infinite")
            quotient *= int(abs(d))
        return m_size // quotient

    def __repr__(self):
        return "FpModulePresentation(order=%r, k=%d, relations=%d)" % (
            self.order,
            self.k,
            len(self.relations),
        )


class PointModule:
    """A spectrum point: explicit finite-rank module with exact action.

    ``kind`` is one of ``"p-lattice"``, ``"q-lattice"``, ``"rational"``.
    ``action`` maps each order basis element to its rank-by-rank matrix
    (row convention); the action of a general order element is assembled
    by linearity from coordinates.
    """

    def __init__(self, order, base, rank, action_of_basis, label, kind):
        self.order = order
        self.base = base
        self.rank = rank
        self.action_of_basis = [[row[:] for row in M] for M in action_of_basis]
        self.label = label
        self.kind = kind
        self._act_cache = {}

    @classmethod
    def group_ring_point(cls, order, base, gen_matrix, label, kind):
        """Point over a group-ring order from the matrix of the group generator."""
        rank = len(gen_matrix)
        mats = []
        G = identity(rank, Fraction(1))
        for _ in range(order.p):
            mats.append(G)
            G = mat_mul(G, gen_matrix)
        return cls(order, base, rank, mats, label, kind)

    @property
    def prime(self):
        return self.base.prime

    def act(self, lam):
        key = lam
        M = self._act_cache.get(key)
        if M is None:
            coords = self.order.coords(lam)
            M = [[Fraction(0)] * self.rank for _ in range(self.rank)]
            for c, A in zip(coords, self.action_of_basis):
                c = as_fraction(c)
                if c:
                    for i in range(self.rank):
                        Ai = A[i]
                        Mi = M[i]
                        for j in range(self.rank):
                            Mi[j] += c * Ai[j]
            self._act_cache[key] = M
        return M

    def apply(self, v, lam):
        return vec_mat(list(v), self.act(lam))

    def full_lattice(self) -> Lattice:
        return Lattice.full(self.base, self.rank)

    def direct_sum(self, other) -> "PointModule":
        if other.base != self.base or other.order != self.order:
            raise ValueError("direct sums are materialized only over a common base ring")
        rank = self.rank + other.rank
        mats = []
        for A, B in zip(self.action_of_basis, other.action_of_basis):
            M = [[Fraction(0)] * rank for _ in range(rank)]
            for i in range(self.rank):
                for j in range(self.rank):
                    M[i][j] = A[i][j]
            for i in range(other.rank):
                for j in range(other.rank):
                    M[self.rank + i][self.rank + j] = B[i][j]
            mats.append(M)
        kind = self.kind if self.kind == other.kind else "mixed"
        return PointModule(self.order, self.base, rank, mats,
                           "%s + %s" % (self.label, other.label), kind)

    def rationalized(self) -> "PointModule":
        """The same action viewed over Q (the module Q tensor N)."""
        return PointModule(self.order, QQ, self.rank, self.action_of_basis,
                           "Q(%s)" % self.label, "rational")

    def check_defining_relation(self) -> bool:
        """The action must satisfy the order's defining relations."""
        from .orders import GroupRingOrder

        if isinstance(self.order, GroupRingOrder):
            G = self.act(self.order.gen())
            P = identity(self.rank, Fraction(1))
            for _ in range(self.order.p):
                P = mat_mul(P, G)
            return P == identity(self.rank, Fraction(1))
        # matrix order: action must be linear and multiplicative on a
        # generating set; check on all basis pairs
        for x in self.order.basis_elements():
            for y in self.order.basis_elements():
                if mat_mul(self.act(x), self.act(y)) != self.act(x * y):
                    return False
        return True

    def __repr__(self):
        return "PointModule(%s, rank=%d over %s)" % (self.label, self.rank, self.base.name)
