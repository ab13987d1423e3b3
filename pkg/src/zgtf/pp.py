"""Positive-primitive formulas in canonical matrix form.

A pp-formula with n free and l bound variables is stored as a matrix T
over the order with n + l rows: a tuple x satisfies the formula in a
module M exactly when some y in M^l has (x, y) * T = 0, reading (x, y) as
a row vector of module elements and each column of T as one homogeneous
equation.  Two special shapes fix the representation of the lattice
bounds: "x = x" is the matrix with no columns, and "x = 0" is the n-by-n
identity with no bound rows.

Lattice operations (conjunction and sum), implication via free
realizations, evaluation on point modules and on finite presentations,
and the torsionfree reduct are all reductions to the exact linear algebra
of :mod:`zgtf.linalg`.  Formula equality throughout the package means
mutual implication, never syntactic identity.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Lattice, left_kernel, solve_left, vec_mat
from .modules import FpModulePresentation, PointModule
from .scalars import as_fraction


class PpFormula:
    __slots__ = ("order", "n", "l", "rows", "_hash")

    def __init__(self, order, n, l, rows):
        self.order = order
        self.n = n
        self.l = l
        self.rows = tuple(tuple(r) for r in rows)
        if len(self.rows) != n + l:
            raise ValueError("expected %d rows, got %d" % (n + l, len(self.rows)))
        c = self.c
        for r in self.rows:
            if len(r) != c:
                raise ValueError("ragged formula matrix")
        self._hash = None

    @property
    def c(self):
        return len(self.rows[0]) if self.rows else 0

    def column(self, j):
        return [self.rows[i][j] for i in range(self.n + self.l)]

    def __eq__(self, other):
        return (
            isinstance(other, PpFormula)
            and self.order == other.order
            and self.n == other.n
            and self.l == other.l
            and self.rows == other.rows
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.order, self.n, self.l, self.rows))
        return self._hash

    def __repr__(self):
        return "PpFormula(n=%d, l=%d, c=%d over %r)" % (self.n, self.l, self.c, self.order)


# ---------------------------------------------------------------------------
# constructors

def pp_true(order, n=1) -> PpFormula:
    """x = x: no constraints."""
    return PpFormula(order, n, 0, [[] for _ in range(n)])


def pp_zero(order, n=1) -> PpFormula:
    """x = 0: n identity columns, no bound variables."""
    rows = []
    for i in range(n):
        row = [order.zero()] * n
        row[i] = order.one()
        rows.append(row)
    return PpFormula(order, n, 0, rows)


def divisibility(order, lam) -> PpFormula:
    """lam | x, i.e. exists y with x = y * lam."""
    return PpFormula(order, 1, 1, [[order.one()], [-lam]])


def annihilator(order, lam) -> PpFormula:
    """x * lam = 0."""
    return PpFormula(order, 1, 0, [[lam]])


def divisibility_all(order, lam, n) -> PpFormula:
    """Conjunction of lam | x_i over all free variables."""
    out = None
    for i in range(n):
        f = extend_formula(divisibility(order, lam), n, [i])
        out = f if out is None else conjoin(out, f)
    return out if out is not None else pp_true(order, n)


# ---------------------------------------------------------------------------
# structural operations

def extend_formula(phi: PpFormula, new_n: int, positions) -> PpFormula:
    """View an n-variable formula as a new_n-variable formula.

    ``positions[i]`` says which new free slot the old variable i occupies;
    the other new variables are unconstrained.
    """
    if len(positions) != phi.n:
        raise ValueError("need one position per old variable")
    zero = phi.order.zero()
    rows = [[zero] * phi.c for _ in range(new_n)]
    for old_i, new_i in enumerate(positions):
        rows[new_i] = list(phi.rows[old_i])
    for k in range(phi.l):
        rows.append(list(phi.rows[phi.n + k]))
    return PpFormula(phi.order, new_n, phi.l, rows)


def conjoin(phi: PpFormula, psi: PpFormula) -> PpFormula:
    """Meet: defines phi(M) intersect psi(M) in every module."""
    _check_pair(phi, psi)
    n = phi.n
    zero = phi.order.zero()
    rows = []
    for i in range(n):
        rows.append(list(phi.rows[i]) + list(psi.rows[i]))
    for k in range(phi.l):
        rows.append(list(phi.rows[n + k]) + [zero] * psi.c)
    for k in range(psi.l):
        rows.append([zero] * phi.c + list(psi.rows[n + k]))
    return simplify(PpFormula(phi.order, n, phi.l + psi.l, rows))


def conjoin_many(order, n, formulas):
    out = pp_true(order, n)
    for f in formulas:
        out = conjoin(out, f)
    return out


def add(phi: PpFormula, psi: PpFormula) -> PpFormula:
    """Join: defines phi(M) + psi(M) in every module.

    Encoded as: exists u, y_phi, y_psi with (u, y_phi) satisfying phi's
    system and (x - u, y_psi) satisfying psi's system.
    """
    _check_pair(phi, psi)
    n = phi.n
    zero = phi.order.zero()
    rows = []
    # free rows x
    for i in range(n):
        rows.append([zero] * phi.c + list(psi.rows[i]))
    # bound rows u
    for i in range(n):
        rows.append(list(phi.rows[i]) + [-t for t in psi.rows[i]])
    # bound rows y_phi
    for k in range(phi.l):
        rows.append(list(phi.rows[n + k]) + [zero] * psi.c)
    # bound rows y_psi
    for k in range(psi.l):
        rows.append([zero] * phi.c + list(psi.rows[n + k]))
    return simplify(PpFormula(phi.order, n, n + phi.l + psi.l, rows))


def scale(phi: PpFormula, lam) -> PpFormula:
    """Defines phi(M) * lam: exists x' in phi with x = x' * lam."""
    n = phi.n
    order = phi.order
    zero = order.zero()
    one = order.one()
    rows = []
    for i in range(n):
        row = [zero] * n
        row[i] = one
        rows.append(row + [zero] * phi.c)
    for i in range(n):
        row = [zero] * n
        row[i] = -lam
        rows.append(row + list(phi.rows[i]))
    for k in range(phi.l):
        rows.append([zero] * n + list(phi.rows[n + k]))
    return PpFormula(order, n, n + phi.l, rows)


def exists_project(phi: PpFormula, idx: int) -> PpFormula:
    """Bind free variable idx: the projection formula exists x_idx . phi."""
    if not 0 <= idx < phi.n:
        raise ValueError("no free variable %d" % idx)
    rows = [phi.rows[i] for i in range(phi.n) if i != idx]
    rows.append(phi.rows[idx])
    for k in range(phi.l):
        rows.append(phi.rows[phi.n + k])
    return PpFormula(phi.order, phi.n - 1, phi.l + 1, rows)


def zero_params(phi: PpFormula, keep: int) -> PpFormula:
    """Substitute 0 for every free variable except ``keep``."""
    rows = [phi.rows[keep]]
    for k in range(phi.l):
        rows.append(phi.rows[phi.n + k])
    return PpFormula(phi.order, 1, phi.l, rows)


def simplify(phi: PpFormula) -> PpFormula:
    """Cheap size reduction: drop zero/duplicate columns, unused bound
    variables, and bound variables pinned by a unit coefficient.

    Purely opportunistic; logical equivalence is preserved.
    """
    order = phi.order
    n = phi.n
    cols = [phi.column(j) for j in range(phi.c)]
    cols = [c for c in cols if any(not x.is_zero() for x in c)]
    seen = set()
    uniq = []
    for c in cols:
        key = tuple(c)
        if key not in seen:
            seen.add(key)
            uniq.append(list(c))
    cols = uniq

    # eliminate bound variables with a unit pivot
    bound = list(range(n, n + phi.l))
    changed = True
    while changed:
        changed = False
        for r in bound:
            for j, col in enumerate(cols):
                u = col[r]
                if u.is_zero():
                    continue
                uinv = order.unit_inverse(u)
                if uinv is None:
                    continue
                for j2, col2 in enumerate(cols):
                    if j2 == j:
                        continue
                    coef = col2[r]
                    if not coef.is_zero():
                        factor = uinv * coef
                        for t in range(len(col2)):
                            col2[t] = col2[t] - col[t] * factor
                # the pivot column now determines this bound variable; drop both
                cols = [c for t, c in enumerate(cols) if t != j]
                for c in cols:
                    del c[r]
                bound = list(range(n, n + len(bound) - 1))
                changed = True
                break
            if changed:
                break

    # drop bound rows that appear in no column
    nrows = n + len(bound)
    used = [False] * nrows
    for c in cols:
        for i in range(nrows):
            if not c[i].is_zero():
                used[i] = True
    keep_rows = list(range(n)) + [i for i in range(n, nrows) if used[i]]
    cols = [[c[i] for i in keep_rows] for c in cols]
    new_l = len(keep_rows) - n
    rows = [[col[i] for col in cols] for i in range(len(keep_rows))]
    if not rows:
        rows = [[] for _ in range(n)]
    return PpFormula(order, n, new_l, rows)


def _check_pair(phi, psi):
    if phi.order != psi.order:
        raise ValueError("formulas over different orders")
    if phi.n != psi.n:
        raise ValueError("free-variable arity mismatch: %d vs %d" % (phi.n, psi.n))


# ---------------------------------------------------------------------------
# free realizations

class FreeRealization:
    """Pointed finitely presented module whose marked tuple generates the
    pp-type of the source formula."""

    __slots__ = ("module", "marked")

    def __init__(self, module: FpModulePresentation, marked):
        self.module = module
        self.marked = [list(m) for m in marked]


def free_realization(phi: PpFormula) -> FreeRealization:
    """Lambda^(n+l) modulo the columns of T, marked at the first n generators."""
    cols = [phi.column(j) for j in range(phi.c)]
    module = FpModulePresentation(phi.order, phi.n + phi.l, cols)
    marked = [module.generator(i) for i in range(phi.n)]
    return FreeRealization(module, marked)


# ---------------------------------------------------------------------------
# evaluation

def _point_system(phi: PpFormula, N: PointModule):
    """Rows-by-columns base-ring matrix of the expanded homogeneous system.

    Unknown blocks are the coordinates of the n + l module variables; each
    formula column contributes ``rank`` base-ring equations.
    """
    nl = phi.n + phi.l
    rk = N.rank
    width = phi.c * rk
    M = []
    for s in range(nl):
        for a in range(rk):
            row = [Fraction(0)] * width
            for j in range(phi.c):
                A = N.act(phi.rows[s][j])
                for b in range(rk):
                    row[j * rk + b] = A[a][b]
            M.append(row)
    return M


def evaluate_point(phi: PpFormula, N: PointModule) -> Lattice:
    """The subgroup phi(N) inside N^n, as a lattice of coordinate rows."""
    for s in range(phi.n + phi.l):
        for lam in phi.rows[s]:
            for c in phi.order.coords(lam):
                if not N.base.contains(c):
                    raise ValueError(
                        "formula coefficient %r does not lie in the point's base ring %s"
                        % (lam, N.base.name)
                    )
    rk = N.rank
    amb = phi.n * rk
    if phi.c == 0:
        return Lattice.full(N.base, amb)
    M = _point_system(phi, N)
    ker = left_kernel(M, N.base)
    rows = [k[:amb] for k in ker]
    return Lattice(N.base, amb, rows)


def membership_point(phi: PpFormula, N: PointModule, elements) -> bool:
    """Is the given tuple of N-elements (coordinate vectors) in phi(N)?"""
    if len(elements) != phi.n:
        raise ValueError("tuple arity mismatch")
    rk = N.rank
    if phi.c == 0:
        return True
    M = _point_system(phi, N)
    fixed = []
    for m in elements:
        fixed.extend(as_fraction(t) for t in m)
    head = M[: phi.n * rk]
    tail = M[phi.n * rk :]
    rhs = [-x for x in vec_mat(fixed, head)]
    if not tail:
        return all(x == 0 for x in rhs)
    return solve_left(tail, rhs, N.base) is not None


def _fp_system(phi: PpFormula, M: FpModulePresentation):
    """Expanded system for a finite presentation; appends one block of
    relation-combination unknowns per formula column."""
    nl = phi.n + phi.l
    amb = M.ambient
    rel = M.relation_lattice().basis()
    nrel = len(rel)
    width = phi.c * amb
    rows = []
    for s in range(nl):
        base_rows = []
        for t in range(amb):
            row = [Fraction(0)] * width
            base_rows.append(row)
        # unknown s is a module element (amb coordinates); its image under
        # right multiplication by a column entry acts blockwise per generator
        for j in range(phi.c):
            lam = phi.rows[s][j]
            Mult = M.order.mult_matrix(lam)
            r = M.order.rank
            for gslot in range(M.k):
                for a in range(r):
                    for b in range(r):
                        base_rows[gslot * r + a][j * amb + gslot * r + b] = Mult[a][b]
        rows.extend(base_rows)
    # relation slack: for each column j, each relation basis row can be added
    for j in range(phi.c):
        for rrow in rel:
            row = [Fraction(0)] * width
            for t in range(amb):
                row[j * amb + t] = rrow[t]
            rows.append(row)
    return rows, nrel


def evaluate_fp(phi: PpFormula, M: FpModulePresentation) -> Lattice:
    """phi(M) in M^n: a lattice of ambient coordinate rows that contains the
    per-slot relation lattice (elements are defined modulo relations)."""
    amb = M.ambient
    total = phi.n * amb
    rel = M.relation_lattice().basis()
    rel_rows = []
    for i in range(phi.n):
        for rrow in rel:
            row = [Fraction(0)] * total
            row[i * amb : (i + 1) * amb] = rrow
            rel_rows.append(row)
    if phi.c == 0:
        return Lattice.full(M.base, total)
    rows, _ = _fp_system(phi, M)
    ker = left_kernel(rows, M.base)
    nl = phi.n + phi.l
    proj = [k[:total] for k in ker]
    return Lattice(M.base, total, proj + rel_rows)


def membership_fp(phi: PpFormula, M: FpModulePresentation, elements) -> bool:
    """Is the tuple (coordinate vectors, mod relations) in phi(M)?"""
    if len(elements) != phi.n:
        raise ValueError("tuple arity mismatch")
    if phi.c == 0:
        return True
    rows, _ = _fp_system(phi, M)
    amb = M.ambient
    fixed = []
    for m in elements:
        fixed.extend(as_fraction(t) for t in m)
    head = rows[: phi.n * amb]
    tail = rows[phi.n * amb :]
    rhs = [-x for x in vec_mat(fixed, head)]
    if not tail:
        return all(x == 0 for x in rhs)
    return solve_left(tail, rhs, M.base) is not None


def evaluate(phi: PpFormula, module):
    """Dispatch: evaluate on a point module or a finite presentation."""
    if isinstance(module, PointModule):
        return evaluate_point(phi, module)
    return evaluate_fp(phi, module)


# ---------------------------------------------------------------------------
# implication and equivalence

def implies(phi: PpFormula, psi: PpFormula) -> bool:
    """phi <= psi: phi(M) contained in psi(M) for every module M.

    Decided by the free-realization criterion: the marked tuple of phi's
    free realization must satisfy psi there.
    """
    _check_pair(phi, psi)
    fr = free_realization(phi)
    return membership_fp(psi, fr.module, fr.marked)


def equivalent(phi: PpFormula, psi: PpFormula) -> bool:
    return implies(phi, psi) and implies(psi, phi)


# ---------------------------------------------------------------------------
# pp-type generators and the torsionfree reduct

def reduce_order_columns(order, k, cols):
    """Thin a list of Lambda^k columns to a sublist with the same span over
    the order (checked through base-ring expansions).

    A base-ring basis of a module is wildly redundant as an order
    generating set; dropping the redundancy keeps free realizations small.
    """
    r = order.rank
    amb = k * r
    base = order.base
    basis = []
    for t in range(r):
        coords = [0] * r
        coords[t] = 1
        basis.append(order.from_coords(coords))

    def expand(col):
        v = []
        for lam in col:
            v.extend(as_fraction(x) for x in order.coords(lam))
        return v

    chosen = []
    rows = []
    lattice = None
    for col in cols:
        vec = expand(col)
        if all(x == 0 for x in vec):
            continue
        if lattice is not None and lattice.contains(vec):
            continue
        chosen.append(col)
        for beta in basis:
            rows.append(expand([lam * beta for lam in col]))
        lattice = Lattice(base, amb, rows)
    return chosen


def pp_type_generator(N: PointModule, marked, generators) -> PpFormula:
    """Generator of the pp-type of ``marked`` in the lattice point N.

    ``generators`` must generate N over the order; the result is the
    presentation formula of the pointed module (N, marked).
    """
    order = N.order
    r = order.rank
    k = len(generators)
    basis = []
    for t in range(r):
        coords = [0] * r
        coords[t] = 1
        basis.append(order.from_coords(coords))
    # map Lambda^k -> N on base coordinates
    rows = []
    for i in range(k):
        for t in range(r):
            rows.append(N.apply(generators[i], basis[t]))
    ker = left_kernel(rows, N.base)
    rel_cols = []
    for kv in ker:
        col = []
        for i in range(k):
            col.append(order.from_coords(kv[i * r : (i + 1) * r]))
        rel_cols.append(col)
    rel_cols = reduce_order_columns(order, k, rel_cols)
    umat = []
    for m in marked:
        sol = solve_left(rows, list(m), N.base)
        if sol is None:
            raise ValueError("marked element is not generated by the given generators")
        umat.append([order.from_coords(sol[i * r : (i + 1) * r]) for i in range(k)])
    zero = order.zero()
    one = order.one()
    n = len(marked)
    out_rows = []
    for i in range(n):
        row = [zero] * n
        row[i] = one
        out_rows.append(row + [zero] * len(rel_cols))
    for i in range(k):
        row = [-umat[j][i] for j in range(n)]
        row += [col[i] for col in rel_cols]
        out_rows.append(row)
    return simplify(PpFormula(order, n, k, out_rows))


def tf_reduct(phi: PpFormula) -> PpFormula:
    """The torsionfree reduct: a formula phi_bar <= phi agreeing with phi
    on every torsionfree module.

    Construction: present M/Tor(M) for a free realization (M, m) by
    saturating the relation lattice over the base ring, and read off the
    presentation formula of the image of the marked tuple.
    """
    fr = free_realization(phi)
    M = fr.module
    rel = M.relation_lattice()
    sat = rel.saturate()
    cols = [M.coords_to_column(row) for row in sat.basis()]
    cols = reduce_order_columns(phi.order, phi.n + phi.l, cols)
    rows = []
    for i in range(phi.n + phi.l):
        rows.append([col[i] for col in cols])
    return simplify(PpFormula(phi.order, phi.n, phi.l, rows))
