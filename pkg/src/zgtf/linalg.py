"""Exact linear algebra over Z, Z_(p) and Q.

Matrices are plain lists of rows.  Over Z the entries are ints; over the
localizations and over Q they are Fractions.  The central routine is
:func:`smith_form`, which returns a full decomposition ``U*A*V = D`` with
``U``, ``V`` invertible over the declared ring and ``D`` diagonal with a
divisibility chain.  Everything else (solving, kernels, lattice indices,
saturation) is derived from it.

Conventions used throughout the package:

* submodules of ``ring^m`` are *row spans* (:class:`Lattice`),
* the kernel of a matrix is the *left* kernel ``{x : x*A = 0}``,
* the public :func:`solve_linear` uses the column convention ``A*x = b``
  expected by callers that think of ``A`` as a system of equations.

Pivot rules are deterministic so decompositions are reproducible: over Z
the pivot is the entry of smallest absolute value (ties broken by
position); over Z_(p) it is the entry of smallest p-adic valuation, again
with positional tie-break, and units are anything of valuation 0.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import INF, ZZ, QQ, IntegerRing, LocalRing, RationalField, as_fraction, valuation


# ---------------------------------------------------------------------------
# basic matrix helpers (shape = list of rows; entries int or Fraction)

def identity(n, one=1):
    return [[one if i == j else 0 * one for j in range(n)] for i in range(n)]


def zeros(r, c):
    return [[0] * c for _ in range(r)]


def mat_copy(A):
    return [row[:] for row in A]


def mat_shape(A):
    return len(A), len(A[0]) if A else 0


def mat_mul(A, B):
    m = len(A)
    n = len(B[0]) if B else 0
    k = len(B)
    out = []
    for i in range(m):
        Ai = A[i]
        row = []
        for j in range(n):
            s = 0
            for t in range(k):
                a = Ai[t]
                if a:
                    s += a * B[t][j]
            row.append(s)
        out.append(row)
    return out


def vec_mat(v, A):
    n = len(A[0]) if A else 0
    out = [0] * n
    for t, a in enumerate(v):
        if a:
            row = A[t]
            for j in range(n):
                out[j] += a * row[j]
    return out


def mat_transpose(A):
    m, n = mat_shape(A)
    return [[A[i][j] for i in range(m)] for j in range(n)]


def mat_eq(A, B):
    if mat_shape(A) != mat_shape(B):
        return False
    return all(A[i][j] == B[i][j] for i in range(len(A)) for j in range(len(A[0]) if A else 0))


def matrix_str(A) -> str:
    """Row-major bracketed serialization, e.g. ``[[1, 2], [3, 4]]``."""
    from .scalars import scalar_str

    return "[" + ", ".join("[" + ", ".join(scalar_str(x) for x in row) + "]" for row in A) + "]"


# ---------------------------------------------------------------------------
# Smith normal form

class SmithDecomposition:
    """Holds U, D, V with U*A*V = D, plus the inverses of U and V.

    Invariants: U, V invertible over the base ring; D diagonal with each
    diagonal entry dividing the next (up to units); diagonal entries are
    non-negative over Z and exact p-powers over Z_(p).
    """

    __slots__ = ("U", "D", "V", "Uinv", "Vinv", "ring")

    def __init__(self, U, D, V, Uinv, Vinv, ring):
        self.U = U
        self.D = D
        self.V = V
        self.Uinv = Uinv
        self.Vinv = Vinv
        self.ring = ring

    def diagonal(self):
        m, n = mat_shape(self.D)
        return [self.D[i][i] for i in range(min(m, n))]

    def rank(self):
        return sum(1 for d in self.diagonal() if d != 0)


def _check_entries(A, ring):
    for row in A:
        for x in row:
            if not ring.contains(x):
                raise ValueError("matrix entry %r is not in the ring %s" % (x, ring.name))


class _Tracker:
    """Applies paired elementary operations to D, U/Uinv and V/Vinv."""

    def __init__(self, A, cast):
        self.m, self.n = mat_shape(A)
        self.D = [[cast(x) for x in row] for row in A]
        one = cast(1)
        self.U = identity(self.m, one)
        self.Uinv = identity(self.m, one)
        self.V = identity(self.n, one)
        self.Vinv = identity(self.n, one)

    # row ops act on the left: D -> E*D, U -> E*U, Uinv -> Uinv*E^-1
    def row_swap(self, i, j):
        if i == j:
            return
        self.D[i], self.D[j] = self.D[j], self.D[i]
        self.U[i], self.U[j] = self.U[j], self.U[i]
        for r in range(self.m):
            row = self.Uinv[r]
            row[i], row[j] = row[j], row[i]

    def row_add(self, i, j, c):
        # row_i += c * row_j
        if not c:
            return
        Di, Dj = self.D[i], self.D[j]
        for t in range(self.n):
            Di[t] += c * Dj[t]
        Ui, Uj = self.U[i], self.U[j]
        for t in range(self.m):
            Ui[t] += c * Uj[t]
        for r in range(self.m):
            row = self.Uinv[r]
            row[j] -= c * row[i]

    def row_scale(self, i, u, uinv):
        self.D[i] = [u * x for x in self.D[i]]
        self.U[i] = [u * x for x in self.U[i]]
        for r in range(self.m):
            self.Uinv[r][i] *= uinv

    # column ops act on the right: D -> D*E, V -> V*E, Vinv -> E^-1*Vinv
    def col_swap(self, i, j):
        if i == j:
            return
        for r in range(self.m):
            row = self.D[r]
            row[i], row[j] = row[j], row[i]
        for r in range(self.n):
            row = self.V[r]
            row[i], row[j] = row[j], row[i]
        self.Vinv[i], self.Vinv[j] = self.Vinv[j], self.Vinv[i]

    def col_add(self, j, k, c):
        # col_j += c * col_k
        if not c:
            return
        for r in range(self.m):
            row = self.D[r]
            row[j] += c * row[k]
        for r in range(self.n):
            row = self.V[r]
            row[j] += c * row[k]
        Vk, Vj = self.Vinv[k], self.Vinv[j]
        for t in range(self.n):
            Vk[t] -= c * Vj[t]

    def col_scale(self, j, u, uinv):
        for r in range(self.m):
            self.D[r][j] *= u
        for r in range(self.n):
            self.V[r][j] *= u
        self.Vinv[j] = [uinv * x for x in self.Vinv[j]]


def _pivot_int(D, t, m, n):
    best = None
    for i in range(t, m):
        row = D[i]
        for j in range(t, n):
            a = row[j]
            if a:
                key = (abs(a), i, j)
                if best is None or key < best:
                    best = key
    return None if best is None else (best[1], best[2])


def _smith_int(A):
    tr = _Tracker(A, int)
    m, n = tr.m, tr.n
    t = 0
    while t < min(m, n):
        pos = _pivot_int(tr.D, t, m, n)
        if pos is None:
            break
        tr.row_swap(pos[0], t)
        tr.col_swap(pos[1], t)
        while True:
            if tr.D[t][t] < 0:
                tr.row_scale(t, -1, -1)
            piv = tr.D[t][t]
            dirty = False
            for i in range(t + 1, m):
                a = tr.D[i][t]
                if a:
                    tr.row_add(i, t, -(a // piv))
                    if tr.D[i][t]:
                        tr.row_swap(i, t)
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(t + 1, n):
                a = tr.D[t][j]
                if a:
                    tr.col_add(j, t, -(a // piv))
                    if tr.D[t][j]:
                        tr.col_swap(j, t)
                        dirty = True
                        break
            if dirty:
                continue
            break
        t += 1
    return tr


def smith_form(A, ring) -> SmithDecomposition:
    """Smith decomposition of A over ZZ, Zloc(p) or QQ.

    Raises ``ValueError`` for entries outside the declared ring (e.g. p in
    a denominator over Z_(p)).
    """
    m, n = mat_shape(A)
    if m == 0 or n == 0:
        one = 1 if isinstance(ring, IntegerRing) else Fraction(1)
        return SmithDecomposition(identity(m, one), mat_copy(A) if m else [],
                                  identity(n, one), identity(m, one), identity(n, one), ring)
    _check_entries(A, ring)

    if isinstance(ring, IntegerRing):
        A_int = [[int(as_fraction(x)) for x in row] for row in A]
        tr = _smith_int(A_int)
        # enforce the divisibility chain d1 | d2 | ...
        while True:
            diag = [tr.D[i][i] for i in range(min(m, n))]
            bad = None
            for i in range(len(diag) - 1):
                if diag[i] and diag[i + 1] % diag[i] != 0:
                    bad = i
                    break
            if bad is None:
                break
            tr.row_add(bad, bad + 1, 1)
            # re-run the diagonalization; ops only ever shrink the diagonal
            D2 = tr.D
            tr2 = _smith_int(D2)
            tr = _compose(tr, tr2)
        return SmithDecomposition(tr.U, tr.D, tr.V, tr.Uinv, tr.Vinv, ring)

    if isinstance(ring, LocalRing):
        p = ring.prime
        val = lambda x: valuation(x, p)
        target = lambda v: Fraction(p) ** v
    elif isinstance(ring, RationalField):
        val = lambda x: 0
        target = lambda v: Fraction(1)
    else:
        raise TypeError("unsupported ring %r" % (ring,))

    tr = _Tracker(A, as_fraction)
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = tr.D[i]
            for j in range(t, n):
                a = row[j]
                if a:
                    key = (val(a), i, j)
                    if best is None or key < best:
                        best = key
        if best is None:
            break
        tr.row_swap(best[1], t)
        tr.col_swap(best[2], t)
        piv = tr.D[t][t]
        goal = target(val(piv))
        u = goal / piv  # unit of the local ring
        tr.row_scale(t, u, 1 / u)
        for i in range(t + 1, m):
            a = tr.D[i][t]
            if a:
                tr.row_add(i, t, -(a / goal))
        for j in range(t + 1, n):
            a = tr.D[t][j]
            if a:
                tr.col_add(j, t, -(a / goal))
        t += 1
    return SmithDecomposition(tr.U, tr.D, tr.V, tr.Uinv, tr.Vinv, ring)


def _compose(tr, tr2):
    """Compose two trackers: the second was run on the D of the first."""
    out = tr
    out.D = tr2.D
    out.U = mat_mul(tr2.U, tr.U)
    out.Uinv = mat_mul(tr.Uinv, tr2.Uinv)
    out.V = mat_mul(tr.V, tr2.V)
    out.Vinv = mat_mul(tr2.Vinv, tr.Vinv)
    return out


# ---------------------------------------------------------------------------
# derived operations

def _ring_div(a, d, ring):
    """a / d if the quotient lies in the ring, else None (d nonzero)."""
    q = as_fraction(a) / as_fraction(d)
    if not ring.contains(q):
        return None
    if isinstance(ring, IntegerRing):
        return int(q)
    return q


def solve_linear(A, b, ring):
    """Some x with A*x = b over the ring, or None when no solution exists.

    Column convention: A is m-by-n, b has length m, x has length n.
    """
    m, n = mat_shape(A)
    if len(b) != m:
        raise ValueError("dimension mismatch: %d rows vs %d entries" % (m, len(b)))
    if m == 0:
        return [0] * n
    sd = smith_form(A, ring)
    c = vec_mat(b, mat_transpose(sd.U))  # c = U*b
    diag = sd.diagonal()
    w = [0] * n
    for i in range(m):
        ci = c[i]
        if i < len(diag) and diag[i] != 0:
            q = _ring_div(ci, diag[i], ring)
            if q is None:
                return None
            w[i] = q
        elif ci != 0:
            return None
    x = vec_mat(w, mat_transpose(sd.V))  # x = V*w
    return x


def solve_left(A, b, ring):
    """Some x with x*A = b (row convention), or None."""
    return solve_linear(mat_transpose(A), b, ring)


def left_kernel(A, ring):
    """Basis rows of {x : x*A = 0}."""
    m, n = mat_shape(A)
    if m == 0:
        return []
    if n == 0:
        one = 1 if isinstance(ring, IntegerRing) else Fraction(1)
        return identity(m, one)
    sd = smith_form(A, ring)
    diag = sd.diagonal()
    rows = []
    for i in range(m):
        if i >= len(diag) or diag[i] == 0:
            rows.append(sd.U[i][:])
    return rows


# ---------------------------------------------------------------------------
# row lattices (finitely generated submodules of ring^m)

class Lattice:
    """The row span of a set of vectors inside ``ring^ambient``."""

    def __init__(self, ring, ambient, rows):
        self.ring = ring
        self.ambient = ambient
        self.rows = [list(r) for r in rows]
        for r in self.rows:
            if len(r) != ambient:
                raise ValueError("row of length %d in ambient %d" % (len(r), ambient))
        self._basis = None
        self._basis_smith = None

    @classmethod
    def zero(cls, ring, ambient):
        return cls(ring, ambient, [])

    @classmethod
    def full(cls, ring, ambient):
        one = 1 if isinstance(ring, IntegerRing) else Fraction(1)
        return cls(ring, ambient, identity(ambient, one))

    def basis(self):
        """A canonical basis of the row span (rows d_i * Vinv_i of the Smith form)."""
        if self._basis is None:
            if not self.rows:
                self._basis = []
            else:
                sd = smith_form(self.rows, self.ring)
                diag = sd.diagonal()
                rows = []
                for i, d in enumerate(diag):
                    if d != 0:
                        rows.append([d * x for x in sd.Vinv[i]])
                self._basis = rows
        return self._basis

    def rank(self):
        return len(self.basis())

    def is_zero(self):
        return self.rank() == 0

    def _basis_matrix_smith(self):
        if self._basis_smith is None:
            self._basis_smith = smith_form(self.basis(), self.ring)
        return self._basis_smith

    def coords(self, v):
        """Coordinates of v in the canonical basis (None if v not in the lattice)."""
        B = self.basis()
        if not B:
            return [] if all(x == 0 for x in v) else None
        return solve_left(B, list(v), self.ring)

    def contains(self, v):
        return self.coords(v) is not None

    def contains_lattice(self, other) -> bool:
        return all(self.contains(r) for r in other.basis())

    def equals(self, other) -> bool:
        return self.contains_lattice(other) and other.contains_lattice(self)

    def sum(self, other) -> "Lattice":
        if other.ambient != self.ambient:
            raise ValueError("ambient mismatch")
        return Lattice(self.ring, self.ambient, self.basis() + other.basis())

    def intersect(self, other) -> "Lattice":
        A = self.basis()
        B = other.basis()
        if not A or not B:
            return Lattice.zero(self.ring, self.ambient)
        stacked = A + [[-x for x in row] for row in B]
        ker = left_kernel(stacked, self.ring)
        # x*stacked = 0 means u*A = w*B; read the common value u*A
        rows = [vec_mat(k[: len(A)], A) for k in ker]
        return Lattice(self.ring, self.ambient, rows)

    def index_in(self, sup) -> "int | float":
        """Index [sup : self]; requires self to be contained in sup.

        Returns an integer when finite and INF when the quotient has
        positive free rank (rank drop).
        """
        coords = []
        for row in self.basis():
            c = sup.coords(row)
            if c is None:
                raise ValueError("lattice is not contained in the claimed superlattice")
            coords.append(c)
        r_sup = sup.rank()
        if r_sup == 0:
            return 1
        if not coords:
            return INF
        sd = smith_form(coords, self.ring)
        diag = [d for d in sd.diagonal() if d != 0]
        if len(diag) < r_sup:
            return INF
        if self.ring.is_field:
            return 1
        prod = 1
        for d in diag:
            prod *= abs(as_fraction(d))
        return int(prod)

    def saturate(self) -> "Lattice":
        """Smallest direct-summand sublattice of ring^ambient containing self.

        Over Z this adjoins exactly the torsion of the quotient; over a
        field it is the lattice itself.
        """
        if self.ring.is_field or not self.basis():
            return Lattice(self.ring, self.ambient, self.basis())
        sd = self._basis_matrix_smith()
        r = sd.rank()
        rows = [sd.Vinv[i][:] for i in range(r)]
        return Lattice(self.ring, self.ambient, rows)

    def __repr__(self):
        return "Lattice(%r, ambient=%d, rank=%d)" % (self.ring, self.ambient, self.rank())
