"""Interval lengths and the finite-collapse dimension machinery.

The length of an interval between two comparable pp-formulas on a point
is the base-ring length of the quotient of their evaluations: the sum of
the exponents in its elementary-divisor decomposition, infinite when the
quotient has positive free rank.  The dimension convention used
throughout: a lattice has dimension 0 exactly when it has finite length,
and each collapse of all finite-length intervals raises the dimension by
at most one.  Infinite lattices are never materialized; the dimension-one
claims are certified by the two-part witness in :func:`mdim_certificate`.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Lattice
from .modules import PointModule
from .pp import PpFormula, conjoin, evaluate_point
from .scalars import INF, as_fraction, valuation
from .spectrum import invariant


# ---------------------------------------------------------------------------
# interval lengths on points

def interval_length(phi: PpFormula, psi: PpFormula, N: PointModule):
    """Length of phi(N) / (phi and psi)(N) over the base domain.

    Returns a non-negative integer or INF.  The lower endpoint is always
    replaced by the meet so the interval is genuine.
    """
    meet = conjoin(phi, psi)
    A = evaluate_point(phi, N)
    B = evaluate_point(meet, N)
    idx = B.index_in(A)
    if idx == INF:
        return INF
    if N.base.is_field:
        # a nonzero rational quotient has infinite length over the integers
        return 0 if idx == 1 else INF
    return _total_exponent(int(idx))


def _total_exponent(n: int) -> int:
    total = 0
    d = 2
    while d * d <= n:
        while n % d == 0:
            n //= d
            total += 1
        d += 1
    if n > 1:
        total += 1
    return total


def chain_witness(N: PointModule, c, K: int) -> bool:
    """True when N*c^(n+1) is strictly below N*c^n for every n <= K.

    A certificate that the one-variable pp-lattice of the point does not
    have finite length.
    """
    if c.is_zero():
        raise ValueError("c must be nonzero")
    A = N.act(c)
    cur = Lattice.full(N.base, N.rank)
    power = [[Fraction(1) if i == j else Fraction(0) for j in range(N.rank)] for i in range(N.rank)]
    from .linalg import mat_mul

    for n in range(K + 1):
        power = mat_mul(power, A)
        nxt = Lattice(N.base, N.rank, power)
        if not cur.contains_lattice(nxt):
            raise AssertionError("image chain is not descending")
        idx = nxt.index_in(cur)
        if idx == 1:
            return False
        cur = nxt
    return True


# ---------------------------------------------------------------------------
# finite lattices and the collapse step

class FiniteLattice:
    """A finite lattice given by its elements and order relation."""

    def __init__(self, elements, leq_pairs):
        self.elements = list(elements)
        idx = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        leq = [[False] * n for _ in range(n)]
        for i in range(n):
            leq[i][i] = True
        for a, b in leq_pairs:
            leq[idx[a]][idx[b]] = True
        # transitive closure
        for t in range(n):
            for i in range(n):
                if leq[i][t]:
                    row_t = leq[t]
                    row_i = leq[i]
                    for j in range(n):
                        if row_t[j]:
                            row_i[j] = True
        self._leq = leq
        self._idx = idx
        for i in range(n):
            for j in range(n):
                if i != j and leq[i][j] and leq[j][i]:
                    raise ValueError("order relation is not antisymmetric")
        self._check_lattice()

    @classmethod
    def chain(cls, n):
        elems = list(range(n))
        return cls(elems, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def from_subsets(cls, subsets):
        """Lattice of a family of sets ordered by inclusion (must be closed
        under intersection and the family's joins)."""
        elems = [frozenset(s) for s in subsets]
        pairs = [(a, b) for a in elems for b in elems if a <= b]
        return cls(elems, pairs)

    def leq(self, a, b):
        return self._leq[self._idx[a]][self._idx[b]]

    def meet(self, a, b):
        cands = [e for e in self.elements if self.leq(e, a) and self.leq(e, b)]
        tops = [e for e in cands if all(self.leq(f, e) for f in cands)]
        if len(tops) != 1:
            raise ValueError("meet of %r and %r does not exist" % (a, b))
        return tops[0]

    def join(self, a, b):
        cands = [e for e in self.elements if self.leq(a, e) and self.leq(b, e)]
        bots = [e for e in cands if all(self.leq(e, f) for f in cands)]
        if len(bots) != 1:
            raise ValueError("join of %r and %r does not exist" % (a, b))
        return bots[0]

    def _check_lattice(self):
        for a in self.elements:
            for b in self.elements:
                self.meet(a, b)
                self.join(a, b)

    def interval_chain_length(self, a, b):
        """Longest chain length inside the closed interval [a, b]."""
        if not self.leq(a, b):
            raise ValueError("not a valid interval")
        inside = [e for e in self.elements if self.leq(a, e) and self.leq(e, b)]
        memo = {}

        def longest_from(e):
            if e in memo:
                return memo[e]
            best = 0
            for f in inside:
                if f != e and self.leq(e, f):
                    best = max(best, 1 + longest_from(f))
            memo[e] = best
            return best

        return max(longest_from(e) for e in inside if e == a) if inside else 0

    def length(self):
        bot = [e for e in self.elements if all(self.leq(e, f) for f in self.elements)][0]
        top = [e for e in self.elements if all(self.leq(f, e) for f in self.elements)][0]
        return self.interval_chain_length(bot, top)

    def collapse(self) -> "FiniteLattice":
        """Quotient identifying a and b when [a^b, avb] has finite length.

        On a finite lattice every interval is finite, so one step yields
        the one-point lattice; the step is exercised literally so that the
        machinery also drives the synthetic descriptors.
        """
        n = len(self.elements)
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i in range(n):
            for j in range(i + 1, n):
                a, b = self.elements[i], self.elements[j]
                lo = self.meet(a, b)
                hi = self.join(a, b)
                if self.interval_chain_length(lo, hi) != INF:
                    ra, rb = find(i), find(j)
                    if ra != rb:
                        parent[ra] = rb
        classes = {}
        for i in range(n):
            classes.setdefault(find(i), []).append(i)
        reps = sorted(classes, key=lambda r: min(classes[r]))
        new_elems = list(range(len(reps)))
        pairs = []
        for x, rx in enumerate(reps):
            for y, ry in enumerate(reps):
                if self._leq[classes[rx][0]][classes[ry][0]]:
                    pairs.append((x, y))
        return FiniteLattice(new_elems, pairs)

    def __len__(self):
        return len(self.elements)


def mdim_finite(L: FiniteLattice) -> int:
    """Dimension of a finite lattice: always 0 (finite length), verified by
    running the collapse step and checking it reaches one point."""
    collapsed = L.collapse()
    if len(collapsed) != 1:
        raise AssertionError("collapse of a finite lattice must be a point")
    return 0


# ---------------------------------------------------------------------------
# synthetic descriptors for infinite chains

class FiniteChainDesc:
    """A finite chain with n elements."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("chain needs at least one element")
        self.n = n

    def __repr__(self):
        return "FiniteChainDesc(%d)" % self.n


class OmegaChainDesc:
    """An increasing omega-indexed chain of copies of a block descriptor."""

    def __init__(self, block):
        self.block = block

    def __repr__(self):
        return "OmegaChainDesc(%r)" % (self.block,)


def mdim_descriptor(desc) -> int:
    """Dimension of a synthetic chain-of-chains descriptor.

    A finite chain is dimension 0.  An omega-chain of blocks collapses, in
    one step, each interval that meets only finitely many blocks; the
    quotient is the collapse of a single block shape, so the dimension is
    one more than the block's.
    """
    if isinstance(desc, FiniteChainDesc):
        return 0
    if isinstance(desc, OmegaChainDesc):
        return 1 + mdim_descriptor(desc.block)
    raise TypeError("unknown descriptor %r" % (desc,))


# ---------------------------------------------------------------------------
# pp-sublattices and the dimension-one certificate

def pp_sublattice(N: PointModule, formulas) -> FiniteLattice:
    """The finite lattice of subgroups generated by evaluating the given
    formulas on a point with finite quotients, closed under meet and join.

    Evaluations are taken inside N / p^e N for the exponent that makes all
    of them distinct finite subgroups (here: subgroup lattices are encoded
    by their element sets in the quotient of the evaluation lattices)."""
    lats = [evaluate_point(f, N) for f in formulas]
    # close under sum and intersection
    changed = True
    pool = list(lats)

    def find_equal(lat):
        for existing in pool:
            if existing.equals(lat):
                return existing
        return None

    while changed:
        changed = False
        for i in range(len(pool)):
            for j in range(len(pool)):
                for cand in (pool[i].sum(pool[j]), pool[i].intersect(pool[j])):
                    if find_equal(cand) is None:
                        pool.append(cand)
                        changed = True
    names = list(range(len(pool)))
    pairs = []
    for i in names:
        for j in names:
            if pool[j].contains_lattice(pool[i]):
                pairs.append((i, j))
    return FiniteLattice(names, pairs)


def mdim_certificate(p, formulas_with_exponents, points, chain_depth=10):
    """Two-part certificate that the torsionfree pp-lattice has dimension 1.

    Part one: the strictly descending multiplication chain witnesses that
    dimension 0 is impossible on every lattice point.  Part two: every
    sampled interval of p-power index has finite length.  Recorded as a
    certificate at sample scale, not as a proof of the ordinal claim.
    """
    order0 = points[0].order
    chain_ok = all(chain_witness(N, order0.scalar(p), chain_depth) for N in points)
    intervals = []
    all_finite = True
    for (phi, psi) in formulas_with_exponents:
        for N in points:
            ln = interval_length(phi, psi, N)
            intervals.append((N.label, ln))
            if ln == INF:
                all_finite = False
    return {
        "chain_witness": chain_ok,
        "intervals_finite": all_finite,
        "certified": chain_ok and all_finite,
        "interval_lengths": intervals,
    }
