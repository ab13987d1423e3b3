"""The two orders the toolkit computes with.

* :class:`GroupRingOrder` -- the group ring of a cyclic group of prime
  order p over Z or over a localization.  Elements are coefficient vectors
  of length p; multiplication is cyclic convolution (the relation
  ``g^p = 1``).
* :class:`MatrixOrder` -- the 2x2 order ``[[R, R], [p^2 R, R]]`` over
  R = Z_(p), whose bottom-left entries have p-valuation at least 2.

Both expose a common interface: a free base-ring module structure of
finite rank (``rank``, ``coords``/``from_coords``) and the matrix of right
multiplication by an element (``mult_matrix``), which is what all the
linear algebra consumes.  The convention is row-vector-on-the-left:
``coords(x * lam) == coords(x) @ mult_matrix(lam)``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .scalars import ZZ, Zloc, as_fraction, is_prime, scalar_str, valuation
from .linalg import solve_left, identity


class GroupRingElement:
    """Element of RC(p): coefficient of g^i at index i, exact rationals."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p, coeffs):
        self.p = p
        c = [as_fraction(x) for x in coeffs]
        if len(c) != p:
            raise ValueError("expected %d coefficients, got %d" % (p, len(c)))
        self.coeffs = tuple(c)

    def __add__(self, other):
        self._check(other)
        return GroupRingElement(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return GroupRingElement(self.p, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return GroupRingElement(self.p, [-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, GroupRingElement):
            self._check(other)
            p = self.p
            out = [Fraction(0)] * p
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        if b:
                            out[(i + j) % p] += a * b
            return GroupRingElement(p, out)
        return GroupRingElement(self.p, [a * as_fraction(other) for a in self.coeffs])

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k):
        out = GroupRingElement(self.p, [1] + [0] * (self.p - 1))
        for _ in range(k):
            out = out * self
        return out

    def _check(self, other):
        if self.p != other.p:
            raise ValueError("group order mismatch: %d vs %d" % (self.p, other.p))

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        return isinstance(other, GroupRingElement) and self.p == other.p and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def __repr__(self):
        return "GroupRingElement(%d, %s)" % (self.p, list(self.coeffs))

    def __str__(self):
        """Polynomial form in g, e.g. ``1 + 2*g - g^2``."""
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                term = scalar_str(c)
            else:
                gpow = "g" if i == 1 else "g^%d" % i
                if c == 1:
                    term = gpow
                elif c == -1:
                    term = "-" + gpow
                else:
                    term = "%s*%s" % (scalar_str(c), gpow)
            if parts and not term.startswith("-"):
                parts.append("+ " + term)
            elif parts:
                parts.append("- " + term[1:])
            else:
                parts.append(term)
        return " ".join(parts) if parts else "0"


_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?(?:(?P<g>g)(?:\^(?P<exp>\d+))?)?\s*"
)


def parse_group_ring(text: str, p: int) -> GroupRingElement:
    """Parse the ``1 + 2*g - g^2`` serialization (powers reduced mod g^p = 1)."""
    coeffs = [Fraction(0)] * p
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty group-ring element")
    any_term = False
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError("cannot parse group-ring element at %r" % text[pos:])
        sign = -1 if m.group("sign") == "-" else 1
        coef = m.group("coef")
        has_g = m.group("g") is not None
        if coef is None and not has_g:
            raise ValueError("cannot parse group-ring element at %r" % text[pos:])
        c = Fraction(coef) if coef is not None else Fraction(1)
        exp = int(m.group("exp")) if m.group("exp") else (1 if has_g else 0)
        coeffs[exp % p] += sign * c
        any_term = True
        pos = m.end()
    if not any_term:
        raise ValueError("empty group-ring element")
    return GroupRingElement(p, coeffs)


class GroupRingOrder:
    """RC(p) for R in {Z, Z_(p), Z_(q)}; rank p over the base ring.

    ``p`` is the group order (a prime, or 1 for the trivial group, which
    is occasionally useful as a degenerate case).
    """

    def __init__(self, p: int, base=ZZ):
        if p != 1 and not is_prime(p):
            raise ValueError("group order must be prime (or 1), got %d" % p)
        self.p = p
        self.base = base
        self.rank = p
        self._mult_cache = {}

    # --- element constructors -------------------------------------------------
    def element(self, coeffs) -> GroupRingElement:
        return GroupRingElement(self.p, coeffs)

    def zero(self):
        return self.element([0] * self.p)

    def one(self):
        return self.element([1] + [0] * (self.p - 1))

    def gen(self):
        if self.p == 1:
            return self.one()
        return self.element([0, 1] + [0] * (self.p - 2))

    def scalar(self, c):
        return self.element([c] + [0] * (self.p - 1))

    def phi(self):
        """The norm element 1 + g + ... + g^(p-1); acts as p on trivial points."""
        return self.element([1] * self.p)

    def e1(self):
        """The idempotent (1/p) * phi of the rational group algebra."""
        return self.element([Fraction(1, self.p)] * self.p)

    def e2(self):
        return self.one() - self.e1()

    def from_string(self, text):
        return parse_group_ring(text, self.p)

    # --- module-structure interface -------------------------------------------
    def coords(self, x: GroupRingElement):
        return list(x.coeffs)

    def from_coords(self, coords) -> GroupRingElement:
        return self.element(coords)

    def mult_matrix(self, lam: GroupRingElement):
        """Right multiplication by lam in the basis 1, g, ..., g^(p-1)."""
        M = self._mult_cache.get(lam)
        if M is None:
            p = self.p
            rows = []
            for i in range(p):
                row = [Fraction(0)] * p
                for j, c in enumerate(lam.coeffs):
                    row[(i + j) % p] += c
                rows.append(row)
            M = rows
            self._mult_cache[lam] = M
        return M

    def contains(self, x: GroupRingElement) -> bool:
        return all(self.base.contains(c) for c in x.coeffs)

    def unit_inverse(self, lam: GroupRingElement):
        """The inverse of lam when lam is a unit of the order, else None."""
        M = self.mult_matrix(lam)
        sol = solve_left(M, [1] + [0] * (self.p - 1), self.base)
        if sol is None:
            return None
        inv = self.from_coords(sol)
        if not self.contains(inv):
            return None
        return inv

    def __eq__(self, other):
        return (
            isinstance(other, GroupRingOrder)
            and other.p == self.p
            and other.base == self.base
        )

    def __hash__(self):
        return hash(("GroupRingOrder", self.p, self.base))

    def __repr__(self):
        return "GroupRingOrder(p=%d, base=%s)" % (self.p, self.base.name)


class MatrixOrderElement:
    """Element of the order [[R, R], [p^2 R, R]] over R = Z_(p)."""

    __slots__ = ("p", "a", "b", "c", "d")

    def __init__(self, p, entries):
        self.p = p
        (a, b), (c, d) = entries
        self.a = as_fraction(a)
        self.b = as_fraction(b)
        self.c = as_fraction(c)
        self.d = as_fraction(d)

    @property
    def entries(self):
        return [[self.a, self.b], [self.c, self.d]]

    def __add__(self, other):
        self._check(other)
        return MatrixOrderElement(
            self.p, [[self.a + other.a, self.b + other.b], [self.c + other.c, self.d + other.d]]
        )

    def __sub__(self, other):
        self._check(other)
        return MatrixOrderElement(
            self.p, [[self.a - other.a, self.b - other.b], [self.c - other.c, self.d - other.d]]
        )

    def __neg__(self):
        return MatrixOrderElement(self.p, [[-self.a, -self.b], [-self.c, -self.d]])

    def __mul__(self, other):
        if isinstance(other, MatrixOrderElement):
            self._check(other)
            return MatrixOrderElement(
                self.p,
                [
                    [self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d],
                    [self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d],
                ],
            )
        s = as_fraction(other)
        return MatrixOrderElement(self.p, [[self.a * s, self.b * s], [self.c * s, self.d * s]])

    def __rmul__(self, other):
        s = as_fraction(other)
        return MatrixOrderElement(self.p, [[self.a * s, self.b * s], [self.c * s, self.d * s]])

    def _check(self, other):
        if self.p != other.p:
            raise ValueError("order prime mismatch")

    def is_zero(self):
        return self.a == 0 and self.b == 0 and self.c == 0 and self.d == 0

    def __eq__(self, other):
        return (
            isinstance(other, MatrixOrderElement)
            and (self.p, self.a, self.b, self.c, self.d)
            == (other.p, other.a, other.b, other.c, other.d)
        )

    def __hash__(self):
        return hash((self.p, self.a, self.b, self.c, self.d))

    def __repr__(self):
        return "MatrixOrderElement(%d, [[%s, %s], [%s, %s]])" % (
            self.p,
            scalar_str(self.a),
            scalar_str(self.b),
            scalar_str(self.c),
            scalar_str(self.d),
        )


class MatrixOrder:
    """The order [[R, R], [p^2 R, R]] with R = Z_(p); rank 4 over R.

    Basis over R: E11, E12, p^2*E21, E22 (in that order), so that the
    coordinate of the bottom-left entry is c / p^2.
    """

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError("p must be prime")
        self.p = p
        self.base = Zloc(p)
        self.rank = 4
        self._mult_cache = {}

    def element(self, entries) -> MatrixOrderElement:
        return MatrixOrderElement(self.p, entries)

    def zero(self):
        return self.element([[0, 0], [0, 0]])

    def one(self):
        return self.element([[1, 0], [0, 1]])

    def e1(self):
        return self.element([[1, 0], [0, 0]])

    def e2(self):
        return self.element([[0, 0], [0, 1]])

    def basis_elements(self):
        p2 = self.p * self.p
        return [
            self.element([[1, 0], [0, 0]]),
            self.element([[0, 1], [0, 0]]),
            self.element([[0, 0], [p2, 0]]),
            self.element([[0, 0], [0, 1]]),
        ]

    def coords(self, x: MatrixOrderElement):
        return [x.a, x.b, x.c / (self.p * self.p), x.d]

    def from_coords(self, coords) -> MatrixOrderElement:
        a, b, c2, d = [as_fraction(t) for t in coords]
        return self.element([[a, b], [c2 * self.p * self.p, d]])

    def contains(self, x: MatrixOrderElement) -> bool:
        base = self.base
        return (
            base.contains(x.a)
            and base.contains(x.b)
            and base.contains(x.d)
            and (x.c == 0 or valuation(x.c, self.p) >= 2)
        )

    def mult_matrix(self, lam: MatrixOrderElement):
        M = self._mult_cache.get(lam)
        if M is None:
            M = [self.coords(beta * lam) for beta in self.basis_elements()]
            self._mult_cache[lam] = M
        return M

    def unit_inverse(self, lam: MatrixOrderElement):
        M = self.mult_matrix(lam)
        sol = solve_left(M, self.coords(self.one()), self.base)
        if sol is None:
            return None
        inv = self.from_coords(sol)
        if not self.contains(inv):
            return None
        return inv

    def __eq__(self, other):
        return isinstance(other, MatrixOrder) and other.p == self.p

    def __hash__(self):
        return hash(("MatrixOrder", self.p))

    def __repr__(self):
        return "MatrixOrder(p=%d)" % self.p
