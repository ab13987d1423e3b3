"""Exact scalars and base-ring tags.

Every scalar in the package is an exact rational, stored as a
``fractions.Fraction`` (plain ``int`` is accepted anywhere a scalar is
expected).  Three base rings are supported:

* ``ZZ``        -- the integers,
* ``Zloc(p)``   -- the localization of Z at a prime p (denominators coprime to p),
* ``QQ``        -- the rationals.

The ring tags are small immutable objects used to dispatch the linear
algebra in :mod:`zgtf.linalg`.  Completions are never represented; all
p-adic computation happens over the dense subring ``Zloc(p)`` with exact
arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

INF = math.inf

Scalar = Fraction  # public alias: scalars are exact rationals


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def valuation(x, p: int):
    """p-adic valuation of a rational; ``INF`` for zero."""
    x = as_fraction(x)
    if x == 0:
        return INF
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def scalar_str(x) -> str:
    """Serialize a scalar as ``"a"`` or ``"a/b"`` (decimal strings)."""
    x = as_fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def parse_scalar(text: str) -> Fraction:
    """Parse the ``"a/b"`` serialization back into a scalar."""
    return Fraction(text.strip())


class IntegerRing:
    """The ring of integers."""

    name = "Z"
    prime = None
    is_field = False

    def contains(self, x) -> bool:
        return as_fraction(x).denominator == 1

    def is_unit(self, x) -> bool:
        return as_fraction(x) in (1, -1)

    def __repr__(self):
        return "ZZ"

    def __eq__(self, other):
        return type(other) is IntegerRing

    def __hash__(self):
        return hash("ZZ")


class LocalRing:
    """Z localized at a prime: rationals whose denominator is coprime to p."""

    is_field = False

    def __init__(self, p: int):
        if p < 2:
            raise ValueError("localization prime must be >= 2")
        self.prime = p
        self.name = "Z_(%d)" % p

    def contains(self, x) -> bool:
        return as_fraction(x).denominator % self.prime != 0

    def is_unit(self, x) -> bool:
        return x != 0 and valuation(x, self.prime) == 0

    def __repr__(self):
        return "Zloc(%d)" % self.prime

    def __eq__(self, other):
        return type(other) is LocalRing and other.prime == self.prime

    def __hash__(self):
        return hash(("Zloc", self.prime))


class RationalField:
    """The field of rationals."""

    name = "Q"
    prime = None
    is_field = True

    def contains(self, x) -> bool:
        return True

    def is_unit(self, x) -> bool:
        return x != 0

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return type(other) is RationalField

    def __hash__(self):
        return hash("QQ")


ZZ = IntegerRing()
QQ = RationalField()

_local_cache: dict[int, LocalRing] = {}


def Zloc(p: int) -> LocalRing:
    if p not in _local_cache:
        _local_cache[p] = LocalRing(p)
    return _local_cache[p]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True
