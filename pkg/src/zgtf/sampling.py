"""Seeded random generators shared by the property suites and the CLI.

Everything takes an explicit ``random.Random`` so a single seed recorded in
a report header reproduces every sampled object byte-for-byte.
"""

from __future__ import annotations

import random

from .orders import GroupRingOrder
from .pp import PpFormula, add, annihilator, conjoin, divisibility, pp_true, pp_zero, scale


def random_scalar_element(rng: random.Random, order, lo=-2, hi=2):
    """Small random order element (integer coefficients)."""
    return order.element([rng.randint(lo, hi) for _ in range(order.rank if isinstance(order, GroupRingOrder) else 0)])


def random_group_ring_element(rng, order, lo=-2, hi=2, nonzero=False):
    while True:
        x = order.element([rng.randint(lo, hi) for _ in range(order.p)])
        if not nonzero or not x.is_zero():
            return x


def random_pp_formula(rng: random.Random, order, max_depth=2) -> PpFormula:
    """Random one-variable pp-formula built from divisibility/annihilator
    atoms combined by conjunction, sum and scaling."""
    if max_depth == 0:
        kind = rng.randrange(4)
        if kind == 0:
            return divisibility(order, random_group_ring_element(rng, order, nonzero=True))
        if kind == 1:
            return annihilator(order, random_group_ring_element(rng, order))
        if kind == 2:
            return pp_true(order)
        return pp_zero(order)
    kind = rng.randrange(6)
    if kind <= 1:
        return random_pp_formula(rng, order, 0)
    a = random_pp_formula(rng, order, max_depth - 1)
    if kind == 2:
        b = random_pp_formula(rng, order, max_depth - 1)
        return conjoin(a, b)
    if kind == 3:
        b = random_pp_formula(rng, order, max_depth - 1)
        return add(a, b)
    if kind == 4:
        return scale(a, random_group_ring_element(rng, order, nonzero=True))
    return a


def random_module_element(rng: random.Random, rank, lo=-4, hi=4):
    return [rng.randint(lo, hi) for _ in range(rank)]


def random_sentence(rng: random.Random, p, max_qdepth=3, max_atoms=3):
    """Random closed sentence: a quantifier prefix over fresh variables and
    a random boolean body whose atoms are small linear equations."""
    from .logic import And, Atom, Exists, Forall, Implies, Not, Or

    order = GroupRingOrder(p)
    depth = rng.randint(1, max_qdepth)
    variables = ["x%d" % i for i in range(depth)]
    n_atoms = rng.randint(1, max_atoms)

    def random_atom():
        coeffs = {}
        for v in variables:
            if rng.random() < 0.6:
                coeffs[v] = order.element([rng.randint(-2, 2) for _ in range(p)])
        if not coeffs:
            coeffs[rng.choice(variables)] = order.scalar(rng.randint(1, p))
        return Atom(coeffs)

    atoms = [random_atom() for _ in range(n_atoms)]

    def random_body(pool):
        if len(pool) == 1:
            a = pool[0]
            return Not(a) if rng.random() < 0.4 else a
        cut = rng.randint(1, len(pool) - 1)
        left = random_body(pool[:cut])
        right = random_body(pool[cut:])
        ctor = rng.choice([And, Or, Implies])
        body = ctor(left, right)
        return Not(body) if rng.random() < 0.25 else body

    body = random_body(atoms)
    for v in reversed(variables):
        body = (Forall if rng.random() < 0.5 else Exists)(v, body)
    return body
