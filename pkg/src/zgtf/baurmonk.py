"""Reduction of first-order sentences to boolean combinations of
invariant conditions.

Every sentence over the module language is equivalent, modulo the theory
of all modules over the order, to a boolean combination of index
conditions "|phi(M)/(phi and psi)(M)| >= t" with pp-formulas phi, psi in
one variable.  The reduction works quantifier by quantifier: a pp-formula
absorbs existential quantifiers natively (a projection just rebinds a
row), so the only work is eliminating an existential from a conjunction
of pp-literals with negations.

That core step is a coset-covering problem: the solutions of the positive
part form a coset of a pp-subgroup G, each negated literal removes a
coset of a subgroup H_j of G, and the quantifier fails exactly when the
removed cosets cover.  Two classical facts make the covering condition a
finite boolean combination: a cover by n cosets can be thinned to the
cosets of index at most n, and inclusion-exclusion counts a union of
finite-index cosets through the indices [G : H_T] of the intersections.
The eliminator enumerates the finitely many consistent index profiles and
emits, for each covering profile, the conjunction of pp-conditions,
pinned invariant atoms and negated intersection conditions that detects
it.  The output is validated wholesale against the exhaustive oracle
:func:`zgtf.logic.eval_finite`.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .logic import And, Atom, Exists, Forall, Implies, Not, Or, Sentence
from .orders import GroupRingOrder
from .pp import (
    PpFormula,
    conjoin,
    exists_project,
    extend_formula,
    pp_true,
    zero_params,
)


MAX_NEGATIONS = 4


class EliminationCapError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# boolean expressions over invariant and pp atoms

class BoolExpr:
    def eval(self, atom_fn):
        raise NotImplementedError

    def atoms(self):
        out = []
        self._collect(out)
        return out

    def _collect(self, out):
        pass


class _Const(BoolExpr):
    def __init__(self, value):
        self.value = value

    def eval(self, atom_fn):
        return self.value

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"

    def __eq__(self, other):
        return isinstance(other, _Const) and other.value == self.value

    def __hash__(self):
        return hash(("const", self.value))


BTRUE = _Const(True)
BFALSE = _Const(False)


class BNot(BoolExpr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def eval(self, atom_fn):
        return not self.arg.eval(atom_fn)

    def _collect(self, out):
        self.arg._collect(out)

    def __repr__(self):
        return "~%r" % (self.arg,)

    def __eq__(self, other):
        return isinstance(other, BNot) and other.arg == self.arg

    def __hash__(self):
        return hash(("not", self.arg))


class _Nary(BoolExpr):
    __slots__ = ("args",)

    def __init__(self, args):
        self.args = tuple(args)

    def _collect(self, out):
        for a in self.args:
            a._collect(out)

    def __eq__(self, other):
        return type(other) is type(self) and other.args == self.args

    def __hash__(self):
        return hash((type(self).__name__, self.args))


class BAnd(_Nary):
    def eval(self, atom_fn):
        return all(a.eval(atom_fn) for a in self.args)

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


class BOr(_Nary):
    def eval(self, atom_fn):
        return any(a.eval(atom_fn) for a in self.args)

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


class PpAtom(BoolExpr):
    """A pp-formula in context; true at the sentence level (no free vars)."""

    __slots__ = ("formula", "vars")

    def __init__(self, formula: PpFormula, vars):
        self.formula = formula
        self.vars = tuple(vars)
        if formula.n != len(self.vars):
            raise ValueError("context length mismatch")

    def eval(self, atom_fn):
        if self.vars:
            raise ValueError("cannot evaluate an open pp-atom")
        return True  # closed pp-formulas always hold (the zero witness)

    def _collect(self, out):
        out.append(self)

    def __repr__(self):
        return "pp[%s]" % ",".join(self.vars)

    def __eq__(self, other):
        return (
            isinstance(other, PpAtom)
            and other.formula == self.formula
            and other.vars == self.vars
        )

    def __hash__(self):
        return hash(("pp", self.formula, self.vars))


class InvariantAtom(BoolExpr):
    """|phi(M) / (phi and psi)(M)| >= threshold; phi, psi in one variable."""

    __slots__ = ("phi", "psi", "threshold")

    def __init__(self, phi: PpFormula, psi: PpFormula, threshold: int):
        if threshold < 2:
            raise ValueError("thresholds below 2 are trivially true")
        self.phi = phi
        self.psi = psi
        self.threshold = threshold

    def eval(self, atom_fn):
        return atom_fn(self)

    def _collect(self, out):
        out.append(self)

    def pair_key(self):
        return (self.phi, self.psi)

    def __repr__(self):
        return "Inv(phi, psi) >= %d" % self.threshold

    def __eq__(self, other):
        return (
            isinstance(other, InvariantAtom)
            and other.phi == self.phi
            and other.psi == self.psi
            and other.threshold == self.threshold
        )

    def __hash__(self):
        return hash(("inv", self.phi, self.psi, self.threshold))


class InvGuard(BoolExpr):
    """An invariant-only subformula treated as one atomic proposition.

    Invariant atoms are sentence-level constants, so a boolean over them
    never interacts with quantifier elimination; keeping each scenario's
    pin conjunction opaque stops the disjunctive normal forms of outer
    quantifiers from exploding.
    """

    __slots__ = ("expr",)

    def __init__(self, expr):
        self.expr = expr

    def eval(self, atom_fn):
        return self.expr.eval(atom_fn)

    def _collect(self, out):
        self.expr._collect(out)

    def __repr__(self):
        return "guard[%r]" % (self.expr,)

    def __eq__(self, other):
        return isinstance(other, InvGuard) and other.expr == self.expr

    def __hash__(self):
        return hash(("guard", self.expr))


def b_and(args):
    flat = []
    for a in args:
        if a == BFALSE:
            return BFALSE
        if a == BTRUE:
            continue
        if isinstance(a, BAnd):
            flat.extend(a.args)
        else:
            flat.append(a)
    out = []
    for a in flat:
        if a not in out:
            out.append(a)
    for a in out:
        if BNot(a) in out or (isinstance(a, BNot) and a.arg in out):
            return BFALSE
    if not out:
        return BTRUE
    if len(out) == 1:
        return out[0]
    return BAnd(out)


def b_or(args):
    flat = []
    for a in args:
        if a == BTRUE:
            return BTRUE
        if a == BFALSE:
            continue
        if isinstance(a, BOr):
            flat.extend(a.args)
        else:
            flat.append(a)
    out = []
    for a in flat:
        if a not in out:
            out.append(a)
    for a in out:
        if BNot(a) in out or (isinstance(a, BNot) and a.arg in out):
            return BTRUE
    if not out:
        return BFALSE
    if len(out) == 1:
        return out[0]
    return BOr(out)


def b_not(a):
    if a == BTRUE:
        return BFALSE
    if a == BFALSE:
        return BTRUE
    if isinstance(a, BNot):
        return a.arg
    return BNot(a)


# ---------------------------------------------------------------------------
# normal forms

def _to_nnf(expr, positive=True):
    if isinstance(expr, _Const):
        return expr if positive else b_not(expr)
    if isinstance(expr, BNot):
        return _to_nnf(expr.arg, not positive)
    if isinstance(expr, BAnd):
        parts = [_to_nnf(a, positive) for a in expr.args]
        return b_and(parts) if positive else b_or(parts)
    if isinstance(expr, BOr):
        parts = [_to_nnf(a, positive) for a in expr.args]
        return b_or(parts) if positive else b_and(parts)
    return expr if positive else b_not(expr)


def _to_dnf(expr):
    """List of conjuncts (lists of (atom, polarity)), pruned by absorption."""
    expr = _to_nnf(expr)
    if expr == BTRUE:
        return [[]]
    if expr == BFALSE:
        return []
    if isinstance(expr, BNot):
        return [[(expr.arg, False)]]
    if isinstance(expr, (PpAtom, InvariantAtom, InvGuard)):
        return [[(expr, True)]]
    if isinstance(expr, BOr):
        out = []
        for a in expr.args:
            out.extend(_to_dnf(a))
        return _absorb(out)
    if isinstance(expr, BAnd):
        parts = [_to_dnf(a) for a in expr.args]
        out = [[]]
        for part in parts:
            new = []
            for conj in out:
                for sub in part:
                    merged = _merge_conjunct(conj, sub)
                    if merged is not None:
                        new.append(merged)
            out = _absorb(new)
        return out
    raise TypeError("unexpected node %r" % (expr,))


def _merge_conjunct(a, b):
    out = list(a)
    for lit in b:
        atom, pol = lit
        if (atom, not pol) in out:
            return None
        if lit not in out:
            out.append(lit)
    return out


def _absorb(conjuncts):
    """Drop duplicate conjuncts and conjuncts implied by a smaller one."""
    as_sets = [frozenset(c) for c in conjuncts]
    order = sorted(range(len(conjuncts)), key=lambda i: len(as_sets[i]))
    kept = []
    kept_sets = []
    for i in order:
        s = as_sets[i]
        if any(k <= s for k in kept_sets):
            continue
        kept.append(conjuncts[i])
        kept_sets.append(s)
    return kept


# ---------------------------------------------------------------------------
# the eliminator

def baur_monk(sentence: Sentence, order: GroupRingOrder) -> BoolExpr:
    """Boolean combination of invariant atoms equivalent to the sentence
    modulo the theory of all modules over the order."""
    red = _reduce(sentence, (), order)
    return _resolve_closed(red)


def _resolve_closed(expr):
    if isinstance(expr, PpAtom):
        if expr.vars:
            raise AssertionError("open pp-atom survived to the sentence level")
        return BTRUE
    if isinstance(expr, BNot):
        return b_not(_resolve_closed(expr.arg))
    if isinstance(expr, BAnd):
        return b_and([_resolve_closed(a) for a in expr.args])
    if isinstance(expr, BOr):
        return b_or([_resolve_closed(a) for a in expr.args])
    if isinstance(expr, InvGuard):
        return expr.expr
    return expr


def _fresh_name(name, taken):
    while name in taken:
        name = name + "'"
    return name


def _reduce(node, context, order) -> BoolExpr:
    if isinstance(node, Atom):
        vars_used = tuple(v for v in node.coeffs)
        rows = [[node.coeffs[v]] for v in vars_used]
        if not vars_used:
            return BTRUE
        formula = PpFormula(order, len(vars_used), 0, rows)
        return PpAtom(formula, vars_used)
    if isinstance(node, Not):
        return b_not(_reduce(node.inner, context, order))
    if isinstance(node, And):
        return b_and([_reduce(node.left, context, order), _reduce(node.right, context, order)])
    if isinstance(node, Or):
        return b_or([_reduce(node.left, context, order), _reduce(node.right, context, order)])
    if isinstance(node, Implies):
        return b_or(
            [b_not(_reduce(node.left, context, order)), _reduce(node.right, context, order)]
        )
    if isinstance(node, (Exists, Forall)):
        var = node.var
        body = node.body
        if var in context:
            fresh = _fresh_name(var, set(context))
            body = _rename(body, var, fresh)
            var = fresh
        inner = _reduce(body, context + (var,), order)
        if isinstance(node, Exists):
            return _eliminate_exists(var, inner, order)
        return b_not(_eliminate_exists(var, b_not(inner), order))
    raise TypeError("unknown sentence node %r" % (node,))


def _rename(node, old, new):
    if isinstance(node, Atom):
        return Atom({(new if v == old else v): c for v, c in node.coeffs.items()})
    if isinstance(node, Not):
        return Not(_rename(node.inner, old, new))
    if isinstance(node, (And, Or, Implies)):
        return type(node)(_rename(node.left, old, new), _rename(node.right, old, new))
    if isinstance(node, (Exists, Forall)):
        if node.var == old:
            return node
        return type(node)(node.var, _rename(node.body, old, new))
    raise TypeError


def _eliminate_exists(var, expr, order) -> BoolExpr:
    disjuncts = _to_dnf(expr)
    out = []
    for conj in disjuncts:
        positives = []
        negatives = []
        passthrough = []
        for atom, pol in conj:
            if isinstance(atom, PpAtom) and var in atom.vars:
                (positives if pol else negatives).append(atom)
            else:
                passthrough.append(atom if pol else b_not(atom))
        if len(negatives) > MAX_NEGATIONS:
            raise EliminationCapError(
                "conjunct with %d negated pp-literals exceeds the eliminator cap %d"
                % (len(negatives), MAX_NEGATIONS)
            )
        core = _eliminate_core(var, positives, negatives, order)
        out.append(b_and(passthrough + [core]))
    return b_or(out)


def _union_vars(var, atoms):
    ordered = [var]
    for a in atoms:
        for v in a.vars:
            if v not in ordered:
                ordered.append(v)
    return tuple(ordered)


def _aligned(atom: PpAtom, ctx) -> PpFormula:
    positions = [ctx.index(v) for v in atom.vars]
    return extend_formula(atom.formula, len(ctx), positions)


_core_cache = {}


def _eliminate_core(var, positives, negatives, order) -> BoolExpr:
    key = (
        var,
        frozenset((a.formula, a.vars) for a in positives),
        frozenset((a.formula, a.vars) for a in negatives),
    )
    if key in _core_cache:
        return _core_cache[key]
    out = _eliminate_core_uncached(var, positives, negatives, order)
    _core_cache[key] = out
    return out


def _eliminate_core_uncached(var, positives, negatives, order) -> BoolExpr:
    ctx = _union_vars(var, positives + negatives)
    idx = 0  # var sits first in the context by construction
    phi = pp_true(order, len(ctx))
    for a in positives:
        phi = conjoin(phi, _aligned(a, ctx))
    out_vars = tuple(v for v in ctx if v != var)
    phi_proj = PpAtom(exists_project(phi, idx), out_vars)
    J = len(negatives)
    if J == 0:
        return phi_proj

    g_formula = zero_params(phi, idx)

    sigma_cache = {}
    inv_formula_cache = {}

    def sigma(T):
        T = frozenset(T)
        if T not in sigma_cache:
            meet = phi
            for j in sorted(T):
                meet = conjoin(meet, _aligned(negatives[j], ctx))
            sigma_cache[T] = PpAtom(exists_project(meet, idx), out_vars)
        return sigma_cache[T]

    def h_formula(T):
        T = frozenset(T)
        if T not in inv_formula_cache:
            meet = phi
            for j in sorted(T):
                meet = conjoin(meet, _aligned(negatives[j], ctx))
            inv_formula_cache[T] = zero_params(meet, idx)
        return inv_formula_cache[T]

    def inv_at_least(T, t):
        if t <= 1:
            return BTRUE
        return InvariantAtom(g_formula, h_formula(T), t)

    def inv_exact(T, w):
        return b_and([inv_at_least(T, w), b_not(inv_at_least(T, w + 1))])

    scenarios = []
    all_j = list(range(J))
    for F in _subsets(all_j):
        if not F:
            continue  # coverage needs at least one finite-index active coset
        drop_parts = []
        sigma_parts = [sigma({j}) for j in sorted(F)]
        for j in all_j:
            if j not in F:
                drop_parts.append(b_or([b_not(sigma({j})), InvGuard(inv_at_least({j}, J + 1))]))
        for family in _downward_closed_families(F):
            pattern_parts = list(sigma_parts)
            for T in sorted(family, key=lambda t: (len(t), sorted(t))):
                if len(T) >= 2:
                    pattern_parts.append(sigma(T))
            for T in _minimal_nonmembers(family, F):
                pattern_parts.append(b_not(sigma(T)))
            pin_choices = []
            for w in _consistent_profiles(family, F, J):
                total = sum(Fraction((-1) ** (len(T) + 1), w[T]) for T in family)
                if total != 1:
                    continue
                pin_choices.append(
                    b_and([inv_exact(T, w[T]) for T in sorted(family, key=lambda t: (len(t), sorted(t)))])
                )
            if not pin_choices:
                continue
            guard = InvGuard(b_or(pin_choices))
            scenarios.append(b_and(pattern_parts + drop_parts + [guard]))
    cover = b_or(scenarios)
    return b_and([phi_proj, b_not(cover)])


def _subsets(items):
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def _downward_closed_families(F):
    """Families of nonempty subsets of F: downward closed, containing every
    singleton (the active cosets themselves are nonempty)."""
    F = sorted(F)
    singletons = [frozenset([j]) for j in F]
    bigger = [frozenset(c) for r in range(2, len(F) + 1) for c in itertools.combinations(F, r)]
    for mask in range(1 << len(bigger)):
        fam = set(singletons)
        ok = True
        for i, T in enumerate(bigger):
            if mask >> i & 1:
                fam.add(T)
        for T in fam:
            if len(T) >= 2:
                for sub in itertools.combinations(sorted(T), len(T) - 1):
                    if len(sub) >= 1 and frozenset(sub) not in fam:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            yield frozenset(fam)


def _minimal_nonmembers(family, F):
    """Subsets of F outside the family whose proper nonempty subsets all
    belong to it; negating their intersections pins the activity pattern."""
    F = sorted(F)
    out = []
    for r in range(2, len(F) + 1):
        for combo in itertools.combinations(F, r):
            T = frozenset(combo)
            if T in family:
                continue
            if all(
                frozenset(sub) in family
                for k in range(1, r)
                for sub in itertools.combinations(combo, k)
            ):
                out.append(T)
    return out


def _consistent_profiles(family, F, J):
    """All maps from the family to indices: singletons bounded by J, larger
    intersections multiples of their covered subsets, bounded by the
    product of the singleton values."""
    ordered = sorted(family, key=lambda T: (len(T), sorted(T)))

    def extend(i, current):
        if i == len(ordered):
            yield dict(current)
            return
        T = ordered[i]
        if len(T) == 1:
            for v in range(1, J + 1):
                current[T] = v
                yield from extend(i + 1, current)
            del current[T]
        else:
            bound = 1
            for j in T:
                bound *= current[frozenset([j])]
            lcm = 1
            for sub in family:
                if sub < T and len(sub) >= 1:
                    lcm = _lcm(lcm, current[sub]) if sub in current else lcm
            v = lcm
            while v <= bound:
                if all(
                    v % current[sub] == 0
                    for sub in family
                    if sub < T and sub in current
                ):
                    current[T] = v
                    yield from extend(i + 1, current)
                    del current[T]
                v += lcm
    yield from extend(0, {})


def _lcm(a, b):
    from math import gcd

    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# evaluating a reduction

def eval_reduction_on_module(red: BoolExpr, M) -> bool:
    """Evaluate a reduction on a finite module by computing every invariant
    atom's index exactly."""
    from .pp import evaluate_fp

    cache = {}

    def atom_fn(atom):
        key = (atom.phi, atom.psi)
        if key not in cache:
            a = M.subgroup_order(evaluate_fp(atom.phi, M).basis())
            meet = conjoin(atom.phi, atom.psi)
            b = M.subgroup_order(evaluate_fp(meet, M).basis())
            assert a % b == 0
            cache[key] = a // b
        return cache[key] >= atom.threshold

    return red.eval(atom_fn)


def invariant_pairs(red: BoolExpr):
    """The distinct invariant pairs occurring in a reduction."""
    seen = []
    for atom in red.atoms():
        if isinstance(atom, InvariantAtom) and atom.pair_key() not in [
            a.pair_key() for a in seen
        ]:
            seen.append(atom)
    return [(a.phi, a.psi) for a in seen]


def max_threshold(red: BoolExpr) -> int:
    out = 2
    for atom in red.atoms():
        if isinstance(atom, InvariantAtom):
            out = max(out, atom.threshold)
    return out
