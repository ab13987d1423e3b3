"""First-order sentences over the module language, their parser, and the
brute-force evaluator on finite modules.

Grammar (shared sugar with the pp-pair strings used by the CLI):

    sentence := quant* boolcomb
    quant    := ("A" | "E") var+ "."
    boolcomb := atom | "~" boolcomb | boolcomb ("&" | "|" | "->") boolcomb
              | "(" boolcomb ")"
    atom     := term "=" term | scalar "|" var
    term     := sum of var "*" scalar | scalar "*" var | var | "0"
    scalar   := integer polynomial in "g" (reduced mod g^p - 1), "p", "sum_g"

Precedence: "~" binds tightest, then "&", then "|", then "->" (right
associative).  Scalars are normalized to group-ring elements at parse
time.  ``eval_finite`` decides a sentence on a finite module by exhaustive
quantifier expansion and is the independent oracle for the eliminator in
:mod:`zgtf.baurmonk`.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

from .modules import FpModulePresentation
from .orders import GroupRingOrder, GroupRingElement
from .pp import PpFormula, conjoin_many, exists_project, pp_true
from .scalars import as_fraction


DEFAULT_MODULE_SIZE_CAP = 3 ** 6


def module_size_cap(p):
    env = os.environ.get("ZKIT_MAX_MODULE_SIZE")
    if env:
        return int(env)
    return p ** 6


# ---------------------------------------------------------------------------
# AST

class Sentence:
    """Base class for sentence nodes; instances are immutable trees."""

    def free_variables(self):
        return self._free(frozenset())

    def quantifier_depth(self):
        raise NotImplementedError

    def atom_count(self):
        raise NotImplementedError


class Atom(Sentence):
    """A Lambda-linear equation: sum of var * coeff = 0 (normalized)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        # mapping var name -> GroupRingElement, zero coefficients dropped
        self.coeffs = {v: c for v, c in coeffs.items() if not c.is_zero()}

    def _free(self, bound):
        return frozenset(self.coeffs) - bound

    def quantifier_depth(self):
        return 0

    def atom_count(self):
        return 1

    def __repr__(self):
        if not self.coeffs:
            return "0 = 0"
        return " + ".join("%s*(%s)" % (v, c) for v, c in sorted(self.coeffs.items())) + " = 0"


class Not(Sentence):
    __slots__ = ("inner",)

    def __init__(self, inner):
        self.inner = inner

    def _free(self, bound):
        return self.inner._free(bound)

    def quantifier_depth(self):
        return self.inner.quantifier_depth()

    def atom_count(self):
        return self.inner.atom_count()

    def __repr__(self):
        return "~(%r)" % (self.inner,)


class _Binary(Sentence):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def _free(self, bound):
        return self.left._free(bound) | self.right._free(bound)

    def quantifier_depth(self):
        return max(self.left.quantifier_depth(), self.right.quantifier_depth())

    def atom_count(self):
        return self.left.atom_count() + self.right.atom_count()

    def __repr__(self):
        return "(%r %s %r)" % (self.left, self.symbol, self.right)


class And(_Binary):
    symbol = "&"


class Or(_Binary):
    symbol = "|"


class Implies(_Binary):
    symbol = "->"


class _Quant(Sentence):
    __slots__ = ("var", "body")
    symbol = "?"

    def __init__(self, var, body):
        self.var = var
        self.body = body

    def _free(self, bound):
        return self.body._free(bound | {self.var})

    def quantifier_depth(self):
        return 1 + self.body.quantifier_depth()

    def atom_count(self):
        return self.body.atom_count()

    def __repr__(self):
        return "%s %s . %r" % (self.symbol, self.var, self.body)


class Forall(_Quant):
    symbol = "A"


class Exists(_Quant):
    symbol = "E"


class ParseError(ValueError):
    pass


class FreeVariableError(ParseError):
    pass


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[~&|().=*+^\-]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError("unexpected character %r at position %d" % (text[pos], pos))
        tokens.append((m.lastgroup, m.group(m.lastgroup), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text, order: GroupRingOrder):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.order = order

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None, -1)

    def next(self, expected=None):
        kind, val, at = self.peek()
        if kind is None:
            raise ParseError("unexpected end of input")
        if expected is not None and val != expected:
            raise ParseError("expected %r but found %r at position %d" % (expected, val, at))
        self.pos += 1
        return kind, val, at

    def at_end(self):
        return self.pos >= len(self.tokens)

    # sentence := quant* boolcomb
    def parse_sentence(self):
        kind, val, _ = self.peek()
        if kind == "name" and val in ("A", "E"):
            self.next()
            cls = Forall if val == "A" else Exists
            names = []
            while True:
                k2, v2, at = self.peek()
                if k2 == "name" and v2 not in ("A", "E"):
                    names.append(v2)
                    self.next()
                elif k2 == "op" and v2 == ".":
                    self.next()
                    break
                else:
                    raise ParseError("expected variable or '.' at position %d" % at)
            if not names:
                raise ParseError("quantifier binds no variables")
            body = self.parse_sentence()
            for name in reversed(names):
                body = cls(name, body)
            return body
        return self.parse_implies()

    def parse_implies(self):
        left = self.parse_or()
        kind, val, _ = self.peek()
        if kind == "arrow":
            self.next()
            right = self.parse_implies()
            return Implies(left, right)
        return left

    def parse_or(self):
        left = self.parse_and()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "|":
                self.next()
                left = Or(left, self.parse_and())
            else:
                return left

    def parse_and(self):
        left = self.parse_unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "&":
                self.next()
                left = And(left, self.parse_unary())
            else:
                return left

    def parse_unary(self):
        kind, val, at = self.peek()
        if kind == "op" and val == "~":
            self.next()
            return Not(self.parse_unary())
        if kind == "op" and val == "(":
            # could be a parenthesized boolcomb or a parenthesized scalar
            # inside an atom; try boolcomb first by lookahead for a matching
            # structure, falling back to atom parsing
            save = self.pos
            try:
                self.next("(")
                inner = self.parse_sentence()
                self.next(")")
                return inner
            except ParseError:
                self.pos = save
                return self.parse_atom()
        if kind == "name" and val in ("A", "E"):
            return self.parse_sentence()
        return self.parse_atom()

    # atom := term "=" term | scalar "|" var
    def parse_atom(self):
        save = self.pos
        try:
            lam = self.parse_scalar()
            kind, val, _ = self.peek()
            if kind == "op" and val == "|":
                self.next()
                k2, var, at = self.next()
                if k2 != "name":
                    raise ParseError("expected variable after '|' at position %d" % at)
                # lam | x desugars to E h . x = h * lam
                h = "_div"
                return Exists(h, Atom({var: self.order.one(), h: -lam}))
            raise ParseError("not a divisibility atom")
        except ParseError:
            self.pos = save
        lhs = self.parse_term()
        self.next("=")
        rhs = self.parse_term()
        coeffs = dict(lhs)
        for v, c in rhs.items():
            coeffs[v] = coeffs.get(v, self.order.zero()) - c
        return Atom(coeffs)

    # term := sum of (var [* scalar] | scalar * var | "0")
    def parse_term(self):
        coeffs = {}
        sign = 1
        while True:
            kind, val, at = self.peek()
            if kind == "op" and val == "-":
                self.next()
                sign = -sign
                continue
            if kind == "op" and val == "+":
                self.next()
                continue
            part_var, part_coef = self.parse_term_part()
            if part_var is not None:
                cur = coeffs.get(part_var, self.order.zero())
                coeffs[part_var] = cur + (part_coef if sign == 1 else -part_coef)
            sign = 1
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                continue
            return coeffs

    def parse_term_part(self):
        kind, val, at = self.peek()
        if kind == "int" and val == "0" and not self._next_is_mult():
            self.next()
            return None, None
        if kind == "name" and not self._scalar_starts_here():
            self.next()
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "*":
                self.next()
                lam = self.parse_scalar()
                return val, lam
            return val, self.order.one()
        lam = self.parse_scalar()
        kind, val, at = self.peek()
        if kind == "op" and val == "*":
            self.next()
            k2, var, at2 = self.next()
            if k2 != "name":
                raise ParseError("expected variable at position %d" % at2)
            return var, lam
        raise ParseError("a term needs a variable at position %d" % at)

    def _next_is_mult(self):
        if self.pos + 1 < len(self.tokens):
            return self.tokens[self.pos + 1][1] == "*"
        return False

    def _scalar_starts_here(self):
        kind, val, _ = self.peek()
        return kind == "name" and val in ("g", "p", "sum_g")

    # scalar := signed sum of int, g, g^k, int*g^k, "p", "sum_g"; parens allowed
    def parse_scalar(self) -> GroupRingElement:
        return self._scalar_sum()

    def _scalar_sum(self):
        total = self._scalar_product()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.next()
                nxt = self._scalar_product()
                total = total + nxt if val == "+" else total - nxt
            else:
                return total

    def _scalar_product(self):
        total = self._scalar_piece()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                # only consume '*' when a scalar follows; 'scalar * var' is
                # handled by the term parser
                if self.pos + 1 < len(self.tokens):
                    k2, v2, _ = self.tokens[self.pos + 1]
                    if k2 == "int" or (k2 == "name" and v2 in ("g", "p", "sum_g")) or v2 == "(":
                        self.next()
                        total = total * self._scalar_piece()
                        continue
                return total
            return total

    def _scalar_piece(self):
        kind, val, at = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return -self._scalar_piece()
        if kind == "op" and val == "(":
            self.next()
            inner = self._scalar_sum()
            self.next(")")
            return inner
        if kind == "int":
            self.next()
            return self.order.scalar(int(val))
        if kind == "name" and val == "p":
            self.next()
            return self.order.scalar(self.order.p)
        if kind == "name" and val == "sum_g":
            self.next()
            return self.order.phi()
        if kind == "name" and val == "g":
            self.next()
            k2, v2, _ = self.peek()
            if k2 == "op" and v2 == "^":
                self.next()
                k3, v3, at3 = self.next()
                if k3 != "int":
                    raise ParseError("expected integer exponent at position %d" % at3)
                return self.order.gen() ** int(v3)
            return self.order.gen()
        raise ParseError("expected a scalar at position %d" % at)


def parse(text: str, p: int) -> Sentence:
    """Parse a closed first-order sentence over the group-ring order."""
    order = GroupRingOrder(p)
    parser = _Parser(text, order)
    s = parser.parse_sentence()
    if not parser.at_end():
        _, val, at = parser.peek()
        raise ParseError("unexpected token %r at position %d" % (val, at))
    free = s.free_variables()
    if free:
        raise FreeVariableError("free variables in sentence: %s" % ", ".join(sorted(free)))
    return s


def parse_pp(text: str, p: int) -> PpFormula:
    """Parse an existential conjunction of atoms into a pp-formula.

    Quantifier prefix must use E only; the free variables are ordered by
    first appearance in the text.
    """
    order = GroupRingOrder(p)
    parser = _Parser(text, order)
    ast = parser.parse_sentence()
    if not parser.at_end():
        _, val, at = parser.peek()
        raise ParseError("unexpected token %r at position %d" % (val, at))
    bound = []
    node = ast
    while isinstance(node, Exists):
        bound.append(node.var)
        node = node.body
    atoms = _flatten_conjunction(node)
    order_of_appearance = []

    def note(varname):
        if varname not in order_of_appearance and varname not in bound:
            order_of_appearance.append(varname)

    for atom in atoms:
        for v in atom.coeffs:
            if v.startswith("_div"):
                continue
            note(v)
    free_vars = order_of_appearance
    # inner divisibility sugar introduced fresh bound names
    extra_bound = sorted({v for a in atoms for v in a.coeffs if v.startswith("_div")})
    all_vars = free_vars + bound + extra_bound
    zero = order.zero()
    rows = []
    for v in all_vars:
        rows.append([a.coeffs.get(v, zero) for a in atoms])
    return PpFormula(order, len(free_vars), len(bound) + len(extra_bound), rows)


def _flatten_conjunction(node, counter=None):
    if counter is None:
        counter = [0]
    if isinstance(node, And):
        return _flatten_conjunction(node.left, counter) + _flatten_conjunction(node.right, counter)
    if isinstance(node, Atom):
        return [node]
    if isinstance(node, Exists):
        # nested sugar expansion (from divisibility atoms)
        inner = _flatten_conjunction(node.body, counter)
        counter[0] += 1
        fresh = "_div%d" % counter[0]
        renamed = []
        for a in inner:
            coeffs = {}
            for v, c in a.coeffs.items():
                coeffs[fresh if v == node.var else v] = c
            renamed.append(Atom(coeffs))
        return renamed
    raise ParseError("pp-formulas allow only conjunctions of atoms under E")


def parse_pair(text: str, p: int):
    """Parse ``"phi-text / psi-text"`` into a pp-pair."""
    if "/" not in text:
        raise ParseError("a pair needs the form 'phi / psi'")
    left, right = text.split("/", 1)
    return parse_pp(left.strip(), p), parse_pp(right.strip(), p)


# ---------------------------------------------------------------------------
# the brute-force oracle

class _FiniteEvaluator:
    """Exhaustive evaluation with elements encoded as residue tuples.

    Atom values only depend on the accumulated partial sums, one module
    element per atom, so quantifier recursion is memoized on that state;
    equal states collapse and the all-true/all-false worst cases stay
    cheap.
    """

    def __init__(self, M: FpModulePresentation):
        self.M = M
        self.divisors = [int(d) for d in M.invariant_factors()]
        self.zero = tuple([0] * M.ambient)
        sd = M._normal_form_data()
        self.V = sd.V
        self.Vinv = sd.Vinv
        self.elements = list(self._all_elements())
        self._act_tables = {}

    def _all_elements(self):
        import itertools as _it

        for combo in _it.product(*[range(d) for d in self.divisors]):
            yield combo

    def _act_table(self, lam):
        """Map: element residue tuple -> residue tuple of (element * lam)."""
        tab = self._act_tables.get(lam)
        if tab is None:
            M = self.M
            r = M.order.rank
            # action of lam on normal-form coordinates: conjugate by V
            from .linalg import mat_mul

            big = [[0] * M.ambient for _ in range(M.ambient)]
            Mult = M.order.mult_matrix(lam)
            for slot in range(M.k):
                for a in range(r):
                    for b in range(r):
                        big[slot * r + a][slot * r + b] = Mult[a][b]
            conj = mat_mul(mat_mul(self.Vinv, big), self.V)
            tab = {}
            for e in self.elements:
                out = []
                for j in range(M.ambient):
                    s = 0
                    for i in range(M.ambient):
                        if e[i]:
                            s += e[i] * conj[i][j]
                    d = self.divisors[j]
                    out.append(int(s) % d)
                tab[e] = tuple(out)
            self._act_tables[lam] = tab
        return tab

    def _add(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.divisors))

    def eval(self, sentence):
        atoms = []

        def collect(node):
            if isinstance(node, Atom):
                if node not in atoms:
                    atoms.append(node)
            elif isinstance(node, Not):
                collect(node.inner)
            elif isinstance(node, (And, Or, Implies)):
                collect(node.left)
                collect(node.right)
            elif isinstance(node, (Forall, Exists)):
                collect(node.body)

        collect(sentence)
        atom_index = {a: i for i, a in enumerate(atoms)}
        tables = {}
        for a in atoms:
            for v, lam in a.coeffs.items():
                tables[(atom_index[a], v)] = self._act_table(lam)
        relevant = {}

        def rel(node):
            if id(node) in relevant:
                return relevant[id(node)]
            if isinstance(node, Atom):
                out = frozenset([atom_index[node]])
            elif isinstance(node, Not):
                out = rel(node.inner)
            elif isinstance(node, (And, Or, Implies)):
                out = rel(node.left) | rel(node.right)
            else:
                out = rel(node.body)
            relevant[id(node)] = out
        # prime the table
            return out

        memo = {}

        def ev(node, state):
            if isinstance(node, Atom):
                return state[atom_index[node]] == self.zero
            if isinstance(node, Not):
                return not ev(node.inner, state)
            if isinstance(node, And):
                return ev(node.left, state) and ev(node.right, state)
            if isinstance(node, Or):
                return ev(node.left, state) or ev(node.right, state)
            if isinstance(node, Implies):
                return (not ev(node.left, state)) or ev(node.right, state)
            # quantifier: memoize on the projection of the state
            proj = rel(node)
            key = (id(node), tuple(state[i] for i in sorted(proj)))
            if key in memo:
                return memo[key]
            var = node.var
            moves = []
            for i in sorted(proj):
                tab = tables.get((i, var))
                if tab is not None:
                    moves.append((i, tab))
            seen_deltas = set()
            result = isinstance(node, Forall)
            for e in self.elements:
                delta = tuple(tab[e] for _, tab in moves)
                if delta in seen_deltas:
                    continue
                seen_deltas.add(delta)
                new_state = list(state)
                for (i, _), d in zip(moves, delta):
                    new_state[i] = self._add(new_state[i], d)
                sub = ev(node.body, tuple(new_state))
                if isinstance(node, Forall):
                    if not sub:
                        result = False
                        break
                else:
                    if sub:
                        result = True
                        break
            memo[key] = result
            return result

        init = tuple(self.zero for _ in atoms)
        return ev(sentence, init)


def eval_finite(sentence: Sentence, M: FpModulePresentation, cap=None) -> bool:
    """Truth of a sentence on a finite module by exhaustive expansion."""
    if not isinstance(M.order, GroupRingOrder):
        raise ValueError("the brute-force oracle runs over group-ring orders")
    if not M.is_finite():
        raise ValueError("module must be finite")
    cap = cap if cap is not None else module_size_cap(M.order.p)
    if M.size() > cap:
        raise ValueError("module size %d exceeds the cap %d" % (M.size(), cap))
    return _FiniteEvaluator(M).eval(sentence)


def random_finite_module(rng, p, cap=None) -> FpModulePresentation:
    """A random finite module over the group ring: a small presentation with
    a p-power exponent bound, resampled until the size cap is met."""
    order = GroupRingOrder(p)
    cap = cap if cap is not None else module_size_cap(p)
    while True:
        k = rng.randint(1, 2)
        ncols = rng.randint(0, 2)
        cols = []
        for _ in range(ncols):
            cols.append(tuple(
                order.element([rng.randint(-2, 2) for _ in range(p)]) for _ in range(k)
            ))
        a = rng.randint(1, 2)
        bound = order.scalar(p ** a)
        for i in range(k):
            col = [order.zero()] * k
            col[i] = bound
            cols.append(tuple(col))
        M = FpModulePresentation(order, k, cols)
        if M.is_finite() and 1 < M.size() <= cap:
            return M
