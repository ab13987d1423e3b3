import random
from fractions import Fraction

import pytest

from zgtf.linalg import (
    Lattice,
    left_kernel,
    mat_eq,
    mat_mul,
    smith_form,
    solve_linear,
)
from zgtf.scalars import INF, QQ, ZZ, Zloc, valuation


def check_decomposition(A, sd):
    assert mat_eq(mat_mul(mat_mul(sd.U, A), sd.V), sd.D)
    # U, V invertible: inverses reproduce A
    assert mat_eq(mat_mul(mat_mul(sd.Uinv, sd.D), sd.Vinv), A)


def test_smith_identity():
    A = [[1, 0], [0, 1]]
    sd = smith_form(A, ZZ)
    assert sd.diagonal() == [1, 1]
    check_decomposition(A, sd)


def test_smith_divisibility_reorder():
    p = 5
    A = [[p, 0], [0, 1]]
    sd = smith_form(A, ZZ)
    assert sd.diagonal() == [1, p]
    check_decomposition(A, sd)


def test_smith_derived_2x2():
    # oracle: d1 = gcd of all entries, d1*d2 = |det|
    A = [[2, 4], [6, 8]]
    sd = smith_form(A, ZZ)
    d = sd.diagonal()
    assert d[0] == 2  # gcd(2, 4, 6, 8)
    assert d[0] * d[1] == abs(2 * 8 - 4 * 6)
    assert d == [2, 4]
    check_decomposition(A, sd)


def test_smith_random_reconstruction_and_determinant():
    rng = random.Random(7)
    for _ in range(40):
        m = rng.randint(1, 4)
        n = rng.randint(1, 4)
        A = [[rng.randint(-8, 8) for _ in range(n)] for _ in range(m)]
        sd = smith_form(A, ZZ)
        check_decomposition(A, sd)
        diag = sd.diagonal()
        assert all(d >= 0 for d in diag)
        for i in range(len(diag) - 1):
            if diag[i]:
                assert diag[i + 1] % diag[i] == 0
            else:
                assert diag[i + 1] == 0
        if m == n:
            det = _det(A)
            prod = 1
            for d in diag:
                prod *= d
            assert prod == abs(det)


def _det(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in A[1:]]
        total += (-1) ** j * A[0][j] * _det(minor)
    return total


def test_smith_local_pivots_are_p_powers():
    rng = random.Random(11)
    R = Zloc(3)
    for _ in range(30):
        m = rng.randint(1, 4)
        n = rng.randint(1, 4)
        A = [
            [Fraction(rng.randint(-18, 18), rng.choice([1, 2, 5, 7])) for _ in range(n)]
            for _ in range(m)
        ]
        sd = smith_form(A, R)
        check_decomposition(A, sd)
        vals = []
        for d in sd.diagonal():
            if d:
                v = valuation(d, 3)
                assert d == Fraction(3) ** v
                vals.append(v)
        assert vals == sorted(vals)


def test_smith_local_rejects_bad_denominator():
    with pytest.raises(ValueError):
        smith_form([[Fraction(1, 3)]], Zloc(3))


def test_solve_linear_examples():
    assert solve_linear([[2]], [4], ZZ) == [2]
    assert solve_linear([[2]], [3], ZZ) is None
    # 2 is a unit in Z_(3)
    x = solve_linear([[2]], [3], Zloc(3))
    assert x == [Fraction(3, 2)]
    assert valuation(x[0], 3) == 1


def test_solve_linear_random_roundtrip():
    rng = random.Random(3)
    for ring in (ZZ, Zloc(3), QQ):
        for _ in range(25):
            m = rng.randint(1, 3)
            n = rng.randint(1, 3)
            A = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(m)]
            x0 = [rng.randint(-4, 4) for _ in range(n)]
            b = [sum(A[i][j] * x0[j] for j in range(n)) for i in range(m)]
            x = solve_linear(A, b, ring)
            assert x is not None
            assert [sum(A[i][j] * x[j] for j in range(n)) for i in range(m)] == b


def test_left_kernel():
    A = [[1, 2], [2, 4]]
    ker = left_kernel(A, ZZ)
    assert len(ker) == 1
    v = ker[0]
    assert [v[0] * 1 + v[1] * 2, v[0] * 2 + v[1] * 4] == [0, 0]


def test_valuation_examples():
    assert valuation(75, 5) == 2
    assert valuation(0, 5) == INF
    assert valuation(Fraction(9, 10), 3) == 2


def test_lattice_index_and_contains():
    L1 = Lattice(ZZ, 2, [[2, 0], [0, 3]])
    full = Lattice.full(ZZ, 2)
    assert L1.index_in(full) == 6
    assert full.index_in(full) == 1
    assert L1.contains([2, 3])
    assert not L1.contains([1, 0])
    sub = Lattice(ZZ, 2, [[4, 0], [0, 3]])
    assert sub.index_in(L1) == 2


def test_lattice_rank_drop_gives_infinite_index():
    L = Lattice(ZZ, 2, [[1, 0]])
    full = Lattice.full(ZZ, 2)
    assert L.index_in(full) == INF


def test_lattice_intersection_and_sum():
    A = Lattice(ZZ, 2, [[2, 0], [0, 1]])
    B = Lattice(ZZ, 2, [[3, 0], [0, 1]])
    meet = A.intersect(B)
    assert meet.contains([6, 0])
    assert not meet.contains([2, 0])
    assert not meet.contains([3, 0])
    join = A.sum(B)
    assert join.contains([1, 0])


def test_lattice_saturation():
    L = Lattice(ZZ, 2, [[2, 4]])
    S = L.saturate()
    assert S.contains([1, 2])
    assert S.rank() == 1
    assert not S.contains([0, 1])
