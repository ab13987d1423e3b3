import random
from fractions import Fraction

import pytest

from zgtf.maranda import (
    TruncationPreconditionError,
    hom_lift_exists,
    hom_mod_pk_basis,
    k0,
    k0_ext_oracle,
    lemma_membership_biconditional,
    mutual_inverse_roundtrip,
    truncate_formula,
    truncated_evaluation,
    truncation_order_preserved,
    untruncate,
    TruncatedOrder,
    TruncatedPpFormula,
)
from zgtf.orders import GroupRingOrder, MatrixOrder
from zgtf.pp import (
    add,
    annihilator,
    conjoin,
    divisibility,
    divisibility_all,
    equivalent,
    evaluate_point,
    pp_true,
    tf_reduct,
)
from zgtf.sampling import random_pp_formula
from zgtf.scalars import Zloc
from zgtf.spectrum import regular_point, trivial_point, zeta_point


P = 3
LOCAL = GroupRingOrder(P, Zloc(P))


def lattice_points():
    return [
        trivial_point(P, order=LOCAL),
        zeta_point(P, order=LOCAL),
        regular_point(P, order=LOCAL),
    ]


def maranda_formula(rng, k, kb=1):
    """Random formula satisfying the truncation preconditions."""
    raw = random_pp_formula(rng, LOCAL, max_depth=1)
    phi = tf_reduct(add(raw, divisibility(LOCAL, LOCAL.scalar(P ** (k - kb)))))
    return phi


def test_k0_group_ring():
    for p in (2, 3, 5):
        assert k0(GroupRingOrder(p, Zloc(p))) == 1


def test_k0_trivial_group():
    assert k0(GroupRingOrder(1, Zloc(3))) == 0


def test_k0_group_ring_matches_ext_oracle():
    assert k0_ext_oracle(GroupRingOrder(3, Zloc(3))) == 1
    assert k0_ext_oracle(GroupRingOrder(2, Zloc(2))) == 1


def test_k0_matrix_order_pinned():
    # Pinned from the Ext oracle, then cross-checked by hand: the only
    # non-projective lattice is the middle one, Hom(P, P) consists of the
    # scalars of the base ring, and the restriction along the almost-split
    # embedding has image p * Hom(P, P), so Ext^1(P, P) has exponent p;
    # Ext^1(P, P1) and Ext^1(P, P2) vanish.
    value = k0_ext_oracle(MatrixOrder(3))
    assert value == k0(MatrixOrder(3))
    assert value == 1
    assert k0_ext_oracle(MatrixOrder(2)) == 1


def test_k0_requires_local_order():
    from zgtf.scalars import ZZ

    with pytest.raises(ValueError):
        k0(GroupRingOrder(3, ZZ))


def test_truncate_rejects_small_k():
    phi = divisibility(LOCAL, LOCAL.scalar(P))
    with pytest.raises(TruncationPreconditionError):
        truncate_formula(phi, 1)


def test_truncate_rejects_torsion_realization():
    phi = annihilator(LOCAL, LOCAL.scalar(P))
    with pytest.raises(TruncationPreconditionError):
        truncate_formula(phi, 2)


def test_truncate_rejects_formula_below_divisibility():
    # p^5 | x sits strictly below p^2 | x, so truncation at k = 3 must fail
    phi = tf_reduct(divisibility(LOCAL, LOCAL.scalar(P ** 5)))
    with pytest.raises(TruncationPreconditionError):
        truncate_formula(phi, 3)
    # (1 - g) | x fails on the trivial point already
    phi2 = tf_reduct(divisibility(LOCAL, LOCAL.one() - LOCAL.gen()))
    with pytest.raises(TruncationPreconditionError):
        truncate_formula(phi2, 2)
    # but the exact power is fine
    ok = truncate_formula(tf_reduct(divisibility(LOCAL, LOCAL.scalar(P ** 2))), 3)
    assert ok.n == 1


def test_truncation_of_power_divisibility():
    # p^(k-k0) | x truncates to the principal congruence formula
    k = 3
    phi = tf_reduct(divisibility(LOCAL, LOCAL.scalar(P ** (k - 1))))
    psi_k = truncate_formula(phi, k)
    N = trivial_point(P, order=LOCAL)
    lat = truncated_evaluation(psi_k, N)
    target = evaluate_point(divisibility(LOCAL, LOCAL.scalar(P ** (k - 1))), N)
    assert lat.equals(target.sum(_pk_full(N, P ** k)))


def _pk_full(N, pk):
    from zgtf.linalg import Lattice

    rows = []
    for t in range(N.rank):
        row = [Fraction(0)] * N.rank
        row[t] = Fraction(pk)
        rows.append(row)
    return Lattice(N.base, N.rank, rows)


def test_truncate_true_formula():
    phi = pp_true(LOCAL)
    psi_k = truncate_formula(phi, 2)
    assert psi_k.c == 0


def test_untruncate_annihilator():
    # (x(g-1) = 0 over the quotient) lifts to p^k | x(g-1)
    torder = TruncatedOrder(LOCAL, 2)
    psi = TruncatedPpFormula(torder, 1, 0, [[LOCAL.gen() - LOCAL.one()]])
    lifted = untruncate(psi)
    N = regular_point(P, order=LOCAL)
    direct = evaluate_point(lifted, N)
    # oracle: x with x*(g-1) in p^2 * Lambda
    target_rows = []
    from zgtf.linalg import Lattice, left_kernel

    A = N.act(LOCAL.gen() - LOCAL.one())
    aug = [row[:] for row in A]
    slack = []
    for t in range(N.rank):
        srow = [Fraction(0)] * N.rank
        srow[t] = Fraction(P ** 2)
        slack.append(srow)
    ker = left_kernel(aug + slack, N.base)
    oracle = Lattice(N.base, N.rank, [kv[: N.rank] for kv in ker])
    assert direct.equals(oracle)


def test_untruncate_zero_formula():
    torder = TruncatedOrder(LOCAL, 2)
    psi = TruncatedPpFormula(torder, 1, 0, [[LOCAL.one()]])
    lifted = untruncate(psi)
    assert equivalent(lifted, divisibility(LOCAL, LOCAL.scalar(P ** 2)))


def test_untruncate_divisibility_roundtrip():
    # lifting the truncation of p^(k-k0) | x recovers p^(k-k0) | x
    k = 2
    phi = tf_reduct(divisibility(LOCAL, LOCAL.scalar(P)))
    psi_k = truncate_formula(phi, k)
    assert equivalent(untruncate(psi_k), divisibility(LOCAL, LOCAL.scalar(P)))


def test_membership_biconditional_sampled():
    rng = random.Random(211)
    points = lattice_points()
    for k in (2, 3):
        for _ in range(12):
            phi = maranda_formula(rng, k)
            for N in points:
                inside, outside = lemma_membership_biconditional(phi, k, N, 6, rng)
                assert inside + outside == 6


def test_mutual_inverse_roundtrip_sampled():
    rng = random.Random(223)
    points = lattice_points()
    for k in (2, 3):
        for _ in range(8):
            phi = maranda_formula(rng, k)
            for N in points:
                assert mutual_inverse_roundtrip(phi, k, N)


def test_truncation_preserves_order():
    rng = random.Random(227)
    points = lattice_points()
    k = 2
    for _ in range(10):
        phi = maranda_formula(rng, k)
        bigger = tf_reduct(add(phi, random_pp_formula(rng, LOCAL, max_depth=1)))
        for N in points:
            assert truncation_order_preserved(phi, bigger, k, N)


def test_hom_lift_exists_sampled():
    rng = random.Random(229)
    points = lattice_points()
    k, kb = 3, 1
    for L in points:
        for N in points:
            basis = hom_mod_pk_basis(L, N, k)
            for _ in range(4):
                H = [0] * (L.rank * N.rank)
                for row in basis:
                    c = rng.randrange(P ** k)
                    H = [(h + c * x) % (P ** k) for h, x in zip(H, row)]
                assert hom_lift_exists(L, N, k, kb, H)
