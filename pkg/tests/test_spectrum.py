import random
from fractions import Fraction

import pytest

from zgtf.orders import GroupRingOrder
from zgtf.pp import annihilator, divisibility, evaluate_point, pp_true, pp_zero
from zgtf.sampling import random_pp_formula
from zgtf.scalars import INF, ZZ
from zgtf.spectrum import (
    SeparationError,
    approximation_formula,
    ar_sequence_check,
    catalog_matrix_order,
    catalog_zcp,
    invariant,
    membership_matrix,
    reconstruct_cb_ranks,
    regular_point,
    trivial_point,
    truncated_invariant,
    zeta_point,
)


P = 3
ORDER = GroupRingOrder(P, ZZ)


def all_pairs(entries):
    return [pair for e in entries for pair in e.isolating_pairs]


def test_invariant_examples():
    triv = trivial_point(P)
    v = invariant(pp_true(ORDER), divisibility(ORDER, ORDER.scalar(P)), triv)
    assert v.value == P
    entries = catalog_zcp(P, [2])
    q_point = entries[5].point
    assert entries[5].label == "Q"
    assert invariant(pp_true(ORDER), divisibility(ORDER, ORDER.scalar(P)), q_point).is_one()
    reg = regular_point(P)
    v = invariant(divisibility(ORDER, ORDER.phi()), divisibility(ORDER, ORDER.scalar(P)), reg)
    assert v.value == P


def test_catalog_zcp_point_list():
    entries = catalog_zcp(3, [2])
    assert [e.label for e in entries] == [
        "Zhat_3",
        "Zhat_3(zeta_3)",
        "Zhat_3C3",
        "Zhat_2",
        "Zhat_2(zeta_3)",
        "Q",
        "Q(zeta_3)",
    ]
    assert len(catalog_zcp(3, [])) == 5
    assert entries[-1].cb_rank == 1
    assert [e.cb_rank for e in entries] == [0, 0, 0, 0, 0, 1, 1]


def test_catalog_rejects_bad_primes():
    with pytest.raises(ValueError):
        catalog_zcp(4, [])
    with pytest.raises(ValueError):
        catalog_zcp(3, [3])
    with pytest.raises(ValueError):
        catalog_zcp(3, [6])


def test_points_satisfy_defining_relation():
    for e in catalog_zcp(3, [2]):
        assert e.point.check_defining_relation()
    for e in catalog_matrix_order(3):
        assert e.point.check_defining_relation()


def test_membership_matrix_separation_and_singletons():
    entries = catalog_zcp(P, [2])
    pairs = all_pairs(entries)
    matrix = membership_matrix(entries, pairs)
    # regular pair is a singleton: only the regular point
    reg_col = [e.isolating_pairs[0] for e in entries if e.label == "Zhat_3C3"][0]
    j = pairs.index(reg_col)
    col = [matrix[i][j] for i in range(len(entries))]
    assert col == [False, False, True, False, False, False, False]
    # q-pairs are singletons
    for q_label, pair_owner in (("Zhat_2", 3), ("Zhat_2(zeta_3)", 4)):
        j = pairs.index(entries[pair_owner].isolating_pairs[0])
        col = [matrix[i][j] for i in range(len(entries))]
        assert col == [i == pair_owner for i in range(len(entries))]
    # every point is in its own pair
    for i, e in enumerate(entries):
        j = pairs.index(e.isolating_pairs[0])
        assert matrix[i][j]
    # Q's row is false on every lattice pair
    qi = [i for i, e in enumerate(entries) if e.label == "Q"][0]
    for j, pair in enumerate(pairs[:5]):
        assert not matrix[qi][j]


def test_rational_pairs_select_rational_points_at_level_one():
    entries = catalog_zcp(P, [2])
    pairs = all_pairs(entries)
    matrix = membership_matrix(entries, pairs)
    rat_rows = [i for i, e in enumerate(entries) if e.point.kind == "rational"]
    for i in rat_rows:
        j = pairs.index(entries[i].isolating_pairs[0])
        for t in rat_rows:
            assert matrix[t][j] == (t == i)


def test_membership_rows_distinct_3x3_p_part():
    entries = catalog_zcp(P, [2])[:3]
    pairs = [e.isolating_pairs[0] for e in entries]
    matrix = membership_matrix(entries, pairs, require_separation=False)
    assert matrix[0] != matrix[1] != matrix[2] != matrix[0]


def test_separation_error_on_duplicate_rows():
    entries = catalog_zcp(P, [2])
    with pytest.raises(SeparationError):
        membership_matrix(entries, [(pp_true(ORDER), pp_zero(ORDER))])


def test_cb_rank_reconstruction():
    for p in (2, 3):
        entries = catalog_zcp(p, [2] if p != 2 else [3])
        pairs = all_pairs(entries)
        matrix = membership_matrix(entries, pairs)
        ranks = reconstruct_cb_ranks(entries, matrix)
        assert ranks == {e.label: e.cb_rank for e in entries}
    entries = catalog_matrix_order(3)
    pairs = all_pairs(entries)
    matrix = membership_matrix(entries, pairs)
    ranks = reconstruct_cb_ranks(entries, matrix)
    assert ranks == {e.label: e.cb_rank for e in entries}


def test_matrix_order_catalog():
    entries = catalog_matrix_order(3)
    assert len(entries) == 4
    assert [e.label for e in entries] == ["P1", "P2", "P", "S"]
    assert [e.cb_rank for e in entries] == [0, 0, 0, 1]
    # the matrix-order lattice pairs are genuine singletons
    pairs = [e.isolating_pairs[0] for e in entries[:3]]
    matrix = membership_matrix(entries, pairs, require_separation=False)
    for j in range(3):
        col = [matrix[i][j] for i in range(4)]
        assert col == [i == j for i in range(4)]


def test_ar_sequence_check():
    for p in (2, 3):
        report = ar_sequence_check(p)
        assert report["left_map_is_homomorphism"]
        assert report["right_map_is_homomorphism"]
        assert report["zero_composition"]
        assert report["exact"]
        assert report["non_split"]
        assert report["all_passed"]
        # (p*1, 1) maps to ((p,1), (p^2, p)) in the published coordinates
        assert report["example_image"] == [p, 1, 1, p]


def test_closure_property():
    # a rational point in a pair forces the lattice points above it in
    rng = random.Random(101)
    entries = catalog_zcp(P, [2])
    by_label = {e.label: e.point for e in entries}
    summands = {
        "Zhat_3": ["Q"],
        "Zhat_3(zeta_3)": ["Q(zeta_3)"],
        "Zhat_3C3": ["Q", "Q(zeta_3)"],
        "Zhat_2": ["Q"],
        "Zhat_2(zeta_3)": ["Q(zeta_3)"],
    }
    for _ in range(12):
        phi = random_pp_formula(rng, ORDER)
        psi = random_pp_formula(rng, ORDER)
        for lat_label, rats in summands.items():
            for rat_label in rats:
                if not invariant(phi, psi, by_label[rat_label]).is_one():
                    assert not invariant(phi, psi, by_label[lat_label]).is_one()


def test_invariant_multiplicative_on_direct_sums():
    rng = random.Random(103)
    pts = [trivial_point(P), zeta_point(P), regular_point(P)]
    for _ in range(10):
        phi = random_pp_formula(rng, ORDER)
        psi = random_pp_formula(rng, ORDER)
        for a in pts:
            for b in pts:
                s = a.direct_sum(b)
                v = invariant(phi, psi, s)
                va = invariant(phi, psi, a)
                vb = invariant(phi, psi, b)
                assert v.value == (va * vb).value


def test_truncated_invariant_cross_check():
    rng = random.Random(107)
    pts = [trivial_point(P), zeta_point(P), regular_point(P)]
    for _ in range(6):
        phi = random_pp_formula(rng, ORDER, max_depth=1)
        psi = random_pp_formula(rng, ORDER, max_depth=1)
        for N in pts:
            exact = invariant(phi, psi, N)
            approx = truncated_invariant(phi, psi, N, kmax=8)
            assert exact.value == approx.value


def test_approximation_stabilization():
    # stabilization is claimed within the interval above p | x
    from zgtf.pp import add

    rng = random.Random(109)
    pts = [trivial_point(P), zeta_point(P), regular_point(P)]
    for _ in range(8):
        phi = add(
            random_pp_formula(rng, ORDER, max_depth=1),
            divisibility(ORDER, ORDER.scalar(P)),
        )
        perturbations = {}
        def perturb(s, j):
            key = (s, j)
            if key not in perturbations:
                perturbations[key] = ORDER.element(
                    [rng.randint(-2, 2) for _ in range(P)]
                )
            return perturbations[key]
        for N in pts:
            target = evaluate_point(phi, N)
            stabilized_at = None
            for i in range(1, 9):
                phi_i = approximation_formula(phi, P, i, perturb)
                if evaluate_point(phi_i, N).equals(target):
                    stabilized_at = i
                    break
            assert stabilized_at is not None
            # once stabilized it stays there
            for i in range(stabilized_at, stabilized_at + 2):
                phi_i = approximation_formula(phi, P, i, perturb)
                assert evaluate_point(phi_i, N).equals(target)


def test_divisibility_dichotomy():
    entries = catalog_zcp(P, [2])
    for e in entries:
        point = e.point
        v = invariant(pp_true(ORDER), divisibility(ORDER, ORDER.scalar(P)), point)
        if e.label in ("Zhat_3", "Zhat_3(zeta_3)", "Zhat_3C3"):
            assert not v.is_one()
        else:
            assert v.is_one()
        if point.kind == "q-lattice":
            q = point.prime
            vq = invariant(pp_true(ORDER), divisibility(ORDER, ORDER.scalar(q)), point)
            assert not vq.is_one()
