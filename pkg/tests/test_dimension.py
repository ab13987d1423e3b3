import random

import pytest

from zgtf.dimension import (
    FiniteChainDesc,
    FiniteLattice,
    OmegaChainDesc,
    chain_witness,
    interval_length,
    mdim_certificate,
    mdim_descriptor,
    mdim_finite,
    pp_sublattice,
)
from zgtf.orders import GroupRingOrder
from zgtf.pp import add, conjoin, divisibility, pp_true, pp_zero, scale
from zgtf.sampling import random_pp_formula
from zgtf.scalars import INF, ZZ
from zgtf.spectrum import catalog_zcp, regular_point, trivial_point, zeta_point


P = 3
ORDER = GroupRingOrder(P, ZZ)


def test_interval_length_examples():
    triv = trivial_point(P)
    phi = pp_true(ORDER)
    psi = divisibility(ORDER, ORDER.scalar(P * P))
    assert interval_length(phi, psi, triv) == 2
    assert interval_length(phi, pp_zero(ORDER), triv) == INF
    assert interval_length(psi, psi, triv) == 0


def test_interval_length_counts_elementary_divisors():
    for k in range(1, 11):
        triv = trivial_point(P)
        assert interval_length(pp_true(ORDER), divisibility(ORDER, ORDER.scalar(P ** k)), triv) == k


def test_chain_witness_examples():
    # the witness scalar is the point's own prime; p is a unit elsewhere
    for entry in catalog_zcp(P, [2]):
        N = entry.point
        if N.kind == "rational":
            assert not chain_witness(N, ORDER.scalar(P), 5)
        else:
            assert chain_witness(N, ORDER.scalar(N.prime), 10)
            if N.prime != P:
                assert not chain_witness(N, ORDER.scalar(P), 5)
    assert not chain_witness(trivial_point(P), ORDER.one(), 5)


def test_chain_witness_rejects_zero():
    with pytest.raises(ValueError):
        chain_witness(trivial_point(P), ORDER.zero(), 3)


def test_mdim_finite_chain():
    assert mdim_finite(FiniteLattice.chain(5)) == 0
    assert mdim_finite(FiniteLattice.chain(1)) == 0


def test_mdim_synthetic_descriptors():
    assert mdim_descriptor(FiniteChainDesc(7)) == 0
    assert mdim_descriptor(OmegaChainDesc(FiniteChainDesc(3))) == 1
    assert mdim_descriptor(OmegaChainDesc(OmegaChainDesc(FiniteChainDesc(2)))) == 2


def test_finite_lattice_validates():
    with pytest.raises(ValueError):
        # two incomparable maximal elements: no join
        FiniteLattice(["a", "b", "c"], [("a", "b"), ("a", "c")])


def test_pp_sublattice_from_truncated_data():
    N = regular_point(P)
    formulas = [
        pp_true(ORDER),
        divisibility(ORDER, ORDER.scalar(P)),
        divisibility(ORDER, ORDER.phi()),
        add(divisibility(ORDER, ORDER.scalar(P)), divisibility(ORDER, ORDER.phi())),
    ]
    L = pp_sublattice(N, formulas)
    assert mdim_finite(L) == 0
    assert len(L) >= 4


def test_ideal_type_intervals_are_finite():
    rng = random.Random(307)
    points = [trivial_point(P), zeta_point(P), regular_point(P)]
    for _ in range(15):
        phi = random_pp_formula(rng, ORDER, max_depth=1)
        k = rng.randint(1, 3)
        # psi between p^k * phi and phi: the interval has p-power index
        psi = add(
            scale(phi, ORDER.scalar(P ** k)),
            conjoin(phi, random_pp_formula(rng, ORDER, max_depth=1)),
        )
        for N in points:
            assert interval_length(phi, psi, N) != INF


def test_mdim_certificate():
    rng = random.Random(311)
    points = [trivial_point(P), zeta_point(P), regular_point(P)]
    sampled = []
    for _ in range(10):
        phi = random_pp_formula(rng, ORDER, max_depth=1)
        psi = add(scale(phi, ORDER.scalar(P ** rng.randint(1, 2))), conjoin(phi, pp_zero(ORDER)))
        sampled.append((phi, psi))
    report = mdim_certificate(P, sampled, points)
    assert report["chain_witness"]
    assert report["intervals_finite"]
    assert report["certified"]
