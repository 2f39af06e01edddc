from __future__ import annotations

import pytest

from orbitcert.cocycle import (
    level_slack,
    verify_coe,
    verify_conj,
)
from orbitcert.dynamics import (
    Cyclic,
    Odometer,
    PointAtLevel,
    SystemSpec,
    enumerate_points,
)
from orbitcert.intmat import IntMatrix
from orbitcert.supernatural import parse_sn, parse_sn_list
from orbitcert.witness import (
    build_basic_coe,
    build_coe_witness,
    build_conj_witness,
    build_finite_coe,
    direct_sum_coe,
    permutation_witness,
)


def test_basic_split_five():
    w = build_basic_coe(5, parse_sn("2^inf"))
    assert w.source == SystemSpec((Odometer(parse_sn("5*2^inf")),))
    assert w.target == SystemSpec((Cyclic(5), Odometer(parse_sn("2^inf"))))
    report = verify_coe(w, level=3, radius=4)
    assert report.passed, report.summary()
    # the seam cocycle reads one digit: locality is exactly the 5-divisible level
    assert w.a.generators[0].level == 1
    assert level_slack(w.a.generators[0]) == 0


def test_basic_split_shared_prime():
    w = build_basic_coe(2, parse_sn("2^inf"))
    assert w.phi.level_map(3) == 4  # one extra binary digit feeds the split
    assert verify_coe(w, level=3, radius=4).passed


def test_basic_split_trivial_cycle():
    w = build_basic_coe(1, parse_sn("3^inf"))
    assert verify_coe(w, level=3, radius=4).passed
    x = PointAtLevel(3, (7,))
    assert w.phi(3, x).residues == (0, 7)


def test_finite_merge_roundtrip():
    w = build_finite_coe((2, 3), (6,))
    report = verify_coe(w, level=2, radius=4)
    assert report.passed, report.summary()
    assert w.phi(0, PointAtLevel(0, (1, 2))).residues == (5,)


def test_finite_merge_rejects_size_mismatch():
    with pytest.raises(ValueError, match="equal size"):
        build_finite_coe((2, 3), (5,))


def test_permutation_witness():
    spec = SystemSpec((Cyclic(2), Odometer(parse_sn("3^inf")), Cyclic(5)))
    w = permutation_witness(spec, (2, 0, 1))
    assert w.target.factors == (Cyclic(5), Cyclic(2), Odometer(parse_sn("3^inf")))
    assert verify_coe(w, level=2, radius=3).passed
    with pytest.raises(ValueError, match="permutation"):
        permutation_witness(spec, (0, 0, 1))


def test_direct_sum_of_splits():
    w = direct_sum_coe(
        [build_basic_coe(5, parse_sn("2^inf")), build_basic_coe(1, parse_sn("3^inf"))]
    )
    assert w.source.rank == 2 and w.target.rank == 4
    assert verify_coe(w, level=2, radius=3).passed


M_EXAMPLE = parse_sn_list("5*2^inf, 3^inf")
N_EXAMPLE = parse_sn_list("2^inf, 5*3^inf")


def test_example_pair_witness_verifies_at_acceptance_scale():
    w = build_coe_witness(M_EXAMPLE, N_EXAMPLE)
    report = verify_coe(w, level=4, radius=6)
    assert report.passed, report.summary()


def test_identity_shortcut():
    ms = parse_sn_list("2^inf, 3^inf")
    w = build_coe_witness(ms, ms)
    assert verify_coe(w, level=3, radius=4).passed
    for x in enumerate_points(w.source, 3):
        assert w.phi(3, x) == x


def test_swapped_multiplier_witness():
    # same class, multipliers travel between the factors
    w = build_coe_witness(parse_sn_list("2^inf, 3*2^inf"), parse_sn_list("3*2^inf, 2^inf"))
    assert verify_coe(w, level=4, radius=6).passed


def test_rebalanced_witness_for_absorbed_prime():
    # multiplier books differ by a factor of 3 absorbed in the 3^inf class
    ms = parse_sn_list("2^inf*3^inf, 3*2^inf")
    ns = parse_sn_list("2^inf*3^inf, 9*2^inf")
    w = build_coe_witness(ms, ns)
    report = verify_coe(w, level=3, radius=4)
    assert report.passed, report.summary()


def test_build_coe_witness_rejects_inequivalent():
    with pytest.raises(ValueError, match="not orbit equivalent"):
        build_coe_witness(parse_sn_list("2^inf"), parse_sn_list("3^inf"))


def test_witness_locality_is_tight():
    w = build_coe_witness(M_EXAMPLE, N_EXAMPLE)
    for gen in w.a.generators + w.b.generators:
        assert level_slack(gen) == 0


def test_conj_witness_swap_pair():
    ms = parse_sn_list("2*5^inf, 3*5^inf")
    ns = parse_sn_list("3*5^inf, 2*5^inf")
    cw = build_conj_witness(ms, ns)
    report = verify_conj(cw, level=4, radius=6)
    assert report.passed, report.summary()


def test_conj_witness_identity_case():
    ms = parse_sn_list("2^inf, 5^inf")
    cw = build_conj_witness(ms, ms)
    assert cw.rho.matrix == IntMatrix.identity(2)
    assert verify_conj(cw, level=3, radius=4).passed
    for x in enumerate_points(cw.source, 3):
        assert cw.phi(3, x) == x


def test_conj_witness_crt_merge():
    # Z/2 x Z/3 multipliers against Z/6 x Z/1 over the same base
    ms = parse_sn_list("2*7^inf, 3*7^inf")
    ns = parse_sn_list("6*7^inf, 7^inf")
    cw = build_conj_witness(ms, ns)
    report = verify_conj(cw, level=3, radius=5)
    assert report.passed, report.summary()


def test_conj_vectorized_matches_pointwise():
    import numpy as np

    ms = parse_sn_list("2*5^inf, 3*5^inf")
    ns = parse_sn_list("3*5^inf, 2*5^inf")
    cw = build_conj_witness(ms, ns)
    for f in (cw.phi, cw.phi_inv):
        k = 2
        pts = enumerate_points(f.source, f.level_map(k))
        res = np.array([p.residues for p in pts], dtype=np.int64)
        table = f.vectorized(k, res)
        for row, p in zip(table, pts):
            assert tuple(int(v) for v in row) == f(k, p).residues


def test_conj_witness_rejects_nonconjugate():
    with pytest.raises(ValueError, match="not conjugate"):
        build_conj_witness(parse_sn_list("2*5^inf, 2*5^inf"), parse_sn_list("4*5^inf, 5^inf"))


def test_conj_equivariance_is_exact_not_just_verified():
    ms = parse_sn_list("2*5^inf, 3*5^inf")
    ns = parse_sn_list("3*5^inf, 2*5^inf")
    cw = build_conj_witness(ms, ns)
    from orbitcert.dynamics import GroupElement, act

    g = GroupElement((2, -1))
    h = GroupElement(cw.rho.apply(g.coords))
    lvl = cw.phi.level_map(3)
    for x in enumerate_points(cw.source, lvl)[:40]:
        left = cw.phi(3, act(cw.source, lvl, g, x))
        right = act(cw.target, 3, h, cw.phi(3, x))
        assert left == right
