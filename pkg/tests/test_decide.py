from __future__ import annotations

import random
from fractions import Fraction

import pytest

from orbitcert.decide import (
    CoeDecision,
    TGroup,
    coe_decide,
    conj_decide,
    eig_cross_check,
    eig_group,
    eig_group_oracle,
    eig_truncation,
    free_group_counterexample_check,
    k_invariant,
    k_invariant_equal,
    tgroup_contains,
    tgroup_product,
)
from orbitcert.oracles import conjugacy_bruteforce
from orbitcert.supernatural import ONE, parse_sn, parse_sn_list, product, sn_str

M_EXAMPLE = parse_sn_list("5*2^inf, 3^inf")
N_EXAMPLE = parse_sn_list("2^inf, 5*3^inf")


def test_example_pair_is_coe():
    d = coe_decide(M_EXAMPLE, N_EXAMPLE)
    assert d.equivalent
    assert d.sigma == (0, 1)
    assert [(p.m, p.n) for p in d.pairs] == [(1, 5), (5, 1)]


def test_example_pair_is_not_conjugate():
    d = conj_decide(M_EXAMPLE, N_EXAMPLE)
    assert not d.conjugate
    assert "not isomorphic" in d.obstruction


def test_padded_family_same_verdicts():
    pad = (parse_sn("2^inf"),)
    m3 = M_EXAMPLE + pad
    n3 = N_EXAMPLE + pad
    assert coe_decide(m3, n3).equivalent
    assert not conj_decide(m3, n3).conjugate


def test_swap_pair_is_conjugate():
    ms = parse_sn_list("2*5^inf, 3*5^inf")
    ns = parse_sn_list("3*5^inf, 2*5^inf")
    d = conj_decide(ms, ns)
    assert d.conjugate
    (block,) = d.blocks
    assert block.left_multipliers == (2, 3)
    assert block.right_multipliers == (3, 2)
    assert sn_str(block.base) == "5^inf"


def test_klein_versus_cyclic_is_coe_but_not_conjugate():
    ms = parse_sn_list("2*5^inf, 2*5^inf")
    ns = parse_sn_list("4*5^inf, 5^inf")
    assert coe_decide(ms, ns).equivalent
    assert not conj_decide(ms, ns).conjugate  # Z/2 x Z/2 vs Z/4


def test_obstruction_order():
    a = parse_sn_list("2^inf")
    assert "rank" in coe_decide(a, parse_sn_list("2^inf, 3^inf")).obstruction
    assert "total" in coe_decide(
        parse_sn_list("2^inf, 3^inf"), parse_sn_list("2^inf, 5*3^inf")
    ).obstruction
    assert "class" in coe_decide(
        parse_sn_list("2^inf*3^inf, 5^inf"), parse_sn_list("2^inf*5^inf, 3^inf")
    ).obstruction


def test_coe_rejects_finite_factor():
    with pytest.raises(ValueError, match="finite"):
        coe_decide(parse_sn_list("12"), parse_sn_list("2^inf"))


def test_imbalanced_multipliers_still_coe():
    # the 3-exponent books only balance inside the 3^inf class
    ms = parse_sn_list("2^inf*3^inf, 3*2^inf")
    ns = parse_sn_list("2^inf*3^inf, 9*2^inf")
    d = coe_decide(ms, ns)
    assert d.equivalent
    prods = [(p.m, p.n) for p in d.pairs]
    assert prods == [(1, 1), (3, 1)]


def test_k_invariant_contents():
    k = k_invariant(M_EXAMPLE)
    assert k.rank == 2
    assert sn_str(k.total) == "2^inf*3^inf*5"
    keys = dict(k.subset_classes)
    assert keys[frozenset()] == 1
    assert keys[frozenset({2})] == 1
    assert keys[frozenset({3})] == 1
    assert keys[frozenset({2, 3})] == 1


def test_k_invariant_equality_tracks_coe_on_examples():
    assert k_invariant_equal(M_EXAMPLE, N_EXAMPLE)
    assert not k_invariant_equal(M_EXAMPLE, parse_sn_list("2^inf, 3^inf"))
    assert k_invariant_equal(
        parse_sn_list("2*5^inf, 2*5^inf"), parse_sn_list("4*5^inf, 5^inf")
    )


def test_conj_decide_matches_bruteforce_spot_checks():
    rng = random.Random(7)
    pool = ["2^inf", "3*2^inf", "2^inf*3^inf", "5^inf", "2*5^inf", "4*5^inf", "3*5^inf"]
    for _ in range(60):
        r = rng.randint(1, 3)
        ms = tuple(parse_sn(rng.choice(pool)) for _ in range(r))
        ns = tuple(parse_sn(rng.choice(pool)) for _ in range(r))
        assert bool(conj_decide(ms, ns)) == conjugacy_bruteforce(ms, ns), (ms, ns)


def test_conjugate_implies_coe():
    rng = random.Random(11)
    pool = ["2^inf", "3*2^inf", "9*2^inf", "5^inf", "2*5^inf", "6*2^inf*3^inf"]
    hits = 0
    for _ in range(200):
        r = rng.randint(1, 3)
        ms = tuple(parse_sn(rng.choice(pool)) for _ in range(r))
        ns = tuple(ms[i] for i in rng.sample(range(r), r))
        if conj_decide(ms, ns).conjugate:
            hits += 1
            assert coe_decide(ms, ns).equivalent
    assert hits > 50


def test_eig_group_values():
    assert eig_group(parse_sn("3*2^inf"), 3).modulus == parse_sn("2^inf")
    assert eig_group(parse_sn("2^inf"), 2).modulus == parse_sn("2^inf")
    assert eig_group(parse_sn("5*2^inf"), 10).modulus == parse_sn("2^inf")
    assert eig_group(parse_sn("5*2^inf"), 3).modulus == parse_sn("5*2^inf")
    assert eig_group(parse_sn("2^inf"), 0).modulus == ONE


def test_eig_oracle_frozen_sets():
    m = parse_sn("2^inf")
    assert eig_group_oracle(m, 2, 2) == {Fraction(0), Fraction(1, 2)}
    assert eig_group_oracle(m, 2, 3) == {
        Fraction(0),
        Fraction(1, 4),
        Fraction(1, 2),
        Fraction(3, 4),
    }
    assert eig_group_oracle(m, 0, 3) == {Fraction(0)}
    assert eig_group_oracle(parse_sn("3^inf"), 2, 2) == {
        Fraction(j, 9) for j in range(9)
    }


def test_eig_oracle_guard():
    with pytest.raises(ValueError, match="guard"):
        eig_group_oracle(parse_sn("2^inf*3^inf*5^inf"), 1, 5, guard=10**4)


def test_eig_cross_check_family():
    for text in ["2^inf", "3^inf", "2^inf*3^inf", "5*2^inf", "3*5^inf"]:
        m = parse_sn(text)
        for k in [-6, -1, 0, 1, 2, 3, 4, 12]:
            res = eig_cross_check(m, k, 3)
            assert all(res.values()), (text, k, res)


def test_truncation_of_predicted_group_needs_deeper_levels():
    # at matching levels the oracle can be a strict subset of the truncation
    m = parse_sn("2^inf")
    oracle = eig_group_oracle(m, 2, 2)
    predicted = eig_truncation(eig_group(m, 2).modulus, 2)
    assert oracle < predicted
    assert eig_truncation(eig_group(m, 2).modulus, 2) <= eig_group_oracle(m, 2, 3)


def test_tgroup_lattice():
    t6 = TGroup(parse_sn("2*3"))
    t4 = TGroup(parse_sn("4"))
    assert Fraction(1, 6) in t6
    assert Fraction(1, 4) not in t6
    assert tgroup_contains(TGroup(parse_sn("2^inf")), TGroup(parse_sn("8")))
    assert not tgroup_contains(TGroup(parse_sn("5*2^inf")), TGroup(parse_sn("3^inf")))
    assert tgroup_product(t6, t4).modulus == parse_sn("12")


def test_counterexample_family_certified():
    rep = free_group_counterexample_check(2, 3, 5)
    assert rep.passed
    assert len(rep.certified) == 4
    assert all(ok for _, ok in rep.certified)
    assert rep.cited and "orbit equivalent" in rep.cited[0]


def test_counterexample_preconditions():
    with pytest.raises(ValueError, match="prime"):
        free_group_counterexample_check(2, 2, 5)
    with pytest.raises(ValueError, match="prime"):
        free_group_counterexample_check(4, 3, 5)
    with pytest.raises(ValueError, match="coprime"):
        free_group_counterexample_check(2, 3, 6)
    with pytest.raises(ValueError, match="exceed"):
        free_group_counterexample_check(2, 3, 1)


def test_coe_and_k_invariant_agree_randomly():
    rng = random.Random(23)
    pool = [
        "2^inf", "3*2^inf", "9*2^inf", "3^inf", "5*3^inf", "2^inf*3^inf",
        "5^inf", "2*5^inf", "7*2^inf",
    ]
    for _ in range(150):
        r = rng.randint(1, 3)
        s = rng.randint(1, 3)
        ms = tuple(parse_sn(rng.choice(pool)) for _ in range(r))
        ns = tuple(parse_sn(rng.choice(pool)) for _ in range(s))
        assert bool(coe_decide(ms, ns)) == k_invariant_equal(ms, ns), (ms, ns)
