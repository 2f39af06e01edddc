from __future__ import annotations

import random

from orbitcert.decide import coe_decide, conj_decide
from orbitcert.selftest import (
    SuiteResult,
    coe_positive_pair,
    coe_witness_scale,
    conj_positive_pair,
    conj_witness_scale,
    generate_instances,
    near_miss_pair,
    suite_cohomology,
    suite_counterexample,
    suite_invariant_vs_decision,
    _mandated_conj_pairs,
)
from orbitcert.supernatural import is_supernatural
from orbitcert.witness import build_coe_witness, build_conj_witness


def test_coe_positive_pairs_are_coe():
    rng = random.Random(41)
    for _ in range(60):
        ms, ns = coe_positive_pair(rng)
        assert coe_decide(ms, ns).equivalent, (ms, ns)


def test_conj_positive_pairs_are_conjugate():
    rng = random.Random(42)
    for _ in range(60):
        ms, ns = conj_positive_pair(rng)
        assert conj_decide(ms, ns).conjugate, (ms, ns)


def test_near_misses_are_well_formed():
    rng = random.Random(43)
    for _ in range(40):
        ms, ns = near_miss_pair(rng)
        assert all(is_supernatural(m) for m in ms + ns)


def test_generated_corpus_mixes_verdicts():
    instances = generate_instances(7, 60)
    assert len(instances) == 60
    verdicts = {bool(coe_decide(ms, ns)) for ms, ns in instances}
    assert verdicts == {True, False}


def test_scale_estimators_monotone_in_level():
    ms, ns = _mandated_conj_pairs()[0]
    cw = build_conj_witness(ms, ns)
    assert conj_witness_scale(cw, 2) <= conj_witness_scale(cw, 3)
    w = build_coe_witness(ms, ns)
    assert coe_witness_scale(w, 2) <= coe_witness_scale(w, 3)


def test_mandated_pairs_are_conjugate():
    for ms, ns in _mandated_conj_pairs():
        assert conj_decide(ms, ns).conjugate


def test_suite_result_summary_marks_failures():
    good = SuiteResult("demo", 3)
    bad = SuiteResult("demo", 3, failures=["boom"])
    assert "pass" in good.summary()
    assert "FAIL" in bad.summary() and "boom" in bad.summary()
    assert good.ok and not bad.ok


def test_invariant_suite_small_run():
    res = suite_invariant_vs_decision(9, 40)
    assert res.ok, res.failures
    assert res.checked == 40


def test_counterexample_suite():
    res = suite_counterexample()
    assert res.ok and res.checked == 4


def test_cohomology_suite_small_run():
    res = suite_cohomology(29, count=3)
    assert res.ok, res.failures
    assert res.checked >= 9
