import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfmbench.gate import (BridgeModel, FaultKind, GateFault, GateOracle, OracleStatus, Scope,
                           Site, detection_matrix, enumerate_faults, fault_simulate,
                           format_detection_report, parse_detection_report, redundancy_oracle,
                           synthesize)
from cfmbench.isa import FunctionSpec, InstructionSet, Polarity, bundled_isa, make_isa
from cfmbench.patterns import TestPattern, TestSet

from oracles import netlist_output, random_isa

EX1 = bundled_isa("example1")
THREE_PATTERNS = TestSet((TestPattern(0, 0b110, 0), TestPattern(1, 0b101, 0), TestPattern(2, 0b011, 0)))


def branch(i, j, v):
    """SAF on literal c_j of term t_i, both 1-based as printed."""
    return GateFault.saf(Site(Scope.BRANCH, j - 1, i - 1), v)


def test_synthesize_example1():
    model = synthesize(EX1)
    # entry (i, j): True when term i uses c_j uninverted; j runs c1, c2
    assert model.literal_polarity == ((True, False), (False, True), (True, True))
    assert model.legal == {1, 2, 3}
    assert (model.n, model.m, model.p) == (3, 1, 2)


def test_synthesize_single_all_ones_and_fixture():
    one = synthesize(InstructionSet((FunctionSpec(0, "F", 7, "ADD"),), 8, 3))
    assert one.literal_polarity == ((True, True, True),)
    mm = synthesize(bundled_isa("minimips"))
    assert len(mm.literal_polarity) == 8 and all(len(t) == 3 for t in mm.literal_polarity)


@settings(max_examples=40)
@given(st.integers(0, 2**32))
def test_fault_free_output_selects_function(seed):
    rng = random.Random(seed)
    iset = random_isa(rng)
    model = synthesize(iset)
    ys = [rng.getrandbits(iset.m) for _ in range(iset.n)]
    for i, code in enumerate(model.codes):
        masks = model.term_masks(code)
        assert masks == [model.full if h == i else 0 for h in range(iset.n)]
        assert model.output(masks, ys) == ys[i]


def test_fault_counts():
    model = synthesize(EX1)
    assert len(enumerate_faults(model)) == 16
    assert len(enumerate_faults(model, lanes=True)) == 28
    bridges = [f for f in enumerate_faults(model, single=False, bridges=True)
               if f.sites[0].scope is Scope.STEM]
    assert len(bridges) == 2
    assert len(enumerate_faults(model, single=False, bridges=True)) == 2 + 3 * 2
    # 8 sites, pairs with 4 polarity combinations
    assert len(enumerate_faults(model, single=False, multi=2)) == 28 * 4


def test_multi_cap():
    model = synthesize(bundled_isa("minimips"))
    # 27 sites: C(27,2)*4 + C(27,3)*8
    with pytest.raises(ValueError, match="24804 multiple faults exceed the cap of 1000"):
        enumerate_faults(model, multi=3, multi_cap=1000)
    a = enumerate_faults(model, single=False, multi=3, multi_cap=1000, sample=True, seed=4)
    b = enumerate_faults(model, single=False, multi=3, multi_cap=1000, sample=True, seed=4)
    assert a == b and len(set(a)) == 1000
    assert all(2 <= len(f.sites) <= 3 for f in a)
    with pytest.raises(ValueError):
        enumerate_faults(model, multi=1)


def test_fault_validation():
    s = Site(Scope.STEM, 0)
    with pytest.raises(ValueError):
        GateFault(FaultKind.MULTI_SAF, (s, s), (0, 1))
    with pytest.raises(ValueError):
        GateFault(FaultKind.SAF, (s, Site(Scope.STEM, 1)), (0, 1))
    with pytest.raises(ValueError):
        GateFault.bridging(s, s, BridgeModel.WIRED_AND)
    with pytest.raises(ValueError):
        GateFault.bridging(s, Site(Scope.BRANCH, 1, 0), BridgeModel.WIRED_OR)


def test_descriptors():
    assert branch(1, 1, 1).descriptor == "branch t1.c1 sa1"
    assert GateFault.saf(Site(Scope.LANE, 1, 2, 5), 0).descriptor == "lane t3.c2.b5 sa0"
    assert GateFault.bridging(Site(Scope.STEM, 1), Site(Scope.STEM, 0),
                              BridgeModel.WIRED_AND).descriptor == "stem c1 , stem c2 wired_and"
    multi = GateFault.multi([(Site(Scope.STEM, 1), 1), (Site(Scope.BRANCH, 0, 2), 0)])
    assert multi.descriptor == "stem c2 sa1 + branch t3.c1 sa0"


def test_example1_single_fault_examples():
    model = synthesize(EX1)
    rep = fault_simulate(model, EX1, THREE_PATTERNS, [branch(1, 1, 1), branch(3, 2, 1)])
    assert not rep.results[0].detected
    assert rep.results[1].first == 0
    masks = model.term_masks(0b01, branch(3, 2, 1))
    assert model.output(model.term_masks(0b01), [0, 1, 1]) == 0
    assert model.output(masks, [0, 1, 1]) == 1


def test_empty_test_detects_nothing():
    model = synthesize(EX1)
    rep = fault_simulate(model, EX1, TestSet(), enumerate_faults(model, bridges=True))
    assert rep.detected == 0 and rep.total == 24 and rep.coverage_pct == 0.0


def test_out_of_range_site():
    model = synthesize(EX1)
    for bad in (GateFault.saf(Site(Scope.STEM, 2), 1), branch(4, 1, 0),
                GateFault.saf(Site(Scope.LANE, 0, 0, 1), 0)):
        with pytest.raises(ValueError, match="outside"):
            fault_simulate(model, EX1, THREE_PATTERNS, [bad])


@settings(max_examples=30)
@given(st.integers(0, 2**32))
def test_first_detection_is_real_and_matches_matrix(seed):
    rng = random.Random(seed)
    iset = random_isa(rng, p_range=(1, 3), m_range=(1, 6))
    model = synthesize(iset)
    faults = enumerate_faults(model, bridges=True, lanes=True)
    ts = TestSet(tuple(TestPattern(rng.randrange(iset.n), rng.getrandbits(iset.m),
                                   rng.getrandbits(iset.m)) for _ in range(rng.randint(0, 12))))
    rep = fault_simulate(model, iset, ts, faults)
    mat = detection_matrix(model, iset, ts, faults)
    for r, row in zip(rep.results, mat):
        hits = np.flatnonzero(row)
        assert r.first == (int(hits[0]) if hits.size else None)
        for t in hits:
            p = ts.patterns[t]
            ys = iset.results(p.a, p.b)
            good = netlist_output(model.codes, iset.m, iset.p, iset.polarity, model.codes[p.func], ys)
            bad = netlist_output(model.codes, iset.m, iset.p, iset.polarity, model.codes[p.func], ys,
                                 r.fault)
            assert good == ys[p.func] and bad != good


@settings(max_examples=30)
@given(st.integers(0, 2**32), st.integers(1, 10))
def test_detection_monotone(seed, extra):
    rng = random.Random(seed)
    iset = random_isa(rng)
    model = synthesize(iset)
    faults = enumerate_faults(model, bridges=True)

    def rand(k):
        return tuple(TestPattern(rng.randrange(iset.n), rng.getrandbits(iset.m),
                                 rng.getrandbits(iset.m)) for _ in range(k))
    ts = TestSet(rand(10))
    before = fault_simulate(model, iset, ts, faults)
    after = fault_simulate(model, iset, ts.extended(rand(extra)), faults)
    for b, a in zip(before.results, after.results):
        if b.detected:
            assert a.first == b.first


def test_report_format_round_trip():
    model = synthesize(EX1)
    faults = enumerate_faults(model)
    rep = fault_simulate(model, EX1, THREE_PATTERNS, faults)
    oracle = GateOracle(model, EX1)
    verdicts = {f: oracle.classify(f) for f in rep.undetected()}
    text = format_detection_report(rep, verdicts)
    assert "fault SAF stem c1 sa1 : detected pattern=1\n" in text
    assert "fault SAF branch t1.c1 sa1 : undetected oracle=REDUNDANT\n" in text
    assert text.endswith(f"coverage {rep.detected}/16 = {rep.coverage_pct:.2f}\n")
    rows = parse_detection_report(text)
    assert len(rows) == 16
    assert [(r[1], r[2]) for r in rows] == [(f.descriptor, x.first) for f, x in zip(faults, rep.results)]


def test_oracle_example1_redundant_faults():
    model = synthesize(EX1)
    for f in (branch(1, 1, 1), branch(2, 2, 1)):
        assert redundancy_oracle(model, EX1, f).status is OracleStatus.REDUNDANT


def test_oracle_hd1_neighbour_testable_with_witness():
    # t3 (code 11) has neighbours 01 and 10; each of its literals stuck-at-1 is testable
    model = synthesize(EX1)
    oracle = GateOracle(model, EX1)
    for f in (branch(3, 1, 1), branch(3, 2, 1)):
        v = oracle.classify(f)
        assert v.status is OracleStatus.TESTABLE
        w = v.witness
        ys = EX1.results(w.a, w.b)
        code = model.codes[w.func]
        assert netlist_output(model.codes, 1, 2, Polarity.ACTIVE_HIGH, code, ys, f) != ys[w.func]


def test_oracle_all_codes_legal_fixture():
    iset = bundled_isa("fullcode")
    model = synthesize(iset)
    oracle = GateOracle(model, iset)
    assert all(oracle.classify(f).status is OracleStatus.TESTABLE for f in enumerate_faults(model))


def test_oracle_dominated_branch_is_redundant():
    iset = bundled_isa("logic4")               # AND at 10, OR at 11
    model = synthesize(iset)
    f = branch(3, 1, 1)                        # AND term enabled under the OR code
    assert GateOracle(model, iset).classify(f).status is OracleStatus.REDUNDANT


def test_oracle_sampled_never_guesses_redundant():
    # under code 00 the multi fault swaps OR for AND|XOR, which equals OR everywhere
    f = GateFault.multi([(Site(Scope.BRANCH, 0, 0), 0), (Site(Scope.BRANCH, 0, 1), 1),
                         (Site(Scope.BRANCH, 1, 2), 1)])
    wide = make_isa(["OR", "AND", "XOR", "ADD"], [0, 1, 2, 3], 32, 2)
    oracle = GateOracle(synthesize(wide), wide)
    assert not oracle.exhaustive
    assert oracle.classify(f).status is OracleStatus.UNKNOWN
    narrow = make_isa(["OR", "AND", "XOR", "ADD"], [0, 1, 2, 3], 4, 2)
    assert redundancy_oracle(synthesize(narrow), narrow, f).status is OracleStatus.REDUNDANT


def test_oracle_sampled_uses_constraint_reduction():
    wide = make_isa(["OR", "AND", "XOR", "ADD"], [0, 1, 2, 3], 32, 2)
    model = synthesize(wide)
    oracle = GateOracle(model, wide)
    assert oracle.classify(branch(2, 1, 1)).status is OracleStatus.REDUNDANT   # AND under OR code
    assert oracle.classify(branch(1, 1, 0)).status is OracleStatus.TESTABLE


def test_control_unaffected_fault_is_redundant_even_when_sampled():
    model = synthesize(EX1)
    assert GateOracle(model, EX1, cap=1).classify(branch(1, 1, 1)).status is OracleStatus.REDUNDANT


def test_stem_gap_without_word_level_constraints():
    # OR at code 0 contains AND at code 1: a test meeting every TYPE1/TYPE2
    # constraint can still miss stem c1 stuck-at-1
    iset = make_isa(["OR", "AND"], [0, 1], 1, 1)
    model = synthesize(iset)
    ts = TestSet((TestPattern(0, 1, 1), TestPattern(1, 1, 1), TestPattern(1, 1, 0)))
    stem = GateFault.saf(Site(Scope.STEM, 0), 1)
    assert not fault_simulate(model, iset, ts, [stem]).results[0].detected
    assert redundancy_oracle(model, iset, stem).status is OracleStatus.TESTABLE
    # one OR pattern with y_OR != y_AND closes it
    fixed = ts.extended([TestPattern(0, 1, 0)])
    assert fault_simulate(model, iset, fixed, [stem]).results[0].detected


def test_active_low_structure():
    iset = make_isa(["AND", "XOR"], [0, 1], 4, 1, Polarity.ACTIVE_LOW)
    model = synthesize(iset)
    ys = [0b1010, 0b0110]
    assert model.output(model.term_masks(0), ys) == ys[0]
    stuck = GateFault.saf(Site(Scope.BRANCH, 0, 1), 1)        # XOR term also on under code 0
    assert model.output(model.term_masks(0, stuck), ys) == ys[0] & ys[1]
    assert netlist_output(model.codes, 4, 1, Polarity.ACTIVE_LOW, 0, ys, stuck) == ys[0] & ys[1]
