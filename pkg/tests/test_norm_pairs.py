import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kummerdec.group_ring import ArithmeticDomainError
from kummerdec.local_field import FieldSpec, FieldUnit, Tower
from kummerdec.norm_pairs import (
    InequalityReport,
    NormPair,
    NormPairWitness,
    check_exceptional,
    check_inequalities,
    find_witness,
    i_invariant,
    order_leq,
    search_minimal,
    truncate,
    twist_leq,
    twist_shift,
    verify,
)
from kummerdec.rmg_modules import NEG_INF, NormVector

CY = Tower(FieldSpec.parse("cyclotomic p=3 n=1"), 3)
Q2 = Tower(FieldSpec.parse("quadratic2 a=2"), 3)
QI = Tower(FieldSpec.parse("quadratic2 a=-1"), 3)


def one(tower):
    mod = tower.K
    return FieldUnit(mod, 0, mod.one())


def neg_vec(m):
    return NormVector(tuple([NEG_INF] * m))


# -- pair container -----------------------------------------------------------


def test_pair_validation():
    NormPair(3, 1, 2, NormVector((0, 1)), 4)
    with pytest.raises(ArithmeticDomainError):
        NormPair(3, 1, 1, NormVector((1,)), 4)       # a_0 must stay below n
    with pytest.raises(ArithmeticDomainError):
        NormPair(3, 1, 2, NormVector((0,)), 4)       # wrong length
    with pytest.raises(ArithmeticDomainError):
        NormPair(3, 1, 1, NormVector((0,)), 3)       # twist not 1 mod p
    with pytest.raises(ArithmeticDomainError):
        NormPair(3, 2, 1, NormVector((3,)), 4)       # entry above n


def test_pair_residue_and_format():
    pair = NormPair(3, 1, 2, neg_vec(2), 13)
    assert pair.d_residue == 4
    assert pair.format() == "((-inf,-inf), 13)"


# -- verification -------------------------------------------------------------


def test_cyclotomic_hand_witness_both_lengths():
    alpha = CY.xi(2, level=1)
    for m in (1, 2):
        pair = NormPair(3, 1, m, neg_vec(m), 4)
        w = NormPairWitness(alpha, tuple([one(CY)] * (m + 1)))
        report = verify(pair, w, CY, m)
        assert report.product_eq and report.norm_eq and all(report.levels)
        assert bool(report)


def test_trivial_witness_fails_norm_equation():
    pair = NormPair(3, 1, 1, neg_vec(1), 1)
    report = verify(pair, NormPairWitness(one(CY), (one(CY), one(CY))), CY, 1)
    assert report.product_eq
    assert not report.norm_eq
    assert not report


def test_level_membership_diagnostics():
    alpha = CY.xi(2, level=1)
    # a_0 = -inf demands delta_0 = 1
    pair = NormPair(3, 1, 1, neg_vec(1), 4)
    w = NormPairWitness(alpha, (alpha, one(CY)))
    assert verify(pair, w, CY, 1).levels == (False,)
    # a_0 = 0 demands a base-field element; xi_9 is not fixed by sigma
    pair0 = NormPair(3, 1, 1, NormVector((0,)), 4)
    assert verify(pair0, w, CY, 1).levels == (False,)


def test_verify_rejects_shape_mismatch():
    pair = NormPair(3, 1, 1, neg_vec(1), 4)
    w = NormPairWitness(one(CY), (one(CY), one(CY)))
    with pytest.raises(ArithmeticDomainError):
        verify(pair, w, CY, 2)
    with pytest.raises(ArithmeticDomainError):
        verify(pair, NormPairWitness(one(CY), (one(CY),)), CY, 1)
    with pytest.raises(ArithmeticDomainError):
        verify(pair, w, Q2, 1)


def test_scaling_moves_the_target_root():
    from kummerdec.norm_pairs import _norm_value

    alpha = CY.xi(2, level=1)
    pair = NormPair(3, 1, 1, neg_vec(1), 4)
    doubled = NormPairWitness(alpha.power(2), (one(CY), one(CY)))
    xi = CY.xi(1, level=0)
    assert _norm_value(CY, pair, doubled).congruent_to(xi.power(2))
    assert not verify(pair, doubled, CY, 1).norm_eq


def test_existence_construction_cell():
    pair = NormPair(3, 1, 2, NormVector((0, NEG_INF)), 1)
    w = find_witness(CY, pair)
    assert w is not None
    assert bool(verify(pair, w, CY, 2))


def test_witness_serialization_round_trip():
    res = search_minimal(CY, 1)
    blob = json.dumps(res.witness.serialize())
    back = NormPairWitness.deserialize(CY, json.loads(blob))
    assert bool(verify(res.pair, back, CY, 1))


# -- ordering -----------------------------------------------------------------


def test_twist_order_odd_prime():
    assert twist_leq(3, 10, 4, 2)        # 10 is deeper in the filtration
    assert not twist_leq(3, 4, 10, 2)
    assert twist_leq(3, 4, 7, 2) and twist_leq(3, 7, 4, 2)


def test_twist_order_minus_branch():
    assert twist_leq(2, 7, 3, 3)         # both 3 mod 4; 7 sits in -U_3
    assert not twist_leq(2, 3, 7, 3)
    assert twist_leq(2, 5, 3, 3)         # plus classes sit below minus ones
    assert not twist_leq(2, 3, 5, 3)
    assert twist_leq(2, 3, 1, 1) and twist_leq(2, 1, 3, 1)


def test_pair_order_vector_dominates():
    x = NormPair(3, 1, 1, neg_vec(1), 7)
    y = NormPair(3, 1, 1, NormVector((0,)), 1)
    assert order_leq(x, y)
    assert not order_leq(y, x)
    with pytest.raises(ArithmeticDomainError):
        order_leq(x, NormPair(3, 1, 2, neg_vec(2), 4))


def test_pair_order_is_reflexive_transitive_and_total_on_ties():
    rng = random.Random(11)
    pool = []
    for _ in range(60):
        entries = tuple(rng.choice([NEG_INF, 0, 1]) for _ in range(2))
        if entries[0] == 1:
            entries = (0, entries[1])
        d = 1 + 2 * rng.randrange(0, 8)
        pool.append(NormPair(2, 1, 2, NormVector(entries), d))
    for x in pool:
        assert order_leq(x, x)
    for x in pool[:25]:
        for y in pool[:25]:
            if x.a.entries == y.a.entries:
                assert order_leq(x, y) or order_leq(y, x)
            for z in pool[:25]:
                if order_leq(x, y) and order_leq(y, z):
                    assert order_leq(x, z)


@settings(derandomize=True, max_examples=80, deadline=None)
@given(st.integers(0, 3 ** 4), st.integers(0, 3 ** 4), st.integers(0, 3 ** 4))
def test_twist_preorder_properties_odd(i, j, k):
    d, dp, dq = 1 + 3 * i, 1 + 3 * j, 1 + 3 * k
    assert twist_leq(3, d, d, 3)
    if twist_leq(3, d, dp, 3) and twist_leq(3, dp, dq, 3):
        assert twist_leq(3, d, dq, 3)
    assert twist_leq(3, d, dp, 3) or twist_leq(3, dp, d, 3)


@settings(derandomize=True, max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 5), st.integers(0, 2 ** 5), st.integers(0, 2 ** 5))
def test_twist_preorder_properties_two(i, j, k):
    d, dp, dq = 1 + 2 * i, 1 + 2 * j, 1 + 2 * k
    assert twist_leq(2, d, d, 4)
    if twist_leq(2, d, dp, 4) and twist_leq(2, dp, dq, 4):
        assert twist_leq(2, d, dq, 4)
    assert twist_leq(2, d, dp, 4) or twist_leq(2, dp, d, 4)


# -- shifting and truncation ----------------------------------------------------


def test_twist_shift_zero_is_identity():
    res = search_minimal(CY, 1)
    pair, w = twist_shift(res.pair, res.witness, 0)
    assert pair == res.pair
    assert w.deltas[-1].congruent_to(res.witness.deltas[-1])


def test_twist_shift_preserves_verification():
    res = search_minimal(CY, 2)
    for x in (1, -2, 5):
        pair, w = twist_shift(res.pair, res.witness, x)
        assert pair.d == res.pair.d + 9 * x
        assert bool(verify(pair, w, CY, 2))


def test_truncate_identity_and_prefix():
    res = search_minimal(CY, 2)
    same_pair, same_w = truncate(res.pair, res.witness, 2)
    assert same_pair == res.pair and same_w is res.witness
    small_pair, small_w = truncate(res.pair, res.witness, 1)
    assert small_pair.a.entries == res.pair.a.entries[:1]
    assert small_pair.d == res.pair.d
    assert bool(verify(small_pair, small_w, CY, 1))


def test_truncate_existence_construction():
    pair = NormPair(3, 1, 2, NormVector((0, NEG_INF)), 1)
    w = find_witness(CY, pair)
    small_pair, small_w = truncate(pair, w, 1)
    assert small_pair.a.entries == (0,)
    assert bool(verify(small_pair, small_w, CY, 1))


# -- minimal search -------------------------------------------------------------


def test_search_cyclotomic_length_one():
    res = search_minimal(CY, 1)
    assert res.pair == NormPair(3, 1, 1, neg_vec(1), 1)
    assert res.complete and res.cells == 1 and res.residues == (1,)
    assert bool(verify(res.pair, res.witness, CY, 1))


def test_search_cyclotomic_length_two():
    res = search_minimal(CY, 2)
    assert res.pair == NormPair(3, 1, 2, neg_vec(2), 4)
    assert res.complete
    assert res.residues == (4,)
    pair, witness, complete = res
    assert (pair, witness, complete) == (res.pair, res.witness, True)


def test_search_quadratic_minus_one_norm():
    res = search_minimal(Q2, 1)
    assert res.pair.a.entries == (NEG_INF,)
    assert res.complete
    res2 = search_minimal(Q2, 2)
    assert res2.pair == NormPair(2, 1, 2, NormVector((NEG_INF, 1)), 1)


def test_search_quadratic_minus_one_not_norm():
    res = search_minimal(QI, 1)
    assert res.pair == NormPair(2, 1, 1, NormVector((0,)), 1)
    assert i_invariant(QI) == 0
    assert bool(check_inequalities(res.pair))


def test_search_gate_requires_base_root():
    tw = Tower(FieldSpec.parse("unramified p=3 n=1"), 2)
    with pytest.raises(ArithmeticDomainError):
        search_minimal(tw, 1)
    with pytest.raises(ArithmeticDomainError):
        i_invariant(tw)


def test_search_budget_reports_honestly():
    starved = search_minimal(CY, 2, budget=1)
    assert starved.pair is None and not starved.complete and starved.cells == 1
    partial = search_minimal(CY, 2, budget=2)
    assert partial.pair is not None
    assert partial.pair.d == 4
    assert not partial.complete          # the twist tier was cut short
    full = search_minimal(CY, 2, budget=3)
    assert full.complete and full.pair.d == 4


def test_search_agrees_with_invariant():
    for tower in (CY, Q2, QI):
        res = search_minimal(tower, 2)
        assert res.pair.a[0] == i_invariant(tower)
        assert bool(check_inequalities(res.pair))


# -- invariant and exceptional elements ------------------------------------------


def test_i_invariant_values():
    assert i_invariant(CY) == NEG_INF
    assert i_invariant(Q2) == NEG_INF
    assert i_invariant(QI) == 0


def test_exceptional_detection():
    res = search_minimal(CY, 1)
    assert check_exceptional(res.witness.alpha, CY)
    assert check_exceptional(CY.xi(2, level=1), CY)
    assert not check_exceptional(one(CY), CY)
    base = CY.embeddings[(0, 1)].convert_unit(CY.xi(1, level=0))
    assert not check_exceptional(base, CY)


# -- inequality clauses -----------------------------------------------------------


def test_inequalities_vacuous_on_all_neg_inf():
    report = check_inequalities(NormPair(3, 1, 2, neg_vec(2), 4))
    assert isinstance(report, InequalityReport)
    assert bool(report) and report.violations == ()


def test_inequalities_strict_increase():
    report = check_inequalities(NormPair(3, 2, 2, NormVector((0, 0)), 4))
    assert not report.strict_increase
    assert not report


def test_inequalities_gap_growth():
    report = check_inequalities(NormPair(3, 2, 2, NormVector((0, 1)), 4))
    assert report.strict_increase
    assert not report.gap_growth


def test_inequalities_level_floor():
    # twist level 1, so a_1 must exceed 0
    report = check_inequalities(NormPair(3, 2, 2, NormVector((NEG_INF, 0)), 4))
    assert not report.level_floor
    deeper = check_inequalities(NormPair(3, 2, 2, NormVector((NEG_INF, 0)), 10))
    assert deeper.level_floor


def test_inequalities_minus_branch():
    report = check_inequalities(NormPair(2, 2, 2, NormVector((NEG_INF, 0)), 3))
    assert not report.nonzero_upper_entries
    shifted = check_inequalities(NormPair(2, 2, 3, NormVector((0, NEG_INF, 1)), 3))
    assert shifted.nonzero_upper_entries and shifted.gap_growth
    assert not shifted.minus_level_floor
    assert shifted.violations == ("a_2=1 !> 1 at minus level 2",)


def test_inequalities_gap_exception_for_minus_twist():
    # p=2 with twist 3 mod 4 exempts the i = a_i = 0 pairs from gap growth
    report = check_inequalities(NormPair(2, 2, 2, NormVector((0, 1)), 3))
    assert report.gap_growth
    plus = check_inequalities(NormPair(2, 2, 2, NormVector((0, 1)), 5))
    assert not plus.gap_growth
