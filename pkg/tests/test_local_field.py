import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kummerdec.group_ring import ArithmeticDomainError
from kummerdec.linalg import in_span
from kummerdec.local_field import (
    FieldSpec,
    FieldSpecError,
    FieldUnit,
    PrecisionError,
    build_tower,
    minus_one_is_norm,
    norm_indices,
)

U31 = build_tower(FieldSpec.parse("unramified p=3 n=1"), 2)
C31 = build_tower(FieldSpec.parse("cyclotomic p=3 n=1"), 2)
QI = build_tower(FieldSpec.parse("quadratic2 a=-1"), 2)
U22 = build_tower(FieldSpec.parse("unramified p=2 n=2"), 2)


# ---------------------------------------------------------------------------
# FieldSpec parsing


def test_parse_families():
    s = FieldSpec.parse("unramified p=3 n=2")
    assert (s.family, s.p, s.n, s.a) == ("unramified", 3, 2, None)
    s = FieldSpec.parse("cyclotomic p=2 n=1")
    assert (s.family, s.p, s.n) == ("cyclotomic", 2, 1)
    s = FieldSpec.parse("quadratic2 a=-1")
    assert (s.family, s.p, s.n, s.a) == ("quadratic2", 2, 1, -1)
    assert s.label() == "quadratic2 a=-1"


def test_parse_canonicalizes_square_class():
    assert FieldSpec.parse("quadratic2 a=12").a == -5
    assert FieldSpec.parse("quadratic2 a=8").a == 2
    assert FieldSpec.parse("quadratic2 a=-12").a == 5
    assert FieldSpec.parse("quadratic2 a=7").a == -1
    assert FieldSpec.parse("quadratic2 a=40").a == 10


def test_parse_rejections():
    for text in (
        "",
        "bogus p=3 n=1",
        "unramified p=4 n=1",
        "unramified p=3",
        "unramified p=3 n=0",
        "unramified p=3 n=1 a=2",
        "cyclotomic p=2 n=2",
        "quadratic2 a=4",
        "quadratic2 a=0",
        "quadratic2",
        "quadratic2 a=banana",
    ):
        with pytest.raises(FieldSpecError):
            FieldSpec.parse(text)


# ---------------------------------------------------------------------------
# Unramified towers


def test_unramified31_norm_indices():
    assert norm_indices(U31) == (1, 1)


def test_unramified31_no_p_torsion():
    assert U31.nu == 0
    assert U31.nu_F == 0


def test_unramified31_kummer_sizes():
    assert U31.jmodule(1).size == 3 ** 4
    assert U31.jmodule(2).size == 3 ** 8


def test_unramified_frobenius_residue():
    K = U31.K
    x = K.x_element()
    diff = K.sub(K.apply_sigma(x), K.power(x, 3))
    assert all(c % 3 == 0 for c in diff)


def test_unramified22_norm_transitivity():
    K = U22.K
    g = FieldUnit.of_element(K, K.add(K.one(), K.scalar_mul(2, K.x_element())))
    direct = U22.norm(g, 2, 0)
    staged = U22.norm(U22.norm(g, 2, 1), 1, 0)
    assert direct.congruent_to(staged)


def test_unramified22_norm_indices():
    assert norm_indices(U22) == (1, 0, 2)
    assert U22.nu == 1


# ---------------------------------------------------------------------------
# Cyclotomic towers


def test_cyclotomic31_shape():
    K = C31.K
    assert (K.e, K.f, K.D) == (6, 1, 6)
    assert K.sigma_image(1) == K.power(K.x_element(), 4)


def test_cyclotomic31_norm_of_root():
    xi9 = FieldUnit(C31.K, 0, C31.K.x_element())
    xi3 = FieldUnit(C31.F, 0, C31.F.x_element())
    assert C31.norm_to_F(xi9).congruent_to(xi3)


def test_cyclotomic31_roots_of_unity():
    assert C31.roots_of_unity_level(1) == (2, False)
    assert C31.roots_of_unity_level(0) == (1, False)
    xi2 = C31.xi(2)
    K = C31.K
    assert K.congruent(K.power(xi2.u, 9), K.one())
    assert not K.congruent(K.power(xi2.u, 3), K.one())
    assert C31.xi(1).congruent_to(xi2.power(3))


def test_cyclotomic31_norm_indices():
    assert norm_indices(C31) == (1, 3)


def test_cyclotomic31_kummer_sizes():
    assert C31.jmodule(1).size == 3 ** 8
    assert C31.jmodule(2).size == 3 ** 16


def test_cyclotomic31_depth3_size():
    tw = build_tower(FieldSpec.parse("cyclotomic p=3 n=1"), 3)
    assert tw.jmodule(3).size == 3 ** 23


# ---------------------------------------------------------------------------
# Quadratic 2-adic towers


def test_quadratic_i_basic_facts():
    K = QI.K
    assert K.e == 2
    one_plus_i = FieldUnit.of_element(K, K.add(K.one(), K.x_element()))
    assert one_plus_i.v == 1
    assert QI.norm_to_F(one_plus_i).congruent_to(FieldUnit.of_int(QI.F, 2))
    assert QI.nu == 2
    assert QI.nu_F == 1
    assert norm_indices(QI) == (1, 2)


def test_quadratic_i_kummer_sizes():
    assert QI.jmodule(1).size == 2 ** 4
    assert QI.jmodule(2).size == 2 ** 8
    tw3 = build_tower(FieldSpec.parse("quadratic2 a=-1"), 3)
    assert tw3.jmodule(3).size == 2 ** 11


def test_quadratic_i_square_classes():
    K = QI.K
    kd = QI.kummer(1)
    i_unit = FieldUnit(K, 0, K.x_element())
    assert not kd.is_pth_power(i_unit, 1)
    minus_four = FieldUnit.of_int(K, -4)
    assert kd.is_pth_power(minus_four, 1)
    root = kd.pth_root(minus_four)
    two_i = FieldUnit.of_element(K, K.scalar_mul(2, K.x_element()))
    assert root.congruent_to(two_i) or root.congruent_to(two_i.power(-1).times(minus_four))


def test_minus_one_norm_gate():
    outcomes = {}
    for a in (-1, 2, -2, 5, -5, 10, -10):
        tw = build_tower(FieldSpec.parse(f"quadratic2 a={a}"), 1)
        outcomes[a] = minus_one_is_norm(tw)
    assert outcomes == {
        -1: False,
        2: True,
        -2: False,
        5: True,
        -5: False,
        10: True,
        -10: False,
    }


def test_minus_one_norm_gate_needs_quadratic_shape():
    with pytest.raises(ArithmeticDomainError):
        minus_one_is_norm(U22)


# ---------------------------------------------------------------------------
# Model arithmetic


def test_teichmuller_lift():
    K = C31.K
    u = K.add(K.from_int(2), K.pi_pow(1))
    w = K.teichmuller(u)
    assert K.congruent(K.power(w, 2), K.one())
    assert K.residue_coords(K.sub(w, u)) == (0,)


def test_log_inverts_exp():
    K = C31.K
    arg = K.mul(K.pi_pow(5), K.from_int(7))
    assert K.val_at_least(K.sub(K.log(K.exp(arg, 40), 40), arg), 38)


def test_series_guard_shallow_argument():
    K = C31.K
    with pytest.raises(PrecisionError):
        K.exp(K.pi_pow(1), 30)
    with pytest.raises(PrecisionError):
        K.log(K.add(K.one(), K.pi_pow(1)), 30)


def test_split_and_rebuild():
    K = QI.K
    z = K.mul(K.pi_pow(3), K.add(K.one(), K.pi_pow(2)))
    fu = FieldUnit.of_element(K, z)
    assert fu.v == 3
    assert K.congruent(fu.as_element(), z)


def test_inverse_of_nonunit_rejected():
    K = QI.K
    with pytest.raises(ArithmeticDomainError):
        K.inverse(K.pi_pow(1))


# ---------------------------------------------------------------------------
# FieldUnit algebra


def test_unit_group_laws():
    K = C31.K
    a = FieldUnit.of_element(K, K.add(K.from_int(2), K.x_element()))
    b = FieldUnit.of_element(K, K.mul(K.pi_pow(2), K.from_int(5)))
    prod = a.times(b)
    assert prod.v == a.v + b.v
    assert prod.over(b).congruent_to(a)
    assert a.power(3).congruent_to(a.times(a).times(a))
    assert a.power(-2).times(a.power(2)).congruent_to(FieldUnit.of_int(K, 1))


def test_sigma_is_multiplicative_on_units():
    K = C31.K
    a = FieldUnit.of_element(K, K.add(K.from_int(4), K.x_element()))
    b = FieldUnit.of_element(K, K.pi_pow(1))
    lhs = a.times(b).apply_sigma()
    rhs = a.apply_sigma().times(b.apply_sigma())
    assert lhs.congruent_to(rhs)


def test_addition_tracks_valuation():
    K = QI.K
    a = FieldUnit.of_int(K, 2)
    s = a.plus(FieldUnit.of_int(K, 2))
    assert s.congruent_to(FieldUnit.of_int(K, 4))
    with pytest.raises(PrecisionError):
        a.plus(FieldUnit.of_int(K, -2))


def test_serialize_round_trip():
    K = QI.K
    fu = FieldUnit.of_element(K, K.add(K.one(), K.pi_pow(3)))
    back = FieldUnit.deserialize(K, fu.serialize())
    assert back.v == fu.v and back.congruent_to(fu)
    payload = fu.serialize()
    payload["prec"] -= 1
    with pytest.raises(PrecisionError):
        FieldUnit.deserialize(K, payload)
    bad = fu.serialize()
    bad["unit"] = [0] * K.D
    with pytest.raises(ArithmeticDomainError):
        FieldUnit.deserialize(K, bad)
    short = fu.serialize()
    short["unit"] = short["unit"][:-1]
    with pytest.raises(ArithmeticDomainError):
        FieldUnit.deserialize(K, short)


def test_deserialize_accepts_extra_digits():
    # a payload written at higher working precision reduces exactly
    deep = Tower(QI.spec, QI.m, extra_digits=4)
    fu = FieldUnit.of_element(deep.K, deep.K.add(deep.K.one(), deep.K.pi_pow(3)))
    back = FieldUnit.deserialize(QI.K, fu.serialize())
    assert back.v == fu.v
    assert back.congruent_to(FieldUnit.of_element(QI.K, QI.K.add(QI.K.one(), QI.K.pi_pow(3))))


# ---------------------------------------------------------------------------
# Embeddings


def test_embedding_round_trip():
    emb = C31.embeddings[(0, 1)]
    xF = FieldUnit(C31.F, 0, C31.F.x_element())
    assert emb.invert_unit(emb.convert_unit(xF)).congruent_to(xF)
    piF = FieldUnit(C31.F, 1, C31.F.one())
    up = emb.convert_unit(piF)
    assert up.v == 3
    assert emb.invert_unit(up).congruent_to(piF)


def test_embedding_rejects_outsiders():
    emb = C31.embeddings[(0, 1)]
    xi9 = FieldUnit(C31.K, 0, C31.K.x_element())
    with pytest.raises(ArithmeticDomainError):
        emb.invert_unit(xi9)
    piK = FieldUnit(C31.K, 1, C31.K.one())
    with pytest.raises(ArithmeticDomainError):
        emb.invert_unit(piK)


# ---------------------------------------------------------------------------
# p-th power classes


def test_power_class_membership():
    K = C31.K
    kd = C31.kummer(1)
    z = FieldUnit.of_element(K, K.add(K.from_int(4), K.x_element()))
    assert kd.is_pth_power(z.power(3), 1)
    assert kd.is_pth_power(z.power(9), 2)
    assert not kd.is_pth_power(z, 1)
    root = kd.pth_root(z.power(3))
    assert root.power(3).congruent_to(z.power(3))


def test_power_class_depth_guard():
    kd = C31.kummer(1)
    z = FieldUnit.of_int(C31.K, 4)
    with pytest.raises(PrecisionError):
        kd.is_pth_power(z, 3)
    with pytest.raises(PrecisionError):
        C31.jmodule(3)


def test_root_of_nonpower_rejected():
    kd = C31.kummer(1)
    xi9 = FieldUnit(C31.K, 0, C31.K.x_element())
    with pytest.raises(ArithmeticDomainError):
        kd.pth_root(xi9)


def test_root_climbs_to_torsion_ceiling():
    kd = QI.kummer(1)
    i_unit = QI.xi(2)
    minus_one = FieldUnit.of_int(QI.K, -1)
    assert kd.is_pth_power(minus_one, 1)
    r = kd.pth_root(minus_one)
    assert r.congruent_to(i_unit) or r.congruent_to(i_unit.power(-1))


# ---------------------------------------------------------------------------
# Kummer modules


def test_kummer_class_of_generators():
    J = C31.jmodule(2)
    piK = FieldUnit(C31.K, 1, C31.K.one())
    assert J.class_of(piK) == J.presentation.generator("pi")
    z = FieldUnit.of_element(C31.K, C31.K.add(C31.K.from_int(4), C31.K.x_element()))
    assert J.class_of(z.power(9)).is_zero
    a = J.class_of(z)
    b = J.class_of(z.power(2))
    assert a + a == b


def test_kummer_class_rejects_foreign_elements():
    J = C31.jmodule(1)
    with pytest.raises(ArithmeticDomainError):
        J.class_of(FieldUnit.of_int(C31.F, 3))


def test_extra_digits_do_not_change_answers():
    hi = build_tower(FieldSpec.parse("cyclotomic p=3 n=1"), 2, extra_digits=12)
    assert hi.roots_of_unity_level(1) == C31.roots_of_unity_level(1)
    assert norm_indices(hi) == norm_indices(C31)
    assert hi.jmodule(2).size == C31.jmodule(2).size
    z_lo = FieldUnit.of_element(C31.K, C31.K.add(C31.K.from_int(4), C31.K.x_element()))
    z_hi = FieldUnit.of_element(hi.K, hi.K.add(hi.K.from_int(4), hi.K.x_element()))
    assert C31.kummer(1).is_pth_power(z_lo, 2) == hi.kummer(1).is_pth_power(z_hi, 2)


# ---------------------------------------------------------------------------
# Randomized laws


@settings(derandomize=True, max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=26), min_size=4, max_size=4))
def test_dlog_inverts_generator_exponents(coords):
    kd = QI.kummer(1)
    u = kd.unit_from_coords(coords)
    back = kd.dlog(u)
    diff = tuple((b - c) % 4 for b, c in zip(back, coords))
    assert in_span(diff, kd.lattice_mod(2), 2, 2)


@settings(derandomize=True, max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=7),
    st.integers(min_value=0, max_value=7),
    st.integers(min_value=0, max_value=7),
    st.integers(min_value=0, max_value=7),
)
def test_norm_is_multiplicative(a0, a1, b0, b1):
    K = QI.K
    za = K.from_poly((2 * a0 + 1, a1))
    zb = K.from_poly((2 * b0 + 1, b1))
    fa = FieldUnit.of_element(K, za)
    fb = FieldUnit.of_element(K, zb)
    lhs = QI.norm_to_F(fa.times(fb))
    rhs = QI.norm_to_F(fa).times(QI.norm_to_F(fb))
    assert lhs.congruent_to(rhs, depth=QI.F.assert_prec - 2)
