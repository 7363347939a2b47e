import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kummerdec.group_ring import (
    NEG_INF,
    ArithmeticDomainError,
    RingParams,
    TwistClass,
    canonical_table,
    check_upower,
    classify_twist,
    from_canonical,
    from_coeffs,
    int_valuation,
    one,
    p_operator,
    phi_d,
    scalar,
    sigma,
    sigma_minus_d,
    zero,
)

P22 = RingParams(2, 1, 2)        # (Z/4)[C_2]
P313 = RingParams(3, 1, 3)       # (Z/27)[C_3]
P232 = RingParams(2, 3, 2)       # (Z/4)[C_8]


def test_ring_params_validation():
    with pytest.raises(ArithmeticDomainError):
        RingParams(4, 1, 2)
    with pytest.raises(ArithmeticDomainError):
        RingParams(2, 1, 0)
    with pytest.raises(ArithmeticDomainError):
        RingParams(2, 1, 2, level=3)
    with pytest.raises(ArithmeticDomainError):
        RingParams(2, 1, 64)
    assert RingParams(5, 2, 3).width == 25
    assert RingParams(5, 2, 3, level=1).width == 5


def test_neg_inf_ordering():
    assert NEG_INF < -(10 ** 9)
    assert NEG_INF <= NEG_INF
    assert not NEG_INF < NEG_INF
    assert NEG_INF + 7 is NEG_INF
    assert sorted([3, NEG_INF, 0], key=lambda x: (not x is NEG_INF, x if x is not NEG_INF else 0)) is not None
    assert repr(NEG_INF) == "-inf"


def test_squaring_one_plus_sigma_mod_four():
    x = one(P22) + sigma(P22)
    assert (x * x).coeffs == (2, 2)


def test_canonical_table_known_value():
    # 2 + 2*sigma = 2*(sigma - 1) mod 4: single digit at layer 1, exponent 1.
    x = from_coeffs(P22, [2, 2])
    assert canonical_table(x) == ((0, 0), (0, 1))


def test_canonical_table_scalar_layers():
    x = scalar(P313, 12)          # 12 = 3 + 9 -> digits at layers 1 and 2
    assert canonical_table(x) == ((0, 0, 0), (1, 0, 0), (1, 0, 0))


def test_from_canonical_rejects_bad_digits():
    with pytest.raises(ArithmeticDomainError):
        from_canonical(P22, ((0, 3), (0, 0)))
    with pytest.raises(ArithmeticDomainError):
        from_canonical(P22, ((0, 0),))


def test_p_operator_values():
    assert p_operator(P313, 1, 0).coeffs == (1, 1, 1)
    assert p_operator(P313, 0, 0).coeffs == (1, 0, 0)
    assert p_operator(P232, 3, 1).coeffs == (1, 0, 1, 0, 1, 0, 1, 0)
    with pytest.raises(ArithmeticDomainError):
        p_operator(P313, 2, 0)


def test_p_operator_telescopes():
    # (sigma^{p^j} - 1) * P(i, j) = sigma^{p^i} - 1 in the truncated ring.
    for (i, j) in [(1, 0), (2, 0), (2, 1), (3, 2), (3, 0)]:
        lhs = (sigma(P232, 2 ** j) - one(P232)) * p_operator(P232, i, j)
        rhs = sigma(P232, 2 ** i) - one(P232)
        assert lhs == rhs


@pytest.mark.parametrize(
    "i,j",
    [(1, 0), (2, 0), (2, 1), (3, 1)],
)
def test_p_operator_binomial_congruence(i, j):
    # P(i, j) = (sigma - 1)^(p^i - p^j) mod p.
    p = P232.p
    diff = p_operator(P232, i, j) - sigma_minus_d(P232, 1) ** (p ** i - p ** j)
    assert all(c % p == 0 for c in diff.coeffs)


def test_phi_d_partial_norm_valuation():
    f = p_operator(P313, 1, 0)
    assert phi_d(f, 4) == 21          # 1 + 4 + 16
    assert phi_d(f, 4, 2) == 3
    assert int_valuation(phi_d(f, 4), 3) == 1


def test_phi_d_rejects_extra_precision():
    with pytest.raises(ArithmeticDomainError):
        phi_d(one(P22), 3, 5)


@pytest.mark.parametrize(
    "p,d,depth,expected",
    [
        (3, 4, 5, TwistClass(1, 1)),
        (3, 10, 5, TwistClass(1, 2)),
        (3, 1, 5, TwistClass(1, None)),
        (5, 26, 4, TwistClass(1, 2)),
        (2, 5, 5, TwistClass(1, 2)),
        (2, 3, 5, TwistClass(-1, 2)),
        (2, 7, 5, TwistClass(-1, 3)),
        (2, -1, 5, TwistClass(-1, None)),
        (2, 3, 2, TwistClass(-1, None)),   # level 2 >= depth collapses
        (3, 10, 2, TwistClass(1, None)),
    ],
)
def test_classify_twist(p, d, depth, expected):
    assert classify_twist(p, d, depth) == expected


def test_classify_twist_labels():
    assert classify_twist(2, 3, 5).label == "-U_2"
    assert classify_twist(2, -1, 5).label == "-1"
    assert classify_twist(3, 4, 5).label == "U_1"
    assert classify_twist(3, 1, 5).label == "U_inf"


def test_classify_twist_rejects_bad_residue():
    with pytest.raises(ArithmeticDomainError):
        classify_twist(3, 5, 4)


@pytest.mark.parametrize(
    "p,d,j,depth,expected",
    [
        (2, 3, 1, 10, TwistClass(1, 3)),
        (2, 3, 2, 10, TwistClass(1, 4)),
        (2, -1, 1, 10, TwistClass(1, None)),
        (2, 7, 0, 10, TwistClass(-1, 3)),
        (3, 4, 1, 10, TwistClass(1, 2)),
        (3, 4, 2, 10, TwistClass(1, 3)),
        (5, 6, 1, 6, TwistClass(1, 2)),
    ],
)
def test_check_upower_known(p, d, j, depth, expected):
    assert check_upower(p, d, j, depth) == expected


@settings(max_examples=200, derandomize=True)
@given(st.sampled_from([2, 3, 5]), st.integers(-200, 200), st.integers(0, 3))
def test_check_upower_matches_direct_power(p, k, j):
    d = 1 + p * k
    depth = 8
    predicted = check_upower(p, d, j, depth)
    direct = classify_twist(p, d ** (p ** j), depth)
    assert predicted == direct


@st.composite
def ring_elements(draw):
    p = draw(st.sampled_from([2, 3]))
    n = draw(st.integers(0, 2))
    m = draw(st.integers(1, 3))
    params = RingParams(p, n, m)
    coeffs = draw(
        st.lists(
            st.integers(0, params.modulus - 1),
            min_size=params.width,
            max_size=params.width,
        )
    )
    return from_coeffs(params, coeffs)


@settings(max_examples=150, derandomize=True)
@given(ring_elements())
def test_canonical_table_round_trip(x):
    table = canonical_table(x)
    assert from_canonical(x.params, table) == x
    assert all(0 <= a < x.params.p for row in table for a in row)


@settings(max_examples=100, derandomize=True)
@given(ring_elements(), st.integers(0, 20), st.integers(2, 50))
def test_ring_identities(x, t, c):
    params = x.params
    assert x + zero(params) == x
    assert x - x == zero(params)
    assert x * one(params) == x
    assert x.shift(t) == x * sigma(params, t)
    assert (c * x) == x * c


@settings(max_examples=150, derandomize=True)
@given(ring_elements(), st.data(), st.integers(-20, 20))
def test_phi_d_is_multiplicative(x, data, k):
    # Evaluation at sigma = d descends to the quotient exactly modulo
    # p^{v_p(d^width - 1)}, so the property is tested at that precision.
    params = x.params
    y = from_coeffs(
        params,
        data.draw(
            st.lists(
                st.integers(0, params.modulus - 1),
                min_size=params.width,
                max_size=params.width,
            )
        ),
    )
    d = 1 + params.p * k
    v = int_valuation(d ** params.width - 1, params.p)
    m_out = params.m if v is None else min(params.m, v)
    mod = params.p ** m_out
    assert phi_d(x * y, d, m_out) == (phi_d(x, d) * phi_d(y, d)) % mod
