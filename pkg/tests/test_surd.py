"""Exact scalar field: canonical form, arithmetic, sign, inversion, text."""
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wlmpnn.surd import ONE, ZERO, ExactScalar, activate, parse_scalar

S = ExactScalar


def sqrt(r, c=1):
    return S.normalize([(r, Fraction(c))])


def test_normalize_reduces_squarefree():
    assert S.normalize([(12, 1)]) == sqrt(3, 2)
    assert S.normalize([(12, 1)]).terms == {3: Fraction(2)}


def test_normalize_merges_like_radicands():
    assert S.normalize([(2, Fraction(1, 2)), (2, Fraction(1, 2))]) == sqrt(2)


def test_normalize_cancels_to_zero():
    value = S.normalize([(1, 3), (1, -3)])
    assert value.is_zero
    assert value.terms == {}


def test_normalize_rejects_nonpositive_radicand():
    with pytest.raises(ValueError):
        S.normalize([(0, 1)])
    with pytest.raises(ValueError):
        S.normalize([(-4, 1)])


def test_normalize_is_idempotent():
    value = S.normalize([(8, Fraction(3, 2)), (18, 1), (1, Fraction(-2, 7))])
    again = S.normalize(list(value.terms.items()))
    assert again == value


def test_add_identity_and_merge():
    half = S(Fraction(1, 2))
    assert half + ZERO == half
    assert sqrt(2, Fraction(1, 2)) + sqrt(2, Fraction(1, 2)) == sqrt(2)
    assert (ONE + sqrt(2)) + (ONE - sqrt(2)) == S(2)


def test_mul_examples():
    assert sqrt(2) * sqrt(3) == sqrt(6)
    assert sqrt(2) * sqrt(2) == S(2)
    assert (ONE + sqrt(2)) * (ONE - sqrt(2)) == S(-1)


def test_invert_examples():
    assert sqrt(2).invert() == sqrt(2, Fraction(1, 2))
    assert (ONE + sqrt(2)).invert() == sqrt(2) - ONE
    with pytest.raises(ZeroDivisionError):
        ZERO.invert()


def test_invert_multi_radicand():
    value = S(Fraction(2, 3)) + sqrt(2) - sqrt(15, Fraction(4, 7))
    assert value * value.invert() == ONE


def test_invert_rejects_radicands_spanning_many_primes():
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41]
    radicand = 1
    for p in primes:
        radicand *= p
    value = ONE + sqrt(radicand)
    with pytest.raises(ValueError, match="primes"):
        value.invert()


def test_sign_examples():
    assert ZERO.sign() == 0
    assert (sqrt(2) - ONE).sign() == 1
    assert (sqrt(2) + sqrt(3) - sqrt(10)).sign() == -1


def test_sign_against_high_precision_decimal():
    # independent oracle: 30-digit decimal evaluation
    getcontext().prec = 30
    value = sqrt(2) + sqrt(3) - sqrt(10)
    oracle = Decimal(2).sqrt() + Decimal(3).sqrt() - Decimal(10).sqrt()
    assert value.sign() == (1 if oracle > 0 else -1)


def test_sign_close_call():
    # sqrt(2) + sqrt(3) vs sqrt(9.8596...) style near-collisions stay exact
    lhs = sqrt(2) + sqrt(3)
    rhs_squared = lhs * lhs  # 5 + 2*sqrt(6)
    assert (rhs_squared - S(5) - sqrt(6, 2)).sign() == 0


def test_activate():
    assert activate(S(Fraction(-3, 2)), "relu") == ZERO
    assert activate(sqrt(2) - ONE, "relu") == sqrt(2) - ONE
    assert activate(sqrt(2) - ONE, "sign") == ONE
    assert activate(ZERO, "sign") == ZERO
    assert activate(sqrt(2), "none") == sqrt(2)
    with pytest.raises(ValueError):
        activate(ONE, "tanh")


def test_text_round_trip_examples():
    for text in ("0", "1/2", "-3", "1/2 + 1/4*sqrt(2)", "-1 + sqrt(2)", "2/7 - 5*sqrt(6)"):
        assert parse_scalar(text).to_text() == text


def test_parse_is_liberal_print_is_canonical():
    assert parse_scalar("sqrt(12)").to_text() == "2*sqrt(3)"
    assert parse_scalar(" 1/2+1/4 * sqrt(2)").to_text() == "1/2 + 1/4*sqrt(2)"
    assert parse_scalar("sqrt(4)").to_text() == "2"


def test_parse_rejects_garbage():
    for bad in ("", "+", "1//2", "sqrt()", "sqrt(2", "a + b", "1.5"):
        with pytest.raises(ValueError):
            parse_scalar(bad)


def test_ordering_and_float():
    assert sqrt(2) < sqrt(3)
    assert S(1) <= sqrt(2) <= S(2)
    assert abs(float(sqrt(2)) - 2**0.5) < 1e-12


scalars = st.builds(
    lambda pairs: S.normalize(pairs),
    st.lists(
        st.tuples(
            st.sampled_from([1, 2, 3, 5, 6, 7, 10]),
            st.fractions(min_value=-4, max_value=4, max_denominator=6),
        ),
        max_size=3,
    ),
)


@settings(max_examples=60, deadline=None)
@given(scalars, scalars, scalars)
def test_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(scalars)
def test_inverse_round_trip(a):
    if not a.is_zero:
        assert a * a.invert() == ONE


@settings(max_examples=60, deadline=None)
@given(scalars, scalars)
def test_equality_agrees_with_subtraction(a, b):
    assert (a == b) == (a - b).is_zero


@settings(max_examples=60, deadline=None)
@given(scalars)
def test_sign_agrees_with_float_when_clear(a):
    approx = float(a)
    if abs(approx) > 1e-6:
        assert a.sign() == (1 if approx > 0 else -1)
