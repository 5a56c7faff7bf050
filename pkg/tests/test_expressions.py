import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralbranch import ExpressionError, parse_expression


def ev(src, **env):
    return parse_expression(src, variables=tuple(env)).evaluate(**env)


def test_polynomial():
    assert ev("t^2+1", t=2.0) == 5.0


def test_function_call():
    assert ev("sin(t)/2", t=0.0) == 0.0


def test_power_grammar_oracle():
    # 2^(-(3*3)) = 2^-9 = 1/512, the scale arithmetic the gallery leans on
    assert ev("2^(-(3*3))", t=0.0) == 1.0 / 512.0
    assert ev("2^(-9)", t=0.0) == 0.001953125


def test_precedence_and_associativity():
    assert ev("2+3*4", t=0.0) == 14.0
    assert ev("2*3^2", t=0.0) == 18.0
    assert ev("-t^2", t=3.0) == -9.0  # unary minus binds looser than ^
    assert ev("(1+2)*(3+4)", t=0.0) == 21.0
    assert ev("8/4/2", t=0.0) == 1.0


def test_functions():
    assert ev("cos(0)", t=0.0) == 1.0
    assert abs(ev("exp(1)", t=0.0) - math.e) < 1e-15
    assert ev("sqrt(49)", t=0.0) == 7.0
    assert ev("abs(-3)", t=0.0) == 3.0
    assert abs(ev("sin(cos(t))", t=0.25) - math.sin(math.cos(0.25))) < 1e-15


def test_multiple_variables():
    assert ev("t*x", t=3.0, x=5.0) == 15.0


def test_unknown_identifier_position():
    with pytest.raises(ExpressionError, match="unknown identifier 'i'"):
        parse_expression("2*i")


def test_unknown_function():
    with pytest.raises(ExpressionError, match="tan"):
        parse_expression("tan(t)")


def test_syntax_error_has_position():
    with pytest.raises(ExpressionError, match="position"):
        parse_expression("1 + * 2")


def test_unbalanced_parens():
    with pytest.raises(ExpressionError):
        parse_expression("(1 + 2")
    with pytest.raises(ExpressionError):
        parse_expression("1 + 2)")


def test_empty_source():
    with pytest.raises(ExpressionError):
        parse_expression("")


def test_trailing_garbage():
    with pytest.raises(ExpressionError):
        parse_expression("1 2")


def test_non_integer_exponent_rejected():
    with pytest.raises(ExpressionError, match="integer"):
        ev("2^0.5", t=0.0)
    with pytest.raises(ExpressionError, match="integer"):
        ev("2^t", t=0.5)


def test_integer_valued_exponent_variable_ok():
    assert ev("2^t", t=3.0) == 8.0
    assert ev("t^(-1)", t=4.0) == 0.25


def test_division_by_zero():
    with pytest.raises(ExpressionError, match="division by zero"):
        ev("1/t", t=0.0)


def test_domain_error_sqrt():
    with pytest.raises(ExpressionError):
        ev("sqrt(-1)", t=0.0)


def test_zero_to_negative_power():
    with pytest.raises(ExpressionError):
        ev("t^(-1)", t=0.0)


def test_missing_variable():
    e = parse_expression("t + x", variables=("t", "x"))
    with pytest.raises(ExpressionError, match="x"):
        e.evaluate(t=1.0)


def test_callable_interface():
    e = parse_expression("t^2")
    assert e(3.0) == 9.0


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10, allow_nan=False), b=st.floats(-10, 10, allow_nan=False))
def test_arithmetic_matches_python(a, b):
    e = parse_expression("t + x*x - t*x", variables=("t", "x"))
    assert e.evaluate(t=a, x=b) == pytest.approx(a + b * b - a * b, rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-5, 5, allow_nan=False))
def test_trig_identity(t):
    e = parse_expression("sin(t)^2 + cos(t)^2")
    assert e(t) == pytest.approx(1.0, abs=1e-12)
