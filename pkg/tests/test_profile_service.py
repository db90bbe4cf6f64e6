"""
Tests para el lenguaje de perfiles.
"""
import math

import numpy as np
import pytest

from disperse.core.errors import profile_evaluation_error, profile_syntax_error, unknown_identifier_error
from disperse.models.profile_model import binary_node, negate_node, number_node
from disperse.services.profile_service import MAX_NESTING, profile_service, tokenize


def test_parse_literal():
    """Test para una constante sola."""
    expr = profile_service.parse_profile("1")
    assert isinstance(expr, number_node)
    assert expr.value == 1.0


def test_cosine_profile_at_endpoints():
    """Test para 2 + 0.5cos(πx) en x = 0 y x = 1."""
    expr = profile_service.parse_profile("2 + 0.5*cos(pi*x)")
    assert profile_service.evaluate(expr, 0.0) == pytest.approx(2.5, abs=1e-15)
    assert profile_service.evaluate(expr, 1.0) == pytest.approx(1.5, abs=1e-15)


def test_incomplete_expression_reports_offset():
    """Test para "1+": error de sintaxis en la posición 2."""
    with pytest.raises(profile_syntax_error) as exc:
        profile_service.parse_profile("1+")
    assert exc.value.position == 2


def test_exp_of_cosine_at_half():
    expr = profile_service.parse_profile("exp(0.2*cos(pi*x))")
    assert profile_service.evaluate(expr, 0.5) == pytest.approx(1.0, abs=1e-15)


def test_precedence_and_right_associativity():
    """Test para las precedencias: ^ sobre */, */ sobre +-, ^ asociativo a derecha."""
    assert profile_service.evaluate(profile_service.parse_profile("1 + 2*3"), 0.0) == 7.0
    assert profile_service.evaluate(profile_service.parse_profile("2^3^2"), 0.0) == 512.0
    assert profile_service.evaluate(profile_service.parse_profile("2*3^2"), 0.0) == 18.0
    assert profile_service.evaluate(profile_service.parse_profile("8/4/2"), 0.0) == 1.0
    assert profile_service.evaluate(profile_service.parse_profile("10 - 4 - 3"), 0.0) == 3.0


def test_unary_minus_binds_tighter_than_power():
    """Test para el menos unario: -2^2 se lee (-2)^2."""
    expr = profile_service.parse_profile("-2^2")
    assert isinstance(expr, binary_node)
    assert isinstance(expr.left, negate_node)
    assert profile_service.evaluate(expr, 0.0) == 4.0
    assert profile_service.evaluate(profile_service.parse_profile("1 - -x"), 2.0) == 3.0


def test_whitespace_insensitive():
    a = profile_service.parse_profile("2+0.5*cos(pi*x)")
    b = profile_service.parse_profile("  2 +  0.5 * cos ( pi * x )  ")
    assert a == b


def test_unknown_identifier():
    """Test para un identificador fuera de la gramática."""
    with pytest.raises(unknown_identifier_error) as exc:
        profile_service.parse_profile("1 + tan(x)")
    assert exc.value.name == "tan"
    assert exc.value.position == 4


@pytest.mark.parametrize("text", ["", "   ", "(1 + x", "1 2", "cos x", "*3", "1 $ 2"])
def test_malformed_expressions(text):
    """Test para entradas mal formadas: siempre profile_syntax_error."""
    with pytest.raises(profile_syntax_error):
        profile_service.parse_profile(text)


def test_tokenize_positions():
    tokens = tokenize("2.5e-1*x")
    assert [(t.kind, t.text, t.position) for t in tokens] == [
        ("number", "2.5e-1", 0),
        ("op", "*", 6),
        ("ident", "x", 7),
        ("end", "", 8),
    ]


def test_vectorized_evaluation_broadcasts_constants():
    """Test para la evaluación vectorizada de una expresión sin x."""
    xs = np.linspace(0.0, 1.0, 5)
    values = profile_service.evaluate(profile_service.parse_profile("pi"), xs)
    assert values.shape == (5,)
    assert np.all(values == math.pi)


def test_evaluation_errors_report_index():
    """Test para log de no positivo y sqrt de negativo."""
    xs = np.array([0.5, 1.0, 2.0])
    with pytest.raises(profile_evaluation_error) as exc:
        profile_service.evaluate(profile_service.parse_profile("log(x - 1)"), xs)
    assert exc.value.index == 0
    with pytest.raises(profile_evaluation_error) as exc:
        profile_service.evaluate(profile_service.parse_profile("sqrt(1.5 - x)"), xs)
    assert exc.value.index == 2


def test_pretty_print_reparses_to_same_values():
    """Test para pretty_print: la impresión parentizada se vuelve a analizar sin pérdida."""
    text = "-x^2 + exp(0.2*cos(pi*x))/(1 + abs(x - 0.3))"
    expr = profile_service.parse_profile(text)
    printed = profile_service.pretty_print(expr)
    again = profile_service.parse_profile(printed)
    xs = np.linspace(0.0, 1.0, 11)
    assert np.array_equal(profile_service.evaluate(expr, xs), profile_service.evaluate(again, xs))
    assert profile_service.pretty_print(again) == printed
    assert again == expr


@pytest.mark.parametrize("text", [
    "(" * 3000 + "1" + ")" * 3000, "-" * 3000 + "1", "2^" * 3000 + "2", " + ".join(["x"] * 3000),
])
def test_deep_nesting_is_a_syntax_error(text):
    """Test para anidamientos de miles de niveles: error de sintaxis con posición, no RecursionError."""
    with pytest.raises(profile_syntax_error) as exc:
        profile_service.parse_profile(text)
    assert "anidada" in str(exc.value)
    assert 0 <= exc.value.position <= len(text)


def test_nesting_within_limit_parses():
    depth = MAX_NESTING // 2
    expr = profile_service.parse_profile("(" * depth + "x" + ")" * depth)
    assert profile_service.evaluate(expr, 0.25) == 0.25
    assert profile_service.evaluate(profile_service.parse_profile("-" * depth + "1"), 0.0) == 1.0
