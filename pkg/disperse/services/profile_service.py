"""
Servicio del lenguaje de perfiles: tokenización, análisis sintáctico,
evaluación vectorizada e impresión.

Precedencias (de menor a mayor): + -, * /, ^ (asociativo a derecha), menos unario.
El menos unario liga más fuerte que cualquier operador binario: -2^2 == (-2)^2.
"""
import logging
import math
import re
from typing import List, NamedTuple

import numpy as np

from disperse.core.errors import profile_evaluation_error, profile_syntax_error, unknown_identifier_error
from disperse.models.profile_model import (
    binary_node,
    call_node,
    constant_node,
    negate_node,
    number_node,
    profile_expr,
    variable_node,
)

logger = logging.getLogger(__name__)

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi}

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

# precedencia y asociatividad de los operadores binarios
_BINARY_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_RIGHT_ASSOC = {"^"}

# niveles de anidamiento admitidos (paréntesis, menos unario, llamadas y cadenas de operadores)
MAX_NESTING = 200


class token(NamedTuple):
    kind: str  # "number", "ident", "op", "lparen", "rparen", "end"
    text: str
    position: int


def tokenize(text: str) -> List[token]:
    """
    Convierte el texto en una lista de tokens con su posición.

    Raises:
        profile_syntax_error: Carácter inesperado.
    """
    tokens: List[token] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < len(text) and text[i + 1].isdigit()):
            m = _NUMBER.match(text, i)
            tokens.append(token("number", m.group(0), i))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = _IDENT.match(text, i)
            tokens.append(token("ident", m.group(0), i))
            i = m.end()
            continue
        if c in "+-*/^":
            tokens.append(token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(token("rparen", c, i))
            i += 1
            continue
        raise profile_syntax_error(f"carácter inesperado '{c}'", i)
    tokens.append(token("end", "", len(text)))
    return tokens


class _parser:
    """Analizador por escalada de precedencias sobre la lista de tokens."""

    def __init__(self, tokens: List[token]):
        self.tokens = tokens
        self.index = 0
        self.depth = 0

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise profile_syntax_error(
                f"expresión demasiado anidada (más de {MAX_NESTING} niveles)", self.peek().position
            )

    def leave(self) -> None:
        self.depth -= 1

    def peek(self) -> token:
        return self.tokens[self.index]

    def advance(self) -> token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def parse(self) -> profile_expr:
        expr = self.expression(1)
        tok = self.peek()
        if tok.kind != "end":
            raise profile_syntax_error(f"token inesperado '{tok.text}'", tok.position)
        if _tree_depth(expr) > MAX_NESTING:
            raise profile_syntax_error(
                f"expresión demasiado anidada (más de {MAX_NESTING} niveles)", tok.position
            )
        return expr

    def expression(self, min_prec: int) -> profile_expr:
        self.enter()
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind != "op" or _BINARY_PREC[tok.text] < min_prec:
                self.leave()
                return left
            self.advance()
            prec = _BINARY_PREC[tok.text]
            next_min = prec if tok.text in _RIGHT_ASSOC else prec + 1
            right = self.expression(next_min)
            left = binary_node(op=tok.text, left=left, right=right)

    def unary(self) -> profile_expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            self.enter()
            operand = self.unary()
            self.leave()
            return negate_node(operand=operand)
        return self.atom()

    def atom(self) -> profile_expr:
        tok = self.advance()
        if tok.kind == "number":
            return number_node(value=float(tok.text))
        if tok.kind == "ident":
            if tok.text == "x":
                return variable_node()
            if tok.text in CONSTANTS:
                return constant_node(name=tok.text)
            if tok.text in FUNCTIONS:
                opening = self.advance()
                if opening.kind != "lparen":
                    raise profile_syntax_error(f"se esperaba '(' después de '{tok.text}'", opening.position)
                argument = self.expression(1)
                self.expect_rparen()
                return call_node(function=tok.text, argument=argument)
            raise unknown_identifier_error(tok.text, tok.position)
        if tok.kind == "lparen":
            inner = self.expression(1)
            self.expect_rparen()
            return inner
        if tok.kind == "end":
            raise profile_syntax_error("expresión incompleta", tok.position)
        raise profile_syntax_error(f"token inesperado '{tok.text}'", tok.position)

    def expect_rparen(self) -> None:
        tok = self.advance()
        if tok.kind != "rparen":
            raise profile_syntax_error("se esperaba ')'", tok.position)


class profile_service:
    """
    Operaciones sobre expresiones de perfil.
    """

    @staticmethod
    def parse_profile(text: str) -> profile_expr:
        """
        Analiza el texto de una expresión de perfil.

        Args:
            text: Expresión, p. ej. "2 + 0.5*cos(pi*x)".

        Returns:
            profile_expr: AST de la expresión.

        Raises:
            profile_syntax_error: Texto vacío o mal formado (con la posición).
            unknown_identifier_error: Identificador fuera de la gramática.
        """
        if text is None or not text.strip():
            raise profile_syntax_error("la expresión está vacía", 0)
        return _parser(tokenize(text)).parse()

    @staticmethod
    def evaluate(expr: profile_expr, x) -> np.ndarray | float:
        """
        Evalúa la expresión en un escalar o en un arreglo de puntos.

        Raises:
            profile_evaluation_error: Con el índice del primer punto problemático.
        """
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            values = np.broadcast_to(_evaluate_node(expr, xs), xs.shape).astype(float)
        return float(values[0]) if scalar else values

    @staticmethod
    def pretty_print(expr: profile_expr) -> str:
        """
        Imprime la expresión totalmente parentizada; parse_profile la reconstruye sin pérdida.
        """
        if isinstance(expr, number_node):
            return repr(expr.value)
        if isinstance(expr, variable_node):
            return "x"
        if isinstance(expr, constant_node):
            return expr.name
        if isinstance(expr, negate_node):
            return f"(-{profile_service.pretty_print(expr.operand)})"
        if isinstance(expr, call_node):
            return f"{expr.function}({profile_service.pretty_print(expr.argument)})"
        left = profile_service.pretty_print(expr.left)
        right = profile_service.pretty_print(expr.right)
        return f"({left} {expr.op} {right})"


def _children(expr: profile_expr) -> tuple:
    if isinstance(expr, negate_node):
        return (expr.operand,)
    if isinstance(expr, call_node):
        return (expr.argument,)
    if isinstance(expr, binary_node):
        return (expr.left, expr.right)
    return ()


def _tree_depth(expr: profile_expr) -> int:
    """Profundidad del AST, sin recursión."""
    deepest = 0
    stack = [(expr, 1)]
    while stack:
        node, level = stack.pop()
        deepest = max(deepest, level)
        stack.extend((child, level + 1) for child in _children(node))
    return deepest


def _first_bad(mask: np.ndarray) -> int:
    return int(np.flatnonzero(mask)[0])


def _evaluate_node(expr: profile_expr, xs: np.ndarray) -> np.ndarray:
    if isinstance(expr, number_node):
        return np.full(xs.shape, expr.value)
    if isinstance(expr, variable_node):
        return xs
    if isinstance(expr, constant_node):
        return np.full(xs.shape, CONSTANTS[expr.name])
    if isinstance(expr, negate_node):
        return -_evaluate_node(expr.operand, xs)
    if isinstance(expr, call_node):
        arg = _evaluate_node(expr.argument, xs)
        if expr.function == "log" and np.any(arg <= 0.0):
            raise profile_evaluation_error("log de un valor no positivo", _first_bad(arg <= 0.0))
        if expr.function == "sqrt" and np.any(arg < 0.0):
            raise profile_evaluation_error("sqrt de un valor negativo", _first_bad(arg < 0.0))
        result = {
            "sin": np.sin,
            "cos": np.cos,
            "exp": np.exp,
            "log": np.log,
            "sqrt": np.sqrt,
            "abs": np.abs,
        }[expr.function](arg)
        return _check_finite(result, expr.function)
    left = _evaluate_node(expr.left, xs)
    right = _evaluate_node(expr.right, xs)
    if expr.op == "+":
        return _check_finite(left + right, "+")
    if expr.op == "-":
        return _check_finite(left - right, "-")
    if expr.op == "*":
        return _check_finite(left * right, "*")
    if expr.op == "/":
        if np.any(right == 0.0):
            raise profile_evaluation_error("división por cero", _first_bad(right == 0.0))
        return _check_finite(left / right, "/")
    return _check_finite(np.power(left, right), "^")


def _check_finite(values: np.ndarray, what: str) -> np.ndarray:
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise profile_evaluation_error(f"resultado no finito en '{what}'", _first_bad(bad))
    return values
