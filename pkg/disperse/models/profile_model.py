"""
Árbol de sintaxis (AST) del lenguaje de perfiles espaciales.

Gramática cerrada: literales reales, la variable x, la constante pi,
operadores binarios + - * / ^, menos unario y las funciones
sin, cos, exp, log, sqrt, abs.
"""
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict


function_name = Literal["sin", "cos", "exp", "log", "sqrt", "abs"]
binary_operator = Literal["+", "-", "*", "/", "^"]


class number_node(BaseModel):
    model_config = ConfigDict(frozen=True)
    value: float


class variable_node(BaseModel):
    """La variable espacial x."""
    model_config = ConfigDict(frozen=True)
    name: Literal["x"] = "x"


class constant_node(BaseModel):
    model_config = ConfigDict(frozen=True)
    name: Literal["pi"] = "pi"


class negate_node(BaseModel):
    model_config = ConfigDict(frozen=True)
    operand: "profile_expr"


class binary_node(BaseModel):
    model_config = ConfigDict(frozen=True)
    op: binary_operator
    left: "profile_expr"
    right: "profile_expr"


class call_node(BaseModel):
    model_config = ConfigDict(frozen=True)
    function: function_name
    argument: "profile_expr"


profile_expr = Union[number_node, variable_node, constant_node, negate_node, binary_node, call_node]

negate_node.model_rebuild()
binary_node.model_rebuild()
call_node.model_rebuild()
