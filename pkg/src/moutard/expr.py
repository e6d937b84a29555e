"""Closed-form field expressions for pipeline configs.

A small arithmetic grammar over the coordinates x1..xd::

    expr := number | x<k> | pi | e | f(expr) | expr op expr | -expr | (expr)

with op in + - * / ** (``^`` is accepted as a power) and f one of the
functions in :data:`FUNCTIONS`.  Parsing goes through :mod:`ast`; any node
outside that whitelist is rejected, so configs never reach ``eval``.
"""
from __future__ import annotations

import ast
import operator
import re

import numpy as np

from .errors import MoutardError
from .field import Field, Grid

__all__ = ["ExpressionError", "FUNCTIONS", "Expression", "parse_expression", "evaluate"]

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "arctan": np.arctan,
    "abs": np.abs,
}
CONSTANTS = {"pi": np.pi, "e": np.e}

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_COORD = re.compile(r"x([1-9][0-9]*)$")


class ExpressionError(MoutardError, ValueError):
    """Malformed or disallowed field expression."""


class Expression:
    """A parsed expression; call :meth:`on` to sample it on a grid."""

    def __init__(self, text: str):
        self.text = text
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
        self.tree = tree.body
        self.max_coord = 0
        self._validate(self.tree)

    def __repr__(self):
        return f"Expression({self.text!r})"

    def _validate(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ExpressionError(f"unsupported literal {node.value!r} in {self.text!r}")
        elif isinstance(node, ast.Name):
            m = _COORD.match(node.id)
            if m:
                self.max_coord = max(self.max_coord, int(m.group(1)))
            elif node.id not in CONSTANTS:
                raise ExpressionError(f"unknown name {node.id!r} in {self.text!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINARY:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed in {self.text!r}")
            self._validate(node.left)
            self._validate(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed in {self.text!r}")
            self._validate(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise ExpressionError(f"unknown function in {self.text!r}")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"{node.func.id} takes exactly one argument")
            self._validate(node.args[0])
        else:
            raise ExpressionError(f"{type(node).__name__} not allowed in {self.text!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.BinOp):
            return _BINARY[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        return FUNCTIONS[node.func.id](self._eval(node.args[0], env))

    def on(self, grid: Grid) -> Field:
        if self.max_coord > grid.dim:
            raise ExpressionError(f"{self.text!r} uses x{self.max_coord} on a {grid.dim}D grid")
        env = dict(CONSTANTS)
        for k, c in enumerate(grid.coords(), start=1):
            env[f"x{k}"] = c
        with np.errstate(all="ignore"):
            values = self._eval(self.tree, env)
        return Field(grid, np.broadcast_to(np.asarray(values, dtype=float), grid.shape).copy())


def parse_expression(text: str) -> Expression:
    return Expression(text)


def evaluate(text: str, grid: Grid) -> Field:
    """Sample the expression ``text`` on ``grid``."""
    return Expression(text).on(grid)
