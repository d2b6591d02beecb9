"""Coefficient expressions for user-defined scalar operators.

Grammar (a restricted subset of Python expression syntax)::

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := ("+" | "-") factor | power
    power   := atom ("**" INTEGER)?
    atom    := NUMBER | "i" | VAR | ("sin" | "cos") "(" expr ")" | "(" expr ")"

``VAR`` is one of the coordinate names supplied by the caller (``x1, x2, ...``
by default; ``t`` is accepted as an alias of ``x1`` and ``x, y`` of
``x1, x2``).  Anything else is rejected at parse time.
"""
from __future__ import annotations

import ast
from typing import Callable, Sequence

import numpy as np

_FUNCS = {"sin": np.sin, "cos": np.cos}


class ExpressionError(ValueError):
    pass


def _aliases(dim: int) -> dict[str, int]:
    names = {f"x{j + 1}": j for j in range(dim)}
    if dim >= 1:
        names["t"] = 0
        names["x"] = 0
    if dim >= 2:
        names["y"] = 1
    return names


def _compile(node: ast.AST, names: dict[str, int]) -> Callable[[np.ndarray], complex]:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
            raise ExpressionError(f"unsupported constant {node.value!r}")
        value = complex(node.value)
        return lambda x: value
    if isinstance(node, ast.Name):
        if node.id in ("i", "I"):
            return lambda x: 1j
        if node.id not in names:
            raise ExpressionError(f"unknown variable {node.id!r}")
        j = names[node.id]
        return lambda x: x[j]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _compile(node.operand, names)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.BinOp):
        left = _compile(node.left, names)
        if isinstance(node.op, ast.Pow):
            exp = node.right
            if isinstance(exp, ast.UnaryOp) or not (
                isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0
            ):
                raise ExpressionError("exponents must be non-negative integer literals")
            k = exp.value
            return lambda x: left(x) ** k
        right = _compile(node.right, names)
        ops = {
            ast.Add: lambda a, b: a + b,
            ast.Sub: lambda a, b: a - b,
            ast.Mult: lambda a, b: a * b,
            ast.Div: lambda a, b: a / b,
        }
        for op_type, fn in ops.items():
            if isinstance(node.op, op_type):
                return lambda x, fn=fn: fn(left(x), right(x))
        raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or len(node.args) != 1 or node.keywords:
            raise ExpressionError("only sin(...) and cos(...) calls are allowed")
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0], names)
        return lambda x: fn(arg(x))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")


def parse_expression(text: str, dim: int, names: Sequence[str] | None = None) -> Callable[[np.ndarray], complex]:
    """Compile ``text`` into a function of a point in ``R^dim``."""
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    table = _aliases(dim) if names is None else {n: j for j, n in enumerate(names)}
    fn = _compile(tree.body, table)

    def evaluate(x) -> complex:
        return complex(fn(np.atleast_1d(np.asarray(x, dtype=float))))

    evaluate.source = text
    return evaluate


def fourier_coefficients(fn: Callable[[np.ndarray], complex], max_harmonic: int = 64, tol: float = 1e-12) -> dict[int, complex]:
    """Fourier coefficients of a 2 pi periodic function of one variable.

    Coefficients below ``tol`` are dropped.  Exact for trigonometric polynomials
    of degree below ``max_harmonic``.
    """
    count = 4 * max_harmonic
    ts = 2 * np.pi * np.arange(count) / count
    values = np.array([fn(np.array([t])) for t in ts])
    spectrum = np.fft.fft(values) / count
    out = {}
    for k in range(-max_harmonic, max_harmonic + 1):
        c = spectrum[k % count]
        c = complex(round(c.real, 15), round(c.imag, 15))
        if abs(c) > tol:
            out[k] = c
    return out
