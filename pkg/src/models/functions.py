"""Real functions of x with optional exact derivatives."""
import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from src.errors import DomainError

logger = logging.getLogger(__name__)

FD_STEP = 1e-5

_X = sympy.Symbol('x', real=True)
_ALLOWED_FUNCS = {sympy.exp, sympy.log, sympy.sqrt}


@dataclass(frozen=True)
class RealFunction:
    eval: Callable
    deriv: Optional[Callable] = None
    label: str = ""

    def __call__(self, x):
        return self.eval(x)

    @property
    def has_deriv(self) -> bool:
        return self.deriv is not None

    def derivative(self, x):
        """Exact derivative when available, central difference otherwise."""
        if self.deriv is not None:
            return self.deriv(x)
        x = np.asarray(x, dtype=float)
        h = FD_STEP * np.maximum(1.0, np.abs(x))
        return (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)


def constant(c: float) -> RealFunction:
    c = float(c)
    return RealFunction(
        eval=lambda x, c=c: np.full_like(np.asarray(x, dtype=float), c) if np.ndim(x) else c,
        deriv=lambda x: np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0,
        label=f"{c!r}",
    )


def power_law(coef: float, exponent: float, x0: float = 1.0) -> RealFunction:
    """x -> coef * (x/x0)^exponent"""
    return RealFunction(
        eval=lambda x: coef * (np.asarray(x, dtype=float) / x0) ** exponent,
        deriv=lambda x: coef * exponent / x0 * (np.asarray(x, dtype=float) / x0) ** (exponent - 1.0),
        label=f"{coef!r}*(x/{x0!r})^{exponent!r}",
    )


def exponential(rate: float, x0: float = 0.0) -> RealFunction:
    """x -> exp(rate (x - x0))"""
    return RealFunction(
        eval=lambda x: np.exp(rate * (np.asarray(x, dtype=float) - x0)),
        deriv=lambda x: rate * np.exp(rate * (np.asarray(x, dtype=float) - x0)),
        label=f"exp({rate!r}*(x-{x0!r}))",
    )


def reciprocal_law(coef: float) -> RealFunction:
    """x -> coef / x"""
    return power_law(coef, -1.0, 1.0)


def from_expression(text: str) -> RealFunction:
    """Parse `text` over the grammar + - * / ^ exp ln sqrt, variable x."""
    local = {'x': _X, 'exp': sympy.exp, 'ln': sympy.log, 'sqrt': sympy.sqrt, 'e': sympy.E}
    try:
        expr = parse_expr(text, local_dict=local, global_dict={'Integer': sympy.Integer,
                                                               'Float': sympy.Float,
                                                               'Rational': sympy.Rational,
                                                               'Symbol': sympy.Symbol},
                          transformations=standard_transformations + (convert_xor,))
    except Exception as e:
        raise DomainError(f"Cannot parse expression {text!r}: {e}")
    if expr.free_symbols - {_X}:
        raise DomainError(f"Expression {text!r} uses symbols other than x")
    funcs = {type(f) for f in expr.atoms(sympy.Function)}
    if any(f not in _ALLOWED_FUNCS for f in funcs) and funcs:
        bad = [f for f in funcs if f not in _ALLOWED_FUNCS]
        raise DomainError(f"Expression {text!r} uses unsupported functions {bad}")
    deriv = sympy.diff(expr, _X)
    f = sympy.lambdify(_X, expr, 'numpy')
    df = sympy.lambdify(_X, deriv, 'numpy')
    logger.debug(f"Parsed {text!r} with derivative {deriv}")
    return RealFunction(
        eval=lambda x: f(np.asarray(x, dtype=float)) + 0.0 * np.asarray(x, dtype=float),
        deriv=lambda x: df(np.asarray(x, dtype=float)) + 0.0 * np.asarray(x, dtype=float),
        label=text,
    )


def add(f: RealFunction, g: RealFunction, label: str = "") -> RealFunction:
    deriv = None
    if f.has_deriv and g.has_deriv:
        deriv = lambda x: f.deriv(x) + g.deriv(x)
    return RealFunction(eval=lambda x: f(x) + g(x), deriv=deriv, label=label or f"({f.label})+({g.label})")


def log_derivative(h: RealFunction) -> RealFunction:
    """h'/h, without a derivative of its own."""
    return RealFunction(eval=lambda x: h.derivative(x) / h(x), label=f"d ln({h.label})")
