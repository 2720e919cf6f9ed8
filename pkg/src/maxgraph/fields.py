"""Scalar fields on planar domains with first and second partial derivatives.

Three flavours:

* :class:`ExprField` -- built from an expression, all partials symbolic.
* :class:`FunctionField` -- a black-box value function; any partials not
  supplied as callables are taken by centered finite differences.
* :class:`PotentialField` -- a value function paired with a symbolic
  gradient (the potential is known only through quadrature, its gradient in
  closed form).

Partials are indexed 1 and 2 (for ``x1`` and ``x2``).  Points are pairs
``(x1, x2)`` whose components may be numpy arrays.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .expr import Const, Expr, compile_expr, differentiate, parse, to_string

H_FD = 1e-5

SYMBOLIC = "symbolic"
FINITE_DIFFERENCE = "finite-difference"
MIXED = "mixed"


def _shift(p, i, h):
    x1, x2 = p
    return (x1 + h, x2) if i == 1 else (x1, x2 + h)


def _broadcast(res, p):
    if np.ndim(res) == 0 and (np.ndim(p[0]) or np.ndim(p[1])):
        return np.full(np.broadcast(p[0], p[1]).shape, float(res))
    return res


def _check_index(i):
    if i not in (1, 2):
        raise ValueError(f"partial index must be 1 or 2, got {i!r}")


class ScalarField(ABC):
    """A twice-differentiable real function of ``(x1, x2)``."""

    provenance = FINITE_DIFFERENCE
    h_fd = H_FD

    @abstractmethod
    def value(self, p): ...

    @abstractmethod
    def partial(self, i, p): ...

    @abstractmethod
    def partial2(self, i, j, p): ...

    def __call__(self, p):
        return self.value(p)

    def gradient(self, p):
        return np.array([self.partial(1, p), self.partial(2, p)])

    def hessian(self, p):
        h12 = self.partial2(1, 2, p)
        return np.array([[self.partial2(1, 1, p), h12], [h12, self.partial2(2, 2, p)]])

    @property
    def gradient_exprs(self):
        """Symbolic first partials, or ``None`` when not available."""
        return None


class ExprField(ScalarField):
    """Field defined by an expression; partials are exact symbolic derivatives."""

    provenance = SYMBOLIC

    def __init__(self, expr: Expr | str):
        if isinstance(expr, str):
            expr = parse(expr)
        self.expr = expr
        d1 = differentiate(expr, "x1")
        d2 = differentiate(expr, "x2")
        self._d = {1: d1, 2: d2}
        self._dd = {
            (1, 1): differentiate(d1, "x1"),
            (1, 2): differentiate(d1, "x2"),
            (2, 1): differentiate(d2, "x1"),
            (2, 2): differentiate(d2, "x2"),
        }
        self._f = compile_expr(expr)
        self._df = {k: compile_expr(v) for k, v in self._d.items()}
        self._ddf = {k: compile_expr(v) for k, v in self._dd.items()}

    def __repr__(self):
        return f"ExprField({to_string(self.expr)!r})"

    def value(self, p):
        return _broadcast(self._f(p[0], p[1]), p)

    def partial(self, i, p):
        _check_index(i)
        return _broadcast(self._df[i](p[0], p[1]), p)

    def partial2(self, i, j, p):
        _check_index(i)
        _check_index(j)
        return _broadcast(self._ddf[(i, j)](p[0], p[1]), p)

    def derivative_expr(self, i, j=None):
        if j is None:
            return self._d[i]
        return self._dd[(i, j)]

    @property
    def gradient_exprs(self):
        return (self._d[1], self._d[2])


class FunctionField(ScalarField):
    """Black-box field.

    ``grad`` (callable ``(i, p) -> float``) and ``hess`` (``(i, j, p) -> float``)
    are optional.  Without ``grad`` first partials are centered differences of
    the value with step ``h_fd``; without ``hess`` second partials are centered
    differences of ``grad`` when given, else fourth-order five-point stencils
    on the value with step ``h2_fd``.
    """

    def __init__(self, func, grad=None, hess=None, h_fd=H_FD, h2_fd=1e-3, name=None):
        self._func = func
        self._grad = grad
        self._hess = hess
        self.h_fd = h_fd
        self.h2_fd = h2_fd
        self.name = name
        if grad is None and hess is None:
            self.provenance = FINITE_DIFFERENCE
        elif grad is not None and hess is not None:
            self.provenance = SYMBOLIC
        else:
            self.provenance = MIXED

    def __repr__(self):
        return f"FunctionField({self.name or self._func!r})"

    def value(self, p):
        return self._func(p)

    def partial(self, i, p):
        _check_index(i)
        if self._grad is not None:
            return self._grad(i, p)
        h = self.h_fd
        return (self._func(_shift(p, i, h)) - self._func(_shift(p, i, -h))) / (2 * h)

    def partial2(self, i, j, p):
        _check_index(i)
        _check_index(j)
        if self._hess is not None:
            return self._hess(i, j, p)
        if self._grad is not None:
            h = self.h_fd
            return (self._grad(i, _shift(p, j, h)) - self._grad(i, _shift(p, j, -h))) / (2 * h)
        return fd_second(self._func, i, j, p, self.h2_fd)


def fd_second(func, i, j, p, h):
    """Fourth-order centered second derivative of ``func`` at ``p``."""
    if i == j:
        f = lambda t: func(_shift(p, i, t))  # noqa: E731
        return (-f(2 * h) + 16 * f(h) - 30 * func(p) + 16 * f(-h) - f(-2 * h)) / (12 * h * h)

    def mixed(step):
        pp = _shift(_shift(p, 1, step), 2, step)
        pm = _shift(_shift(p, 1, step), 2, -step)
        mp = _shift(_shift(p, 1, -step), 2, step)
        mm = _shift(_shift(p, 1, -step), 2, -step)
        return (func(pp) - func(pm) - func(mp) + func(mm)) / (4 * step * step)

    return (4 * mixed(h) - mixed(2 * h)) / 3


class PotentialField(FunctionField):
    """Value by an arbitrary routine, gradient by closed-form expressions."""

    def __init__(self, func, grad_exprs, name=None):
        g1, g2 = (parse(g) if isinstance(g, str) else g for g in grad_exprs)
        self._gexpr = (g1, g2)
        self._gf = (ExprField(g1), ExprField(g2))
        super().__init__(
            func,
            grad=lambda i, p: self._gf[i - 1].value(p),
            hess=lambda i, j, p: self._hess_entry(i, j, p),
            name=name,
        )
        self.provenance = SYMBOLIC

    def _hess_entry(self, i, j, p):
        if i == j:
            return self._gf[i - 1].partial(j, p)
        # average the two orderings so the Hessian is symmetric by construction
        return 0.5 * (self._gf[0].partial(2, p) + self._gf[1].partial(1, p))

    @property
    def gradient_exprs(self):
        return self._gexpr


def to_field(e: Expr | str) -> ExprField:
    """Field with exact symbolic partials."""
    return ExprField(e)


def fd_field(func, h_fd=H_FD, name=None) -> FunctionField:
    """Wrap a black-box function; partials by centered finite differences."""
    return FunctionField(func, h_fd=h_fd, name=name)


def constant_field(c):
    return ExprField(Const(float(c)))
