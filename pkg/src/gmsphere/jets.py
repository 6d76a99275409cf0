"""Truncated Taylor series in theta, evaluated at a set of nodes.

A :class:`Jet` stores ``f(theta_0 + h) = sum_k coef[k] h**k`` for every node
``theta_0``.  Arithmetic and the ufuncs ``sin``, ``cos``, ``exp``, ``log``
propagate the series exactly, so the coefficient functions of a
:class:`~gmsphere.operators.SurfaceOperator` (written with plain numpy
calls) can be evaluated on jets unchanged.  Differentiating a jet of order
``K`` gives an exact jet of order ``K - 1``; no grid spacing enters.
"""
from __future__ import annotations

import math
import numbers

import numpy as np


class Jet:
    __array_priority__ = 100

    def __init__(self, coef):
        self.coef = np.asarray(coef, dtype=complex)

    @classmethod
    def variable(cls, theta, order: int) -> "Jet":
        theta = np.asarray(theta, dtype=float)
        coef = np.zeros((order + 1,) + theta.shape, dtype=complex)
        coef[0] = theta
        if order >= 1:
            coef[1] = 1.0
        return cls(coef)

    @classmethod
    def constant(cls, value, like: "Jet") -> "Jet":
        coef = np.zeros_like(like.coef)
        coef[0] = value
        return cls(coef)

    @property
    def order(self) -> int:
        return self.coef.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.coef[0]

    def derivative(self, n: int = 1) -> np.ndarray:
        """n-th derivative values at the nodes."""
        return self.coef[n] * float(math.factorial(n))

    def diff(self) -> "Jet":
        """The derivative as a jet of one lower order."""
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        k = np.arange(1, self.order + 1).reshape((-1,) + (1,) * (self.coef.ndim - 1))
        return Jet(self.coef[1:] * k)

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.coef.shape[1:]})"

    # arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        if isinstance(other, (numbers.Number, np.ndarray, np.generic)):
            return Jet.constant(other, self)
        return NotImplemented

    def _truncate(self, other: "Jet"):
        k = min(self.order, other.order) + 1
        return self.coef[:k], other.coef[:k]

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._truncate(other)
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if isinstance(other, (numbers.Number, np.ndarray, np.generic)):
                return Jet(self.coef * other)
            return NotImplemented
        a, b = self._truncate(other)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=complex)
        for k in range(a.shape[0]):
            out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a = self.coef
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, a.shape[0]):
            out[k] = -np.sum(a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / a[0]
        return Jet(out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if isinstance(other, (numbers.Number, np.ndarray, np.generic)):
                return Jet(self.coef / other)
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, numbers.Integral) or n < 0:
            return NotImplemented
        out = Jet.constant(1.0, self)
        for _ in range(n):
            out = out * self
        return out

    # elementary functions by the standard Taylor recurrences ------------

    def sin_cos(self):
        u = self.coef
        s = np.zeros_like(u)
        c = np.zeros_like(u)
        s[0], c[0] = np.sin(u[0]), np.cos(u[0])
        for k in range(1, u.shape[0]):
            j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
            s[k] = np.sum(j * u[1 : k + 1] * c[k - 1 :: -1][:k], axis=0) / k
            c[k] = -np.sum(j * u[1 : k + 1] * s[k - 1 :: -1][:k], axis=0) / k
        return Jet(s), Jet(c)

    def exp(self):
        u = self.coef
        e = np.zeros_like(u)
        e[0] = np.exp(u[0])
        for k in range(1, u.shape[0]):
            j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
            e[k] = np.sum(j * u[1 : k + 1] * e[k - 1 :: -1][:k], axis=0) / k
        return Jet(e)

    def log(self):
        u = self.coef
        g = np.zeros_like(u)
        g[0] = np.log(u[0])
        for k in range(1, u.shape[0]):
            j = np.arange(1, k).reshape((-1,) + (1,) * (u.ndim - 1))
            acc = np.sum(j * g[1:k] * u[k - 1 : 0 : -1], axis=0)
            g[k] = (k * u[k] - acc) / (k * u[0])
        return Jet(g)

    _UFUNCS = {
        np.add: "__add__",
        np.subtract: "__sub__",
        np.multiply: "__mul__",
        np.true_divide: "__truediv__",
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            return NotImplemented
        if len(inputs) == 1:
            (x,) = inputs
            if ufunc is np.sin:
                return x.sin_cos()[0]
            if ufunc is np.cos:
                return x.sin_cos()[1]
            if ufunc is np.tan:
                s, c = x.sin_cos()
                return s / c
            if ufunc is np.exp:
                return x.exp()
            if ufunc is np.log:
                return x.log()
            if ufunc is np.negative:
                return -x
            return NotImplemented
        if ufunc in self._UFUNCS and len(inputs) == 2:
            a, b = inputs
            name = self._UFUNCS[ufunc]
            if isinstance(a, Jet):
                return getattr(a, name)(b)
            return getattr(b, "__r" + name[2:])(a)
        return NotImplemented
