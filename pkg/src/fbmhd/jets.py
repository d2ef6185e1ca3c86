"""Truncated Taylor-in-time arithmetic ("jets") over numpy arrays.

A TimeJet holds normalized Taylor coefficients c_k = (d/dt)^k f / k! of a
time-dependent grid quantity at t = 0.  Arithmetic propagates coefficients
exactly (Cauchy products, series reciprocals, exp/log recurrences), which
is what the compatibility-trace machinery uses instead of a symbolic
Faa di Bruno expansion: the discrete evolution map is evaluated on jets,
so its nested time derivatives come out of ordinary arithmetic.

All coefficients of one jet share a common array shape (or are scalars).
Binary operations truncate to the shorter of the two operand orders.
"""
from __future__ import annotations

import numpy as np


class TimeJet:
    # keep numpy from consuming jets elementwise
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = [np.asarray(ci, dtype=float) if np.ndim(ci) else float(ci) for ci in coeffs]
        if not self.c:
            raise ValueError("jet needs at least one coefficient")

    @classmethod
    def constant(cls, value, order):
        return cls([value] + [np.zeros_like(np.asarray(value, dtype=float)) if np.ndim(value) else 0.0
                              for _ in range(order)])

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def coeff(self, k):
        """k-th normalized coefficient; zero beyond the stored order."""
        if k < len(self.c):
            return self.c[k]
        return np.zeros_like(np.asarray(self.c[0], dtype=float)) if np.ndim(self.c[0]) else 0.0

    def derivative_coeff(self, k):
        """k-th raw time derivative (d/dt)^k f, i.e. k! * c_k."""
        from math import factorial

        return self.coeff(k) * factorial(k)

    def truncated(self, order):
        return TimeJet(self.c[: order + 1])

    def dt(self):
        """Jet of the time derivative (order drops by one)."""
        if self.order == 0:
            return TimeJet([0.0 * self.c[0]])
        return TimeJet([(k + 1) * self.c[k + 1] for k in range(self.order)])

    def lin(self, fn):
        """Apply a linear operator (stencil, slice, ...) coefficientwise."""
        return TimeJet([fn(ci) for ci in self.c])

    # -- arithmetic ----------------------------------------------------
    def _wrap(self, other):
        if isinstance(other, TimeJet):
            return other
        return TimeJet.constant(other, self.order)

    def __add__(self, other):
        o = self._wrap(other)
        n = min(self.order, o.order)
        return TimeJet([self.coeff(k) + o.coeff(k) for k in range(n + 1)])

    __radd__ = __add__

    def __neg__(self):
        return TimeJet([-ci for ci in self.c])

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        o = self._wrap(other)
        n = min(self.order, o.order)
        out = []
        for k in range(n + 1):
            s = self.coeff(0) * o.coeff(k)
            for j in range(1, k + 1):
                s = s + self.coeff(j) * o.coeff(k - j)
            out.append(s)
        return TimeJet(out)

    __rmul__ = __mul__

    def reciprocal(self):
        n = self.order
        b0 = self.coeff(0)
        inv0 = 1.0 / b0
        out = [inv0]
        for k in range(1, n + 1):
            s = self.coeff(k) * out[0]
            for j in range(1, k):
                s = s + self.coeff(j) * out[k - j]
            out.append(-inv0 * s)
        return TimeJet(out)

    def __truediv__(self, other):
        o = self._wrap(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self._wrap(other) * self.reciprocal()

    def exp(self):
        n = self.order
        out = [np.exp(self.coeff(0)) if np.ndim(self.coeff(0)) else float(np.exp(self.coeff(0)))]
        for k in range(1, n + 1):
            s = 0.0
            for j in range(1, k + 1):
                s = s + j * self.coeff(j) * out[k - j]
            out.append(s / k)
        return TimeJet(out)

    def log(self):
        n = self.order
        a0 = self.coeff(0)
        out = [np.log(a0) if np.ndim(a0) else float(np.log(a0))]
        for k in range(1, n + 1):
            s = self.coeff(k)
            for j in range(1, k):
                s = s - (j / k) * out[j] * self.coeff(k - j)
            out.append(s / a0)
        return TimeJet(out)

    def __pow__(self, r):
        if isinstance(r, int) and r >= 0:
            result = TimeJet.constant(1.0, self.order) if np.ndim(self.c[0]) == 0 else TimeJet(
                [np.ones_like(self.c[0])] + [np.zeros_like(ci) for ci in self.c[1:]])
            for _ in range(r):
                result = result * self
            return result
        return (self.log() * float(r)).exp()

    def __repr__(self):
        return f"TimeJet(order={self.order}, shape={np.shape(self.c[0])})"


def jexp(x):
    """exp() that accepts plain arrays and TimeJets alike."""
    if isinstance(x, TimeJet):
        return x.exp()
    return np.exp(x)


def jsqrt(x):
    if isinstance(x, TimeJet):
        return x ** 0.5
    return np.sqrt(x)


def as_jet(x, order):
    return x if isinstance(x, TimeJet) else TimeJet.constant(x, order)
