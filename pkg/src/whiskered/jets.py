"""Truncated power series in one variable with array-valued coefficients.

A :class:`Jet` of order ``M`` stores ``c_0, ..., c_M`` (each an array of a
common shape) and represents ``sum_n c_n eps^n`` modulo ``eps^{M+1}``.  The
model maps are written against the tiny ``sin``/``cos`` dispatchers below,
so the same formula evaluates on plain arrays and on jets.
"""
from __future__ import annotations

import numpy as np


class Jet:
    __array_ufunc__ = None  # let numpy defer to the reflected operators

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=complex)
        if self.c.ndim == 0:
            raise ValueError("jet needs a leading order axis")

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def shape(self):
        return self.c.shape[1:]

    @classmethod
    def constant(cls, value, order: int):
        value = np.asarray(value, dtype=complex)
        c = np.zeros((order + 1,) + value.shape, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, order: int, value=0.0):
        """The jet of the expansion variable itself, eps = value + 1 * h."""
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_list(cls, items, order: int):
        items = [np.asarray(x, dtype=complex) for x in items]
        shape = np.broadcast_shapes(*[x.shape for x in items]) if items else ()
        c = np.zeros((order + 1,) + shape, dtype=complex)
        for n, x in enumerate(items[: order + 1]):
            c[n] = x
        return cls(c)

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other.c
        other = np.asarray(other, dtype=complex)
        c = np.zeros((self.order + 1,) + other.shape, dtype=complex)
        c[0] = other
        return c

    @staticmethod
    def _align(a, b):
        # leading axis is the order; broadcast the rest
        nd = max(a.ndim, b.ndim)
        a = a.reshape(a.shape[:1] + (1,) * (nd - a.ndim) + a.shape[1:])
        b = b.reshape(b.shape[:1] + (1,) * (nd - b.ndim) + b.shape[1:])
        return a, b

    def __add__(self, other):
        a, b = self._align(self.c, self._coerce(other))
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        a, b = self._align(self.c, self._coerce(other))
        return Jet(a - b)

    def __rsub__(self, other):
        a, b = self._align(self._coerce(other), self.c)
        return Jet(a - b)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            a, b = self._align(self.c, np.asarray(other)[None, ...])
            return Jet(a * b)
        return Jet(_cauchy(self.c, other.c, np.multiply))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=complex))

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers")
        out = Jet.constant(np.ones(self.shape), self.order)
        for _ in range(int(n)):
            out = out * self
        return out

    def matmul(self, other):
        """Cauchy product using the matrix product on the trailing axes."""
        if isinstance(other, Jet):
            return Jet(_cauchy(self.c, other.c, np.matmul))
        return Jet(np.matmul(self.c, np.asarray(other)[None, ...]))

    def rmatmul(self, other):
        return Jet(np.matmul(np.asarray(other)[None, ...], self.c))

    def reciprocal(self):
        a = self.c
        inv0 = 1.0 / a[0]
        r = np.zeros_like(a)
        r[0] = inv0
        for n in range(1, self.order + 1):
            acc = np.zeros_like(a[0])
            for k in range(1, n + 1):
                acc = acc + a[k] * r[n - k]
            r[n] = -acc * inv0
        return Jet(r)

    def sincos(self):
        a = self.c
        m = self.order
        s = np.zeros_like(a)
        c = np.zeros_like(a)
        s[0] = np.sin(a[0])
        c[0] = np.cos(a[0])
        ka = np.arange(m + 1).reshape((m + 1,) + (1,) * (a.ndim - 1)) * a
        for n in range(1, m + 1):
            s[n] = np.sum(ka[1:n + 1] * c[n - 1::-1][:n], axis=0) / n
            c[n] = -np.sum(ka[1:n + 1] * s[n - 1::-1][:n], axis=0) / n
        return Jet(s), Jet(c)

    def coefficient(self, n: int):
        return self.c[n]

    def evaluate(self, h):
        """Sum the series at increment ``h`` (Horner)."""
        out = np.zeros(self.shape, dtype=complex)
        for n in range(self.order, -1, -1):
            out = out * h + self.c[n]
        return out

    def truncated(self, order: int):
        c = np.zeros((order + 1,) + self.shape, dtype=complex)
        m = min(order, self.order)
        c[: m + 1] = self.c[: m + 1]
        return Jet(c)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[(slice(None),) + idx])


def _cauchy(a, b, op):
    m = a.shape[0] - 1
    first = op(a[0], b[0])
    out = np.zeros((m + 1,) + np.shape(first), dtype=complex)
    for i in range(m + 1):
        # contributions a_i * b_{n-i} for n = i..m
        out[i:] += op(a[i][None, ...], b[: m + 1 - i])
    return out


def sin(x):
    if isinstance(x, Jet):
        return x.sincos()[0]
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return x.sincos()[1]
    return np.cos(x)


def sincos(x):
    if isinstance(x, Jet):
        return x.sincos()
    return np.sin(x), np.cos(x)
