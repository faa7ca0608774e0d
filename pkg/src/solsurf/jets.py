"""Truncated Taylor arithmetic in three directions (t, lambda, eps).

A ``Jet`` stores normalized Taylor coefficients

    c[i, j, k] = d^i_t d^j_lam d^k_eps f / (i! j! k!)

truncated at ``order = (n_t, n_lam, n_eps)``, for a batch of points at once.
Evaluating a Lax matrix on jets built from (t + s, lam + mu, x(t + s) + eps R)
yields every total derivative we need exactly (up to rounding), which keeps
hand-written partials out of the code.  The eps direction carries the
prolongation pr w_R.

Matrix-valued jets carry two trailing (2, 2) axes; ``is_mat`` records that
so scalar * matrix products broadcast correctly.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from . import algebra

T_AXIS, LAM_AXIS, EPS_AXIS = 0, 1, 2


def _shape3(order):
    return (order[0] + 1, order[1] + 1, order[2] + 1)


@lru_cache(maxsize=None)
def _plan(order):
    """Index pairs (a, b) contributing to each output coefficient, grouped."""
    shp = _shape3(order)
    rows = []
    for i in range(shp[0]):
        for j in range(shp[1]):
            for k in range(shp[2]):
                out = np.ravel_multi_index((i, j, k), shp)
                for i1 in range(i + 1):
                    for j1 in range(j + 1):
                        for k1 in range(k + 1):
                            a = np.ravel_multi_index((i1, j1, k1), shp)
                            b = np.ravel_multi_index((i - i1, j - j1, k - k1), shp)
                            rows.append((out, a, b))
    rows.sort()
    arr = np.array(rows, dtype=np.intp)
    out = arr[:, 0]
    starts = np.flatnonzero(np.r_[True, out[1:] != out[:-1]])
    return arr[:, 1].copy(), arr[:, 2].copy(), starts


def _align(c, ndim=None):
    """Insert axes after the coefficient axis so batches broadcast from the right."""
    if ndim is None or c.ndim >= ndim:
        return c
    return c.reshape(c.shape[:1] + (1,) * (ndim - c.ndim) + c.shape[1:])


def _binom(p, k):
    out = 1.0
    for m in range(k):
        out *= (p - m) / (m + 1)
    return out


class Jet:
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, c, order, is_mat=False):
        self.c = c
        self.order = tuple(int(n) for n in order)
        self.is_mat = bool(is_mat)

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, value, order, is_mat=False):
        value = np.asarray(value)
        n = int(np.prod(_shape3(order)))
        c = np.zeros((n,) + value.shape, dtype=np.result_type(value, float))
        c[0] = value
        return cls(c, order, is_mat)

    @classmethod
    def var(cls, value, axis, order):
        """value + (offset along ``axis``)."""
        jet = cls.const(value, order)
        if order[axis] >= 1:
            idx = [0, 0, 0]
            idx[axis] = 1
            jet.c[np.ravel_multi_index(tuple(idx), _shape3(order))] = 1.0
        return jet

    @classmethod
    def from_grid(cls, coeffs, is_mat=False):
        """Build from an array of shape (n_t+1, n_lam+1, n_eps+1, *batch)."""
        coeffs = np.asarray(coeffs)
        order = tuple(s - 1 for s in coeffs.shape[:3])
        return cls(coeffs.reshape((-1,) + coeffs.shape[3:]), order, is_mat)

    # inspection ----------------------------------------------------------
    @property
    def batch(self):
        return self.c.shape[1:]

    @property
    def value(self):
        return self.c[0]

    def grid(self):
        return self.c.reshape(_shape3(self.order) + self.batch)

    def coef(self, i=0, j=0, k=0):
        return self.grid()[i, j, k]

    def deriv(self, i=0, j=0, k=0):
        return self.coef(i, j, k) * (factorial(i) * factorial(j) * factorial(k))

    def entry(self, r, s):
        if not self.is_mat:
            raise TypeError("entry() needs a matrix jet")
        return Jet(self.c[..., r, s], self.order)

    def truncate(self, order):
        order = tuple(order)
        if order == self.order:
            return self
        if any(a > b for a, b in zip(order, self.order)):
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        g = self.grid()[: order[0] + 1, : order[1] + 1, : order[2] + 1]
        return Jet(g.reshape((-1,) + self.batch), order, self.is_mat)

    def _diff(self, axis):
        if self.order[axis] == 0:
            raise ValueError("derivative exhausts the jet order")
        g = self.grid()
        n = self.order[axis]
        sl = [slice(None)] * g.ndim
        sl[axis] = slice(1, None)
        w = np.arange(1, n + 1, dtype=float).reshape([-1 if a == axis else 1 for a in range(3)] + [1] * len(self.batch))
        new = g[tuple(sl)] * w
        order = list(self.order)
        order[axis] -= 1
        return Jet(new.reshape((-1,) + self.batch), order, self.is_mat)

    def dt(self):
        return self._diff(T_AXIS)

    def dl(self):
        return self._diff(LAM_AXIS)

    def de(self):
        return self._diff(EPS_AXIS)

    # arithmetic helpers --------------------------------------------------
    def _pair(self, other):
        order = tuple(min(a, b) for a, b in zip(self.order, other.order))
        a, b = self.truncate(order), other.truncate(order)
        ca, cb = a.c, b.c
        if a.is_mat and not b.is_mat:
            cb = cb[..., None, None]
        elif b.is_mat and not a.is_mat:
            ca = ca[..., None, None]
        ca, cb = _align(ca), _align(cb, ca.ndim)
        ca = _align(ca, cb.ndim)
        return ca, cb, order, a.is_mat or b.is_mat

    def _const_operand(self, other):
        o = np.asarray(other)
        return o

    def __add__(self, other):
        if isinstance(other, Jet):
            ca, cb, order, ism = self._pair(other)
            return Jet(ca + cb, order, ism)
        o = self._const_operand(other)
        batch = np.broadcast_shapes(self.batch, o.shape)
        c = np.array(np.broadcast_to(self.c, self.c.shape[:1] + batch), dtype=np.result_type(self.c, o))
        c[0] += o
        return Jet(c, self.order, self.is_mat)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order, self.is_mat)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            ca, cb, order, ism = self._pair(other)
            ia, ib, starts = _plan(order)
            prod = ca[ia] * cb[ib]
            return Jet(np.add.reduceat(prod, starts, axis=0), order, ism)
        o = self._const_operand(other)
        if self.is_mat and o.ndim > 0:
            o = o[..., None, None]
        return Jet(self.c * o, self.order, self.is_mat)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Jet):
            ca, cb, order, ism = self._pair(other)
            ia, ib, starts = _plan(order)
            prod = np.matmul(ca[ia], cb[ib])
            return Jet(np.add.reduceat(prod, starts, axis=0), order, True)
        return Jet(np.matmul(self.c, np.asarray(other)), self.order, True)

    def __rmatmul__(self, other):
        return Jet(np.matmul(np.asarray(other), self.c), self.order, True)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return Jet.const(np.ones(self.batch), self.order)
            if p < 0:
                return self.reciprocal() ** (-p)
            out = None
            base = self
            while p:
                if p & 1:
                    out = base if out is None else out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        f0 = self.value
        return self._compose([_binom(p, k) * f0 ** (p - k) for k in range(self._depth() + 1)])

    # elementary functions -------------------------------------------------
    def _depth(self):
        return sum(self.order)

    def _compose(self, coeffs):
        """sum_k coeffs[k] g^k with g the non-constant part of self."""
        if self.is_mat:
            raise TypeError("elementary functions need a scalar jet")
        g = Jet(self.c.copy(), self.order)
        g.c[0] = 0
        out = Jet.const(coeffs[-1], self.order)
        for ck in reversed(coeffs[:-1]):
            out = out * g + ck
        return out

    def reciprocal(self):
        f0 = self.value
        inv = 1.0 / f0
        return self._compose([(-1) ** k * inv ** (k + 1) for k in range(self._depth() + 1)])

    def sqrt(self):
        return self ** 0.5

    def exp(self):
        e = np.exp(self.value)
        return self._compose([e / factorial(k) for k in range(self._depth() + 1)])

    def log(self):
        f0 = self.value
        cs = [np.log(f0)] + [(-1) ** (k + 1) / (k * f0 ** k) for k in range(1, self._depth() + 1)]
        return self._compose(cs)

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._compose([cyc[k % 4] / factorial(k) for k in range(self._depth() + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._compose([cyc[k % 4] / factorial(k) for k in range(self._depth() + 1)])

    def __repr__(self):
        kind = "matrix" if self.is_mat else "scalar"
        return f"Jet({kind}, order={self.order}, batch={self.batch})"


def _dispatch(name, npfunc):
    def f(x):
        if isinstance(x, Jet):
            return getattr(x, name)()
        return npfunc(x)

    f.__name__ = name
    return f


exp = _dispatch("exp", np.exp)
log = _dispatch("log", np.log)
sqrt = _dispatch("sqrt", np.sqrt)
sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)


def mat2(a11, a12, a21, a22):
    """2x2 matrix from entries that may be jets, arrays or numbers."""
    entries = (a11, a12, a21, a22)
    jets = [e for e in entries if isinstance(e, Jet)]
    if not jets:
        return algebra.mat(*entries)
    order = tuple(min(j.order[a] for j in jets) for a in range(3))
    n = int(np.prod(_shape3(order)))
    cs = []
    for e in entries:
        if isinstance(e, Jet):
            cs.append(e.truncate(order).c)
        else:
            e = np.asarray(e, dtype=complex)
            c = np.zeros((n,) + e.shape, dtype=complex)
            c[0] = e
            cs.append(c)
    nd = max(c.ndim for c in cs)
    cs = np.broadcast_arrays(*(_align(c, nd) for c in cs))
    out = np.empty(cs[0].shape + (2, 2), dtype=complex)
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = cs
    return Jet(out, order, True)


def t_series(coeffs, order):
    """Jet whose t-direction Taylor coefficients are ``coeffs`` (normalized)."""
    coeffs = [np.asarray(c) for c in coeffs]
    batch = np.broadcast_shapes(*(c.shape for c in coeffs))
    dtype = np.result_type(float, *coeffs)
    g = np.zeros(_shape3(order) + batch, dtype=dtype)
    for i, c in enumerate(coeffs[: order[0] + 1]):
        g[i, 0, 0] = c
    return Jet.from_grid(g)


def value(x):
    """Plain value of a jet, or the argument itself."""
    return x.value if isinstance(x, Jet) else x
