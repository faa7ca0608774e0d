"""Lax pairs (U1, U2) for P1, P2, P3 and their zero-curvature residuals.

Each pair is written once as an ordinary arithmetic expression in
(t, lam, x, x_t).  Feeding jets instead of numbers gives all the total
derivatives; see ``point_jets``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import algebra
from .errors import SingularInput
from .jets import Jet, mat2
from .painleve import PainleveParams, rhs_expr

SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class LaxPoint:
    """Evaluation point; x_tt is free (None means: substitute the equation).

    ``higher`` optionally supplies x_ttt, x_tttt, ... for off-shell jets.
    Fields may be arrays of a common shape for batched evaluation.
    """

    t: object
    lam: object
    x: object
    x_t: object
    x_tt: object = None
    higher: tuple = field(default=())

    @property
    def on_shell(self) -> bool:
        return self.x_tt is None


class LaxPair:
    equation = ""

    def __init__(self, params: PainleveParams):
        if params.equation != self.equation:
            raise ValueError(f"{type(self).__name__} needs {self.equation} parameters")
        self.params = params

    def u1_expr(self, t, lam, x, xt):
        raise NotImplementedError

    def u2_expr(self, t, lam, x, xt):
        raise NotImplementedError

    def check(self, t, lam, x) -> None:
        """Raise SingularInput if the point lies on a singular set."""

    def zcc_factor(self, t, lam, x, xt):
        """Matrix M with ZCC residual = (x_tt - rhs) * M, or None if unknown."""
        return None

    def rhs(self, t, x, xt):
        return rhs_expr(self.params, t, x, xt)


class P1Pair(LaxPair):
    equation = "P1"

    def u1_expr(self, t, lam, x, xt):
        return mat2(0, lam + 2 * x, 1, 0)

    def u2_expr(self, t, lam, x, xt):
        return mat2(-xt, 2 * lam * lam + 2 * lam * x + t + 2 * x * x, 2 * (lam - x), xt)

    def zcc_factor(self, t, lam, x, xt):
        shape = np.broadcast_shapes(*(np.shape(v) for v in (t, lam, x, xt)))
        return np.broadcast_to(algebra.E1, shape + (2, 2))


class P2Pair(LaxPair):
    equation = "P2"

    def u1_expr(self, t, lam, x, xt):
        return mat2(-lam, x, x, lam)

    def u2_expr(self, t, lam, x, xt):
        a = self.params.alpha
        d = 4 * lam * lam - 2 * x * x - t
        off = -4 * x * lam + a / lam
        return mat2(d, off + 2 * xt, off - 2 * xt, -d)

    def check(self, t, lam, x):
        if np.any(np.abs(lam) < SINGULAR_TOL):
            raise SingularInput("P2 Lax pair is singular at lambda = 0")


class P3Pair(LaxPair):
    equation = "P3"

    def u1_expr(self, t, lam, x, xt):
        g, d = self.params.gamma, self.params.delta
        h = 0.5 * (xt / x + g * x + d / x)
        return mat2(h, lam, lam, -h)

    def u2_expr(self, t, lam, x, xt):
        a, b, g, d = self.params.alpha, self.params.beta, self.params.gamma, self.params.delta
        D = lam * lam + g * d
        l2 = lam * lam
        a11 = (2 * t * l2 * xt + 2 * t * l2 * g * x * x + 2 * t * l2 * d - x * a * d + x * b * g) / (4 * lam * x * D)
        a12 = -(-2 * t * l2 + g * t * xt + g * x + g * g * t * x * x - g * d * t + a * x) / (2 * D)
        a21 = -(-2 * t * x * x * l2 + d * t * xt - d * x + d * d * t - g * d * t * x * x - b * x) / (2 * x * x * D)
        return mat2(a11, a12, a21, -a11)

    def check(self, t, lam, x):
        g, d = self.params.gamma, self.params.delta
        if np.any(np.abs(x) < SINGULAR_TOL):
            raise SingularInput("P3 Lax pair is singular at x = 0")
        if np.any(np.abs(t) < SINGULAR_TOL):
            raise SingularInput("P3 Lax pair is singular at t = 0")
        if np.any(np.abs(lam) < SINGULAR_TOL):
            raise SingularInput("P3 Lax pair is singular at lambda = 0")
        if np.any(np.abs(np.asarray(lam) ** 2 + g * d) < SINGULAR_TOL):
            raise SingularInput("P3 Lax pair is singular at lambda^2 + gamma*delta = 0")

    def zcc_factor(self, t, lam, x, xt):
        g, d = self.params.gamma, self.params.delta
        D = lam * lam + g * d
        m = algebra.mat(-lam * t / (x * D), g * t / D, d * t / (x * x * D), lam * t / (x * D))
        return 0.5 * m

    @property
    def consistent(self) -> bool:
        """Whether this pair reproduces P3 for these parameters.

        The ZCC of these matrices only factors through the P3 residual
        when gamma**2 == gamma and delta**2 == -delta.
        """
        g, d = self.params.gamma, self.params.delta
        return abs(g * g - g) < 1e-14 and abs(d * d + d) < 1e-14


_PAIRS = {"P1": P1Pair, "P2": P2Pair, "P3": P3Pair}


def lax_pair(params: PainleveParams) -> LaxPair:
    return _PAIRS[params.equation](params)


# evaluation --------------------------------------------------------------

def _check(pair: LaxPair, p: LaxPoint) -> None:
    pair.check(p.t, p.lam, p.x)


def u1(pair: LaxPair, p: LaxPoint) -> np.ndarray:
    _check(pair, p)
    return np.asarray(pair.u1_expr(*_floats(p)), dtype=complex)


def u2(pair: LaxPair, p: LaxPoint) -> np.ndarray:
    _check(pair, p)
    return np.asarray(pair.u2_expr(*_floats(p)), dtype=complex)


def _floats(p: LaxPoint):
    return tuple(np.asarray(v, dtype=float) for v in (p.t, p.lam, p.x, p.x_t))


def x_series(pair: LaxPair, p: LaxPoint, n_t: int, n_eps: int = 0, R=None):
    """Normalized Taylor coefficients of x(t + s) + eps R(t + s).

    Returns an array of shape (n_t + 1, n_eps + 1, *batch).  On-shell points
    are continued with the equation; off-shell points use x_tt and ``higher``
    (missing derivatives count as zero).  R is (R, R_t); the variational
    equation is integrated alongside through the eps direction.
    """
    t, lam, x, xt = _floats(p)
    batch = np.broadcast_shapes(t.shape, x.shape, xt.shape)
    xs = np.zeros((n_t + 1, n_eps + 1) + batch)
    xs[0, 0] = x
    if n_t >= 1:
        xs[1, 0] = xt
    if R is not None and n_eps >= 1:
        xs[0, 1] = R[0]
        if n_t >= 1:
            xs[1, 1] = R[1]
    if not p.on_shell:
        if R is not None and n_eps >= 1 and n_t >= 2:
            raise ValueError("variational jets need an on-shell point")
        extra = (p.x_tt,) + tuple(p.higher)
        for m, v in enumerate(extra):
            k = m + 2
            if k > n_t:
                break
            xs[k, 0] = np.asarray(v, dtype=float) / factorial(k)
        return xs
    if n_t < 2:
        return xs
    order = (n_t, 0, n_eps)
    T = Jet.var(np.broadcast_to(t, batch), 0, order)
    for k in range(0, n_t - 1):
        X = Jet.from_grid(xs[:, None, :])
        g = np.zeros_like(xs)
        g[:-1] = xs[1:] * np.arange(1, n_t + 1).reshape((-1,) + (1,) * (xs.ndim - 1))
        Xt = Jet.from_grid(g[:, None, :])
        F = pair.rhs(T, X, Xt).grid()[k, 0]
        xs[k + 2] = F / ((k + 1) * (k + 2))
    return xs


def point_jets(pair: LaxPair, p: LaxPoint, order, R=None):
    """Jets (T, Lam, X, X_t) at p with truncation ``order = (n_t, n_lam, n_eps)``."""
    n_t, n_l, n_e = order
    _check(pair, p)
    xs = x_series(pair, p, n_t + 1, n_e, R)
    t, lam, _, _ = _floats(p)
    batch = xs.shape[2:]
    gx = np.zeros((n_t + 1, n_l + 1, n_e + 1) + batch)
    gx[:, 0] = xs[: n_t + 1]
    gxt = np.zeros_like(gx)
    gxt[:, 0] = xs[1:] * np.arange(1, n_t + 2).reshape((-1,) + (1,) * (xs.ndim - 1))
    T = Jet.var(np.broadcast_to(t, batch), 0, order)
    Lam = Jet.var(np.broadcast_to(lam, batch), 1, order)
    return T, Lam, Jet.from_grid(gx), Jet.from_grid(gxt)


def u_jets(pair: LaxPair, p: LaxPoint, order, R=None):
    """(U1, U2) as matrix jets."""
    T, Lam, X, Xt = point_jets(pair, p, order, R)
    return pair.u1_expr(T, Lam, X, Xt), pair.u2_expr(T, Lam, X, Xt)


def partials(pair: LaxPair, p: LaxPoint) -> dict:
    """Total derivatives D_t U1, D_lam U1, D_t U2, D_lam U2 at p."""
    U1, U2 = u_jets(pair, p, (1, 1, 0))
    return {
        "U1_t": U1.deriv(1, 0), "U1_lam": U1.deriv(0, 1),
        "U2_t": U2.deriv(1, 0), "U2_lam": U2.deriv(0, 1),
    }


def zcc_from_jets(U1: Jet, U2: Jet) -> Jet:
    """D_lam U1 - D_t U2 + [U1, U2] as a jet (order drops by one in t and lam)."""
    return U1.dl() - U2.dt() + algebra.commutator(U1, U2)


def zcc_residual(pair: LaxPair, p: LaxPoint) -> np.ndarray:
    U1, U2 = u_jets(pair, p, (1, 1, 0))
    return zcc_from_jets(U1, U2).value


def equation_residual(pair: LaxPair, p: LaxPoint):
    """x_tt - rhs at p (zero for on-shell points)."""
    if p.on_shell:
        return np.zeros(np.shape(p.x))
    t, _, x, xt = _floats(p)
    return np.asarray(p.x_tt, dtype=float) - rhs_expr(pair.params, t, x, xt)
