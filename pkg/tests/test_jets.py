from __future__ import annotations

import numpy as np
import sympy as sp

from solsurf import jets
from solsurf.jets import Jet, mat2

ORDER = (3, 2, 1)


def _sym_derivs(expr, pt):
    t, l, e = sp.symbols("t l e")
    out = {}
    for i in range(ORDER[0] + 1):
        for j in range(ORDER[1] + 1):
            for k in range(ORDER[2] + 1):
                d = sp.diff(expr(t, l, e), t, i, l, j, e, k)
                out[i, j, k] = float(d.subs({t: pt[0], l: pt[1], e: pt[2]}))
    return out


def _check(fn_jet, fn_sym, pt=(0.3, -0.7, 0.2), tol=1e-11):
    T, L, E = (Jet.var(v, ax, ORDER) for ax, v in enumerate(pt))
    J = fn_jet(T, L, E)
    for (i, j, k), ref in _sym_derivs(fn_sym, pt).items():
        got = J.deriv(i, j, k)
        assert abs(got - ref) <= tol * max(1.0, abs(ref)), (i, j, k, got, ref)


def test_polynomial_and_quotient():
    _check(lambda t, l, e: (t * t * l + 3 * e) / (1 + t * t + l * l),
           lambda t, l, e: (t * t * l + 3 * e) / (1 + t * t + l * l))


def test_elementary_functions():
    _check(lambda t, l, e: jets.exp(t * l) + jets.sin(e + t) * jets.cos(l) + jets.log(2 + t) + jets.sqrt(3 + l * e),
           lambda t, l, e: sp.exp(t * l) + sp.sin(e + t) * sp.cos(l) + sp.log(2 + t) + sp.sqrt(3 + l * e))


def test_powers():
    _check(lambda t, l, e: (1.5 + t) ** 3 * (2 + l) ** -2 + (2 + e) ** 0.5,
           lambda t, l, e: (sp.Rational(3, 2) + t) ** 3 * (2 + l) ** -2 + sp.sqrt(2 + e))


def test_matrix_product_rule():
    T, L = Jet.var(0.4, 0, (2, 2, 0)), Jet.var(-1.1, 1, (2, 2, 0))
    M = mat2(T, L * T, 1, -T)
    N = mat2(L, T * T, L - T, -L)
    P = M @ N
    # finite differences of the plain matrix product as oracle
    f = lambda t, l: np.array([[t, l * t], [1, -t]]) @ np.array([[l, t * t], [l - t, -l]])  # noqa: E731
    h = 1e-6
    d_t = (f(0.4 + h, -1.1) - f(0.4 - h, -1.1)) / (2 * h)
    np.testing.assert_allclose(P.deriv(1, 0), d_t, atol=1e-8)
    np.testing.assert_allclose(P.value, f(0.4, -1.1), atol=1e-14)


def test_batched_jets_broadcast():
    t = np.linspace(0.1, 1, 7)
    T = Jet.var(t, 0, (2, 0, 0))
    J = T * T * 3.0 + 1.0
    np.testing.assert_allclose(J.deriv(1), 6 * t)
    np.testing.assert_allclose(J.deriv(2), 6.0 + 0 * t)


def test_truncate_and_dt_shift_order():
    T = Jet.var(1.0, 0, (4, 1, 0))
    J = T ** 4
    assert J.dt().order == (3, 1, 0)
    assert J.truncate((2, 0, 0)).deriv(2) == 12.0
