"""Airy, modified Bessel I and Gamma functions for real arguments.

Accuracy target is 1e-10 (absolute for Airy, relative for the others) on
|z| <= 30, which covers every domain used by the surface pipelines.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma_scalar(x: float) -> float:
    if x <= 0 and float(x).is_integer():
        raise DomainError(f"gamma pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    a = _LANCZOS[0]
    tt = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (x + i)
    return math.sqrt(2 * math.pi) * tt ** (x + 0.5) * math.exp(-tt) * a


def gamma(x):
    """Gamma function (Lanczos, g=7, nine coefficients)."""
    if np.ndim(x) == 0:
        return _gamma_scalar(float(x))
    return np.vectorize(_gamma_scalar, otypes=[float])(x)


# Ai(0) and -Ai'(0)
AI0 = 3.0 ** (-2.0 / 3.0) / _gamma_scalar(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / _gamma_scalar(1.0 / 3.0)

_SERIES_RADIUS = 4.0
_ASYMPTOTIC_START = 8.0


def _airy_maclaurin(z: float):
    z3 = z ** 3
    # f = sum 3^k (1/3)_k z^{3k}/(3k)!, g = sum 3^k (2/3)_k z^{3k+1}/(3k+1)!
    f, fp, g, gp = 1.0, 0.0, z, 1.0
    tf, tg = 1.0, z
    for k in range(0, 200):
        tf_next = tf * z3 / ((3 * k + 2) * (3 * k + 3))
        tg_next = tg * z3 / ((3 * k + 3) * (3 * k + 4))
        # derivatives of the new terms: d/dz z^{m} c = m/z * term
        m_f, m_g = 3 * k + 3, 3 * k + 4
        f += tf_next
        g += tg_next
        if z != 0.0:
            fp += tf_next * m_f / z
            gp += tg_next * m_g / z
        tf, tg = tf_next, tg_next
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)):
            break
    if z == 0.0:
        fp, gp = 0.0, 1.0
    ai = AI0 * f + AIP0 * g
    aip = AI0 * fp + AIP0 * gp
    return ai, aip


def _airy_asymptotic(z: float):
    zeta = 2.0 / 3.0 * z ** 1.5
    s_u, s_v = 1.0, 1.0
    u = 1.0
    last = 1.0
    for k in range(1, 60):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        term = u / zeta ** k
        if term > last:
            break
        s_u += (-1) ** k * term
        s_v += (-1) ** k * v / zeta ** k
        last = term
        if term < 1e-17:
            break
    pref = math.exp(-zeta) / (2 * math.sqrt(math.pi))
    return pref * s_u / z ** 0.25, -pref * z ** 0.25 * s_v


def _airy_oscillatory(x: float):
    """Ai(-x), Ai'(-x) for large x > 0 from the oscillatory asymptotic series.

    Returns the values at z = -x; the derivative is with respect to z.
    """
    zeta = 2.0 / 3.0 * x ** 1.5
    # sums over even / odd k of (-1)^(k//2) c_k zeta^-k for c = u and c = v
    u_even = v_even = 1.0
    u_odd = v_odd = 0.0
    u = 1.0
    last = 1.0
    for k in range(1, 80):
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        term = u / zeta ** k
        if term > last:
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            u_odd += sign * term
            v_odd += sign * v / zeta ** k
        else:
            u_even += sign * term
            v_even += sign * v / zeta ** k
        last = term
        if term < 1e-17:
            break
    c, s_ = math.cos(zeta - math.pi / 4), math.sin(zeta - math.pi / 4)
    pref = 1.0 / math.sqrt(math.pi)
    ai = pref * x ** -0.25 * (c * u_even + s_ * u_odd)
    # d/dz Ai(z) at z = -x
    aip = pref * x ** 0.25 * (s_ * v_even - c * v_odd)
    return ai, aip


def _airy_taylor(z_from: float, y_from, z_to: float):
    """Carry (Ai, Ai') from z_from to z_to with Taylor steps of y'' = z y.

    The coefficients obey (n+2)(n+1) a_{n+2} = z0 a_n + a_{n-1}; steps are at
    most 1 long so the series converges in a few dozen terms.
    """
    y, yp = float(y_from[0]), float(y_from[1])
    z = float(z_from)
    while z != z_to:
        h = max(-1.0, min(1.0, z_to - z))
        a = [y, yp]
        val, der = y + yp * h, yp
        hp = h  # h**(n-1) for the derivative sum
        n = 0
        while True:
            prev = a[n - 1] if n >= 1 else 0.0
            a.append((z * a[n] + prev) / ((n + 2) * (n + 1)))
            m = n + 2
            term = a[m] * h ** m
            dterm = m * a[m] * hp
            val += term
            der += dterm
            hp *= h
            n += 1
            if n > 4 and abs(term) + abs(dterm) < 1e-18 * (abs(val) + abs(der)):
                break
            if n > 200:
                break
        y, yp = val, der
        z = z + h if abs(z_to - z - h) > 1e-15 else z_to
    return y, yp


def _airy_scalar(z: float):
    if abs(z) <= _SERIES_RADIUS:
        return _airy_maclaurin(z)
    if z >= _ASYMPTOTIC_START:
        return _airy_asymptotic(z)
    if z > 0:
        return _airy_taylor(_ASYMPTOTIC_START, _airy_asymptotic(_ASYMPTOTIC_START), z)
    if z <= -_ASYMPTOTIC_START:
        return _airy_oscillatory(-z)
    return _airy_taylor(-_ASYMPTOTIC_START, _airy_oscillatory(_ASYMPTOTIC_START), z)


def airy(z):
    """Return (Ai(z), Ai'(z))."""
    if np.ndim(z) == 0:
        return _airy_scalar(float(z))
    z = np.asarray(z, dtype=float)
    out = np.array([_airy_scalar(v) for v in z.ravel()]).reshape(z.shape + (2,))
    return out[..., 0], out[..., 1]


def _bessel_i_scalar(nu: float, z: float) -> float:
    if z <= 0:
        raise DomainError("bessel_i needs z > 0")
    if nu < 0 and float(nu).is_integer():
        nu = -nu
    half = 0.5 * z
    term = half ** nu / _gamma_scalar(nu + 1.0)
    total = term
    q = half * half
    for k in range(0, 1000):
        term *= q / ((k + 1) * (k + nu + 1))
        total += term
        if abs(term) < 1e-17 * abs(total) and k > nu:
            break
    return total


def bessel_i(nu, z):
    """Modified Bessel function of the first kind by its ascending series."""
    if np.ndim(z) == 0 and np.ndim(nu) == 0:
        return _bessel_i_scalar(float(nu), float(z))
    return np.vectorize(_bessel_i_scalar, otypes=[float])(nu, z)
