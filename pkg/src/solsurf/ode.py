"""Dormand-Prince 5(4) integrator with PI step-size control.

The state may be any real or complex ndarray.  Entries that go non-finite
are excluded from the error norm, which lets
a batch of independent systems keep running after some members overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StepSizeUnderflow

# Butcher tableau (Dormand & Prince 1980).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

MIN_STEP = 1e-13


@dataclass
class OdeSolution:
    t: np.ndarray          # accepted times, including every requested output time
    y: np.ndarray          # states, shape (len(t),) + y0.shape
    t_eval_index: np.ndarray  # positions of the requested output times in t
    stopped: bool          # True if the stop predicate ended the run early
    nfev: int


def _step(f, t, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks) if a != 0.0)
        ks.append(f(t + _C[i] * h, yi))
    y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y_new, err, ks[6]


def _err_norm(err, y, y_new, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    r = np.abs(err) / sc
    r = r[np.isfinite(r)]
    return float(r.max()) if r.size else 0.0


def solve(f, t0, y0, t_end, *, rtol=1e-10, atol=1e-12, t_eval=None, h0=None,
          max_step=np.inf, stop=None, fixed_step=None, max_steps=1_000_000) -> OdeSolution:
    """Integrate y' = f(t, y) from t0 to t_end (either direction).

    ``t_eval`` points are hit exactly by shortening steps.  ``stop(t, y)``
    returning True on a freshly computed step ends the run before that step is
    accepted.  ``fixed_step`` disables adaptivity (used for order checks).
    """
    y0 = np.asarray(y0)
    if not np.iscomplexobj(y0):
        y0 = y0.astype(float)
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    if t_eval is None:
        targets = np.array([t_end], dtype=float)
    else:
        targets = np.asarray(t_eval, dtype=float)
        targets = targets[np.argsort(direction * targets, kind="stable")]
        if targets.size and direction * (targets[-1] - t_end) > 1e-12 * max(1.0, abs(t_end)):
            raise ValueError("t_eval extends beyond t_end")
    ts, ys, hit = [t0], [y0.copy()], []
    tgt = 0
    while tgt < len(targets) and abs(targets[tgt] - t0) <= 1e-14 * max(1.0, abs(t0)):
        hit.append(0)
        tgt += 1
    if span == 0.0 or tgt == len(targets):
        return OdeSolution(np.array(ts), np.array(ys), np.array(hit, dtype=int), False, 0)

    t, y = float(t0), y0.copy()
    k1 = f(t, y)
    nfev = 1
    if fixed_step is not None:
        h = abs(fixed_step)
    elif h0 is not None:
        h = abs(h0)
    else:
        d0 = np.nanmax(np.abs(y)) if y.size else 0.0
        d1 = np.nanmax(np.abs(k1)) if y.size else 0.0
        h = 0.01 * max(d0, 1e-5) / max(d1, 1e-5)
        h = min(h, span, 0.1)
    h = min(h, max_step)
    err_prev = 1.0
    stopped = False
    n = 0
    while tgt < len(targets):
        n += 1
        if n > max_steps:
            raise StepSizeUnderflow("step budget exhausted")
        remaining = abs(targets[tgt] - t)
        clipped = h >= remaining
        h_try = remaining if clipped else h
        y_new, err, k_last = _step(f, t, y, direction * h_try, k1)
        nfev += 6
        if fixed_step is not None:
            en = 0.0
        else:
            en = _err_norm(err, y, y_new, rtol, atol)
            if not np.isfinite(en):
                en = 1e10
        if en <= 1.0:
            if stop is not None and stop(t + direction * h_try, y_new):
                stopped = True
                break
            t = targets[tgt] if clipped else t + direction * h_try
            y = y_new
            k1 = k_last
            ts.append(t)
            ys.append(y.copy())
            if clipped:
                hit.append(len(ts) - 1)
                tgt += 1
            if fixed_step is None:
                fac = 0.9 * max(en, 1e-10) ** (-0.7 / 5) * err_prev ** (0.4 / 5)
                fac = min(5.0, max(0.2, fac))
                err_prev = max(en, 1e-4)
                if not clipped or fac < 1.0:
                    h = min(h * fac, max_step)
        else:
            fac = max(0.2, 0.9 * en ** (-1 / 5))
            h = h_try * fac
            if h < MIN_STEP:
                raise StepSizeUnderflow(f"step {h:.2e} below {MIN_STEP:g} at t={t:.15g}")
    return OdeSolution(np.array(ts), np.array(ys), np.array(hit, dtype=int), stopped, nfev)
