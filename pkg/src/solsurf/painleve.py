"""Painleve P1-P3: right-hand sides, integration and closed-form solutions."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import BPoly

from . import ode
from .errors import NearAiryZero, SingularInput
from .jets import t_series
from .special import airy

EQUATIONS = ("P1", "P2", "P3")
POLE_THRESHOLD = 1e8
AIRY_SCALE = 2.0 ** (-1.0 / 3.0)


@dataclass(frozen=True)
class PainleveParams:
    equation: str
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"unknown equation {self.equation!r}")

    @property
    def degenerate_p3(self) -> bool:
        return self.equation == "P3" and self.gamma == 0 and self.delta == 0

    @property
    def flags(self) -> list[str]:
        out = []
        if self.degenerate_p3:
            out.append("degenerate P3 (gamma = delta = 0)")
        if self.equation == "P3" and self.beta == 0 and self.delta == 0:
            out.append("P3 with beta = delta = 0 (R1 regime)")
        if self.equation == "P3" and self.alpha == 0 and self.gamma == 0:
            out.append("P3 with alpha = gamma = 0 (R2 regime)")
        return out


@dataclass(frozen=True)
class PainleveState:
    t: float
    x: float
    x_t: float


def rhs_expr(params: PainleveParams, t, x, xt):
    """x_tt as an expression; accepts floats, arrays or jets."""
    eq = params.equation
    if eq == "P1":
        return 6 * x * x + t
    if eq == "P2":
        return 2 * x * x * x + t * x - params.alpha
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta
    return xt * xt / x - xt / t + (a * x * x + b) / t + g * x * x * x + d / x


def check_state(params: PainleveParams, t, x, strict: bool = True) -> None:
    """Reject singular inputs.

    P2 itself is regular at t = 0; ``strict`` keeps the conservative rule of
    the checked ``rhs`` entry point, the integrator passes strict=False.
    """
    singular_t = ("P2", "P3") if strict else ("P3",)
    if params.equation in singular_t and np.any(np.asarray(t) == 0):
        raise SingularInput(f"{params.equation} right-hand side is singular at t = 0")
    if params.equation == "P3" and np.any(np.asarray(x) == 0):
        raise SingularInput("P3 right-hand side is singular at x = 0")


def rhs(params: PainleveParams, state: PainleveState) -> float:
    check_state(params, state.t, state.x)
    return float(rhs_expr(params, state.t, state.x, state.x_t))


def third_derivative(params: PainleveParams, t, x, xt, xtt=None):
    """x_ttt along a solution, by differentiating the right-hand side once."""
    if xtt is None:
        xtt = rhs_expr(params, t, x, xt)
    o = (1, 0, 0)
    T = t_series([t, 1.0], o)
    X = t_series([x, xt], o)
    Xt = t_series([xt, xtt], o)
    return rhs_expr(params, T, X, Xt).deriv(1)


class Host:
    """Anything that can report (x, x_t) of an on-shell solution at given t."""

    params: PainleveParams
    t_range: tuple[float, float]

    def state(self, t):
        raise NotImplementedError

    def xtt(self, t):
        x, xt = self.state(t)
        return rhs_expr(self.params, np.asarray(t, dtype=float), x, xt)


@dataclass
class Trajectory(Host):
    t: np.ndarray
    x: np.ndarray
    x_t: np.ndarray
    params: PainleveParams
    pole_flag: float | None = None
    _interp: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def t_range(self):
        return (float(min(self.t[0], self.t[-1])), float(max(self.t[0], self.t[-1])))

    def _build(self):
        order = np.argsort(self.t)
        t = self.t[order]
        x, xt = self.x[order], self.x_t[order]
        xtt = rhs_expr(self.params, t, x, xt)
        xttt = third_derivative(self.params, t, x, xt, xtt)
        px = BPoly.from_derivatives(t, np.stack([x, xt, xtt], axis=1))
        pxt = BPoly.from_derivatives(t, np.stack([xt, xtt, xttt], axis=1))
        self._interp = (px, pxt)

    def state(self, t):
        """Dense output by quintic Hermite interpolation between samples."""
        if len(self.t) < 2:
            if np.all(np.asarray(t) == self.t[0]):
                return np.broadcast_to(self.x[0], np.shape(t)) * 1.0, np.broadcast_to(self.x_t[0], np.shape(t)) * 1.0
            raise ValueError("single-sample trajectory has no dense output")
        lo, hi = self.t_range
        tt = np.asarray(t, dtype=float)
        if np.any(tt < lo - 1e-12) or np.any(tt > hi + 1e-12):
            raise ValueError(f"t outside trajectory range [{lo}, {hi}]")
        if self._interp is None:
            self._build()
        px, pxt = self._interp
        return px(tt), pxt(tt)

    def to_csv(self, path) -> None:
        write_columns(path, ("t", "x", "x_t"), (self.t, self.x, self.x_t))


def write_columns(path, header, columns) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([format(float(v), ".17g") for v in row])


def integrate(params: PainleveParams, initial: PainleveState, t_end: float, tol: float = 1e-10,
              atol: float = 1e-12, t_eval=None) -> Trajectory:
    """Adaptive integration; stops early (pole_flag set) once |x| or |x_t| > 1e8."""
    check_state(params, initial.t, initial.x, strict=False)
    if params.equation == "P3" and min(initial.t, t_end) <= 0 <= max(initial.t, t_end):
        raise SingularInput("integration interval crosses t = 0")

    def f(t, y):
        return np.array([y[1], rhs_expr(params, t, y[0], y[1])])

    def stop(t, y):
        return bool(abs(y[0]) > POLE_THRESHOLD or abs(y[1]) > POLE_THRESHOLD or not np.all(np.isfinite(y)))

    sol = ode.solve(f, initial.t, [initial.x, initial.x_t], t_end, rtol=tol, atol=atol,
                    t_eval=t_eval, stop=stop)
    pole = float(sol.t[-1]) if sol.stopped else None
    return Trajectory(sol.t, sol.y[:, 0].copy(), sol.y[:, 1].copy(), params, pole)


# closed-form solutions ------------------------------------------------------

def rational_p2(n: int, t) -> PainleveState:
    """Rational P2 solutions: n = 1 (alpha = 1) and n = 2 (alpha = 2).

    With x_tt = 2x^3 + tx - alpha the alpha = 2 member is
    x = 2(t^3 - 2)/(t(t^3 + 4)); its negative solves alpha = -2.
    """
    t = float(t)
    if n == 1:
        if t == 0:
            raise SingularInput("x = 1/t is singular at t = 0")
        return PainleveState(t, 1.0 / t, -1.0 / t ** 2)
    if n == 2:
        den = t ** 3 + 4
        if t == 0 or abs(den) < 1e-14:
            raise SingularInput("rational alpha=2 solution singular at t = 0 or t^3 = -4")
        x = 2 * (t ** 3 - 2) / (t * den)
        xt = -2 * (t ** 6 - 16 * t ** 3 - 8) / (t ** 2 * den ** 2)
        return PainleveState(t, x, xt)
    raise ValueError("n must be 1 or 2")


def airy_p2(epsilon: int, t) -> PainleveState:
    """Airy-type P2 solution x = -eps d/dt ln Ai(-2^{-1/3} t), with alpha = -eps/2.

    x_t is taken from the first-order relation x_t = eps x^2 + eps t / 2.
    """
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    t = float(t)
    ai, aip = airy(-AIRY_SCALE * t)
    if abs(ai) < 1e-12:
        raise NearAiryZero(f"Ai vanishes near t = {t}")
    x = epsilon * AIRY_SCALE * aip / ai
    return PainleveState(t, x, epsilon * x * x + epsilon * t / 2)


class RationalP2Host(Host):
    def __init__(self, n: int, t_range=(-np.inf, np.inf)):
        self.n = n
        self.params = PainleveParams("P2", alpha=float(n))
        self.t_range = t_range

    def state(self, t):
        t = np.asarray(t, dtype=float)
        if self.n == 1:
            if np.any(t == 0):
                raise SingularInput("t = 0")
            return 1.0 / t, -1.0 / t ** 2
        den = t ** 3 + 4
        if np.any(t == 0) or np.any(np.abs(den) < 1e-14):
            raise SingularInput("singular point of the rational solution")
        return 2 * (t ** 3 - 2) / (t * den), -2 * (t ** 6 - 16 * t ** 3 - 8) / (t ** 2 * den ** 2)


class AiryP2Host(Host):
    def __init__(self, epsilon: int, t_range=(-np.inf, np.inf)):
        self.epsilon = epsilon
        self.params = PainleveParams("P2", alpha=-epsilon / 2)
        self.t_range = t_range

    def state(self, t):
        t = np.asarray(t, dtype=float)
        ai, aip = airy(-AIRY_SCALE * t)
        if np.any(np.abs(ai) < 1e-12):
            raise NearAiryZero("Ai vanishes on the requested range")
        x = self.epsilon * AIRY_SCALE * aip / ai
        return x, self.epsilon * x * x + self.epsilon * t / 2
