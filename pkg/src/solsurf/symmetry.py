"""Deformation matrices (A, B), gauge characteristics and determining equations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

from . import algebra, ode
from .errors import MissingRSolution, WrongParameterRegime
from .jets import Jet
from .laxpair import LaxPair, LaxPoint, point_jets, u1, u2
from .painleve import AIRY_SCALE, Host, PainleveParams, PainleveState, Trajectory, rhs_expr, write_columns
from .special import airy, bessel_i


@dataclass(frozen=True)
class SymmetryChoice:
    """Weights of the six-term combination.

    ``r`` multiplies the alpha1 family (A = D_t(r U1), B = r D_t U2) and
    ``s`` the alpha2 family (A = s D_lam U1, B = D_lam(s U2)).  Both are
    plain callables; they receive jets, so their derivatives come for free.
    """

    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    alpha5: float = 0.0
    alpha6: float = 0.0
    r: Callable | None = None
    s: Callable | None = None

    def __post_init__(self):
        if not any(self.alphas):
            raise ValueError("at least one alpha coefficient must be nonzero")

    @property
    def alphas(self):
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4, self.alpha5, self.alpha6)

    @classmethod
    def single(cls, k: int, **kw) -> "SymmetryChoice":
        return cls(**{f"alpha{k}": 1.0}, **kw)


# characteristic R of a generalized symmetry ------------------------------

@dataclass
class RSolution:
    """R and D_t R along a host, either sampled or in closed form."""

    t: np.ndarray
    R: np.ndarray
    R_t: np.ndarray
    params: PainleveParams
    host: Host | None = None
    tag: str | None = None
    closed_form: Callable | None = field(default=None, repr=False)
    _interp: object = field(default=None, repr=False)

    def at(self, t):
        t = np.asarray(t, dtype=float)
        if self.closed_form is not None:
            return self.closed_form(t)
        if self._interp is None:
            order = np.argsort(self.t)
            ts = self.t[order]
            R, Rt = self.R[order], self.R_t[order]
            x, xt = self.host.state(ts)
            Rtt = linearized_rhs(self.params, ts, x, xt, R, Rt)
            self._interp = (BPoly.from_derivatives(ts, np.stack([R, Rt, Rtt], axis=1)),
                            BPoly.from_derivatives(ts, np.stack([Rt, Rtt], axis=1)))
        pR, pRt = self._interp
        return pR(t), pRt(t)

    def to_csv(self, path) -> None:
        write_columns(path, ("t", "R", "R_t"), (self.t, self.R, self.R_t))


def linearized_rhs(params: PainleveParams, t, x, xt, R, Rt):
    """f_x R + f_{x_t} R_t, the right-hand side of the determining equation."""
    shape = np.broadcast_shapes(np.shape(t), np.shape(x), np.shape(R))
    gx = np.zeros((1, 1, 2) + shape)
    gx[0, 0, 0], gx[0, 0, 1] = x, R
    gxt = np.zeros_like(gx)
    gxt[0, 0, 0], gxt[0, 0, 1] = xt, Rt
    F = rhs_expr(params, np.broadcast_to(t, shape), Jet.from_grid(gx), Jet.from_grid(gxt))
    return F.deriv(0, 0, 1)


def solve_determining(params: PainleveParams, host: Host, R0: float, Rt0: float, t_eval=None,
                      tol: float = 1e-10, atol: float = 1e-12) -> RSolution:
    """Integrate the linearization about ``host`` from t_eval[0] over t_eval.

    With a Trajectory host and no t_eval, the host's own samples are used.
    """
    if t_eval is None:
        if not isinstance(host, Trajectory):
            raise ValueError("t_eval is required for closed-form hosts")
        t_eval = host.t
    t_eval = np.asarray(t_eval, dtype=float)
    t0 = float(t_eval[0])

    def f(t, y):
        x, xt = host.state(t)
        return np.array([y[1], linearized_rhs(params, t, x, xt, y[0], y[1])])

    R = np.empty_like(t_eval)
    Rt = np.empty_like(t_eval)
    for side in (t_eval >= t0, t_eval < t0):
        ts = t_eval[side]
        if ts.size == 0:
            continue
        end = ts.max() if ts.max() > t0 else ts.min()
        if end == t0:
            R[side], Rt[side] = R0, Rt0
            continue
        sol = ode.solve(f, t0, [R0, Rt0], end, rtol=tol, atol=atol, t_eval=ts)
        ys = sol.y[sol.t_eval_index]
        order = np.argsort(np.argsort(ts * (1 if end > t0 else -1)))
        R[side] = ys[order, 0]
        Rt[side] = ys[order, 1]
    return RSolution(t_eval, R, Rt, params, host=host)


def bessel_r(t) -> tuple:
    """R = sqrt(t) I_{5/3}(2 t^{3/2} / 3) for the alpha = 1 rational P2 host."""
    t = np.asarray(t, dtype=float)
    nu = 5.0 / 3.0
    z = 2.0 / 3.0 * t ** 1.5
    i0 = bessel_i(nu, z)
    di = 0.5 * (bessel_i(nu - 1, z) + bessel_i(nu + 1, z))
    return np.sqrt(t) * i0, i0 / (2 * np.sqrt(t)) + t * di


def airy_r(epsilon: int):
    """R = Ai(-2^{-1/3} t)^{-2}, which obeys D_t R = 2 eps x R on the Airy host."""

    def f(t):
        t = np.asarray(t, dtype=float)
        ai, aip = airy(-AIRY_SCALE * t)
        return ai ** -2.0, 2 * AIRY_SCALE * aip / ai ** 3

    return f


def p3_point_symmetry(which: str, state: PainleveState, params: PainleveParams):
    """(R, D_t R) for R1 = x + t x_t (beta = delta = 0) or R2 = x - t x_t (alpha = gamma = 0)."""
    if params.equation != "P3":
        raise WrongParameterRegime("point symmetries R1/R2 belong to P3")
    t, x, xt = state.t, state.x, state.x_t
    xtt = rhs_expr(params, t, x, xt)
    if which == "R1":
        if params.beta != 0 or params.delta != 0:
            raise WrongParameterRegime("R1 needs beta = delta = 0")
        return x + t * xt, 2 * xt + t * xtt
    if which == "R2":
        if params.alpha != 0 or params.gamma != 0:
            raise WrongParameterRegime("R2 needs alpha = gamma = 0")
        return x - t * xt, -t * xtt
    raise ValueError(f"unknown point symmetry {which!r}")


def closed_form_r(tag: str, params: PainleveParams, host: Host | None = None, epsilon: int = 1) -> RSolution:
    """RSolution backed by one of the closed forms."""
    if tag == "BesselAlpha1":
        fn = bessel_r
    elif tag == "AiryEps":
        fn = airy_r(epsilon)
    elif tag in ("P3ScaleR1", "P3ScaleR2"):
        which = "R1" if tag.endswith("R1") else "R2"
        p3_point_symmetry(which, PainleveState(1.0, 1.0, 0.0), params)  # regime check

        def fn(t):
            x, xt = host.state(t)
            xtt = rhs_expr(params, t, x, xt)
            if which == "R1":
                return x + t * xt, 2 * xt + t * xtt
            return x - t * xt, -t * xtt
    else:
        raise ValueError(f"unknown closed form {tag!r}")
    empty = np.zeros(0)
    return RSolution(empty, empty, empty, params, host=host, tag=tag, closed_form=fn)


# deformation matrices -----------------------------------------------------

def tangent_jets(pair: LaxPair, choice: SymmetryChoice, p: LaxPoint, r_data: RSolution | None = None,
                 extra=(1, 1)):
    """(A, B) as matrix jets carrying ``extra`` further orders in (t, lam).

    The point is used as given (off-shell points are allowed for the
    alpha1..alpha5 terms).
    """
    a1, a2, a3, a4, a5, a6 = choice.alphas
    R = None
    if a6:
        if r_data is None:
            raise MissingRSolution("alpha6 term needs an R solution")
        R = r_data.at(p.t)
    n_t = extra[0] + (2 if a5 else 1)
    n_l = extra[1] + 1
    order = (n_t, n_l, 1 if a6 else 0)
    T, Lam, X, Xt = point_jets(pair, p, order, R)
    U1 = pair.u1_expr(T, Lam, X, Xt)
    U2 = pair.u2_expr(T, Lam, X, Xt)
    A = B = None

    def acc(cur, term):
        return term if cur is None else cur + term

    if a1:
        r = choice.r(T) if choice.r is not None else None
        if r is None:
            A, B = acc(A, a1 * U1.dt()), acc(B, a1 * U2.dt())
        else:
            A, B = acc(A, a1 * (r * U1).dt()), acc(B, a1 * (r * U2.dt()))
    if a2:
        s = choice.s(Lam) if choice.s is not None else None
        if s is None:
            A, B = acc(A, a2 * U1.dl()), acc(B, a2 * U2.dl())
        else:
            A, B = acc(A, a2 * (s * U1.dl())), acc(B, a2 * (s * U2).dl())
    if a3:
        A = acc(A, a3 * (T * U1.dt() + U1))
        B = acc(B, a3 * (T * U2.dt()))
    if a4:
        A = acc(A, a4 * (Lam * U1.dl()))
        B = acc(B, a4 * (Lam * U2.dl() + U2))
    if a5:
        U1t = U1.dt()
        A = acc(A, a5 * (U1t.dt() + algebra.commutator(U1t, U1)))
        B = acc(B, a5 * (U2.dt().dt() + algebra.commutator(U2.dt(), U1)))
    if a6:
        A = acc(A, a6 * U1.de())
        B = acc(B, a6 * U2.de())
    keep = (extra[0], extra[1], 0)
    return A.truncate(keep), B.truncate(keep)


def build_AB(pair: LaxPair, choice: SymmetryChoice, p: LaxPoint, r_data: RSolution | None = None):
    """Numeric (A, B) at p; x_tt is taken from the equation when alpha5/alpha6 are used."""
    if (choice.alpha5 or choice.alpha6) and not p.on_shell:
        p = LaxPoint(p.t, p.lam, p.x, p.x_t)
    A, B = tangent_jets(pair, choice, p, r_data, extra=(0, 0))
    return A.value, B.value


def gauge_characteristics(S: Callable, pair: LaxPair, p: LaxPoint, extra=(1, 1)):
    """Q1 = D_t S + [S, U1], Q2 = D_lam S + [S, U2] as jets.

    ``S(t, lam, x, x_t)`` must be written with generic arithmetic (it is
    evaluated on jets).  Use ``.value`` for the matrices themselves.
    """
    order = (extra[0] + 1, extra[1] + 1, 0)
    T, Lam, X, Xt = point_jets(pair, p, order)
    U1 = pair.u1_expr(T, Lam, X, Xt)
    U2 = pair.u2_expr(T, Lam, X, Xt)
    Sj = S(T, Lam, X, Xt)
    if not isinstance(Sj, Jet):
        Sj = Jet.const(np.broadcast_to(np.asarray(Sj, dtype=complex), U1.batch), order, is_mat=True)
    Q1 = Sj.dt() + algebra.commutator(Sj, U1)
    Q2 = Sj.dl() + algebra.commutator(Sj, U2)
    keep = (extra[0], extra[1], 0)
    return Q1.truncate(keep), Q2.truncate(keep)


def deformation_residual(pair: LaxPair, p: LaxPoint, A, B, A_lam=None, B_t=None) -> np.ndarray:
    """D_lam A - D_t B + [A, U2] + [U1, B] at an on-shell point.

    A and B are either matrix jets (derivatives read off them) or plain
    matrices together with their total derivatives ``A_lam`` and ``B_t``.
    """
    if isinstance(A, Jet):
        A_lam, A = A.deriv(0, 1), A.value
    if isinstance(B, Jet):
        B_t, B = B.deriv(1, 0), B.value
    if A_lam is None or B_t is None:
        raise ValueError("total derivatives of A and B are required")
    U1, U2 = u1(pair, p), u2(pair, p)
    return A_lam - B_t + algebra.commutator(A, U2) + algebra.commutator(U1, B)


def residual_scale(pair: LaxPair, p: LaxPoint, A, B) -> np.ndarray:
    """Magnitude of the largest term entering the deformation residual."""
    a = A.value if isinstance(A, Jet) else A
    b = B.value if isinstance(B, Jet) else B
    U1, U2 = u1(pair, p), u2(pair, p)
    m = lambda M: np.max(np.abs(M), axis=(-2, -1))  # noqa: E731
    return np.maximum.reduce([np.ones_like(m(a)), m(a) * m(U2), m(b) * m(U1), m(a), m(b)])


def q5_identity(pair: LaxPair, p: LaxPoint) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the alpha5 identity at an off-shell point.

    Returns (residual of the alpha5 pair, D_t^2 Z + [D_t Z, U1] - [Z, D_t U1])
    with Z the zero-curvature residual.
    """
    choice = SymmetryChoice(alpha5=1.0)
    A, B = tangent_jets(pair, choice, p)
    T, Lam, X, Xt = point_jets(pair, p, (3, 1, 0))
    U1 = pair.u1_expr(T, Lam, X, Xt)
    U2 = pair.u2_expr(T, Lam, X, Xt)
    Z = U1.dl() - U2.dt() + algebra.commutator(U1, U2)  # order (2, 0)
    Zt = Z.dt()
    rhs = Zt.dt().value + algebra.commutator(Zt.value, U1.value) - algebra.commutator(Z.value, U1.dt().value)
    U1v, U2v = U1.value, U2.value
    lhs = A.deriv(0, 1) - B.deriv(1, 0) + algebra.commutator(A.value, U2v) + algebra.commutator(U1v, B.value)
    return lhs, rhs

