"""Self-checks run by ``solsurf verify``.

Each check returns a measured value and a bound; a check passes when the
value is finite and does not exceed the bound.  Random inputs come from a
fixed seed so reports are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import algebra
from .frame import GridSpec, immersion_closed_form, immersion_quadrature, integrate_frame, tangent_fields
from .geometry import REGULAR, forms_at, curvatures
from .jets import mat2
from .laxpair import LaxPoint, lax_pair, u2, zcc_residual
from .painleve import PainleveParams, PainleveState, RationalP2Host, integrate, rhs_expr
from .symmetry import (SymmetryChoice, deformation_residual, gauge_characteristics, q5_identity,
                       residual_scale, tangent_jets)

SEED = 20240611
SUITES = ("algebra", "zcc", "symmetry", "frame", "geometry")


@dataclass
class Check:
    name: str
    value: float
    bound: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.bound)

    def line(self) -> str:
        return f"{self.name} {self.value:.3e} {self.bound:.1e} {'PASS' if self.passed else 'FAIL'}"


def _rng():
    return np.random.default_rng(SEED)


def _random_sl2(rng, n):
    return algebra.reconstruct(rng.uniform(-1, 1, (n, 3)))


# algebra -----------------------------------------------------------------

def algebra_checks() -> list[Check]:
    rng = _rng()
    gram = np.array([[algebra.killing(a, b) for b in algebra.BASIS] for a in algebra.BASIS])
    X, Y, Z = (_random_sl2(rng, 200) for _ in range(3))
    g = algebra.mat(*rng.uniform(-1, 1, (4, 200)))
    g = g / np.sqrt(np.abs(algebra.det(g)))[:, None, None]
    g[algebra.det(g).real < 0] = g[algebra.det(g).real < 0] @ algebra.E1
    direct = 0.5 * np.real(algebra.trace(X @ Y))
    c = algebra.commutator
    jac = c(X, c(Y, Z)) + c(Y, c(Z, X)) + c(Z, c(X, Y))
    inv = algebra.inverse(g)
    return [
        Check("algebra.killing_basis_gram", float(np.abs(gram - algebra.METRIC).max()), 1e-14),
        Check("algebra.killing_trace_formula", float(np.abs(algebra.killing(X, Y) - direct).max()), 1e-13),
        Check("algebra.killing_components", float(np.abs(
            algebra.killing_components(algebra.decompose(X), algebra.decompose(Y)) - direct).max()), 1e-13),
        Check("algebra.ad_invariance", float(np.abs(
            algebra.killing(c(X, Y), Z) + algebra.killing(Y, c(X, Z))).max()), 1e-13),
        Check("algebra.conjugation_invariance", float(np.abs(
            algebra.killing(inv @ X @ g, inv @ Y @ g) - algebra.killing(X, Y)).max()), 1e-11),
        Check("algebra.jacobi", float(np.abs(jac).max()), 1e-13),
        Check("algebra.decompose_roundtrip", float(np.abs(
            algebra.reconstruct(algebra.decompose(X)) - X).max()), 1e-15),
    ]


# zero curvature ------------------------------------------------------------

def _p3_consistent_points(rng, n, on_shell):
    """Admissible P3 points with gamma in {0, 1}, delta in {0, -1}."""
    out = []
    for _ in range(n):
        prm = PainleveParams("P3", *rng.uniform(-1, 1, 2), float(rng.integers(0, 2)), -float(rng.integers(0, 2)))
        while True:
            t, lam, x, xt, xtt = rng.uniform(-2, 2, 5)
            if min(abs(t), abs(lam), abs(x), abs(lam * lam + prm.gamma * prm.delta)) > 0.1:
                break
        out.append((prm, LaxPoint(t, lam, x, xt, None if on_shell else xtt)))
    return out


def zcc_checks(n: int = 300) -> list[Check]:
    rng = _rng()
    p1 = lax_pair(PainleveParams("P1"))
    t, lam, x, xt, xtt = rng.uniform(-2, 2, (5, n))
    Z = zcc_residual(p1, LaxPoint(t, lam, x, xt, xtt))
    expect = (xtt - 6 * x ** 2 - t)[:, None, None] * algebra.E1
    p1_err = np.abs(Z - expect).max()
    worst3 = 0.0
    for prm, p in _p3_consistent_points(rng, n, on_shell=False):
        pair = lax_pair(prm)
        Z = zcc_residual(pair, p)
        res = p.x_tt - rhs_expr(prm, p.t, p.x, p.x_t)
        M = res * pair.zcc_factor(p.t, p.lam, p.x, p.x_t)
        worst3 = max(worst3, np.abs(Z - M).max() / max(1.0, np.abs(Z).max(), np.abs(M).max()))
    p2 = lax_pair(PainleveParams("P2", alpha=0.7))
    lam = rng.uniform(0.1, 2, n) * rng.choice([-1, 1], n)
    Z = zcc_residual(p2, LaxPoint(t, lam, x, xt))
    sc = np.maximum(1.0, np.abs(u2(p2, LaxPoint(t, lam, x, xt))).max(axis=(-2, -1)))
    return [
        Check("zcc.p1_factorization", float(p1_err), 1e-10),
        Check("zcc.p3_factorization_consistent_family", float(worst3), 1e-9),
        Check("zcc.p2_on_shell", float((np.abs(Z).max(axis=(-2, -1)) / sc).max()), 1e-10),
    ]


# deformations ----------------------------------------------------------------

def _on_shell_samples(rng, n):
    """(pair, point) batches for P1, P2 and a consistent P3."""
    t, x, xt = rng.uniform(-2, 2, (3, n))
    lam = rng.uniform(0.2, 2, n) * rng.choice([-1, 1], n)
    yield "P1", lax_pair(PainleveParams("P1")), LaxPoint(t, lam, x, xt)
    yield "P2", lax_pair(PainleveParams("P2", alpha=0.7)), LaxPoint(t, lam, x, xt)
    prm = PainleveParams("P3", 0.3, -0.6, 1.0, -1.0)
    tt = rng.uniform(0.2, 2, n) * rng.choice([-1, 1], n)
    xx = rng.uniform(0.2, 2, n) * rng.choice([-1, 1], n)
    ll = rng.uniform(1.2, 2, n) * rng.choice([-1, 1], n)
    yield "P3", lax_pair(prm), LaxPoint(tt, ll, xx, xt)


def _scaled_residual(pair, p, A, B):
    res = deformation_residual(pair, p, A, B)
    return float((np.abs(res).max(axis=(-2, -1)) / residual_scale(pair, p, A, B)).max())


def symmetry_checks(n: int = 50, combos: int = 20) -> list[Check]:
    rng = _rng()
    out = []
    r = lambda T: T * T + 1.5  # noqa: E731
    s = lambda L: L * L * L - L  # noqa: E731
    for eq, pair, p in _on_shell_samples(rng, n):
        singles = max(_scaled_residual(pair, p, *tangent_jets(pair, SymmetryChoice.single(k, r=r, s=s), p))
                      for k in range(1, 6))
        out.append(Check(f"symmetry.{eq}_single_alpha", singles, 1e-8))
        worst = 0.0
        for _ in range(combos):
            ch = SymmetryChoice(*rng.uniform(-1, 1, 5), r=r, s=s)
            worst = max(worst, _scaled_residual(pair, p, *tangent_jets(pair, ch, p)))
        out.append(Check(f"symmetry.{eq}_combinations", worst, 1e-8))
        worst = 0.0
        for _ in range(combos):
            a = rng.uniform(-1, 1, 6)

            def S(T, L, X, Xt, a=a):
                e11 = a[0] * T * L + a[1] * X
                return mat2(e11, a[2] * L * L + a[3] * Xt, a[4] * T + a[5] * X * L, -1 * e11)

            worst = max(worst, _scaled_residual(pair, p, *gauge_characteristics(S, pair, p)))
        out.append(Check(f"symmetry.{eq}_gauge", worst, 1e-8))
    t, lam, x, xt, xtt = rng.uniform(-2, 2, (5, n))
    pair = lax_pair(PainleveParams("P1"))
    lhs, rhs = q5_identity(pair, LaxPoint(t, lam, x, xt, xtt, higher=tuple(rng.uniform(-2, 2, (2, n)))))
    out.append(Check("symmetry.alpha5_identity_off_shell", float(
        (np.abs(lhs - rhs).max(axis=(-2, -1)) / np.maximum(1, np.abs(rhs).max(axis=(-2, -1)))).max()), 1e-10))
    return out


# frame and immersion -----------------------------------------------------------

def _p1_setup(n=50):
    prm = PainleveParams("P1")
    host = integrate(prm, PainleveState(0.0, 0.5, 0.0), 1.2)
    grid = GridSpec(0.0, 1.0, n, -1.0, 1.0, n, base_t=0.5, base_lam=0.0)
    return lax_pair(prm), host, grid


def frame_checks() -> list[Check]:
    pair, host, grid = _p1_setup()
    fr = integrate_frame(pair, host, grid)
    fr2 = integrate_frame(pair, host, grid, path="lam_first")
    ch = SymmetryChoice.single(1)
    cf = immersion_closed_form(fr, pair, ch)
    A, B, dA, dB, worst = tangent_fields(fr, pair, ch)
    q = immersion_quadrature(fr, A, B, dA, dB)
    ib, jb = fr.bases[0]
    p2 = lax_pair(PainleveParams("P2", alpha=1.0))
    g2 = GridSpec(0.5, 2.0, 16, 0.5, 2.0, 16, base_t=1.0, base_lam=1.0)
    fr_r = integrate_frame(p2, RationalP2Host(1), g2)
    f2 = immersion_closed_form(fr_r, p2, SymmetryChoice.single(2))
    i0, j0 = fr_r.bases[0]
    base_u2 = algebra.decompose(u2(p2, LaxPoint(g2.t_nodes[i0], g2.lam_nodes[j0], 1 / g2.t_nodes[i0],
                                                -1 / g2.t_nodes[i0] ** 2)))
    return [
        Check("frame.det_phi", float(np.nanmax(fr.det_drift)), 1e-8),
        Check("frame.path_consistency", float(np.nanmax(np.abs(fr.phi_nodes - fr2.phi_nodes))), 1e-6),
        Check("frame.quadrature_vs_closed_form_F1", float(np.nanmax(np.abs(q.F - (cf.F - cf.F[ib, jb])))), 1e-6),
        Check("frame.circulation", float(np.nanmax(q.circulation)), 1e-8),
        Check("frame.base_node_equals_U2", float(np.abs(f2.F[i0, j0] - base_u2).max()), 1e-12),
    ]


# geometry ------------------------------------------------------------------------

def geometry_checks() -> list[Check]:
    prm = PainleveParams("P1")
    pair = lax_pair(prm)
    host = integrate(prm, PainleveState(0.0, 0.5, 0.0), 1.2)
    T, L = np.meshgrid(np.linspace(0, 1, 25), np.linspace(-2.5, 0.5, 25), indexing="ij")
    t, lam = T.ravel(), L.ravel()
    x, xt = host.state(t)
    p = LaxPoint(t, lam, x, xt)
    f2 = forms_at(pair, SymmetryChoice.single(2), p)
    K, H = curvatures(f2, strict=False)
    xtt = 6 * x ** 2 + t
    f1 = forms_at(pair, SymmetryChoice.single(1), p)
    f5 = forms_at(pair, SymmetryChoice.single(5), LaxPoint(t, lam, x + 0.3, xt + 0.2))
    p2 = lax_pair(PainleveParams("P2", alpha=1.0))
    host2 = RationalP2Host(1)
    T2, L2 = np.meshgrid(np.linspace(1, 3, 20), np.linspace(0.5, 2, 20), indexing="ij")
    x2, xt2 = host2.state(T2.ravel())
    g2 = forms_at(p2, SymmetryChoice.single(2), LaxPoint(T2.ravel(), L2.ravel(), x2, xt2))
    det_ref = (1.0 / L2.ravel() ** 2 + 4 * x2) ** 2
    return [
        Check("geometry.P1_F2_gauss_curvature_2xtt",
              float(np.nanmax(np.abs(K - 2 * xtt) / np.maximum(1, np.abs(K)))), 1e-6),
        Check("geometry.P1_F2_mean_curvature",
              float(np.nanmax(np.abs(H - 2 * (2 * x + lam)) / np.maximum(1, np.abs(H)))), 1e-6),
        Check("geometry.P1_F2_regular_fraction", float(1 - np.mean(f2.classification == REGULAR)), 0.0),
        Check("geometry.P1_F1_isotropic_tangent", float(np.abs(f1.g11).max()), 1e-12),
        Check("geometry.P1_F5_degenerate_metric", float((np.abs(f5.det_g) / f5.scale ** 2).max()), 1e-9),
        Check("geometry.P2_F2_det_metric", float((np.abs(g2.det_g - det_ref) / g2.scale ** 2).max()), 1e-8),
    ]


REGISTRY: dict[str, Callable[[], list[Check]]] = {
    "algebra": algebra_checks,
    "zcc": zcc_checks,
    "symmetry": symmetry_checks,
    "frame": frame_checks,
    "geometry": geometry_checks,
}


def run(suite: str = "all") -> list[Check]:
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        checks.extend(REGISTRY[name]())
    return checks
