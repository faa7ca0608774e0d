"""Acceptance checks, one test per criterion.

Each test records ``criterion N: <name> <value> <bound> PASS|FAIL`` and the
lines are printed in the terminal summary (see conftest.py), so a plain
``pytest tests/test_acceptance.py`` shows the table.  Bounds are absolute
unless the comment says otherwise; "scaled" residuals divide by
max(1, size of the terms involved).
"""
from __future__ import annotations

import numpy as np
import pytest

from solsurf import algebra
from solsurf.frame import GridSpec, immersion_closed_form, immersion_quadrature, integrate_frame, tangent_fields
from solsurf.geometry import (REGULAR, curvature_evaluator, curvatures, forms_at, surface_geometry, tangent_rank2,
                              umbilic_locus)
from solsurf.jets import mat2
from solsurf.special import bessel_i
from solsurf.laxpair import LaxPoint, lax_pair, u2, zcc_residual
from solsurf.painleve import (AiryP2Host, PainleveParams, PainleveState, RationalP2Host, airy_p2, integrate,
                              rational_p2, rhs_expr, third_derivative)
from solsurf.symmetry import (SymmetryChoice, airy_r, bessel_r, build_AB, closed_form_r, deformation_residual,
                              gauge_characteristics, linearized_rhs, p3_point_symmetry, residual_scale, tangent_jets)

RESULTS: list[str] = []


def record(n: int, name: str, value: float, bound: float) -> bool:
    ok = bool(np.isfinite(value) and value < bound)
    RESULTS.append(f"criterion {n:2d}: {name} {value:.3e} < {bound:.0e} {'PASS' if ok else 'FAIL'}")
    return ok


@pytest.fixture(scope="module")
def gen():
    return np.random.default_rng(7)


@pytest.fixture(scope="module")
def p1_grid(p1_host, p1_pair):
    grid = GridSpec(0.0, 1.0, 50, -1.0, 1.0, 50, base_t=0.5, base_lam=0.0)
    return grid, integrate_frame(p1_pair, p1_host, grid)


def _p3_point(rng, prm):
    """Random (t, lam, x, x_t, x_tt) in [-2, 2]^5 away from t = 0, x = 0 and lam^2 + gamma delta = 0."""
    while True:
        t, lam, x, xt, xtt = rng.uniform(-2, 2, 5)
        if min(abs(t), abs(lam), abs(x), abs(lam * lam + prm.gamma * prm.delta)) > 0.05:
            return LaxPoint(t, lam, x, xt, xtt)


def _p3_factor_error(prm, p):
    pair = lax_pair(prm)
    Z = zcc_residual(pair, p)
    M = (p.x_tt - rhs_expr(prm, p.t, p.x, p.x_t)) * pair.zcc_factor(p.t, p.lam, p.x, p.x_t)
    return np.abs(Z - M).max() / max(1.0, np.abs(Z).max(), np.abs(M).max())


# 1-3: zero curvature ---------------------------------------------------------

def test_c01_p1_zcc_factorization(gen, p1_pair):
    t, lam, x, xt, xtt = gen.uniform(-2, 2, (5, 1000))
    Z = zcc_residual(p1_pair, LaxPoint(t, lam, x, xt, xtt))
    err = np.abs(Z - (xtt - 6 * x ** 2 - t)[:, None, None] * algebra.E1).max()
    assert record(1, "P1 ZCC minus (x_tt-6x^2-t)e1", err, 1e-10)


@pytest.mark.xfail(strict=True, reason="the P3 pair closes only for gamma^2 = gamma and delta^2 = -delta; "
                                       "random (alpha, beta, gamma, delta) leave an x-independent remainder")
def test_c02_p3_zcc_factorization_random_parameters(gen):
    worst = 0.0
    for _ in range(1000):
        prm = PainleveParams("P3", *gen.uniform(-1, 1, 4))
        worst = max(worst, _p3_factor_error(prm, _p3_point(gen, prm)))
    assert record(2, "P3 ZCC vs residual x structure matrix, random params (scaled)", worst, 1e-9)


def test_c02_companion_consistent_family(gen):
    worst = 0.0
    for _ in range(1000):
        prm = PainleveParams("P3", *gen.uniform(-1, 1, 2), float(gen.integers(0, 2)), -float(gen.integers(0, 2)))
        worst = max(worst, _p3_factor_error(prm, _p3_point(gen, prm)))
    assert worst < 1e-9
    RESULTS.append(f"   companion: same check with gamma in {{0,1}}, delta in {{0,-1}} {worst:.3e} < 1e-09 PASS")


def test_c03_p2_on_shell(gen):
    worst = 0.0
    for alpha in gen.uniform(-1, 1, 10):
        pair = lax_pair(PainleveParams("P2", alpha=alpha))
        t, x, xt = gen.uniform(-2, 2, (3, 100))
        lam = gen.uniform(0.05, 2, 100) * gen.choice([-1, 1], 100)
        p = LaxPoint(t, lam, x, xt)
        sc = np.maximum(1.0, np.abs(u2(pair, p)).max(axis=(-2, -1)))
        worst = max(worst, (np.abs(zcc_residual(pair, p)).max(axis=(-2, -1)) / sc).max())
    assert record(3, "P2 on-shell ZCC residual (scaled by |U2|)", worst, 1e-10)


# 4: deformations ------------------------------------------------------------------

def _scaled(pair, p, A, B):
    res = deformation_residual(pair, p, A, B)
    return float((np.abs(res).max(axis=(-2, -1)) / residual_scale(pair, p, A, B)).max())


def _on_shell(rng, eq, n=20):
    t, x, xt = rng.uniform(0.3, 2, (3, n)) * rng.choice([-1, 1], (3, n))
    lam = rng.uniform(1.2, 2, n) * rng.choice([-1, 1], n)
    prm = {"P1": PainleveParams("P1"), "P2": PainleveParams("P2", alpha=0.6),
           "P3": PainleveParams("P3", -0.3, 0.8, 1.0, -1.0)}[eq]
    return lax_pair(prm), LaxPoint(t, lam, x, xt)


def test_c04_deformation_equation(gen):
    worst = 0.0
    for eq in ("P1", "P2", "P3"):
        pair, p = _on_shell(gen, eq)
        c = gen.uniform(0.5, 1.5, 3)
        r = lambda T, c=c: c[0] + c[1] * T * T  # noqa: E731
        s = lambda L, c=c: c[2] * L * L * L - L  # noqa: E731
        for k in range(1, 6):
            worst = max(worst, _scaled(pair, p, *tangent_jets(pair, SymmetryChoice.single(k, r=r, s=s), p)))
        for _ in range(100):
            ch = SymmetryChoice(*gen.uniform(-1, 1, 5), r=r, s=s)
            worst = max(worst, _scaled(pair, p, *tangent_jets(pair, ch, p)))
        for _ in range(100):
            a = gen.uniform(-1, 1, 6)

            def S(T, L, X, Xt, a=a):
                d = a[0] * T * L + a[1] * X * X
                return mat2(d, a[2] * L * L + a[3] * Xt, a[4] * T * X + a[5] * L, -1 * d)

            worst = max(worst, _scaled(pair, p, *gauge_characteristics(S, pair, p)))
    assert record(4, "deformation residual, 5 singles + 100 combos + 100 gauges x 3 eqs (scaled)", worst, 1e-8)


# 5-8: geometry -----------------------------------------------------------------------

def _p1_points(host, t_lo, t_hi, lam_lo, lam_hi, n=50):
    T, L = np.meshgrid(np.linspace(t_lo, t_hi, n), np.linspace(lam_lo, lam_hi, n), indexing="ij")
    x, xt = host.state(T.ravel())
    return LaxPoint(T.ravel(), L.ravel(), x, xt)


def test_c05_p1_f2_curvatures(p1_host, p1_pair):
    p = _p1_points(p1_host, 0.0, 1.0, -2.5, 0.5)
    f = forms_at(p1_pair, SymmetryChoice.single(2), p)
    assert (f.classification == REGULAR).all()
    K, H = curvatures(f)
    xtt = 6 * p.x ** 2 + p.t
    eK = np.max(np.abs(K - 2 * xtt) / np.maximum(1, np.abs(K)))
    eH = np.max(np.abs(H - 2 * (2 * p.x + p.lam)) / np.maximum(1, np.abs(H)))
    okK = record(5, "P1 F2 K vs 2(6x^2+t) (relative)", eK, 1e-6)
    okH = record(5, "P1 F2 H vs 2(2x+lam) (relative)", eH, 1e-6)
    assert okK and okH


def test_c06_p2_f2_metric_determinant():
    host = RationalP2Host(1)
    T, L = np.meshgrid(np.linspace(1, 3, 50), np.linspace(0.5, 2, 50), indexing="ij")
    x, xt = host.state(T.ravel())
    f = forms_at(lax_pair(host.params), SymmetryChoice.single(2), LaxPoint(T.ravel(), L.ravel(), x, xt))
    err = np.max(np.abs(f.det_g - (1 / L.ravel() ** 2 + 4 * x) ** 2) / f.scale ** 2)
    assert record(6, "P2 F2 det g vs (alpha/lam^2+4x)^2 (/scale^2)", err, 1e-8)


def test_c07_p1_f1_isotropic(p1_grid, p1_pair):
    _, frame = p1_grid
    A = tangent_fields(frame, p1_pair, SymmetryChoice.single(1))[0][::2, ::2]
    Phi = frame.phi_nodes
    ok = frame.valid
    tangent = algebra.inverse(Phi[ok]) @ A[ok] @ Phi[ok]
    bare = np.abs(algebra.killing(A[ok], A[ok], check=False)).max()
    # conjugation costs a few ulps of |Phi|^2 |A|^2, so this one is relative
    size = np.maximum(1.0, np.sum(np.abs(tangent) ** 2, axis=(-2, -1)))
    conj = (np.abs(algebra.killing(tangent, tangent, check=False)) / size).max()
    assert ok.all()
    ok1 = record(7, "P1 F1 killing(D_tU1, D_tU1) at grid nodes", float(bare), 1e-12)
    ok2 = record(7, "same for the tangent Phi^-1 D_tU1 Phi (relative)", float(conj), 1e-12)
    assert ok1 and ok2


def _degenerate(pair, choice, p, r_data=None):
    A, B = build_AB(pair, choice, p, r_data)
    f = forms_at(pair, choice, p, r_data)
    rank = tangent_rank2(A, B)
    return float(np.max(np.abs(f.det_g) / f.scale ** 2)), bool(rank.all())


def test_c08_degenerate_metrics(p1_host, p1_pair):
    rows = []
    # P1, F5: x_t(0) = 0 on this host, so stay off t = 0
    rows.append(("P1 F5",) + _degenerate(p1_pair, SymmetryChoice.single(5),
                                         _p1_points(p1_host, 0.2, 1.0, -1.0, 1.0, 20)))
    for eps in (1, -1):
        host = AiryP2Host(eps)
        pair = lax_pair(host.params)
        T, L = np.meshgrid(np.linspace(-1, 2, 20), np.linspace(0.3, 2, 20), indexing="ij")
        x, xt = host.state(T.ravel())
        p = LaxPoint(T.ravel(), L.ravel(), x, xt)
        rows.append((f"P2 Airy eps={eps:+d} F1",) + _degenerate(pair, SymmetryChoice.single(1), p))
        R = closed_form_r("AiryEps", host.params, epsilon=eps)
        rows.append((f"P2 Airy eps={eps:+d} F6",) + _degenerate(pair, SymmetryChoice(alpha6=1.0), p, R))
    for tag, prm, ic in (("P3ScaleR1", PainleveParams("P3", 0.7, 0.0, 1.0, 0.0), PainleveState(1.0, 1.1, 0.2)),
                         ("P3ScaleR2", PainleveParams("P3", 0.0, 0.5, 0.0, -1.0), PainleveState(1.0, 0.9, 0.3))):
        host = integrate(prm, ic, 1.8)
        assert host.pole_flag is None
        T, L = np.meshgrid(np.linspace(1.05, 1.75, 20), np.linspace(1.3, 2, 20) * np.array([1, -1] * 10),
                           indexing="ij")
        x, xt = host.state(T.ravel())
        p = LaxPoint(T.ravel(), L.ravel(), x, xt)
        R = closed_form_r(tag, prm, host)
        rows.append((f"P3 F^{tag[-2:]}",) + _degenerate(lax_pair(prm), SymmetryChoice(alpha6=1.0), p, R))
    worst = max(r[1] for r in rows)
    rank_ok = all(r[2] for r in rows)
    ok = record(8, f"det g / scale^2 over {len(rows)} degenerate families (tangent rank 2: {rank_ok})", worst, 1e-9)
    assert ok and rank_ok, rows


# 9-10: frame and immersion ----------------------------------------------------------------

def test_c09_wave_function(p1_grid, p1_host, p1_pair):
    grid, frame = p1_grid
    other = integrate_frame(p1_pair, p1_host, grid, path="lam_first")
    ok1 = record(9, "|det Phi - 1| on 50x50 P1 grid", float(np.nanmax(frame.det_drift)), 1e-8)
    ok2 = record(9, "t-first vs lam-first frame", float(np.nanmax(np.abs(frame.phi_nodes - other.phi_nodes))), 1e-6)
    assert ok1 and ok2


def test_c10_immersion_cross_check(p1_grid, p1_pair):
    _, frame = p1_grid
    ch = SymmetryChoice.single(1)
    closed = immersion_closed_form(frame, p1_pair, ch)
    A, B, dA, dB, _ = tangent_fields(frame, p1_pair, ch)
    quad = immersion_quadrature(frame, A, B, dA, dB)
    ib, jb = frame.bases[0]
    ok1 = record(10, "quadrature F1 vs closed form (minus base value)",
                 float(np.nanmax(np.abs(quad.F - (closed.F - closed.F[ib, jb])))), 1e-6)
    ok2 = record(10, "per-plaquette circulation", float(np.nanmax(quad.circulation)), 1e-8)
    assert ok1 and ok2


# 11: special solutions -----------------------------------------------------------------------

def test_c11_special_solutions():
    t = np.linspace(1, 3, 201)
    tr = integrate(PainleveParams("P2", alpha=1.0), rational_p2(1, 1.0), 3.0, t_eval=t)
    ok = [record(11, "rational P2 alpha=1 integration vs 1/t", float(np.abs(tr.x - 1 / tr.t).max()), 1e-8)]

    # full second-order P2 from Airy data; the first integral is not imposed by the integrator
    worst = 0.0
    for eps in (1, -1):
        s = np.linspace(-1, 2, 121)
        tr = integrate(PainleveParams("P2", alpha=-eps / 2), airy_p2(eps, -1.0), 2.0, tol=1e-13, atol=1e-14,
                       t_eval=s)
        worst = max(worst, float(np.abs(tr.x_t - eps * (tr.x ** 2 + tr.t / 2)).max()))
    ok.append(record(11, "Airy first integral x_t - eps(x^2 + t/2) along P2 trajectory", worst, 1e-10))

    # R = sqrt(t) I(z), z = 2 t^1.5 / 3; I' and I'' from the index recurrences only
    R, Rt = bessel_r(t)
    nu, z = 5 / 3, 2 * t ** 1.5 / 3
    i0, i1 = bessel_i(nu, z), (bessel_i(nu - 1, z) + bessel_i(nu + 1, z)) / 2
    i2 = (bessel_i(nu - 2, z) + 2 * i0 + bessel_i(nu + 2, z)) / 4
    Rtt = -i0 / (4 * t ** 1.5) + 1.5 * i1 + t ** 1.5 * i2
    res = Rtt - linearized_rhs(PainleveParams("P2", alpha=1.0), t, 1 / t, -1 / t ** 2, R, Rt)
    ok.append(record(11, "Bessel R determining equation (relative)", float(np.max(np.abs(res) / np.abs(R))), 1e-8))

    worst = 0.0
    for eps in (1, -1):
        s = np.linspace(-1, 2, 121)
        R, Rt = airy_r(eps)(s)
        x, _ = AiryP2Host(eps).state(s)
        worst = max(worst, float(np.max(np.abs(Rt - 2 * eps * x * R) / np.maximum(1, np.abs(Rt)))))
    ok.append(record(11, "Airy R relation D_tR - 2 eps x R (scaled)", worst, 1e-10))
    assert all(ok)


# 12-13: curvature loci ------------------------------------------------------------------------

def test_c12_umbilic_curve(p1_host, p1_pair):
    ch = SymmetryChoice.single(2)
    ev = curvature_evaluator(p1_pair, p1_host, ch)
    ts = np.linspace(0.02, 0.98, 20)
    x, _ = p1_host.state(ts)
    xtt = 6 * x ** 2 + ts
    assert (xtt > 0).all()
    lam = -2 * x + np.sqrt(xtt / 2)
    ok = [record(12, "|H^2 - K| on lam = -2x + sqrt(x_tt/2), 20 points", float(np.abs(ev(ts, lam)).max()), 1e-6)]

    tn, ln = np.linspace(0, 1, 50), np.linspace(-2.5, 0.5, 50)
    G = surface_geometry(p1_pair, p1_host, ch, tn, ln)
    found = np.array(umbilic_locus(G.disc, tn, ln, ev))
    ht, hl = tn[1] - tn[0], ln[1] - ln[0]
    hits = sum(bool(np.any((np.abs(found[:, 0] - a) <= ht) & (np.abs(found[:, 1] - b) <= hl)))
               for a, b in zip(ts, lam))
    ok.append(record(12, "sampled umbilics missed by the extractor (of 20, at most 2)", float(20 - hits), 2.5))

    # x_tt < 0 needs t < 0 and small x: start at rest from x = 0 at t = -3
    prm = PainleveParams("P1")
    neg = integrate(prm, PainleveState(-3.0, 0.0, 0.0), -2.5)
    tn2 = np.linspace(-3.0, -2.5, 40)
    assert (neg.xtt(tn2) < 0).all()
    G2 = surface_geometry(p1_pair, neg, ch, tn2, np.linspace(-3, 3, 40))
    pts = umbilic_locus(G2.disc, tn2, np.linspace(-3, 3, 40), curvature_evaluator(p1_pair, neg, ch))
    ok.append(record(12, "umbilics detected where x_tt < 0", float(len(pts)), 0.5))
    assert all(ok)


def test_c13_parabolic_line(p1_host, p1_pair):
    t = np.linspace(0.05, 1.0, 200)
    x, xt = p1_host.state(t)
    f = forms_at(p1_pair, SymmetryChoice.single(1), LaxPoint(t, x, x, xt))
    K, _ = curvatures(f, strict=False)
    # scale: typical |K| of the same surface away from the line
    off = forms_at(p1_pair, SymmetryChoice.single(1), LaxPoint(t, x + 0.5, x, xt))
    scale = max(1.0, float(np.nanmedian(np.abs(curvatures(off, strict=False)[0]))))
    assert np.isfinite(K).all()
    assert record(13, "P1 F1 |K| along lam = x(t) (/scale)", float(np.abs(K).max() / scale), 1e-6)


# 14: P3 point symmetries -----------------------------------------------------------------------

def _linearized_residual(which, prm, host, t):
    x, xt = host.state(t)
    worst = 0.0
    for ti, xi, xti in zip(t, x, xt):
        R, Rt = p3_point_symmetry(which, PainleveState(ti, xi, xti), prm)
        xtt = rhs_expr(prm, ti, xi, xti)
        x3 = third_derivative(prm, ti, xi, xti)
        Rtt = 3 * xtt + ti * x3 if which == "R1" else -xtt - ti * x3
        lin = linearized_rhs(prm, ti, xi, xti, R, Rt)
        worst = max(worst, abs(Rtt - lin) / max(1.0, abs(lin)))
    return worst


def test_c14_p3_point_symmetries(gen):
    worst_lin = worst_A = 0.0
    t = np.linspace(1.05, 1.6, 30)
    for _ in range(5):
        a, g = gen.uniform(-1, 1), gen.uniform(-1, 1)
        prm = PainleveParams("P3", a, 0.0, g, 0.0)
        host = integrate(prm, PainleveState(1.0, 1.0, 0.1), 1.65)
        worst_lin = max(worst_lin, _linearized_residual("R1", prm, host, t))
        b, d = gen.uniform(-1, 1), gen.uniform(-1, 1)
        prm = PainleveParams("P3", 0.0, b, 0.0, d)
        host = integrate(prm, PainleveState(1.0, 1.0, 0.1), 1.65)
        worst_lin = max(worst_lin, _linearized_residual("R2", prm, host, t))
    ok = [record(14, "R1, R2 solve the linearized P3 (scaled)", worst_lin, 1e-8)]

    lam = np.linspace(1.3, 2, 30) * np.array([1, -1] * 15)
    for _ in range(5):
        a = gen.uniform(-1, 1)
        prm = PainleveParams("P3", a, 0.0, 1.0, 0.0)
        host = integrate(prm, PainleveState(1.0, 1.0, 0.1), 1.65)
        x, xt = host.state(t)
        A, _ = build_AB(lax_pair(prm), SymmetryChoice(alpha6=1.0), LaxPoint(t, lam, x, xt),
                        closed_form_r("P3ScaleR1", prm, host))
        g = prm.gamma
        f = (g * g * t * x ** 2 + (g + a) * x + g * t * xt) / 2
        worst_A = max(worst_A, float(np.abs(A - f[:, None, None] * algebra.E1).max()))
        b = gen.uniform(-1, 1)
        prm = PainleveParams("P3", 0.0, b, 0.0, -1.0)
        host = integrate(prm, PainleveState(1.0, 1.0, 0.1), 1.65)
        x, xt = host.state(t)
        A, _ = build_AB(lax_pair(prm), SymmetryChoice(alpha6=1.0), LaxPoint(t, lam, x, xt),
                        closed_form_r("P3ScaleR2", prm, host))
        d = prm.delta
        f = (d * t * xt - d * x - b * x - d * t) / (2 * x ** 2)
        worst_A = max(worst_A, float(np.abs(A - f[:, None, None] * algebra.E1).max()))
    ok.append(record(14, "R1/R2 deformation matrix A vs closed display", worst_A, 1e-10))
    assert all(ok)
