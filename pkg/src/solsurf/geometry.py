"""Fundamental forms, normals, curvatures and umbilic points of the surfaces.

Everything is computed from the representations A, B, U1, U2 and their
derivatives; conjugation by Phi leaves the Killing form unchanged, so the
wave function never enters.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra
from .errors import AsymmetricMixedDerivatives, DegenerateMetric, DegenerateTangents, IsotropicNormal
from .laxpair import LaxPair, LaxPoint, u_jets
from .symmetry import RSolution, SymmetryChoice, tangent_jets

SIGMA = -1.0          # global normal orientation
ISOTROPY_TOL = 1e-10  # relative to scale**2
RANK_TOL = 1e-10
METRIC_TOL = 1e-12
MIXED_TOL = 1e-8

REGULAR = "Regular"
ISOTROPIC = "IsotropicNormal"
DEGENERATE_METRIC = "DegenerateMetric"
DEGENERATE_TANGENTS = "DegenerateTangents"


def first_fundamental(A, B):
    """(g11, g12, g22) from the tangent representations."""
    return algebra.killing(A, A), algebra.killing(A, B), algebra.killing(B, B)


def tangent_rank2(A, B, tol: float = RANK_TOL) -> np.ndarray:
    """True where the basis components of A and B are linearly independent."""
    a = algebra.decompose(A, check=False)
    b = algebra.decompose(B, check=False)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return cross > tol * np.linalg.norm(a, axis=-1) * np.linalg.norm(b, axis=-1)


def _scale(g11, g12, g22):
    return np.maximum.reduce([np.abs(g11), np.abs(g12), np.abs(g22)])


def normal(A, B):
    """Unit normal representation and classification.

    Returns (n, classification, N) where N = [A, B]; n is NaN where the
    normal is isotropic.  Raises DegenerateTangents if any point has
    dependent tangents.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if not np.all(tangent_rank2(A, B)):
        raise DegenerateTangents("tangent vectors are linearly dependent")
    N = algebra.commutator(A, B)
    nn = algebra.killing(N, N)
    sc = _scale(*first_fundamental(A, B))
    iso = np.abs(nn) < ISOTROPY_TOL * np.maximum(sc, 1e-300) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        n = SIGMA * N / np.sqrt(np.abs(nn))[..., None, None]
    n = np.where(iso[..., None, None], np.nan, n)
    cls = np.where(iso, ISOTROPIC, REGULAR)
    return n, cls, N


@dataclass
class FundamentalForms:
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    L11: np.ndarray
    L12: np.ndarray
    L22: np.ndarray
    classification: np.ndarray
    timelike_normal: np.ndarray | None = None

    @property
    def det_g(self):
        return self.g11 * self.g22 - self.g12 ** 2

    @property
    def scale(self):
        return _scale(self.g11, self.g12, self.g22)


def second_fundamental(pair: LaxPair, p: LaxPoint, A, B, n, check: bool = True):
    """(L11, L12, L22) from matrix jets A, B (first-order in t and lam) and normal n."""
    U1j, U2j = u_jets(pair, p, (0, 0, 0))
    U1, U2 = U1j.value, U2j.value
    a, b = A.value, B.value
    r11 = A.deriv(1, 0) + algebra.commutator(a, U1)
    r12 = A.deriv(0, 1) + algebra.commutator(a, U2)
    r21 = B.deriv(1, 0) + algebra.commutator(b, U1)
    r22 = B.deriv(0, 1) + algebra.commutator(b, U2)
    L11 = algebra.killing(r11, n, check=False)
    L12 = algebra.killing(r12, n, check=False)
    L21 = algebra.killing(r21, n, check=False)
    L22 = algebra.killing(r22, n, check=False)
    if check:
        sc = np.maximum(1.0, np.maximum(np.abs(L12), np.abs(L21)))
        bad = np.abs(L12 - L21) > MIXED_TOL * sc
        if np.any(bad & np.isfinite(L12)):
            raise AsymmetricMixedDerivatives(f"mixed second derivatives differ by {np.nanmax(np.abs(L12 - L21)):.3e}")
    return L11, L12, L22


def curvatures(forms: FundamentalForms, strict: bool = True):
    """Gaussian and mean curvature; NaN (or DegenerateMetric) where undefined."""
    det = forms.det_g
    sc = forms.scale
    regular = (forms.classification == REGULAR) & (np.abs(det) > METRIC_TOL * sc ** 2)
    if strict and not np.all(regular):
        raise DegenerateMetric("metric degenerate or normal isotropic")
    with np.errstate(invalid="ignore", divide="ignore"):
        K = (forms.L11 * forms.L22 - forms.L12 ** 2) / det
        H = (forms.g22 * forms.L11 - 2 * forms.g12 * forms.L12 + forms.g11 * forms.L22) / (2 * det)
    return np.where(regular, K, np.nan), np.where(regular, H, np.nan)


def forms_at(pair: LaxPair, choice: SymmetryChoice | None, p: LaxPoint, r_data: RSolution | None = None,
             check: bool = True, jets_fn=None) -> FundamentalForms:
    """Both fundamental forms at (batched, on-shell) points.

    Points with dependent tangents are classified instead of raising.
    ``jets_fn(p)`` may supply (A, B) jets in place of the six-term combination.
    """
    if jets_fn is None:
        A, B = tangent_jets(pair, choice, p, r_data, extra=(1, 1))
    else:
        A, B = jets_fn(p)
    a, b = A.value, B.value
    g11, g12, g22 = first_fundamental(a, b)
    rank = tangent_rank2(a, b)
    N = algebra.commutator(a, b)
    nn = algebra.killing(N, N, check=False)
    sc = _scale(g11, g12, g22)
    iso = np.abs(nn) < ISOTROPY_TOL * np.maximum(sc, 1e-300) ** 2
    cls = np.where(~rank, DEGENERATE_TANGENTS, np.where(iso, ISOTROPIC, REGULAR))
    with np.errstate(invalid="ignore", divide="ignore"):
        n = SIGMA * N / np.sqrt(np.abs(nn))[..., None, None]
    n = np.where((cls == REGULAR)[..., None, None], n, np.nan)
    L11, L12, L22 = second_fundamental(pair, p, A, B, n, check=check)
    cls = np.where((cls == REGULAR) & (np.abs(g11 * g22 - g12 ** 2) <= METRIC_TOL * sc ** 2), DEGENERATE_METRIC, cls)
    return FundamentalForms(np.asarray(g11), np.asarray(g12), np.asarray(g22), np.asarray(L11), np.asarray(L12),
                            np.asarray(L22), np.asarray(cls), np.asarray(nn < 0))


@dataclass
class GeometryGrid:
    t: np.ndarray
    lam: np.ndarray
    forms: FundamentalForms
    K: np.ndarray
    H: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def disc(self):
        """H^2 - K (not sign-constrained on pseudo-Riemannian surfaces)."""
        return self.H ** 2 - self.K

    def to_csv(self, path) -> Path:
        path = Path(path)
        f = self.forms
        T, L = np.meshgrid(self.t, self.lam, indexing="ij")

        def fmt(v):
            return "" if not np.isfinite(v) else format(float(v), ".17g")

        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "lambda", "g11", "g12", "g22", "det_g", "L11", "L12", "L22", "K", "H", "class"])
            for idx in np.ndindex(T.shape):
                regular = f.classification[idx] in (REGULAR, DEGENERATE_METRIC)
                row = [fmt(T[idx]), fmt(L[idx]), fmt(f.g11[idx]), fmt(f.g12[idx]), fmt(f.g22[idx]),
                       fmt(f.det_g[idx])]
                row += [fmt(v[idx]) if regular else "" for v in (f.L11, f.L12, f.L22)]
                row += [fmt(self.K[idx]), fmt(self.H[idx]), str(f.classification[idx])]
                w.writerow(row)
        return path


def surface_geometry(pair: LaxPair, host, choice: SymmetryChoice | None, t_nodes, lam_nodes,
                     r_data: RSolution | None = None, check: bool = True, jets_fn=None) -> GeometryGrid:
    t_nodes = np.asarray(t_nodes, dtype=float)
    lam_nodes = np.asarray(lam_nodes, dtype=float)
    T, L = np.meshgrid(t_nodes, lam_nodes, indexing="ij")
    x, xt = host.state(T.ravel())
    p = LaxPoint(T.ravel(), L.ravel(), x, xt)
    forms = forms_at(pair, choice, p, r_data, check=check, jets_fn=jets_fn)
    K, H = curvatures(forms, strict=False)
    shape = T.shape
    f = FundamentalForms(*(np.reshape(v, shape) for v in (forms.g11, forms.g12, forms.g22, forms.L11, forms.L12,
                                                           forms.L22, forms.classification, forms.timelike_normal)))
    return GeometryGrid(t_nodes, lam_nodes, f, K.reshape(shape), H.reshape(shape))


def curvature_evaluator(pair: LaxPair, host, choice: SymmetryChoice | None, r_data: RSolution | None = None,
                        jets_fn=None):
    """Function (t, lam) -> H^2 - K for refining umbilic points."""

    def f(t, lam):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        x, xt = host.state(t)
        forms = forms_at(pair, choice, LaxPoint(t, lam, x, xt), r_data, check=False, jets_fn=jets_fn)
        K, H = curvatures(forms, strict=False)
        return H ** 2 - K

    return f


def umbilic_locus(disc: np.ndarray, t_nodes, lam_nodes, evaluator=None, tol: float = 1e-8, max_iter: int = 200):
    """Zeros of H^2 - K found from sign changes along grid lines.

    ``disc`` holds H^2 - K on the grid (NaN where undefined).  With an
    ``evaluator`` each bracket is refined by bisection until |H^2 - K| < tol
    (or the bracket collapses); otherwise linear interpolation is used.
    """
    disc = np.asarray(disc, dtype=float)
    t_nodes = np.asarray(t_nodes, dtype=float)
    lam_nodes = np.asarray(lam_nodes, dtype=float)
    pts = []

    def refine(ta, la, fa, tb, lb, fb):
        if evaluator is None:
            w = fa / (fa - fb)
            return ta + w * (tb - ta), la + w * (lb - la)
        for _ in range(max_iter):
            tm, lm = 0.5 * (ta + tb), 0.5 * (la + lb)
            fm = float(evaluator(tm, lm)[0])
            if not np.isfinite(fm):
                break
            if abs(fm) < tol or (abs(tb - ta) + abs(lb - la)) < 1e-14:
                return tm, lm
            if np.sign(fm) == np.sign(fa):
                ta, la, fa = tm, lm, fm
            else:
                tb, lb, fb = tm, lm, fm
        return 0.5 * (ta + tb), 0.5 * (la + lb)

    nt, nl = disc.shape
    for i in range(nt):
        for j in range(nl):
            f0 = disc[i, j]
            if not np.isfinite(f0):
                continue
            if f0 == 0.0:
                pts.append((t_nodes[i], lam_nodes[j]))
                continue
            if j + 1 < nl and np.isfinite(disc[i, j + 1]) and f0 * disc[i, j + 1] < 0:
                pts.append(refine(t_nodes[i], lam_nodes[j], f0, t_nodes[i], lam_nodes[j + 1], disc[i, j + 1]))
            if i + 1 < nt and np.isfinite(disc[i + 1, j]) and f0 * disc[i + 1, j] < 0:
                pts.append(refine(t_nodes[i], lam_nodes[j], f0, t_nodes[i + 1], lam_nodes[j], disc[i + 1, j]))
    return pts
