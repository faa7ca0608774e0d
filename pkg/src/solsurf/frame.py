"""Wave function Phi on a (t, lambda) grid and the immersion F built from it.

Phi is integrated on a grid refined by two in each direction (node
midpoints included) so Simpson's rule can be applied along grid lines
without re-integrating.  Exclusion bands cut the grid into rectangular
blocks; each block gets its own base node, and Phi = I there.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra, ode
from .errors import NonClosedForm, UnsupportedAlpha6
from .laxpair import LaxPair, LaxPoint, u_jets
from .painleve import Host
from .symmetry import RSolution, SymmetryChoice, deformation_residual, residual_scale, tangent_jets

OVERFLOW = 1e12  # |Phi| beyond this is treated as lost (node omitted)
DET_LOSS = 1e-6  # |det Phi - 1| beyond this means cancellation ate the frame (node omitted)


@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    n_t: int
    lam_min: float
    lam_max: float
    n_lam: int
    base_t: float | None = None
    base_lam: float | None = None
    t_bands: tuple = ()
    lam_bands: tuple = ()

    def __post_init__(self):
        if self.n_t < 2 or self.n_lam < 2:
            raise ValueError("grid needs at least two nodes per direction")
        if not (self.t_max > self.t_min and self.lam_max > self.lam_min):
            raise ValueError("empty grid rectangle")

    @property
    def t_nodes(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def lam_nodes(self) -> np.ndarray:
        return np.linspace(self.lam_min, self.lam_max, self.n_lam)

    @property
    def h_t(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def h_lam(self) -> float:
        return (self.lam_max - self.lam_min) / (self.n_lam - 1)

    @staticmethod
    def _keep(nodes, bands):
        keep = np.ones(nodes.shape, dtype=bool)
        for lo, hi in bands:
            keep &= ~((nodes >= lo) & (nodes <= hi))
        return keep

    @property
    def t_keep(self) -> np.ndarray:
        return self._keep(self.t_nodes, self.t_bands)

    @property
    def lam_keep(self) -> np.ndarray:
        return self._keep(self.lam_nodes, self.lam_bands)

    def blocks(self):
        """Pairs of index runs (t-run, lam-run) between exclusion bands.

        A band that falls between two neighbouring nodes still separates them.
        """
        return [(a, b) for a in _runs(self.t_keep, self.t_nodes, self.t_bands)
                for b in _runs(self.lam_keep, self.lam_nodes, self.lam_bands)]

    def base_index(self, trun, lrun):
        bt = self.t_min if self.base_t is None else self.base_t
        bl = self.lam_min if self.base_lam is None else self.base_lam
        ti = trun[np.argmin(np.abs(self.t_nodes[trun] - bt))]
        li = lrun[np.argmin(np.abs(self.lam_nodes[lrun] - bl))]
        return int(ti), int(li)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.t_min, self.t_max, factor * (self.n_t - 1) + 1, self.lam_min, self.lam_max,
                        factor * (self.n_lam - 1) + 1, self.base_t, self.base_lam, self.t_bands, self.lam_bands)


def _runs(keep, nodes=None, bands=()):
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return []
    gap = np.diff(idx) > 1
    if nodes is not None:
        left, right = nodes[idx[:-1]], nodes[idx[1:]]
        for lo, hi in bands:
            gap |= (hi >= left) & (lo <= right)
    cuts = np.flatnonzero(gap) + 1
    return [r for r in np.split(idx, cuts) if r.size]


@dataclass
class FrameGrid:
    grid: GridSpec
    pair: LaxPair
    host: Host
    phi: np.ndarray            # (2 n_t - 1, 2 n_lam - 1, 2, 2), NaN where unavailable
    bases: list                # (i, j) base node per block, coarse indices
    path: str = "t_first"

    @property
    def t_fine(self) -> np.ndarray:
        return np.linspace(self.grid.t_min, self.grid.t_max, 2 * self.grid.n_t - 1)

    @property
    def lam_fine(self) -> np.ndarray:
        return np.linspace(self.grid.lam_min, self.grid.lam_max, 2 * self.grid.n_lam - 1)

    @property
    def phi_nodes(self) -> np.ndarray:
        return self.phi[::2, ::2]

    @property
    def valid_fine(self) -> np.ndarray:
        return np.all(np.isfinite(self.phi), axis=(-2, -1))

    @property
    def valid(self) -> np.ndarray:
        return self.valid_fine[::2, ::2]

    @property
    def det_drift(self) -> np.ndarray:
        return np.abs(algebra.det(self.phi_nodes) - 1.0)


def _evolve(f, s0, Y0, targets, tol, batch_axis):
    """Integrate from s0 to every target (either side); returns (len(targets),) + Y0.shape."""
    targets = np.asarray(targets, dtype=float)
    out = np.full((targets.size,) + Y0.shape, np.nan, dtype=complex)

    def g(s, Y):
        dY = f(s, Y)
        if batch_axis is not None:
            big = np.max(np.abs(Y), axis=(-2, -1)) > OVERFLOW
            dY = np.where(big[..., None, None], 0.0, dY)
        return dY

    for sel in (targets >= s0, targets < s0):
        ts = targets[sel]
        if ts.size == 0:
            continue
        end = ts.max() if np.any(ts > s0) else ts.min()
        if end == s0:
            out[sel] = Y0
            continue
        sol = ode.solve(g, s0, Y0, end, rtol=tol, atol=tol * 1e-2, t_eval=ts)
        ys = sol.y[sol.t_eval_index]
        order = np.argsort(np.argsort(ts * (1 if end > s0 else -1)))
        out[sel] = ys[order]
    return out


def _kill_overflow(Phi):
    with np.errstate(invalid="ignore"):
        big = (~np.isfinite(Phi).all(axis=(-2, -1)) | (np.max(np.abs(Phi), axis=(-2, -1)) > OVERFLOW)
               | ~(np.abs(algebra.det(Phi) - 1) <= DET_LOSS))
    Phi = Phi.copy()
    Phi[big] = np.nan
    return Phi


def integrate_frame(pair: LaxPair, host: Host, grid: GridSpec, tol: float = 1e-10, path: str = "t_first") -> FrameGrid:
    """Solve D_t Phi = U1 Phi, D_lam Phi = U2 Phi with Phi = I at each block's base node.

    ``path='t_first'`` integrates along the base lambda line in t and then
    along lambda for every t; ``'lam_first'`` does the transposed L-path.
    """
    tf = np.linspace(grid.t_min, grid.t_max, 2 * grid.n_t - 1)
    lf = np.linspace(grid.lam_min, grid.lam_max, 2 * grid.n_lam - 1)
    phi = np.full((tf.size, lf.size, 2, 2), np.nan, dtype=complex)
    bases = []
    I = np.eye(2, dtype=complex)
    for trun, lrun in grid.blocks():
        ib, jb = grid.base_index(trun, lrun)
        bases.append((ib, jb))
        fi = np.arange(2 * trun[0], 2 * trun[-1] + 1)
        fj = np.arange(2 * lrun[0], 2 * lrun[-1] + 1)
        t0, l0 = tf[2 * ib], lf[2 * jb]
        xs, xts = host.state(tf[fi])
        pair.check(tf[fi], lf[fj][:, None], xs)

        if path == "t_first":
            def ft(s, Y):
                x, xt = host.state(s)
                return np.asarray(pair.u1_expr(s, l0, x, xt), dtype=complex) @ Y

            line = _kill_overflow(_evolve(ft, t0, I, tf[fi], tol, None))
            tt, xx, xxt = tf[fi], xs, xts

            def fl(s, Y):
                return np.asarray(pair.u2_expr(tt, s, xx, xxt), dtype=complex) @ Y

            start = np.where(np.isfinite(line), line, 0.0)
            block = _evolve(fl, l0, start, lf[fj], tol, 0)  # (n_l, n_t, 2, 2)
            block = np.swapaxes(block, 0, 1)
            block[~np.isfinite(line).all(axis=(-2, -1))] = np.nan
        elif path == "lam_first":
            x0, xt0 = host.state(t0)

            def fl0(s, Y):
                return np.asarray(pair.u2_expr(t0, s, x0, xt0), dtype=complex) @ Y

            line = _kill_overflow(_evolve(fl0, l0, I, lf[fj], tol, None))
            ll = lf[fj]

            def ft2(s, Y):
                x, xt = host.state(s)
                return np.asarray(pair.u1_expr(s, ll, x, xt), dtype=complex) @ Y

            start = np.where(np.isfinite(line), line, 0.0)
            block = _evolve(ft2, t0, start, tf[fi], tol, 0)  # (n_t, n_l, 2, 2)
            block[:, ~np.isfinite(line).all(axis=(-2, -1))] = np.nan
        else:
            raise ValueError(f"unknown path {path!r}")
        phi[np.ix_(fi, fj)] = _kill_overflow(block)
    return FrameGrid(grid, pair, host, phi, bases, path)


# immersion -----------------------------------------------------------------

@dataclass
class SurfaceGrid:
    grid: GridSpec
    F: np.ndarray                 # (n_t, n_lam, 3), NaN where omitted
    err: np.ndarray | None = None  # accumulated quadrature error estimate per node
    circulation: np.ndarray | None = None
    circulation_bound: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def valid(self) -> np.ndarray:
        return np.all(np.isfinite(self.F), axis=-1)


def _weights_numeric(choice: SymmetryChoice, T, Lam):
    r = choice.r(T) if choice.r is not None else 1.0
    s = choice.s(Lam) if choice.s is not None else 1.0
    return np.asarray(r, dtype=float), np.asarray(s, dtype=float)


def immersion_closed_form(frame: FrameGrid, pair: LaxPair, choice: SymmetryChoice) -> SurfaceGrid:
    """F = Phi^{-1}(a1 r U1 + a2 s U2 + a3 t U1 + a4 lam U2 + a5 D_t U1) Phi at the grid nodes."""
    if choice.alpha6:
        raise UnsupportedAlpha6("the alpha6 surface is only available by quadrature")
    g = frame.grid
    T, L = np.meshgrid(g.t_nodes, g.lam_nodes, indexing="ij")
    valid = frame.valid
    F = np.full(T.shape + (3,), np.nan)
    if not valid.any():
        return SurfaceGrid(g, F, meta={"method": "closed_form"})
    t, lam = T[valid], L[valid]
    x, xt = frame.host.state(t)
    p = LaxPoint(t, lam, x, xt)
    U1j, U2j = u_jets(pair, p, (1, 0, 0))
    U1, U2, U1t = U1j.value, U2j.value, U1j.deriv(1, 0)
    a1, a2, a3, a4, a5, _ = choice.alphas
    r, s = _weights_numeric(choice, t, lam)
    M = np.zeros_like(U1)
    sc = lambda v: np.asarray(v)[..., None, None] if np.ndim(v) else v  # noqa: E731
    if a1:
        M = M + a1 * sc(r) * U1
    if a2:
        M = M + a2 * sc(s) * U2
    if a3:
        M = M + a3 * t[:, None, None] * U1
    if a4:
        M = M + a4 * lam[:, None, None] * U2
    if a5:
        M = M + a5 * U1t
    Phi = frame.phi_nodes[valid]
    F[valid] = algebra.decompose(algebra.conjugate(Phi, M), tol=1e-8)
    return SurfaceGrid(g, F, meta={"method": "closed_form"})


def tangent_fields(frame: FrameGrid, pair: LaxPair, choice: SymmetryChoice | None, r_data: RSolution | None = None,
                   check_tol: float = 1e-6, jets_fn=None):
    """Tangent representations at every valid fine node.

    Returns (A, B, dA, dB, worst) where dA = D_t A + [A, U1] and
    dB = D_lam B + [B, U2] represent the derivatives of the conjugated
    fields along t and lam, and ``worst`` is the largest scaled
    deformation residual.  Raises NonClosedForm above ``check_tol``.
    ``jets_fn(p)`` may replace the six-term combination by any function
    returning (A, B) as matrix jets of order (1, 1) at the points p.
    """
    tf, lf = frame.t_fine, frame.lam_fine
    T, L = np.meshgrid(tf, lf, indexing="ij")
    ok = frame.valid_fine
    t, lam = T[ok], L[ok]
    x, xt = frame.host.state(t)
    p = LaxPoint(t, lam, x, xt)
    if jets_fn is None:
        Aj, Bj = tangent_jets(pair, choice, p, r_data)
    else:
        Aj, Bj = jets_fn(p)
    res = deformation_residual(pair, p, Aj, Bj)
    rel = np.max(np.abs(res), axis=(-2, -1)) / residual_scale(pair, p, Aj, Bj)
    worst = float(rel.max()) if rel.size else 0.0
    if worst > check_tol:
        raise NonClosedForm(f"tangent fields violate the deformed zero-curvature condition (residual {worst:.3e})")
    U1j, U2j = u_jets(pair, p, (0, 0, 0))
    U1, U2 = U1j.value, U2j.value
    out = []
    for M in (Aj.value, Bj.value,
              Aj.deriv(1, 0) + algebra.commutator(Aj.value, U1),
              Bj.deriv(0, 1) + algebra.commutator(Bj.value, U2)):
        full = np.full(T.shape + (2, 2), np.nan, dtype=complex)
        full[ok] = M
        out.append(full)
    return (*out, worst)


def _segments(f0, fm, f1, h, d0=None, d1=None):
    """Integral over one coarse interval from samples at 0, h/2, h.

    Plain Simpson with a trapezoid-Richardson error estimate, or, when end
    derivatives d0, d1 are given, the derivative-corrected rule
    h (7 f0 + 16 fm + 7 f1)/30 + h^2 (d0 - d1)/60 (exact to degree 5) with
    its distance from Simpson as a conservative error estimate.
    """
    simpson = h / 6.0 * (f0 + 4 * fm + f1)
    if d0 is None:
        trap_h = h / 2.0 * (f0 + f1)
        trap_h2 = h / 4.0 * (f0 + 2 * fm + f1)
        return simpson, np.abs(trap_h2 - trap_h) / 3.0
    corrected = h * (7 * f0 + 16 * fm + 7 * f1) / 30.0 + h * h * (d0 - d1) / 60.0
    return corrected, np.abs(corrected - simpson)


def _cumulative(G, base, h, D=None):
    """Cumulative integral of G along axis 0 (fine samples) from coarse node ``base``.

    G has shape (2n - 1, ..., 3); returns (integral, error) at the n coarse nodes.
    """
    n = (G.shape[0] + 1) // 2
    d0 = d1 = None
    if D is not None:
        d0, d1 = D[0:-1:2], D[2::2]
    seg, est = _segments(G[0:-1:2], G[1::2], G[2::2], h, d0, d1)
    est = np.max(est, axis=-1)
    out = np.zeros((n,) + G.shape[1:])
    err = np.zeros((n,) + est.shape[1:])
    out[base + 1:] = np.cumsum(seg[base:], axis=0)
    err[base + 1:] = np.cumsum(est[base:], axis=0)
    if base > 0:
        out[:base] = -np.cumsum(seg[:base][::-1], axis=0)[::-1]
        err[:base] = np.cumsum(est[:base][::-1], axis=0)[::-1]
    return out, err


def immersion_quadrature(frame: FrameGrid, A: np.ndarray, B: np.ndarray, dA: np.ndarray | None = None,
                         dB: np.ndarray | None = None, circulation_factor: float = 10.0,
                         check: bool = True) -> SurfaceGrid:
    """Integrate dF = Phi^{-1} A Phi dt + Phi^{-1} B Phi dlam along L-paths (t first).

    ``A``/``B`` are given at the fine nodes.  With ``dA``/``dB`` (see
    ``tangent_fields``) the derivative-corrected rule is used, otherwise
    plain composite Simpson.  Per plaquette the loop
    integral is compared with ``circulation_factor`` times the quadrature
    error estimate; a violation raises NonClosedForm when ``check`` is set.
    """
    g = frame.grid
    ok = frame.valid_fine
    Gt = np.full(ok.shape + (3,), np.nan)
    Gl = np.full_like(Gt, np.nan)
    Phi = frame.phi[ok]
    Pinv = algebra.inverse(Phi)
    Gt[ok] = algebra.decompose(Pinv @ A[ok] @ Phi, tol=1e-8)
    Gl[ok] = algebra.decompose(Pinv @ B[ok] @ Phi, tol=1e-8)
    use_d = dA is not None and dB is not None
    if use_d:
        Dt = np.full_like(Gt, np.nan)
        Dl = np.full_like(Gt, np.nan)
        Dt[ok] = algebra.decompose(Pinv @ dA[ok] @ Phi, tol=1e-8)
        Dl[ok] = algebra.decompose(Pinv @ dB[ok] @ Phi, tol=1e-8)
    F = np.full((g.n_t, g.n_lam, 3), np.nan)
    err = np.full((g.n_t, g.n_lam), np.nan)
    circ = np.full((g.n_t - 1, g.n_lam - 1), np.nan)
    bound = np.full_like(circ, np.nan)
    ht, hl = g.h_t, g.h_lam
    for (trun, lrun), (ib, jb) in zip(g.blocks(), frame.bases):
        i0, i1, j0, j1 = trun[0], trun[-1], lrun[0], lrun[-1]
        sub_t = Gt[2 * i0: 2 * i1 + 1, 2 * j0: 2 * j1 + 1]
        sub_l = Gl[2 * i0: 2 * i1 + 1, 2 * j0: 2 * j1 + 1]
        if use_d:
            dsub_t = Dt[2 * i0: 2 * i1 + 1, 2 * j0: 2 * j1 + 1]
            dsub_l = Dl[2 * i0: 2 * i1 + 1, 2 * j0: 2 * j1 + 1]
        bi, bj = ib - i0, jb - j0
        base_line, base_err = _cumulative(sub_t[:, 2 * bj], bi, ht, dsub_t[:, 2 * bj] if use_d else None)
        cols, col_err = _cumulative(np.swapaxes(sub_l[::2], 0, 1), bj, hl,
                                    np.swapaxes(dsub_l[::2], 0, 1) if use_d else None)
        F_blk = base_line[None, :, :] + cols
        E_blk = base_err[None, :] + col_err
        F[i0:i1 + 1, j0:j1 + 1] = np.swapaxes(F_blk, 0, 1)
        err[i0:i1 + 1, j0:j1 + 1] = np.swapaxes(E_blk, 0, 1)
        if i1 > i0 and j1 > j0:
            # edge integrals: t-edges on every coarse lam row, lam-edges on every coarse t column
            if use_d:
                st, et = _segments(sub_t[0:-1:2, ::2], sub_t[1::2, ::2], sub_t[2::2, ::2], ht,
                                   dsub_t[0:-1:2, ::2], dsub_t[2::2, ::2])
                sl, el = _segments(sub_l[::2, 0:-1:2], sub_l[::2, 1::2], sub_l[::2, 2::2], hl,
                                   dsub_l[::2, 0:-1:2], dsub_l[::2, 2::2])
            else:
                st, et = _segments(sub_t[0:-1:2, ::2], sub_t[1::2, ::2], sub_t[2::2, ::2], ht)
                sl, el = _segments(sub_l[::2, 0:-1:2], sub_l[::2, 1::2], sub_l[::2, 2::2], hl)
            c = st[:, :-1] + sl[1:, :] - st[:, 1:] - sl[:-1, :]
            e = et[:, :-1] + el[1:, :] + et[:, 1:] + el[:-1, :]
            scale = np.maximum(np.abs(sub_t[::2, ::2]).max(), np.abs(sub_l[::2, ::2]).max())
            floor = 1e-9 * scale * max(ht, hl)
            circ[i0:i1, j0:j1] = np.max(np.abs(c), axis=-1)
            bound[i0:i1, j0:j1] = circulation_factor * np.max(e, axis=-1) + floor
    if check:
        bad = np.isfinite(circ) & (circ > bound)
        if bad.any():
            raise NonClosedForm(f"{int(bad.sum())} plaquettes with circulation above bound "
                                f"(worst {np.nanmax(circ):.3e})")
    return SurfaceGrid(g, F, err, circ, bound, meta={"method": "quadrature"})


def build_surface(pair: LaxPair, host: Host, grid: GridSpec, choice: SymmetryChoice, r_data=None,
                  tol: float = 1e-10, method: str = "auto"):
    """Frame plus immersion.  ``method`` is 'closed_form', 'quadrature' or 'auto'."""
    frame = integrate_frame(pair, host, grid, tol)
    if method == "auto":
        method = "quadrature" if choice.alpha6 else "closed_form"
    if method == "closed_form":
        return frame, immersion_closed_form(frame, pair, choice)
    A, B, dA, dB, worst = tangent_fields(frame, pair, choice, r_data)
    surf = immersion_quadrature(frame, A, B, dA, dB)
    surf.meta["deformation_residual"] = worst
    return frame, surf


# export ----------------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def export_mesh(surface: SurfaceGrid, path, fmt: str = "OBJ") -> Path:
    """Write the surface as an ASCII OBJ mesh or as a CSV of nodes."""
    path = Path(path)
    g = surface.grid
    valid = surface.valid
    fmt = fmt.upper()
    if fmt == "CSV":
        T, L = np.meshgrid(g.t_nodes, g.lam_nodes, indexing="ij")
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "lambda", "F1", "F2", "F3"])
            for i in range(g.n_t):
                for j in range(g.n_lam):
                    if valid[i, j]:
                        w.writerow([_fmt(T[i, j]), _fmt(L[i, j])] + [_fmt(c) for c in surface.F[i, j]])
        return path
    if fmt != "OBJ":
        raise ValueError(f"unknown mesh format {fmt!r}")
    index = np.full(valid.shape, -1, dtype=int)
    index[valid] = np.arange(1, int(valid.sum()) + 1)
    with path.open("w") as fh:
        for i in range(g.n_t):
            for j in range(g.n_lam):
                if valid[i, j]:
                    fh.write("v " + " ".join(_fmt(c) for c in surface.F[i, j]) + "\n")
        for i in range(g.n_t - 1):
            for j in range(g.n_lam - 1):
                a, b, c, d = index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]
                if min(a, b, c, d) > 0:
                    fh.write(f"f {a} {b} {c}\n")
                    fh.write(f"f {a} {c} {d}\n")
    return path


def read_mesh_csv(path):
    """Read back a CSV written by export_mesh: returns (t, lam, F)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2:5]
