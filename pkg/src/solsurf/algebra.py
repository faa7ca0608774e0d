"""2x2 matrix helpers for sl(2,R).

Matrices are numpy arrays with trailing shape (2, 2) and complex dtype, so a
whole grid of matrices can be pushed through the same functions.  Reality and
tracelessness are only checked where a matrix is turned into basis
coordinates (``decompose``) or fed to the Killing form.
"""
from __future__ import annotations

import numpy as np

from .errors import NonRealComponents, NotTraceless, SingularMatrix

STRUCT_TOL = 1e-12
SINGULAR_TOL = 1e-14

E1 = np.array([[1, 0], [0, -1]], dtype=complex)
E2 = np.array([[0, 1], [1, 0]], dtype=complex)
E3 = np.array([[0, -1], [1, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
BASIS = (E1, E2, E3)

# Killing metric in the (e1, e2, e3) basis, signature (2, 1).
METRIC = np.diag([1.0, 1.0, -1.0])

# Overall sign of the Killing form.  Only the CLI fault-injection switch
# changes it, to prove that the verification suite notices.
KILLING_SIGN = 1.0


def mat(a11, a12, a21, a22) -> np.ndarray:
    """Stack four (broadcastable) entry arrays into a (..., 2, 2) complex array."""
    a11, a12, a21, a22 = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a11, a12, a21, a22)))
    out = np.empty(a11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a21
    out[..., 1, 1] = a22
    return out


def commutator(X, Y):
    """XY - YX.  Works for arrays and for matrix jets."""
    return X @ Y - Y @ X


def trace(X: np.ndarray) -> np.ndarray:
    return X[..., 0, 0] + X[..., 1, 1]


def det(X: np.ndarray) -> np.ndarray:
    return X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]


def _components(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    c1 = X[..., 0, 0]
    c2 = 0.5 * (X[..., 0, 1] + X[..., 1, 0])
    c3 = 0.5 * (X[..., 1, 0] - X[..., 0, 1])
    return np.stack([c1, c2, c3], axis=-1)


def _scale(X: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.max(np.abs(X), axis=(-2, -1)))


def decompose(X, tol: float = STRUCT_TOL, check: bool = True) -> np.ndarray:
    """Real basis components (c1, c2, c3) of a traceless matrix.

    The result has shape (..., 3).  With ``check=True`` the trace and the
    imaginary parts are tested against ``tol`` relative to max(1, |X|).
    """
    X = np.asarray(X, dtype=complex)
    comps = _components(X)
    if check:
        sc = _scale(X)
        tr = np.abs(trace(X))
        if np.any(tr > tol * sc):
            raise NotTraceless(f"trace {np.max(tr):.3e} exceeds {tol:g}")
        im = np.max(np.abs(comps.imag), axis=-1)
        if np.any(im > tol * sc):
            raise NonRealComponents(f"imaginary part {np.max(im):.3e} exceeds {tol:g}")
    return comps.real.copy()


def reconstruct(c) -> np.ndarray:
    """c1 e1 + c2 e2 + c3 e3 for components with trailing axis of length 3."""
    c = np.asarray(c, dtype=float)
    c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
    return mat(c1, c2 - c3, c2 + c3, -c1)


def killing(X, Y, tol: float = STRUCT_TOL, check: bool = True) -> np.ndarray:
    """Killing form 1/2 tr(XY) on sl(2,R)."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if check:
        for M in (X, Y):
            im = np.max(np.abs(_components(M).imag), axis=-1)
            if np.any(im > tol * _scale(M)):
                raise NonRealComponents(f"imaginary part {np.max(im):.3e} exceeds {tol:g}")
    return KILLING_SIGN * 0.5 * np.real(trace(X @ Y))


def killing_components(a, b) -> np.ndarray:
    """Killing form evaluated on basis components: a^T diag(1,1,-1) b."""
    a = np.asarray(a)
    b = np.asarray(b)
    return KILLING_SIGN * (a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2])


def inverse(X, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Inverse through the adjugate; raises SingularMatrix for |det| <= tol."""
    X = np.asarray(X, dtype=complex)
    d = det(X)
    if np.any(np.abs(d) <= tol):
        raise SingularMatrix(f"determinant {np.min(np.abs(d)):.3e}")
    adj = mat(X[..., 1, 1], -X[..., 0, 1], -X[..., 1, 0], X[..., 0, 0])
    return adj / d[..., None, None]


def conjugate(Phi: np.ndarray, X: np.ndarray, Phi_inv: np.ndarray | None = None) -> np.ndarray:
    """Phi^{-1} X Phi."""
    if Phi_inv is None:
        Phi_inv = inverse(Phi)
    return Phi_inv @ X @ Phi
