"""Ready-made configurations for the reference surface plots.

``fig1_*`` are the F1/F2 surfaces over the first two rational P2 solutions.
``fig2_p3_F6`` uses the parameter values of the reference P3 plot; they do not
fit the Lax pair or the R1 symmetry regime, so the preset is marked
unverified and the run is expected to stop with a non-closed-form error.
"""
from __future__ import annotations

from .config import template

_BIG = {"t_min": -30.0, "t_max": 30.0, "lambda_min": -30.0, "lambda_max": 30.0,
        "n_t": 121, "n_lambda": 121, "base_t": 1.0, "base_lambda": 1.0,
        "lambda_exclude": "-0.01:0.01"}
# t^3 + 4 = 0 for the second rational solution
_ROOT = -(4.0 ** (1.0 / 3.0))


def _fig1(n: int, family: int) -> dict:
    t_ex = "-0.01:0.01" if n == 1 else f"{_ROOT - 0.01:.6f}:{_ROOT + 0.01:.6f}, -0.01:0.01"
    return {
        "run": {"label": f"rational P2 n={n}, F{family}"},
        "equation": {"name": "P2", "alpha": float(n)},
        "solution": {"kind": "rational", "n": n},
        "grid": dict(_BIG, t_exclude=t_ex),
        "symmetry": {"alpha1": 1.0 if family == 1 else 0.0, "alpha2": 1.0 if family == 2 else 0.0},
    }


PRESETS = {
    "fig1_n1_F1": _fig1(1, 1),
    "fig1_n1_F2": _fig1(1, 2),
    "fig1_n2_F1": _fig1(2, 1),
    "fig1_n2_F2": _fig1(2, 2),
    "fig2_p3_F6": {
        "run": {"label": "P3 F6 (w_R1), reference parameters", "verified": False,
                "note": "alpha=0 beta=1 gamma=2/5 delta=0 lie outside the family where the P3 pair closes; "
                        "x(t) is an IVP and R starts from x + t x_t"},
        "equation": {"name": "P3", "alpha": 0.0, "beta": 1.0, "gamma": 0.4, "delta": 0.0},
        "solution": {"kind": "ivp", "t0": 1.0, "x0": 1.0, "x_t0": 0.0},
        "grid": {"t_min": 0.5, "t_max": 2.5, "n_t": 41, "lambda_min": -30.0, "lambda_max": 30.0,
                 "n_lambda": 121, "base_t": 1.0, "base_lambda": 1.0, "lambda_exclude": "-0.01:0.01"},
        "symmetry": {"alpha2": 0.0, "alpha6": 1.0, "R": "ivp", "R0": 1.0, "R_t0": 1.4,
                     "method": "quadrature"},
    },
}


def preset_text(name: str | None) -> str:
    if name is None:
        return template()
    return template(PRESETS[name])
