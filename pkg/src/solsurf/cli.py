"""Command line front end.

Exit codes: 0 success, 1 failed verification, 2 bad configuration (or a
configuration that puts the computation on a singular set), 3 solution hit a
pole inside the requested range, 4 tangent fields that do not integrate to a
surface.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import algebra, config, verify
from .errors import ConfigError, MissingRSolution, NonClosedForm, SolsurfError, WrongParameterRegime
from .frame import (export_mesh, immersion_closed_form, immersion_quadrature, integrate_frame,
                    tangent_fields)
from .geometry import curvature_evaluator, surface_geometry, umbilic_locus
from .laxpair import lax_pair
from .painleve import (AiryP2Host, PainleveState, RationalP2Host, Trajectory, airy_p2, integrate,
                       rational_p2, write_columns)
from .presets import PRESETS, preset_text
from .symmetry import closed_form_r, solve_determining

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_POLE, EXIT_NONCLOSED = 0, 1, 2, 3, 4


class PoleTruncated(SolsurfError):
    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


# pipeline pieces ----------------------------------------------------------------

def initial_state(cfg: config.RunConfig) -> PainleveState:
    sol = cfg["solution"]
    if sol["kind"] == "rational":
        return rational_p2(sol["n"], sol["t0"])
    if sol["kind"] == "airy":
        return airy_p2(sol["epsilon"], sol["t0"])
    return PainleveState(sol["t0"], sol["x0"], sol["x_t0"])


def build_host(cfg: config.RunConfig, t_lo: float, t_hi: float):
    """Solution covering [t_lo, t_hi]; closed form when the config names one."""
    sol = cfg["solution"]
    if sol["kind"] == "rational":
        return RationalP2Host(sol["n"], (t_lo, t_hi))
    if sol["kind"] == "airy":
        return AiryP2Host(sol["epsilon"], (t_lo, t_hi))
    params = cfg.params
    ic = initial_state(cfg)
    pieces = []
    for end in (min(t_lo, ic.t), max(t_hi, ic.t)):
        if end == ic.t:
            continue
        tr = integrate(params, ic, end, tol=sol["rtol"], atol=sol["atol"])
        if tr.pole_flag is not None:
            raise PoleTruncated(f"solution leaves the pole threshold near t = {tr.pole_flag:.6g}", tr)
        pieces.append(tr)
    if not pieces:
        raise ConfigError("[grid] t range is a single point")
    if len(pieces) == 1:
        return pieces[0]
    back, fwd = pieces
    t = np.concatenate([back.t[::-1][:-1], fwd.t])
    x = np.concatenate([back.x[::-1][:-1], fwd.x])
    xt = np.concatenate([back.x_t[::-1][:-1], fwd.x_t])
    return Trajectory(t, x, xt, params)


def build_r(cfg: config.RunConfig, host, t_lo: float, t_hi: float):
    sym, sol = cfg["symmetry"], cfg["solution"]
    kind = sym["R"]
    if kind == "none":
        if sym["alpha6"]:
            raise ConfigError("[symmetry] R: alpha6 needs an R solution (R = none)")
        return None
    params = cfg.params
    try:
        if kind == "bessel":
            if not (sol["kind"] == "rational" and sol["n"] == 1):
                raise ConfigError("[symmetry] R: bessel needs solution.kind = rational with n = 1")
            return closed_form_r("BesselAlpha1", params)
        if kind == "airy":
            if sol["kind"] != "airy":
                raise ConfigError("[symmetry] R: airy needs solution.kind = airy")
            return closed_form_r("AiryEps", params, epsilon=sol["epsilon"])
        if kind in ("p3_r1", "p3_r2"):
            return closed_form_r("P3ScaleR1" if kind == "p3_r1" else "P3ScaleR2", params, host)
    except WrongParameterRegime as exc:
        raise ConfigError(f"[symmetry] R: {exc}") from exc
    t0 = sol["t0"]
    nodes = np.linspace(min(t_lo, t0), max(t_hi, t0), 801)
    t_eval = np.concatenate([[t0], nodes[nodes != t0]])
    return solve_determining(params, host, sym["R0"], sym["R_t0"], t_eval, tol=sol["rtol"], atol=sol["atol"])


def _setup(cfg: config.RunConfig):
    grid = cfg.grid
    pair = lax_pair(cfg.params)
    host = build_host(cfg, grid.t_min, grid.t_max)
    custom = cfg.custom
    choice = None if custom is not None else cfg.choice
    r_data = None if custom is not None else build_r(cfg, host, grid.t_min, grid.t_max)
    jets_fn = custom.jets_fn(pair) if custom is not None else None
    return grid, pair, host, choice, r_data, jets_fn


# commands ----------------------------------------------------------------------------

def cmd_solve(cfg: config.RunConfig, out: Path) -> int:
    sol = cfg["solution"]
    ic = initial_state(cfg)
    t_eval = np.linspace(ic.t, sol["t_end"], sol["samples"])
    tr = integrate(cfg.params, ic, sol["t_end"], tol=sol["rtol"], atol=sol["atol"], t_eval=t_eval)
    keep = np.isin(tr.t, t_eval)
    path = out / "trajectory.csv"
    write_columns(path, ("t", "x", "x_t"), (tr.t[keep], tr.x[keep], tr.x_t[keep]))
    if tr.pole_flag is not None:
        print(f"pole: |x| or |x_t| passed the threshold near t = {tr.pole_flag:.6g}; "
              f"{int(keep.sum())} of {len(t_eval)} samples written to {path}", file=sys.stderr)
        return EXIT_POLE
    print(f"wrote {path} ({len(t_eval)} samples)")
    return EXIT_OK


def cmd_surface(cfg: config.RunConfig, out: Path) -> int:
    grid, pair, host, choice, r_data, jets_fn = _setup(cfg)
    sym = cfg["symmetry"]
    frame = integrate_frame(pair, host, grid, cfg["grid"]["frame_tol"])
    method = sym["method"]
    if method == "auto":
        method = "quadrature" if jets_fn is not None or choice.alpha6 else "closed_form"
    if method == "closed_form":
        if jets_fn is not None:
            raise ConfigError("[symmetry] method: hand-written A, B have no closed form; use quadrature")
        surface = immersion_closed_form(frame, pair, choice)
    else:
        A, B, dA, dB, _ = tangent_fields(frame, pair, choice, r_data, check_tol=sym["check_tol"], jets_fn=jets_fn)
        surface = immersion_quadrature(frame, A, B, dA, dB)
    paths = [export_mesh(surface, out / "surface.obj", "OBJ"), export_mesh(surface, out / "surface.csv", "CSV")]
    valid = int(surface.valid.sum())
    print(f"wrote {paths[0]} and {paths[1]} ({valid} of {surface.valid.size} nodes, method {method})")
    return EXIT_OK


def _geometry(cfg: config.RunConfig):
    grid, pair, host, choice, r_data, jets_fn = _setup(cfg)
    t_nodes = grid.t_nodes[grid.t_keep]
    lam_nodes = grid.lam_nodes[grid.lam_keep]
    geo = surface_geometry(pair, host, choice, t_nodes, lam_nodes, r_data, jets_fn=jets_fn)
    return geo, curvature_evaluator(pair, host, choice, r_data, jets_fn=jets_fn)


def cmd_geometry(cfg: config.RunConfig, out: Path) -> int:
    geo, _ = _geometry(cfg)
    path = geo.to_csv(out / "geometry.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_umbilic(cfg: config.RunConfig, out: Path) -> int:
    geo, ev = _geometry(cfg)
    pts = umbilic_locus(geo.disc, geo.t, geo.lam, ev, tol=cfg["umbilic"]["tol"])
    t = np.array([p[0] for p in pts])
    lam = np.array([p[1] for p in pts])
    disc = ev(t, lam) if len(pts) else np.zeros(0)
    path = out / "umbilic.csv"
    write_columns(path, ("t", "lambda", "H2_minus_K"), (t, lam, disc))
    print(f"wrote {path} ({len(pts)} points)")
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    names = verify.SUITES if suite == "all" else (suite,)
    failed = False
    for name in names:
        try:
            checks = verify.REGISTRY[name]()
        except Exception as exc:  # a crashing suite is reported as a failed check
            checks = [verify.Check(f"{name}.raised_{type(exc).__name__}", float("nan"), 0.0)]
        for c in checks:
            print(c.line())
            failed |= not c.passed
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_template(preset: str | None, output: str | None) -> int:
    text = preset_text(preset)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solsurf", description="Soliton surfaces from Painleve Lax pairs.")
    ap.add_argument("--fault", choices=["killing_sign"], help=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "integrate the equation and write trajectory.csv"),
                       ("surface", "build the immersion and write surface.obj / surface.csv"),
                       ("geometry", "fundamental forms and curvatures on the grid (geometry.csv)"),
                       ("umbilic", "points where H^2 = K (umbilic.csv)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="INI file (see the template command)")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
    p = sub.add_parser("verify", help="run the built-in identity checks")
    p.add_argument("--suite", default="all", choices=verify.SUITES + ("all",))
    p = sub.add_parser("template", help="print a config with every default spelled out")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    return ap


COMMANDS = {"solve": cmd_solve, "surface": cmd_surface, "geometry": cmd_geometry, "umbilic": cmd_umbilic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    algebra.KILLING_SIGN = -1.0 if args.fault == "killing_sign" else 1.0
    if args.command == "verify":
        return cmd_verify(args.suite)
    if args.command == "template":
        return cmd_template(args.preset, args.output)
    try:
        cfg = config.load(args.config)
        if not cfg["run"]["verified"]:
            print(f"note: {cfg.source} is marked unverified: {cfg['run']['note']}", file=sys.stderr)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PoleTruncated as exc:
        print(f"pole: {exc}", file=sys.stderr)
        return EXIT_POLE
    except NonClosedForm as exc:
        print(f"not a surface: {exc}", file=sys.stderr)
        return EXIT_NONCLOSED
    except (MissingRSolution, WrongParameterRegime) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolsurfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
