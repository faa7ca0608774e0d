"""Run configuration: INI parsing, validation, expressions and templates.

Every key the program understands is listed in ``SCHEMA`` together with its
default, so ``template()`` can write a file with all physics defaults spelled
out.  Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr

from . import jets
from .errors import ConfigError
from .frame import GridSpec
from .jets import Jet, mat2
from .laxpair import LaxPair, LaxPoint, point_jets
from .painleve import EQUATIONS, PainleveParams
from .symmetry import SymmetryChoice

SOLUTION_KINDS = ("ivp", "rational", "airy")
R_KINDS = ("none", "ivp", "bessel", "airy", "p3_r1", "p3_r2")
METHODS = ("auto", "closed_form", "quadrature")

# section -> key -> (type, default, comment)
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {
        "label": (str, "", "name of the run"),
        "verified": (bool, True, "false marks a configuration whose output has not been checked"),
        "note": (str, "", ""),
    },
    "equation": {
        "name": (str, "P2", "P1, P2 or P3"),
        "alpha": (float, 1.0, ""),
        "beta": (float, 0.0, ""),
        "gamma": (float, 0.0, ""),
        "delta": (float, 0.0, ""),
    },
    "solution": {
        "kind": (str, "rational", "ivp | rational (P2, n = alpha) | airy (P2, alpha = -epsilon/2)"),
        "n": (int, 1, "rational solution index, 1 or 2"),
        "epsilon": (int, 1, "Airy branch, +1 or -1"),
        "t0": (float, 1.0, "initial time"),
        "x0": (float, 1.0, "x(t0), used when kind = ivp"),
        "x_t0": (float, -1.0, "x_t(t0), used when kind = ivp"),
        "t_end": (float, 10.0, "end of the solve interval"),
        "samples": (int, 201, "equally spaced output times for solve"),
        "rtol": (float, 1e-10, ""),
        "atol": (float, 1e-12, ""),
    },
    "grid": {
        "t_min": (float, 0.5, ""),
        "t_max": (float, 2.0, ""),
        "n_t": (int, 31, ""),
        "lambda_min": (float, 0.5, ""),
        "lambda_max": (float, 2.0, ""),
        "n_lambda": (int, 31, ""),
        "base_t": (float, 1.0, "frame normalisation Phi = I here (snapped to a node)"),
        "base_lambda": (float, 1.0, ""),
        "t_exclude": (str, "", "comma separated lo:hi bands left out of the grid"),
        "lambda_exclude": (str, "", ""),
        "frame_tol": (float, 1e-10, "relative tolerance of the frame integration"),
    },
    "symmetry": {
        "alpha1": (float, 0.0, "weight r(t) applies to this term"),
        "alpha2": (float, 1.0, "weight s(lam) applies to this term"),
        "alpha3": (float, 0.0, ""),
        "alpha4": (float, 0.0, ""),
        "alpha5": (float, 0.0, ""),
        "alpha6": (float, 0.0, "needs R below"),
        "r": (str, "1", "expression in t"),
        "s": (str, "1", "expression in lam"),
        "R": (str, "none", "none | ivp | bessel | airy | p3_r1 | p3_r2"),
        "R0": (float, 1.0, "R at solution.t0 when R = ivp"),
        "R_t0": (float, 0.0, ""),
        "A": (str, "", "optional: a11; a12; a21; a22 in t, lam, x, x_t (replaces the combination)"),
        "B": (str, "", ""),
        "method": (str, "auto", "auto | closed_form | quadrature"),
        "check_tol": (float, 1e-6, "largest accepted scaled deformation residual"),
    },
    "umbilic": {
        "tol": (float, 1e-8, "bisection stops once |H^2 - K| is below this"),
    },
}

_SYMBOLS = {name: sp.Symbol(name) for name in ("t", "lam", "x", "x_t")}
_JET_FUNCS = {"exp": jets.exp, "log": jets.log, "sqrt": jets.sqrt, "sin": jets.sin, "cos": jets.cos}


def _convert(section: str, key: str, raw: str, typ):
    where = f"[{section}] {key}"
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "yes", "true", "on"):
                return True
            if low in ("0", "no", "false", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(sp.sympify(raw, locals={}))
        return raw
    except (ValueError, TypeError, sp.SympifyError) as exc:
        raise ConfigError(f"{where}: cannot read {raw!r} as {typ.__name__}") from exc


def compile_expr(text: str, allowed: tuple[str, ...], where: str):
    """Parse ``text`` with sympy and return a function of the allowed symbols.

    The function works on floats, arrays and jets; constants are broadcast
    against the first argument.
    """
    try:
        expr = parse_expr(text, local_dict={k: _SYMBOLS[k] for k in _SYMBOLS}, evaluate=True)
    except Exception as exc:  # sympy raises a zoo of exception types here
        raise ConfigError(f"{where}: cannot parse {text!r}") from exc
    free = {s.name for s in expr.free_symbols}
    extra = free - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown symbol(s) {sorted(extra)}; allowed {list(allowed)}")
    args = [_SYMBOLS[a] for a in allowed]
    fn = sp.lambdify(args, expr, modules=[_JET_FUNCS, "math"])

    def call(*vals):
        out = fn(*vals)
        if isinstance(out, Jet) or np.ndim(out):
            return out
        return vals[0] * 0 + float(out)

    call.expr = expr
    return call


def _bands(text: str, where: str) -> tuple:
    bands = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        try:
            lo, hi = (float(v) for v in part.split(":"))
        except ValueError as exc:
            raise ConfigError(f"{where}: band {part!r} is not lo:hi") from exc
        if hi < lo:
            raise ConfigError(f"{where}: band {part!r} has hi < lo")
        bands.append((lo, hi))
    return tuple(bands)


@dataclass
class CustomTangents:
    """Hand-written (A, B) entries evaluated on jets."""

    A: tuple
    B: tuple

    def jets_fn(self, pair: LaxPair):
        def fn(p: LaxPoint):
            T, Lam, X, Xt = point_jets(pair, p, (1, 1, 0))
            return (mat2(*(e(T, Lam, X, Xt) for e in self.A)),
                    mat2(*(e(T, Lam, X, Xt) for e in self.B)))
        return fn


@dataclass
class RunConfig:
    values: dict
    source: str = "<defaults>"

    def __getitem__(self, item):
        return self.values[item]

    @property
    def params(self) -> PainleveParams:
        e = self.values["equation"]
        return PainleveParams(e["name"], e["alpha"], e["beta"], e["gamma"], e["delta"])

    @property
    def grid(self) -> GridSpec:
        g = self.values["grid"]
        try:
            return GridSpec(g["t_min"], g["t_max"], g["n_t"], g["lambda_min"], g["lambda_max"], g["n_lambda"],
                            g["base_t"], g["base_lambda"], _bands(g["t_exclude"], "[grid] t_exclude"),
                            _bands(g["lambda_exclude"], "[grid] lambda_exclude"))
        except ValueError as exc:
            raise ConfigError(f"[grid] {exc}") from exc

    @property
    def choice(self) -> SymmetryChoice:
        s = self.values["symmetry"]
        r = None if s["r"].strip() == "1" else compile_expr(s["r"], ("t",), "[symmetry] r")
        w = None if s["s"].strip() == "1" else compile_expr(s["s"], ("lam",), "[symmetry] s")
        try:
            return SymmetryChoice(*(s[f"alpha{k}"] for k in range(1, 7)), r=r, s=w)
        except ValueError as exc:
            raise ConfigError(f"[symmetry] alpha1..alpha6: {exc}") from exc

    @property
    def custom(self) -> CustomTangents | None:
        s = self.values["symmetry"]
        if not s["A"].strip() and not s["B"].strip():
            return None
        entries = []
        for key in ("A", "B"):
            parts = [p.strip() for p in s[key].split(";")]
            if len(parts) != 4 or not all(parts):
                raise ConfigError(f"[symmetry] {key}: expected four entries a11; a12; a21; a22")
            entries.append(tuple(compile_expr(p, ("t", "lam", "x", "x_t"), f"[symmetry] {key}") for p in parts))
        return CustomTangents(*entries)


def _validate(values: dict) -> None:
    e = values["equation"]
    if e["name"] not in EQUATIONS:
        raise ConfigError(f"[equation] name: unknown equation {e['name']!r}; expected one of {list(EQUATIONS)}")
    sol = values["solution"]
    if sol["kind"] not in SOLUTION_KINDS:
        raise ConfigError(f"[solution] kind: {sol['kind']!r} not in {list(SOLUTION_KINDS)}")
    if sol["kind"] in ("rational", "airy") and e["name"] != "P2":
        raise ConfigError(f"[solution] kind: {sol['kind']} solutions exist for P2 only")
    if sol["kind"] == "rational":
        if sol["n"] not in (1, 2):
            raise ConfigError("[solution] n: must be 1 or 2")
        if e["alpha"] != sol["n"]:
            raise ConfigError(f"[equation] alpha: rational solution n={sol['n']} needs alpha = {sol['n']}")
    if sol["kind"] == "airy":
        if sol["epsilon"] not in (1, -1):
            raise ConfigError("[solution] epsilon: must be +1 or -1")
        if e["alpha"] != -sol["epsilon"] / 2:
            raise ConfigError(f"[equation] alpha: Airy branch epsilon={sol['epsilon']} needs alpha = "
                              f"{-sol['epsilon'] / 2}")
    if sol["samples"] < 2:
        raise ConfigError("[solution] samples: need at least 2")
    s = values["symmetry"]
    if s["R"] not in R_KINDS:
        raise ConfigError(f"[symmetry] R: {s['R']!r} not in {list(R_KINDS)}")
    if s["method"] not in METHODS:
        raise ConfigError(f"[symmetry] method: {s['method']!r} not in {list(METHODS)}")


def parse(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None,
                                   default_section="__none__")
    cp.optionxform = str  # keys are case sensitive (A, B, R)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {sec: {k: spec[1] for k, spec in keys.items()} for sec, keys in SCHEMA.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"[{sec}]: unknown section")
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"[{sec}] {key}: unknown key")
            values[sec][key] = _convert(sec, key, raw, SCHEMA[sec][key][0])
    _validate(values)
    return RunConfig(values, source)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse(text, str(path))


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def template(overrides: dict | None = None) -> str:
    """Config text with every key present; ``overrides`` is {section: {key: value}}."""
    overrides = overrides or {}
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key, (_, default, comment) in keys.items():
            v = overrides.get(sec, {}).get(key, default)
            line = f"{key} = {_render(v)}"
            if comment:
                line = f"{line:<40} # {comment}"
            lines.append(line)
        lines.append("")
    return "\n".join(lines)
