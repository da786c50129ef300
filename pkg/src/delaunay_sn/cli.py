"""Command-line front end: ``delaunay-sn <command> [flags]``.

Exit status: 0 on success (verify: pass), 1 when verify fails its tolerance,
2 on invalid input, 3 when a numerical method does not converge.  Errors are
reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import curves, oracle, solver
from .exceptions import DelaunayError, NonConvergent
from .profile import (
    CmcParams,
    DelaunayTag,
    classify,
    contact_constant,
    critical_constants,
    profile_interval,
)
from .width import adjusted_width, flower_width, width

log = logging.getLogger("delaunay_sn")

COMMANDS = ("classify", "width", "domain", "curve", "mesh", "solve", "sweep", "verify", "flower")

# numeric settings and their types
_NUMERIC = {"n": int, "h": float, "C": float, "target_width": float, "k": int,
            "periods": int, "grid_size": int, "samples": int, "tol": float,
            "margin": float, "ds": float, "azimuthal": int, "max_denominator": int,
            "target_beta": float}

_DEFAULTS = {"periods": 1, "grid_size": 512, "samples": 41, "tol": 1e-4, "margin": 0.02,
             "ds": 1e-3, "azimuthal": 64, "max_denominator": 64,
             "normal_convention": "fixed", "pole": "0,0,0,-1"}

_LITERAL = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d*)?|k))?$")


class UsageError(ValueError):
    pass


def parse_number(text, k=None) -> float:
    """Plain decimal or a multiple of pi: ``pi``, ``pi/2``, ``2pi/k`` (k from ``--k``)."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    raw = str(text).strip()
    m = _LITERAL.match(raw.replace(" ", ""))
    if m:
        coef, den = m.groups()
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        if den is None:
            d = 1.0
        elif den == "k":
            if k is None:
                raise UsageError(f"{raw!r} needs --k")
            d = float(k)
        else:
            d = float(den)
        return c * math.pi / d
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"cannot parse number {raw!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"non-finite number {raw!r}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delaunay-sn",
        description="Rotational constant mean curvature hypersurfaces in S^n.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON file of flag values; flags override it")
    parser.add_argument("--n")
    parser.add_argument("--h")
    parser.add_argument("--C", dest="C")
    parser.add_argument("--target-width", dest="target_width")
    parser.add_argument("--k")
    parser.add_argument("--periods")
    parser.add_argument("--grid-size", dest="grid_size")
    parser.add_argument("--samples", help="sweep: number of C values")
    parser.add_argument("--tol", help="verify: pass tolerance on max |H - h|")
    parser.add_argument("--margin", help="verify: excluded fraction at each piece end")
    parser.add_argument("--ds", help="verify: s-spacing of the sampled curve")
    parser.add_argument("--azimuthal", help="mesh: samples around the circle factor")
    parser.add_argument("--pole", help="mesh: stereographic pole as x,y,z,w")
    parser.add_argument("--max-denominator", dest="max_denominator")
    parser.add_argument("--target-beta", dest="target_beta", help="flower: solve h for this beta")
    parser.add_argument("--normal-convention", dest="normal_convention",
                        choices=("fixed", "continuous"))
    parser.add_argument("--format", choices=("csv", "json", "obj"))
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    return parser


_ALIASES = {"targetW": "target_width", "outPath": "out"}
_CONFIG_KEYS = set(_NUMERIC) | {"command", "format", "out", "pole", "normal_convention"}


def _config_key(key: str) -> str:
    """Config files may use flag spelling (grid-size), snake_case or camelCase (gridSize)."""
    key = _ALIASES.get(key, key)
    return re.sub(r"(?<=[a-z])([A-Z])", lambda m: "_" + m.group(1).lower(), key).replace("-", "_")


def _resolve(args) -> dict:
    cfg = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {str(args.config)!r}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        cfg = {_config_key(key): v for key, v in cfg.items()}
        unknown = sorted(set(cfg) - _CONFIG_KEYS)
        if unknown:
            raise UsageError("unknown config keys: " + ", ".join(unknown))
    merged = dict(_DEFAULTS)
    merged.update({key: v for key, v in cfg.items() if v is not None})
    merged.update({key: v for key, v in vars(args).items() if v is not None and key != "config"})
    # k first: other numbers may refer to it
    if merged.get("k") is not None:
        merged["k"] = _as_int("k", merged["k"])
    for key, kind in _NUMERIC.items():
        if key == "k" or merged.get(key) is None:
            continue
        merged[key] = _as_int(key, merged[key]) if kind is int else parse_number(merged[key], merged.get("k"))
    if not 64 <= merged["grid_size"] <= 10**6:
        raise UsageError("grid-size must lie in [64, 1e6]")
    if merged["periods"] < 1:
        raise UsageError("periods must be >= 1")
    if merged.get("out") is not None:
        merged["out"] = Path(merged["out"])
    return merged


def _as_int(name, value) -> int:
    v = parse_number(value) if not isinstance(value, int) else value
    if int(v) != v:
        raise UsageError(f"--{name.replace('_', '-')} must be an integer")
    return int(v)


def _need(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise UsageError(f"{cfg['command']}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _params(cfg) -> CmcParams:
    _need(cfg, "n", "h", "C")
    try:
        return CmcParams(cfg["n"], cfg["h"], cfg["C"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(cfg, text, binary=False):
    out = cfg.get("out")
    if out is None:
        sys.stdout.write(text.decode() if binary else text)
        return
    if binary:
        out.write_bytes(text)
    else:
        out.write_text(text)
    log.info("wrote %s", out)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg):
    p = _params(cfg)
    t = classify(p, cfg["normal_convention"])
    cc = critical_constants(p.n, abs(p.h))
    fields = " ".join(f"{name}={format(getattr(cc, name), '.17g')}" for name in ("s0", "sh", "Ch", "ChNeg"))
    _emit(cfg, f"{t.tag.value} {fields}\n")
    return 0


def cmd_width(cfg):
    p = _params(cfg)
    rec = {"n": p.n, "h": p.h, "C": p.C, "W": None, "errEst": None, "endpoints": None,
           "Wtilde": None, "branch": None}
    if p.is_flower:
        res = flower_width(p.n, abs(p.h))
        rec.update(beta=res.W, errEst=res.err_est, endpoints=list(res.endpoints_handled))
    else:
        res = width(p)
        rec.update(W=res.W, errEst=res.err_est, endpoints=list(res.endpoints_handled))
    if p.h >= 0:
        adj = adjusted_width(p.n, p.h, p.C)
        rec.update(Wtilde=adj.Wtilde, branch=adj.branch)
    _emit(cfg, _dumps(rec))
    return 0


def cmd_domain(cfg):
    p = _params(cfg)
    iv = profile_interval(p)
    rec = {"n": p.n, "h": p.h, "C": p.C, "sLo": iv.s_lo, "sHi": iv.s_hi,
           "loKind": iv.lo_kind.value, "hiKind": iv.hi_kind.value, "sHat": iv.s_hat,
           "type": classify(p).tag.value}
    _emit(cfg, _dumps(rec))
    return 0


def _curve(cfg) -> curves.GeneratingCurve:
    p = _params(cfg)
    tag = classify(p).tag
    if tag is DelaunayTag.STATIC_TORUS:
        return curves.static_torus_curve(p.n, p.h, cfg["grid_size"])
    if tag is DelaunayTag.NEG_STATIC_TORUS:
        return curves.static_torus_curve(p.n, -p.h, cfg["grid_size"])
    return curves.assemble_global(p, cfg["periods"], grid_size=cfg["grid_size"])


def cmd_curve(cfg):
    fmt = cfg.get("format") or "csv"
    c = _curve(cfg)
    _emit(cfg, curves.export_curve(c, fmt), binary=True)
    return 0


def cmd_mesh(cfg):
    fmt = cfg.get("format") or "obj"
    if fmt != "obj":
        raise UsageError("mesh output format must be obj")
    p = _params(cfg)
    if p.n != 3:
        raise UsageError("OBJ export needs n = 3")
    try:
        pole = [float(x) for x in str(cfg["pole"]).split(",")]
    except ValueError:
        raise UsageError(f"bad --pole {cfg['pole']!r}") from None
    if len(pole) != 4 or not any(pole):
        raise UsageError("--pole needs four comma-separated numbers, not all zero")
    m = curves.mesh(_curve(cfg), cfg["azimuthal"], pole)
    _emit(cfg, m.to_obj())
    return 0


def cmd_solve(cfg):
    _need(cfg, "n", "h")
    if cfg.get("target_width") is None and cfg.get("k") is None:
        raise UsageError("solve: give --target-width or --k")
    sol = solver.find_embedded(cfg["n"], cfg["h"], cfg.get("k"), cfg.get("target_width"),
                               grid_size=max(cfg["grid_size"], 1024))
    _emit(cfg, _dumps(sol.to_dict()))
    return 0


def cmd_sweep(cfg):
    _need(cfg, "n", "h")
    n, h = cfg["n"], cfg["h"]
    if h < 0:
        raise UsageError("sweep expects h >= 0")
    count = cfg["samples"]
    if count < 1:
        raise UsageError("samples must be >= 1")
    lo, hi = -contact_constant(n, -h), contact_constant(n, h)
    grid = np.linspace(lo, hi, count + 2)[1:-1]
    lines = ["C,type,W,Wtilde,branch,errEst"]
    for C in grid:
        p = CmcParams(n, h, float(C))
        tag = classify(p).tag.value
        W = "" if p.is_flower else format(width(p).W, ".17g")
        adj = adjusted_width(n, h, float(C))
        lines.append(",".join([format(C, ".17g"), tag, W, format(adj.Wtilde, ".17g"),
                               adj.branch, format(adj.err_est, ".17g")]))
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_verify(cfg):
    p = _params(cfg)
    tag = classify(p).tag
    if tag in (DelaunayTag.STATIC_TORUS, DelaunayTag.NEG_STATIC_TORUS):
        c = _curve(cfg)
        hs = p.h if tag is DelaunayTag.STATIC_TORUS else -p.h
        p = CmcParams(p.n, hs, contact_constant(p.n, hs))
    else:
        c = oracle.uniform_global(p, cfg["ds"], cfg["periods"])
    rep = oracle.mean_curvature_fd(c, p, margin=cfg["margin"],
                                   normal_convention=cfg["normal_convention"])
    rec = rep.to_dict(cfg["tol"])
    rec.update(n=p.n, h=p.h, C=p.C, type=tag.value, ds=cfg["ds"])
    _emit(cfg, _dumps(rec))
    return 0 if rep.passed(cfg["tol"]) else 1


def cmd_flower(cfg):
    _need(cfg, "n")
    n = cfg["n"]
    if cfg.get("target_beta") is not None:
        h = solver.solve_flower_beta(n, cfg["target_beta"])
    else:
        _need(cfg, "h")
        h = abs(cfg["h"])
    fc = solver.flower_closure(n, h, cfg["max_denominator"])
    rec = {"n": n, "h": h, "C": -h / (n - 1), "beta": fc.beta, "ratio": fc.ratio,
           "rational": None if fc.rational is None else f"{fc.rational.numerator}/{fc.rational.denominator}",
           "petals": fc.petals, "Wtilde": math.pi - fc.beta, "errEst": fc.err_est}
    _emit(cfg, _dumps(rec))
    return 0


_HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _configure_logging():
    level = os.environ.get("DELAUNAY_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        log.debug("config %s", cfg)
        return _HANDLERS[cfg["command"]](cfg)
    except NonConvergent as exc:
        return _fail(type(exc).__name__, str(exc), 3)
    except (DelaunayError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    except ArithmeticError as exc:
        return _fail(type(exc).__name__, str(exc), 3)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
