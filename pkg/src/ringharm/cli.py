"""Command-line interface: ``ringharm <subcommand> ...``.

Exit status is 0 on success, 2 when the gate returns NotExists and 1 on
errors.  With ``--json`` every subcommand prints exactly one JSON document.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .affine import affine_modulus
from .capacity import SolverError, modulus_best, solve_capacity
from .construct import (
    ConstructionError,
    HarmonicMapSpec,
    affine_rebalance,
    degenerate_target_map,
    power_shear_map,
    sc_shear_map,
    spec_from_dict,
    spec_to_dict,
)
from .domains import (
    PuncturedDomain,
    RealSlitRing,
    RingDomain,
    Teichmuller,
    domain_from_dict,
    domain_to_dict,
)
from .elliptic import carleman_modulus, conformal_modulus_closed_form, teichmuller_parameter, width_bound
from .gate import existence_verdict
from .svg import render_spec_svg
from .validate import CircleMap, NotHomeomorphism, validate_spec, weitsman_test


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# output

def _num(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, complex):
        return "[" + _num(obj.real) + ", " + _num(obj.imag) + "]"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(args, payload: dict) -> None:
    if args.json:
        sys.stdout.write(dumps(payload) + "\n")
        return
    width = max((len(k) for k in payload), default=0)
    for k, v in payload.items():
        if isinstance(v, (dict, list)):
            v = json.dumps(v, default=str)
        elif isinstance(v, float):
            v = f"{v:.12g}"
        print(f"{k:<{width}}  {v}")


# ---------------------------------------------------------------------------
# input

_NAMES = {"e": math.e, "pi": math.pi, "inf": math.inf}


def _value(text: str) -> float:
    text = text.strip()
    if text in _NAMES:
        return _NAMES[text]
    m = re.fullmatch(r"exp\((.+)\)", text)
    if m:
        return math.exp(_value(m.group(1)))
    m = re.fullmatch(r"sqrt\((.+)\)", text)
    if m:
        return math.sqrt(_value(m.group(1)))
    try:
        return float(text)
    except ValueError:
        raise CliError("cli.schema", f"cannot read a number from {text!r}") from None


def _load_json(text: str, what: str):
    raw = text
    if not text.lstrip().startswith(("{", "[")):
        path = Path(text)
        try:
            if path.exists():
                raw = path.read_text()
        except OSError as exc:
            raise CliError("cli.io", f"cannot read {what}: {exc}") from None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError("cli.malformed_json", f"{what}: {exc}") from None


def parse_domain(tokens) -> RingDomain:
    """A domain from a JSON file, a JSON string, or ``kind key=value ...``."""
    if isinstance(tokens, str):
        tokens = [tokens]
    tokens = list(tokens)
    head = tokens[0]
    shorthand = re.fullmatch(r"[a-z_]+", head) and (len(tokens) > 1 or not Path(head).exists())
    try:
        if shorthand:
            obj = {"type": head}
            for tok in tokens[1:]:
                if "=" not in tok:
                    raise CliError("cli.schema", f"expected key=value, got {tok!r}")
                k, v = tok.split("=", 1)
                if k == "t" and head in ("teichmuller", "grotzsch", "slit_strip"):
                    k = "s"
                obj[k] = _value(v)
            if head == "plane_minus_compact":
                raise CliError("cli.schema", "plane_minus_compact needs a JSON polygon")
            return domain_from_dict(obj)
        return domain_from_dict(_load_json(" ".join(tokens), "domain"))
    except CliError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("domains.schema", f"invalid domain: {exc}") from None


def _solver_kw(args) -> dict:
    kw = {}
    if getattr(args, "levels", None):
        kw["levels"] = args.levels
    if getattr(args, "grid", None):
        kw["spacing"] = 1.0 / args.grid
    if getattr(args, "tol", None):
        kw["tol"] = args.tol
    return kw


# ---------------------------------------------------------------------------
# subcommands

def cmd_modulus(args) -> int:
    d = parse_domain(args.domain)
    kw = _solver_kw(args)
    if args.method == "closed":
        m = conformal_modulus_closed_form(d)
    elif args.method == "grid":
        m = solve_capacity(d, **kw).as_modulus()
    else:
        m = modulus_best(d, **kw)
    out = {"domain": domain_to_dict(d), "modulus": m.value, "abs_error": m.error, "method": m.method}
    if m.note:
        out["note"] = m.note
    out["carleman_bound"] = carleman_modulus(d).value
    _emit(args, out)
    return 0


def cmd_affine(args) -> int:
    d = parse_domain(args.domain)
    res = affine_modulus(d, budget=args.budget, **_solver_kw(args))
    if args.trace:
        res.write_trace(args.trace)
    wb = width_bound(d)
    out = {"domain": domain_to_dict(d), "affine_modulus": res.value.value, "abs_error": res.value.error,
           "status": res.attained, "best_shear": [res.best_shear.real, res.best_shear.imag],
           "evaluations": res.evaluations, "width_bound": wb.value}
    _emit(args, out)
    return 0


def cmd_gate(args) -> int:
    src = parse_domain(args.source)
    tgt = parse_domain(args.target)
    v = existence_verdict(src, tgt, budget=args.budget, conjecture=args.conjecture, **_solver_kw(args))
    _emit(args, v.to_dict())
    return 2 if v.status == "NotExists" else 0


def _as_teichmuller(d: RingDomain) -> float | None:
    if isinstance(d, Teichmuller):
        return d.s
    if isinstance(d, RealSlitRing):
        return teichmuller_parameter(d)
    return None


def build_map(src: RingDomain, tgt: RingDomain, method: str, budget: int = 200, **kw) -> HarmonicMapSpec:
    s, t = _as_teichmuller(src), _as_teichmuller(tgt)
    if method == "auto":
        if isinstance(tgt, PuncturedDomain):
            method = "degenerate"
        elif s is not None and t is not None:
            method = "sc-shear" if t >= s else "power-shear"
        else:
            method = "affine"
    if method in ("sc-shear", "power-shear"):
        if s is None or t is None:
            raise CliError("construct.schema", f"{method} needs Teichmuller source and target")
        return sc_shear_map(s, t) if method == "sc-shear" else power_shear_map(s, t)
    if method == "degenerate":
        if not isinstance(tgt, PuncturedDomain):
            raise CliError("construct.schema", "the degenerate construction needs a punctured target")
        return degenerate_target_map(src, tgt, **kw)
    if method == "affine":
        return affine_rebalance(src, tgt, budget=budget, **kw)
    raise CliError("construct.schema", f"unknown method {method!r}")


def cmd_construct(args) -> int:
    src = parse_domain(args.source)
    tgt = parse_domain(args.target)
    spec = build_map(src, tgt, args.method, budget=args.budget, **_solver_kw(args))
    doc = spec_to_dict(spec)
    if args.out:
        Path(args.out).write_text(dumps(doc) + "\n")
    svg_path = args.grid_svg or args.svg
    if svg_path:
        Path(svg_path).write_text(render_spec_svg(spec, resolution=args.resolution))
    report = validate_spec(spec, samples=args.samples, seed=args.seed)
    params = {k: v for k, v in spec.params.items() if k != "trace"}
    out = {"stages": [s["type"] for s in doc["stages"]], "params": params,
           "validation": report.to_dict()}
    if spec.delegated:
        out["delegated"] = spec.delegated
    if args.out:
        out["map"] = str(args.out)
    _emit(args, out)
    return 0


def cmd_validate(args) -> int:
    doc = _load_json(args.map, "map")
    try:
        spec = spec_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("construct.schema", f"invalid map: {exc}") from None
    report = validate_spec(spec, samples=args.samples, seed=args.seed)
    out = report.to_dict()
    if args.report:
        Path(args.report).write_text(dumps(out) + "\n")
    if args.svg:
        Path(args.svg).write_text(render_spec_svg(spec, resolution=args.resolution))
    _emit(args, out)
    return 0


def circle_map_from_dict(obj: dict) -> CircleMap:
    """Circle maps for the Weitsman test.

    Types: ``identity``, ``rotation`` (``angle``), ``disk_automorphism``
    (``a`` as ``[x, y]``, optional ``angle``), ``power`` (``k``), ``perturbation``
    (``theta + eps sin(n theta)``) and ``samples`` (equispaced unit vectors,
    interpolated linearly in the lifted angle).
    """
    t = obj.get("type")
    if t == "identity":
        return CircleMap(lambda th: np.exp(1j * th))
    if t == "rotation":
        ang = float(obj["angle"])
        return CircleMap(lambda th: np.exp(1j * (th + ang)))
    if t == "disk_automorphism":
        a = complex(*obj["a"])
        if abs(a) >= 1:
            raise ValueError("automorphism parameter must lie in the unit disk")
        ang = float(obj.get("angle", 0.0))
        return CircleMap.from_disk_map(lambda z: np.exp(1j * ang) * (z - a) / (1 - np.conj(a) * z))
    if t == "power":
        k = int(obj["k"])
        return CircleMap(lambda th: np.exp(1j * k * th), "reversing" if k < 0 else "preserving")
    if t == "perturbation":
        eps, n = float(obj["eps"]), int(obj["n"])
        return CircleMap(lambda th: np.exp(1j * (th + eps * np.sin(n * th))))
    if t == "samples":
        pts = np.array([complex(*p) for p in obj["points"]])
        lift = np.unwrap(np.angle(pts))
        m = len(pts)
        grid = 2 * np.pi * np.arange(m + 1) / m
        lift = np.append(lift, lift[-1] + np.angle(pts[0] / pts[-1]))

        def ev(th):
            th = np.mod(th, 2 * np.pi)
            return np.exp(1j * np.interp(th, grid, lift))
        return CircleMap(ev)
    raise ValueError(f"unknown circle map type {t!r}")


def cmd_weitsman(args) -> int:
    obj = _load_json(args.map, "circle map")
    try:
        f = circle_map_from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("validate.schema", f"invalid circle map: {exc}") from None
    try:
        res = weitsman_test(f, args.harmonics)
        out = {"sum01": res.sum01, "bound": res.bound, "passed": res.passed,
               "aliasing_bound": res.aliasing_bound}
    except NotHomeomorphism as exc:
        out = {"passed": False, "error": str(exc), "degree": exc.degree, "shapiro_sum": exc.shapiro_sum}
    _emit(args, out)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling")
    common.add_argument("--tol", type=float, default=None, help="linear solver tolerance")
    common.add_argument("--levels", type=int, default=None, help="grid refinement levels")
    common.add_argument("--grid", type=int, default=None, help="coarsest grid: cells per unit length")
    common.add_argument("--budget", type=int, default=200, help="modulus evaluations for searches")

    p = argparse.ArgumentParser(prog="ringharm", description="Moduli of ring domains and harmonic maps.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("modulus", parents=[common], help="conformal modulus")
    m.add_argument("--domain", nargs="+", required=True)
    m.add_argument("--method", choices=("auto", "closed", "grid"), default="auto")
    m.set_defaults(func=cmd_modulus)

    a = sub.add_parser("affine-modulus", parents=[common], help="affine modulus")
    a.add_argument("--domain", nargs="+", required=True)
    a.add_argument("--trace", default=None, help="CSV trace of the search")
    a.set_defaults(func=cmd_affine)

    g = sub.add_parser("gate", parents=[common], help="existence verdict")
    g.add_argument("--source", nargs="+", required=True)
    g.add_argument("--target", nargs="+", required=True)
    g.add_argument("--conjecture", action="store_true", help="add the conjectured verdict in the gap")
    g.set_defaults(func=cmd_gate)

    c = sub.add_parser("construct", parents=[common], help="build a harmonic homeomorphism")
    c.add_argument("--source", nargs="+", required=True)
    c.add_argument("--target", nargs="+", required=True)
    c.add_argument("--method", choices=("auto", "power-shear", "sc-shear", "degenerate", "affine"),
                   default="auto")
    c.add_argument("--out", default=None, help="write map.json here")
    c.add_argument("--grid-svg", default=None, help="SVG image of a parameter grid")
    c.add_argument("--svg", default=None, help="alias of --grid-svg")
    c.add_argument("--resolution", type=int, default=200)
    c.add_argument("--samples", type=int, default=200)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("validate", parents=[common], help="validate a map.json")
    v.add_argument("--map", required=True)
    v.add_argument("--samples", type=int, default=200)
    v.add_argument("--report", default=None)
    v.add_argument("--svg", default=None)
    v.add_argument("--resolution", type=int, default=200)
    v.set_defaults(func=cmd_validate)

    w = sub.add_parser("weitsman", parents=[common], help="Fourier test of a circle homeomorphism")
    w.add_argument("--map", required=True)
    w.add_argument("--harmonics", type=int, default=256)
    w.set_defaults(func=cmd_weitsman)
    return p


_MODULE_CODES = (
    (SolverError, "capacity.solver"),
    (ConstructionError, "construct.failed"),
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # every failure becomes a coded error and exit status 1
        code = getattr(exc, "code", None)
        if code is None:
            code = next((c for cls, c in _MODULE_CODES if isinstance(exc, cls)), None)
        if code is None:
            code = f"{type(exc).__module__.split('.')[-1]}.{type(exc).__name__}"
        if getattr(args, "json", False):
            sys.stdout.write(dumps({"error": {"code": code, "message": str(exc)}}) + "\n")
        else:
            print(f"error [{code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
