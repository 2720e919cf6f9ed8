"""Command-line front end.

Scene files are JSON::

    {
      "metric": "hyperbolic-half-plane",          # or {"lambda": "<expr>", "domain": [x1min, x1max, x2min, x2max]}
      "signature": "lorentzian",                  # or "riemannian"
      "fields": {"u": "log(x1^2+x2^2)", "w": {"catalog": "maximal-w1"}},
      "surface": "u",                             # default field for graph commands
      "curves": {"alpha": {"x1": "0", "x2": "s", "interval": [0, 1], "improper": [true, false]}},
      "grids": {"g": {"bounds": [-2, 2, 0.5, 3], "resolution": [41, 41]}},
      "problems": {"p": {"boundary": "u", "grid": "g", "exact": "u"}}
    }

Field names that are not defined in the scene resolve to built-in catalog
entries.  Exit status: 0 success, 1 validation or domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import catalog as cat
from .completeness import Curve, curve_length, metric_ratio_scan
from .duality import reconstruct_dual, roundtrip_check
from .errors import MaxgraphError, NonSpacelikeError, SceneError
from .expr import parse
from .fields import ExprField, ScalarField
from .graph import GraphSurface, Signature, invariant_report, residual_maximal, residual_minimal
from .grids import Grid, to_csv, to_json, write_atomic
from .metrics import ConformalMetric, Domain, conformal, preset
from .solver import DirichletProblem, refinement_study, solve_dirichlet


# ---------------------------------------------------------------------------
# scenes

@dataclass
class Scene:
    metric: ConformalMetric | None
    metric_spec: object
    signature: Signature | None
    fields: dict
    field_specs: dict
    curves: dict
    grids: dict
    problems: dict
    surface: str | None = None
    raw: dict = field(default_factory=dict)

    def field(self, name):
        if name in self.fields:
            return self.fields[name]
        if name in cat.NAMES:
            return cat.get_example(name).u
        raise SceneError(f"unknown field {name!r}")

    def entry_for(self, name):
        spec = self.field_specs.get(name)
        if isinstance(spec, dict) and "catalog" in spec:
            return cat.get_example(spec["catalog"])
        if name not in self.fields and name in cat.NAMES:
            return cat.get_example(name)
        return None

    def metric_for(self, name):
        if self.metric is not None:
            return self.metric
        entry = self.entry_for(name)
        if entry is None:
            raise SceneError("scene has no metric and the field is not a catalog entry")
        return entry.metric

    def signature_for(self, name):
        if self.signature is not None:
            return self.signature
        entry = self.entry_for(name)
        return entry.signature if entry is not None else Signature.LORENTZIAN

    def surface_for(self, name):
        return GraphSurface(self.metric_for(name), self.field(name), self.signature_for(name))

    def grid(self, name):
        if name is None:
            if len(self.grids) == 1:
                return next(iter(self.grids.values()))
            raise SceneError("--grid is required (scene defines %d grids)" % len(self.grids))
        try:
            return self.grids[name]
        except KeyError:
            raise SceneError(f"unknown grid {name!r}") from None

    def default_field(self, name):
        name = name or self.surface
        if name is None and len(self.fields) == 1:
            name = next(iter(self.fields))
        if name is None:
            raise SceneError("--field is required")
        self.field(name)
        return name


def _metric_from_spec(spec):
    if spec is None:
        return None
    if isinstance(spec, str):
        try:
            return preset(spec)
        except ValueError as exc:
            raise SceneError(str(exc)) from None
    if isinstance(spec, dict) and "lambda" in spec:
        dom = spec.get("domain")
        d = Domain(*[float(v) for v in dom]) if dom else Domain()
        try:
            return conformal(spec["lambda"], d, spec.get("name", "conformal"))
        except MaxgraphError as exc:
            raise SceneError(f"metric lambda: {exc}") from None
    raise SceneError(f"bad metric entry {spec!r}")


def _field_from_spec(name, spec):
    if isinstance(spec, str):
        try:
            return ExprField(spec)
        except MaxgraphError as exc:
            raise SceneError(f"field {name!r}: {exc}") from None
    if isinstance(spec, dict) and "catalog" in spec:
        try:
            return cat.get_example(spec["catalog"]).u
        except KeyError as exc:
            raise SceneError(str(exc)) from None
    if isinstance(spec, dict) and "expr" in spec:
        return _field_from_spec(name, spec["expr"])
    raise SceneError(f"field {name!r}: expected expression text or {{'catalog': name}}")


def _curve_from_spec(name, spec):
    try:
        interval = [float(v) for v in spec["interval"]]
        improper = spec.get("improper", [False, False])
        return Curve.from_exprs(spec["x1"], spec["x2"], interval, improper, name=name)
    except MaxgraphError as exc:
        raise SceneError(f"curve {name!r}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"curve {name!r}: malformed ({exc})") from None


def _grid_from_spec(name, spec):
    try:
        b = [float(v) for v in spec["bounds"]]
        res = spec["resolution"]
        n1, n2 = (int(res), int(res)) if isinstance(res, (int, float)) else (int(res[0]), int(res[1]))
        return Grid(*b, n1, n2)
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(f"grid {name!r}: malformed ({exc})") from None


def load_scene(path) -> Scene:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene {path} is not valid JSON: {exc}") from None
    return scene_from_dict(raw)


def scene_from_dict(raw) -> Scene:
    if not isinstance(raw, dict):
        raise SceneError("scene must be a JSON object")
    metric = _metric_from_spec(raw.get("metric"))
    sig = raw.get("signature")
    try:
        signature = Signature.parse(sig) if sig else None
    except ValueError:
        raise SceneError(f"bad signature {sig!r}") from None
    specs = raw.get("fields", {})
    fields = {k: _field_from_spec(k, v) for k, v in specs.items()}
    curves = {k: _curve_from_spec(k, v) for k, v in raw.get("curves", {}).items()}
    grids = {k: _grid_from_spec(k, v) for k, v in raw.get("grids", {}).items()}
    scene = Scene(metric, raw.get("metric"), signature, fields, specs, curves, grids, {}, raw.get("surface"), raw)
    if scene.surface is not None:
        scene.field(scene.surface)
    for k, v in raw.get("problems", {}).items():
        if not isinstance(v, dict) or "boundary" not in v:
            raise SceneError(f"problem {k!r}: needs a 'boundary' field name")
        scene.field(v["boundary"])
        if v.get("exact"):
            scene.field(v["exact"])
        if v.get("grid") is not None:
            scene.grid(v["grid"])
        scene.problems[k] = v
    return scene


# ---------------------------------------------------------------------------
# helpers

def _threads():
    try:
        return max(1, int(os.environ.get("MAXGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _point(text):
    try:
        a, b = text.split(",")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x1,x2 but got {text!r}") from None


def _emit_grid(args, grid, values, meta=None):
    out = getattr(args, "out", None)
    if out and out.endswith(".json"):
        text = to_json(grid, values, meta)
    elif out:
        text = to_csv(grid, values)
    else:
        text = to_json(grid, values, meta) if getattr(args, "format", "csv") == "json" else to_csv(grid, values)
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(obj, indent=1, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------
# subcommands

def cmd_residual(args, scene):
    name = scene.default_field(args.field)
    grid = scene.grid(args.grid)
    m, u = scene.metric_for(name), scene.field(name)
    kind = args.kind
    if kind == "auto":
        kind = "maximal" if scene.signature_for(name) is Signature.LORENTZIAN else "minimal"
    op = residual_maximal if kind == "maximal" else residual_minimal
    X1, X2 = grid.mesh()
    try:
        vals = np.asarray(op(u, m, (X1, X2)), dtype=float)
    except NonSpacelikeError:
        vals = np.empty_like(X1)
        for idx in np.ndindex(X1.shape):
            try:
                vals[idx] = op(u, m, (X1[idx], X2[idx]))
            except NonSpacelikeError:
                vals[idx] = math.nan
    _emit_grid(args, grid, vals, {"kind": kind, "field": name, "sup": float(np.nanmax(np.abs(vals)))})
    return 0


def cmd_invariants(args, scene):
    name = scene.default_field(args.field)
    s = scene.surface_for(name)
    if args.point:
        pts = [args.point]
    else:
        grid = scene.grid(args.grid)
        if args.samples:
            rng = np.random.default_rng(args.seed)
            pts = list(zip(rng.uniform(grid.x1_min, grid.x1_max, args.samples),
                           rng.uniform(grid.x2_min, grid.x2_max, args.samples)))
        else:
            pts = list(zip(*grid.points()))
    reports = _pmap(lambda p: invariant_report(s, p, maximal_tol=args.maximal_tol).to_dict(), pts)
    text = _dump({"field": name, "reports": reports}) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_dualize(args, scene):
    name = scene.default_field(args.field)
    grid = scene.grid(args.grid)
    m, u = scene.metric_for(name), scene.field(name)
    base = args.basepoint or (0.5 * (grid.x1_min + grid.x1_max), 0.5 * (grid.x2_min + grid.x2_max))
    res = reconstruct_dual(u, m, grid, base, tol_closed=args.tol_closed)
    diag = res.diagnostics()
    diag["roundtrip_sup"] = roundtrip_check(u, m, grid, result=res)
    diag["field"] = name
    if args.out:
        _emit_grid(args, grid, res.values, diag)
        sys.stdout.write(_dump(diag) + "\n")
    else:
        sys.stdout.write(_dump({"diagnostics": diag, "grid": json.loads(to_json(grid, res.values))}) + "\n")
    return 0


def cmd_length(args, scene):
    try:
        curve = scene.curves[args.curve]
    except KeyError:
        raise SceneError(f"unknown curve {args.curve!r}") from None
    name = scene.default_field(args.field)
    res = curve_length(scene.surface_for(name), curve, tol=args.tol)
    if args.json:
        sys.stdout.write(_dump(res.__dict__) + "\n")
    else:
        if res.converged:
            flag = ""
        elif res.lower_bound_only:
            flag = f"  (lower bound: {res.status})"
        else:
            flag = f"  (roundoff-limited, error ~{res.error_estimate:.1e})"
        sys.stdout.write(f"{res.length:.{args.digits}f}{flag}\n")
    return 1 if res.lower_bound_only else 0


def cmd_scan(args, scene):
    name = scene.default_field(args.field)
    grid = scene.grid(args.grid)
    s = scene.surface_for(name)
    ref = preset(args.reference) if args.reference else s.metric
    r = metric_ratio_scan(s, ref, grid.points())
    sys.stdout.write(_dump({"field": name, "infimum": r.infimum, "argmin": list(r.argmin)}) + "\n")
    return 0


def cmd_solve(args, scene):
    if args.problem not in scene.problems:
        raise SceneError(f"unknown problem {args.problem!r}")
    spec = scene.problems[args.problem]
    bname = spec["boundary"]
    grid = scene.grid(args.grid or spec.get("grid"))
    sig = Signature.parse(spec["signature"]) if spec.get("signature") else scene.signature_for(bname)
    exact = scene.field(spec["exact"]) if spec.get("exact") else None
    prob = DirichletProblem(scene.metric_for(bname), sig, grid, scene.field(bname),
                            spec.get("initial", "harmonic"), exact)
    U, rep = solve_dirichlet(prob, tol_newton=args.tol)
    out = rep.to_dict()
    if exact is not None:
        out["sup_error"] = float(np.max(np.abs(U - grid.sample(exact))))
    if args.refine:
        out["refinement"] = refinement_study(prob, levels=args.refine, tol_newton=args.tol).to_dict()
    if args.out:
        _emit_grid(args, grid, U, {"problem": args.problem})
    sys.stdout.write(_dump(out) + "\n")
    return 0


def cmd_catalog(args, scene):
    if args.action == "list":
        for n in cat.NAMES:
            e = cat.get_example(n)
            props = ",".join(sorted(e.known_properties))
            sys.stdout.write(f"{n}\t{e.metric_name}\t{e.signature.value}\t{props}\n")
        return 0
    if not args.name:
        raise SceneError("catalog export needs a name")
    e = cat.get_example(args.name)
    snippet = {
        "metric": e.metric_name,
        "signature": e.signature.value,
        "fields": {e.name: e.expression if e.expression else {"catalog": e.name}},
        "surface": e.name,
    }
    sys.stdout.write(_dump(snippet) + "\n")
    return 0


def cmd_grid(args, scene):
    name = scene.default_field(args.field)
    grid = scene.grid(args.grid)
    f = scene.field(name)
    X1, X2 = grid.mesh()
    what = args.what
    if what == "value":
        vals = f.value((X1, X2))
    elif what in ("d1", "d2"):
        vals = f.partial(int(what[1]), (X1, X2))
    else:
        raise SceneError(f"unknown quantity {what!r}")
    vals = np.broadcast_to(np.asarray(vals, dtype=float), X1.shape)
    _emit_grid(args, grid, vals, {"field": name, "quantity": what})
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser():
    p = argparse.ArgumentParser(prog="maxgraph", description="Geometry of minimal and maximal graphs in M x R.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scene=True):
        if scene:
            sp.add_argument("--scene", required=True, help="scene JSON file")
        sp.add_argument("--out", help="output path (.csv or .json); stdout when omitted")
        sp.add_argument("--seed", type=int, default=0, help="seed for sampled points")
        return sp

    sp = common(sub.add_parser("residual", help="minimal/maximal operator residual on a grid"))
    sp.add_argument("--field")
    sp.add_argument("--grid")
    sp.add_argument("--kind", choices=["auto", "minimal", "maximal"], default="auto")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_residual)

    sp = common(sub.add_parser("invariants", help="point reports with identity residuals"))
    sp.add_argument("--field")
    sp.add_argument("--grid")
    sp.add_argument("--point", type=_point)
    sp.add_argument("--samples", type=int, default=0, help="random points in the grid rectangle instead of nodes")
    sp.add_argument("--maximal-tol", type=float, default=1e-6)
    sp.set_defaults(func=cmd_invariants)

    sp = common(sub.add_parser("dualize", help="reconstruct the maximal dual of a minimal graph"))
    sp.add_argument("--field")
    sp.add_argument("--grid")
    sp.add_argument("--basepoint", type=_point)
    sp.add_argument("--tol-closed", "--tol", dest="tol_closed", type=float, default=1e-6)
    sp.add_argument("--format", choices=["csv", "json"], default="json")
    sp.set_defaults(func=cmd_dualize)

    sp = common(sub.add_parser("length", help="induced length of a scene curve"))
    sp.add_argument("--curve", required=True)
    sp.add_argument("--field")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--digits", type=int, default=7)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_length)

    sp = common(sub.add_parser("scan", help="infimum of g(X,X)/g_ref(X,X) over a grid"))
    sp.add_argument("--field")
    sp.add_argument("--grid")
    sp.add_argument("--reference", help="metric preset for the reference (default: the base metric)")
    sp.set_defaults(func=cmd_scan)

    sp = common(sub.add_parser("solve", help="Dirichlet problem by damped Newton"))
    sp.add_argument("--problem", required=True)
    sp.add_argument("--grid")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--refine", type=int, default=0, help="also run a refinement study with this many levels")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("catalog", help="list or export built-in examples")
    sp.add_argument("action", choices=["list", "export"])
    sp.add_argument("name", nargs="?")
    sp.set_defaults(func=cmd_catalog)

    sp = common(sub.add_parser("grid", help="sample a field on a grid"))
    sp.add_argument("--field")
    sp.add_argument("--grid")
    sp.add_argument("--what", choices=["value", "d1", "d2"], default="value")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.set_defaults(func=cmd_grid)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        scene = load_scene(args.scene) if getattr(args, "scene", None) else None
        return args.func(args, scene)
    except (MaxgraphError, ValueError, KeyError, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"maxgraph: error: {msg}\n")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
