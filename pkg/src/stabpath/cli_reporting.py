"""Command-line front end: runs experiments and writes traces and reports.

Every command writes its artifacts to ``--output-dir``.  Reports are JSON,
validated against the bundled schemas and serialised with sorted keys, so
identical arguments give byte-identical files.  Traces are CSV by default
or JSON with ``--format json``.

Exit codes: 0 success, 1 numerical failure, 2 boundary case (non-generic
parameters), 3 bad input.
"""

import argparse
import ast
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import math
import operator
import re
import os
from pathlib import Path
import sys
import traceback

import numpy as np

from . import bessel, curves_hg, gw_model, mirror_contour, mutation_lattice, qde_solver
from . import sod_extractor, stab_p1
from .errors import BoundaryCaseError, GenericityError, InputError, StabpathError
from .schemas import validate_document

MIN_POINTS = 16
GLUE_POINTS = 100
GLUE_TOL = 1e-9
LIOUVILLE_COND_MAX = 1e8

# ---------------------------------------------------------------- parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "i": 1j, "j": 1j}
# "2i", "1.5e-3i": imaginary literals written with i instead of j
_I_SUFFIX = re.compile(r"(\d|\d\.)i\b")


def parse_number(text, allow_complex=True):
    """Evaluate a numeric expression such as ``pi/2``, ``1+0.5i`` or ``i*pi/4``.

    Only literals, the names ``pi``, ``e``, ``i``, ``j`` and arithmetic
    operators are accepted.  Integers are evaluated as floats, so a huge
    power overflows instead of running for ever.

    Raises
    ------
    InputError
    """

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            return float(node.value) if isinstance(node.value, int) else node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise InputError(f"unsupported expression {text!r}")

    try:
        source = _I_SUFFIX.sub(r"\1j", str(text).strip())
        value = complex(ev(ast.parse(source, mode="eval")))
    except (SyntaxError, ZeroDivisionError, OverflowError, TypeError) as exc:
        raise InputError(f"cannot parse number {text!r}: {exc}") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise InputError(f"{text!r} is not finite")
    if not allow_complex:
        if value.imag != 0:
            raise InputError(f"{text!r} must be real")
        return value.real
    return value


def _real(text):
    return parse_number(text, allow_complex=False)


# ---------------------------------------------------------------- output

def _jsonable(obj):
    """Plain-JSON form: complex as ``{re, im}``, non-finite floats as null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(float(obj.real)), "im": _jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(doc):
    """Canonical serialisation: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(doc, path, schema):
    """Validate ``doc`` against ``schema`` and write it."""
    doc = _jsonable(doc)
    validate_document(doc, schema)
    Path(path).write_text(dumps(doc), encoding="utf-8")
    return path


def write_trace(columns, rows, path_stem, fmt):
    """Write rows as ``<stem>.csv`` or ``<stem>.json`` (list of objects)."""
    if fmt == "json":
        path = Path(f"{path_stem}.json")
        path.write_text(dumps([dict(zip(columns, r)) for r in rows]), encoding="utf-8")
        return path
    path = Path(f"{path_stem}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_csv_cell(x) for x in r])
    return path


def _csv_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _module_of(exc):
    """Name of the innermost package module in the traceback."""
    names = [Path(f.filename).stem for f in traceback.extract_tb(exc.__traceback__)]
    ours = [n for n in names if n in _MODULES]
    return ours[-1] if ours else "stabpath"


_MODULES = {"gw_model", "linalg_core", "bessel", "qde_solver", "stab_p1", "mirror_contour",
            "curves_hg", "sod_extractor", "mutation_lattice", "cli_reporting", "schemas",
            "__init__"}


def _grid(args):
    if args.points < MIN_POINTS:
        raise InputError(f"--points must be at least {MIN_POINTS}")
    if not args.t0 > 0:
        raise InputError("--t0 must be positive")
    return qde_solver.geometric_grid(args.t0, args.t1, args.points)


def _outdir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- p1-path

PATH_COLUMNS = ("t", "tau_re", "tau_im", "k", "phi_re", "phi_im",
                "z_point_re", "z_point_im", "z_point_log_scale",
                "z_line_re", "z_line_im", "z_line_log_scale", "in_eventual_regime")


def path_rows(path):
    """Trace rows; charges are scaled, ``Z = (re + i im) exp(log_scale)``."""
    regime = path.in_eventual_regime()
    return [
        (float(path.t[j]), float(path.tau[j].real), float(path.tau[j].imag), path.chart_k,
         float(path.phi[j].real), float(path.phi[j].imag),
         float(path.z_point[j].real), float(path.z_point[j].imag),
         float(path.log_scale_point[j]),
         float(path.z_line[j].real), float(path.z_line[j].imag),
         float(path.log_scale_line[j]), bool(regime[j]))
        for j in range(len(path.t))
    ]


def _path_summary(path):
    trans = stab_p1.transition_residuals(path.x)
    finite = trans[np.isfinite(trans)]
    return {
        "b": path.b, "a": path.a, "kappa": path.kappa, "chart_k": path.chart_k,
        "eventual_t_star": path.eventual_t_star, "boundary_case": path.boundary_case,
        "tail_law_residual": path.tail_law_residual,
        "chart_transition_max": float(np.max(finite)) if finite.size else None,
    }


def run_p1_pipeline(b, a, t_grid, r_values=None):
    """Path, eventual objects, fits, clusters, lattice and spanning checks.

    Parameters
    ----------
    b, a : complex
    t_grid : ndarray
    r_values : sequence of float, optional
        Filtration levels for the spanning check.  Defaults to each
        distinct real part of the fitted exponents and one level 2 below
        the smallest.

    Returns
    -------
    path : PathP1
    sod : SODResult
    spanning : list of SpanningReport
    witness : bool

    Raises
    ------
    BoundaryCaseError
        For real ``kappa``; ``path`` is attached to the exception.
    """
    path = stab_p1.qde_path(b, a, t_grid)
    try:
        objs = stab_p1.eventual_objects(path)
    except BoundaryCaseError as exc:
        exc.path = path
        raise
    fits = [o.fit for o in objs]
    sod = sod_extractor.build_sod(sod_extractor.cluster_and_order(fits))
    if r_values is None:
        reals = sorted({round(c.alpha.real, 6) for c in sod.clusters})
        r_values = [reals[0] - 2.0] + reals
    solution = stab_p1.mirror_solution(b, a, t_grid)
    spanning = [sod_extractor.spanning_check(solution, fits, r) for r in r_values]
    witness = sod_extractor.phase_order_witness(sod, stab_p1.path_phases(path))
    return path, sod, spanning, witness


def _p1_once(b, a, args, out):
    """One p1-path run; returns (exit code, message, alphas)."""
    t = _grid(args)
    params = {"b": b, "a": a, "t0": args.t0, "t1": args.t1, "points": args.points}
    try:
        path, sod, spanning, witness = run_p1_pipeline(b, a, t, args.r)
    except BoundaryCaseError as exc:
        path = getattr(exc, "path", None)
        doc = {"parameters": params, "clusters": [], "lattice_check": None,
               "genericity": f"boundary case: {exc}", "spanning": [],
               "phase_order_witness": None}
        if path is not None:
            doc["path"] = _path_summary(path)
            write_trace(PATH_COLUMNS, path_rows(path), out / "p1_path", args.format)
        write_report(doc, out / "sod.json", "sod_report")
        return exc.exit_code, f"stab_p1: {exc}", []
    write_trace(PATH_COLUMNS, path_rows(path), out / "p1_path", args.format)
    doc = sod_extractor.sod_to_dict(sod, spanning)
    doc.update(parameters=params, path=_path_summary(path), phase_order_witness=witness)
    write_report(doc, out / "sod.json", "sod_report")
    alphas = [c.alpha for c in sod.clusters]
    held = all(s.status == "holds" for s in spanning)
    msg = (f"{len(sod.clusters)} clusters, alpha = "
           + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in alphas)
           + f"; spanning {'holds' if held else 'deficient'}")
    return 0, msg, alphas


def _sweep_worker(job):
    """Run one phase of a sweep in a worker process."""
    b, a, args, out = job
    out.mkdir(parents=True, exist_ok=True)
    try:
        code, msg, alphas = _p1_once(b, a, args, out)
    except StabpathError as exc:
        code, msg, alphas = exc.exit_code, f"{_module_of(exc)}: {exc}", []
    return code, msg, alphas


def _glue(args, out):
    xs = np.linspace(-3.0, 3.0, GLUE_POINTS)
    res = np.array([abs(stab_p1.glue_check(x)) for x in xs])
    write_trace(("x", "residual"), [(float(x), float(r)) for x, r in zip(xs, res)],
                out / "glue", args.format)
    worst = float(np.max(res))
    write_report({"points": GLUE_POINTS, "x_min": -3.0, "x_max": 3.0, "max_residual": worst,
                  "tolerance": GLUE_TOL, "ok": worst < GLUE_TOL}, out / "glue.json", "glue_report")
    print(f"gluing identity: {GLUE_POINTS} points, max residual {worst:.3e}")
    return 0 if worst < GLUE_TOL else 1


def cmd_p1_path(args):
    out = _outdir(args)
    if args.verify_glue:
        return _glue(args, out)
    b, a = parse_number(args.b), parse_number(args.a)
    phases = [_real(p) for p in (args.phase or ["0"])]
    if len(phases) == 1:
        code, msg, _ = _p1_once(b + 1j * phases[0], a, args, out)
        print(msg)
        return code
    jobs = [(b + 1j * ph, a, args, out / f"phase_{i:03d}") for i, ph in enumerate(phases)]
    workers = max(1, min(args.workers or os.cpu_count() or 1, len(jobs)))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_sweep_worker, jobs))   # map keeps input order
    runs = [{"phase": ph, "exit_code": c, "message": m, "alphas": al}
            for ph, (c, m, al) in zip(phases, results)]
    write_report({"runs": runs}, out / "sweep.json", "sweep_report")
    for r in runs:
        print(f"phase {r['phase']:.6g}: exit {r['exit_code']}: {r['message']}")
    return max(c for c, _, _ in results)


# ---------------------------------------------------------------- curve-path

def _s_grid(args):
    if args.points < MIN_POINTS:
        raise InputError(f"--points must be at least {MIN_POINTS}")
    if not args.s_max > 0:
        raise InputError("--s-max must be positive")
    lo = min(1e-3, args.s_max / 10.0)
    return np.concatenate([[0.0], np.geomspace(lo, args.s_max, args.points - 1)])


def cmd_curve_path(args):
    out = _outdir(args)
    s = _s_grid(args)
    theta = _real(args.theta)
    if args.canonical:
        path = curves_hg.canonical_path(args.genus, theta, s)
    elif args.safe:
        path = curves_hg.safe_path(args.genus, theta, parse_number(args.tau0),
                                   parse_number(args.tau_inf), s)
    else:
        path = curves_hg.path_tau(args.genus, theta, parse_number(args.a),
                                  parse_number(args.tau0), parse_number(args.tau_inf), s)
    write_trace(("s", "tau_re", "tau_im", "lifts_so_far"), path.trace_rows(),
                out / "curve_path", args.format)
    doc = {
        "genus": path.g, "kind": path.kind, "theta": path.theta, "a": path.a_param,
        "tau0": path.tau0, "tau_inf": path.tau_inf, "tau_end": complex(path.tau[-1]),
        "s_max": float(path.s[-1]), "lifts": path.lifts,
        "min_im_sampled": path.min_im_sampled, "limit_is_boundary": path.limit_is_boundary,
        "converges": path.converges(), "filtration": path.filtration,
    }
    write_report(doc, out / "curve_path.json", "curve_path_report")
    tag = f", {path.filtration}" if path.filtration else ""
    print(f"{path.kind} path, genus {path.g}: lifts = {str(path.lifts).lower()}, "
          f"tau(s_max) = {complex(path.tau[-1]):.6g}{tag}")
    return 0


# ---------------------------------------------------------------- qde

def cmd_qde(args):
    out = _outdir(args)
    model = gw_model.resolve_model(args.model, parse_number(args.a).real)
    if args.z is not None:
        z = parse_number(args.z)
    elif args.model == "p1":
        z = gw_model.p1_params(parse_number(args.b)).z
    else:
        z = 1.0
    params = gw_model.TruncationParams(z=z, scale_omega=_real(args.scale_omega))
    t = _grid(args)
    phi0 = np.eye(model.rank, dtype=np.complex128)
    integrate = qde_solver.integrate_modified if args.form == "modified" else qde_solver.integrate_raw
    sol = integrate(model, params, phi0, t)
    n = model.rank
    cols = ["t", "log_gauge"] + [f"m{i}{j}_{part}" for i in range(n) for j in range(n)
                                 for part in ("re", "im")]
    rows = []
    for k in range(len(t)):
        flat = sol.values[k].ravel()
        rows.append([float(t[k]), float(sol.log_gauge[k])]
                    + [float(v) for z_ in flat for v in (z_.real, z_.imag)])
    write_trace(cols, rows, out / "qde_trace", args.format)

    spec = qde_solver.asymptotic_spectrum(model, params)
    rates = None
    if len(t) >= 20 and t[-1] / t[0] >= 10:
        rates = [qde_solver.growth_rate(t=t, log_abs=sol.log_norms(e)).rate
                 for e in np.eye(n)]
    expected = np.array([qde_solver.liouville_log_det_increment(model, params, t[0], tk, args.form).real
                         for tk in t])
    logdet = sol.log_abs_det()
    # determinants of ill-conditioned samples have lost their digits to cancellation
    cond = np.array([np.linalg.cond(v) for v in sol.values])
    bad = np.nonzero(cond >= LIOUVILLE_COND_MAX)[0]
    last = max(int(bad[0]) - 1, 0) if bad.size else len(t) - 1
    drift = float(np.max(np.abs(logdet - logdet[0] - expected)[:last + 1]))
    doc = {
        "model": model.name, "form": args.form, "z": complex(z), "t0": float(t[0]),
        "t1": float(t[-1]), "points": len(t), "steps": sol.steps,
        "exponents": sorted(spec.eigenvalues.tolist(), key=lambda w: (w.imag, w.real)),
        "ramification_order": spec.ramification_order,
        "column_growth_rates": rates, "liouville_drift": drift,
        "liouville_t_max": float(t[last]),
    }
    write_report(doc, out / "qde.json", "qde_report")
    print(f"{model.name} ({args.form} form): {sol.steps} steps, log-det drift {drift:.2e} up to t = {t[last]:.4g}")
    return 0


# ---------------------------------------------------------------- contour

def cmd_contour(args):
    out = _outdir(args)
    u = parse_number(args.kappa_t)
    contour_kind = "unit_circle" if args.kind == "point" else "c_theta"
    theta = _real(args.theta) if args.kind == "line" else None
    contour = mirror_contour.Contour(kind=contour_kind, theta=theta or 0.0, cutoff=args.cutoff,
                                     samples_per_unit=args.samples_per_unit)
    if args.kind == "point":
        res = mirror_contour.skyscraper_charge(u, 1.0, contour)
        ref = 1j * math.pi * bessel.i0(u).value
    else:
        res = mirror_contour.linebundle_charge(u, 1.0, theta, contour)
        ref = bessel.k0(u).value
    diff = abs(res.value - ref)
    doc = {"kind": args.kind, "kappa_t": u, "theta": theta, "value": res.value,
           "bessel": complex(ref), "abs_diff": diff, "est_error": res.est_error,
           "tail_bound": res.tail_bound}
    write_report(doc, out / "contour.json", "contour_report")
    name = "i pi I0" if args.kind == "point" else "K0"
    print(f"{args.kind} contour at kappa*t = {u:.6g}: {res.value:.12g} vs {name} "
          f"{complex(ref):.12g}, abs diff {diff:.2e}")
    return 0 if diff < args.tol else 1


# ---------------------------------------------------------------- mutate

def cmd_mutate(args):
    out = _outdir(args)
    if args.file:
        dec = mutation_lattice.load_lattice(args.file)
    else:
        dec = mutation_lattice.p1_decomposition(args.p1_twist)
    result = mutation_lattice.braid_apply(dec, args.word, experimental=args.experimental)
    doc = result.lattice.to_dict()
    doc["permutation"] = list(result.permutation)
    write_report(doc, out / "mutated.json", "decomposition")
    blocks = " | ".join(" ".join(str(list(v)) for v in blk) for blk in result.lattice.summands)
    print(f"after {' '.join(result.lattice.history)}: {blocks}")
    return 0


# ---------------------------------------------------------------- validate-model

def cmd_validate_model(args):
    out = _outdir(args)
    model = gw_model.resolve_model(args.model)
    report = gw_model.validate_model(model)
    doc = {"model": model.name, "ok": report.ok, "violations": list(report.violations)}
    if report.ok:
        params = gw_model.TruncationParams(z=parse_number(args.z), scale_omega=_real(args.scale_omega))
        doc["admissible_classes"] = [c.label for c in gw_model.admissible_classes(model, params)]
    write_report(doc, out / "validation.json", "validation_report")
    print(f"{model.name}: " + ("pass" if report.ok else "; ".join(report.violations)))
    return 0 if report.ok else 3


# ---------------------------------------------------------------- sod-from-trace

def _parse_class(entry):
    out = []
    for x in entry:
        if isinstance(x, (list, tuple)) and len(x) == 2:
            out.append(complex(float(x[0]), float(x[1])))
        elif isinstance(x, (int, float)) and not isinstance(x, bool):
            out.append(complex(x))
        else:
            raise InputError(f"bad class entry {x!r}")
    return np.array(out, dtype=np.complex128)


def read_trace_series(trace_path, classes):
    """Charge series from a CSV trace and a class table.

    The CSV has a ``t`` column and, per object, ``<label>_re``,
    ``<label>_im`` and optionally ``<label>_log_scale``.  ``classes`` maps
    each label to ``{"class": [...], "eventually_semistable": bool}``; class
    entries are numbers or ``[re, im]`` pairs.
    """
    try:
        with open(trace_path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise InputError(f"cannot read trace {trace_path}: {exc}") from exc
    if not rows or "t" not in rows[0]:
        raise InputError("trace needs a header with a 't' column")

    def column(name):
        try:
            return np.array([float(r[name]) for r in rows])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"trace column {name!r} missing or not numeric") from exc

    t = column("t")
    series = []
    for label in sorted(classes):
        spec = classes[label]
        if not isinstance(spec, dict) or "class" not in spec:
            raise InputError(f"class table entry {label!r} needs a 'class' field")
        vals = column(f"{label}_re") + 1j * column(f"{label}_im")
        scale = column(f"{label}_log_scale") if f"{label}_log_scale" in rows[0] else None
        series.append(sod_extractor.ChargeSeries(
            label=label, class_v=_parse_class(spec["class"]), t=t, values=vals,
            log_scale=scale, eventually_semistable=bool(spec.get("eventually_semistable", True))))
    return series


def cmd_sod_from_trace(args):
    out = _outdir(args)
    try:
        with open(args.classes, encoding="utf-8") as fh:
            classes = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read class table {args.classes}: {exc}") from exc
    if not isinstance(classes, dict) or not classes:
        raise InputError("class table must be a non-empty object")
    series = read_trace_series(args.trace, classes)
    params = {"fit_tol": args.fit_tol, "cluster_tol": args.cluster_tol,
              "correction_order": args.correction_order, "sqrt_term": args.sqrt_term}
    try:
        fits = [sod_extractor.fit_asymptotics(s, fit_tol=args.fit_tol,
                                              correction_order=args.correction_order,
                                              sqrt_term=args.sqrt_term)
                for s in series if s.eventually_semistable]
        sod = sod_extractor.build_sod(sod_extractor.cluster_and_order(fits, tol=args.cluster_tol))
    except GenericityError as exc:
        doc = {"parameters": params, "clusters": [], "lattice_check": None,
               "genericity": f"violated: {exc}", "spanning": []}
        write_report(doc, out / "sod.json", "sod_report")
        raise
    doc = sod_extractor.sod_to_dict(sod)
    doc["parameters"] = params
    write_report(doc, out / "sod.json", "sod_report")
    print(f"{len(sod.clusters)} clusters: "
          + ", ".join(f"{'+'.join(c.labels)} at {c.alpha:.6g}" for c in sod.clusters))
    return 0


# ---------------------------------------------------------------- entry point

def build_parser():
    p = argparse.ArgumentParser(prog="stabpath", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output-dir", default="stabpath_out")
        sp.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="trace format; reports are always JSON")

    def t_grid(sp, t0, t1, points):
        sp.add_argument("--t0", type=_real, default=t0)
        sp.add_argument("--t1", type=_real, default=t1)
        sp.add_argument("--points", type=int, default=points)

    sp = sub.add_parser("p1-path", help="path through Stab(P^1) and its decomposition")
    sp.add_argument("--b", default="0", help="complexified Kaehler parameter (expression)")
    sp.add_argument("--a", default="0", help="shift parameter (expression)")
    sp.add_argument("--phase", action="append",
                    help="added to Im b; repeat to sweep over a worker pool")
    sp.add_argument("--r", type=_real, action="append", help="spanning-check level (repeatable)")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--verify-glue", action="store_true",
                    help="tabulate the gluing identity on [-3, 3] instead")
    t_grid(sp, 1.0, 60.0, 400)
    common(sp)
    sp.set_defaults(func=cmd_p1_path)

    sp = sub.add_parser("curve-path", help="upper-half-plane path of a curve of genus >= 1")
    sp.add_argument("--genus", type=int, default=2)
    sp.add_argument("--theta", default="0")
    kind = sp.add_mutually_exclusive_group()
    kind.add_argument("--canonical", action="store_true")
    kind.add_argument("--safe", action="store_true")
    sp.add_argument("--a", default="1")
    sp.add_argument("--tau0", default="i")
    sp.add_argument("--tau-inf", default="1+i")
    sp.add_argument("--s-max", type=_real, default=1e6)
    sp.add_argument("--points", type=int, default=200)
    common(sp)
    sp.set_defaults(func=cmd_curve_path)

    sp = sub.add_parser("qde", help="integrate the quantum differential equation")
    sp.add_argument("--model", default="p1", help="p1, curve_g<g> or a model file")
    sp.add_argument("--form", choices=("raw", "modified"), default="modified")
    sp.add_argument("--z", default=None, help="defaults to exp(-b) for p1, else 1")
    sp.add_argument("--b", default="0")
    sp.add_argument("--a", default="0", help="builtin p1 parameter")
    sp.add_argument("--scale-omega", default="1")
    t_grid(sp, 1.0, 10.0, 64)
    common(sp)
    sp.set_defaults(func=cmd_qde)

    sp = sub.add_parser("contour", help="mirror contour integral against Bessel values")
    sp.add_argument("--kind", choices=("point", "line"), default="line")
    sp.add_argument("--kappa-t", default="1")
    sp.add_argument("--theta", default="0")
    sp.add_argument("--cutoff", type=_real, default=None)
    sp.add_argument("--samples-per-unit", type=int, default=64)
    sp.add_argument("--tol", type=_real, default=1e-6)
    common(sp)
    sp.set_defaults(func=cmd_contour)

    sp = sub.add_parser("mutate", help="apply a braid word to a decomposition")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--file")
    src.add_argument("--p1-twist", type=int, help="use <O(k), O(k+1)> on P^1")
    sp.add_argument("--word", required=True, help="e.g. 'L1 R2'")
    sp.add_argument("--experimental", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_mutate)

    sp = sub.add_parser("validate-model", help="check model invariants")
    sp.add_argument("--model", default="p1")
    sp.add_argument("--z", default="1")
    sp.add_argument("--scale-omega", default="1")
    common(sp)
    sp.set_defaults(func=cmd_validate_model)

    sp = sub.add_parser("sod-from-trace", help="extract a decomposition from charge samples")
    sp.add_argument("--trace", required=True)
    sp.add_argument("--classes", required=True)
    sp.add_argument("--fit-tol", type=_real, default=sod_extractor.DEFAULT_FIT_TOL)
    sp.add_argument("--cluster-tol", type=_real, default=sod_extractor.DEFAULT_CLUSTER_TOL)
    sp.add_argument("--correction-order", type=int, default=2)
    sp.add_argument("--sqrt-term", action="store_true",
                    help="add t^(1/2) to the fit for ramified spectra")
    common(sp)
    sp.set_defaults(func=cmd_sod_from_trace)
    return p


def main(argv=None):
    """Run a command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"cli_reporting: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:
        # argparse usage errors are bad input
        return 0 if exc.code == 0 else 3
    try:
        return args.func(args)
    except StabpathError as exc:
        print(f"{_module_of(exc)}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"cli_reporting: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
