"""Command-line front end.

    topobound run --config cfg.json [--task T] [--out DIR] [--seed N]
                  [--no-cross-correlation] [--rank R] [--export-sdp FILE]
    topobound report DIR
    topobound crosscheck FILE

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import outputs, recovery, sdp
from .mode_converter import ModeConverter, ModeConverterConfig
from .numerics import NotPositiveDefiniteError, SingularMatrixError
from .objectives import ZeroDenominatorError
from .plate import Plate, PlateConfig
from .qcqp import build_qcqp
from .topopt import TopoptConfig, run_topopt

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
TASKS = ("topopt", "bound", "recover", "sweep", "ablation")

_num = {"type": "number"}
_int = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["problem"],
    "properties": {
        "problem": {"enum": ["mode_converter", "plate"]},
        "task": {"enum": list(TASKS)},
        "physics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _num for k in (
                "wavelength", "eps_r", "L_d", "H_c", "L", "H", "t",
                "E", "nu", "rho_min", "rho_max", "spring_s", "gamma", "omega")}
            | {"mode_in": _int, "mode_out": _int},
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"nx": _int, "ny": _int},
        },
        "objective": {"enum": ["normalized_overlap", "overlap_magnitude"]},
        "topopt": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"max_iter": _int, "tol": _num, "move": _num, "asy_min": _num,
                           "init": {"enum": ["zero", "random"]}},
        },
        "regularization": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "filter_radius": {"type": ["number", "null"]},
                "beta_schedule": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"init": _num, "max": _num, "every": _int},
                },
                "eta": _num,
            },
        },
        "sdp": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"tol": _num, "max_iter": _int},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter", "values"],
            "properties": {"parameter": {"enum": ["L_d", "omega"]},
                           "values": {"type": "array", "items": _num, "minItems": 1}},
        },
        "recover": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"rank": _int, "half": {"enum": ["a", "b"]}},
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
    },
}

_MC_KEYS = ("wavelength", "eps_r", "L_d", "H_c", "L", "H", "mode_in", "mode_out")
_PLATE_KEYS = ("E", "nu", "rho_min", "rho_max", "spring_s", "gamma", "omega", "L", "t")


class ConfigError(ValueError):
    pass


def load_config(path):
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config key {where}: {exc.message}") from exc
    phys = cfg.get("physics", {})
    allowed = _MC_KEYS if cfg["problem"] == "mode_converter" else _PLATE_KEYS
    extra = sorted(set(phys) - set(allowed))
    if extra:
        raise ConfigError(f"physics keys {extra} do not apply to {cfg['problem']}")
    if cfg["problem"] == "plate" and cfg.get("objective", "overlap_magnitude") != "overlap_magnitude":
        raise ConfigError("objective: the plate supports overlap_magnitude only")
    sw = cfg.get("sweep")
    if sw and (sw["parameter"] == "L_d") != (cfg["problem"] == "mode_converter"):
        raise ConfigError(f"sweep/parameter: {sw['parameter']} does not apply to {cfg['problem']}")


def fingerprint(cfg):
    """Hash of everything that defines the design problem."""
    keys = ("problem", "physics", "mesh", "objective")
    blob = json.dumps({k: cfg.get(k) for k in keys}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- models

def build_model(cfg, override=None):
    phys = dict(cfg.get("physics", {}))
    phys.update(override or {})
    mesh = cfg.get("mesh", {})
    try:
        if cfg["problem"] == "mode_converter":
            mc = ModeConverterConfig(**phys, **mesh)
            model = ModeConverter(mc)
            return model, model.problem(cfg.get("objective", "overlap_magnitude"))
        pc = PlateConfig(**phys, **mesh)
        model = Plate(pc)
        return model, model.problem()
    except ValueError as exc:
        raise ConfigError(f"physics/mesh: {exc}") from exc


def topopt_config(cfg):
    t = cfg.get("topopt", {})
    r = cfg.get("regularization", {})
    beta = r.get("beta_schedule", {})
    kw = {k: t[k] for k in ("max_iter", "tol", "move", "asy_min") if k in t}
    kw.update(filter_radius=r.get("filter_radius"), eta=r.get("eta", 0.0))
    if beta:
        kw.update(beta_init=beta.get("init", 1.0), beta_max=beta.get("max", 8.0),
                  beta_every=beta.get("every", 50))
    try:
        return TopoptConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"topopt/regularization: {exc}") from exc


def initial_design(cfg, problem, seed):
    if cfg.get("topopt", {}).get("init", "zero") == "random":
        return np.random.default_rng(seed).uniform(-1, 1, problem.n_free)
    return np.zeros(problem.n_free)


# ---------------------------------------------------------------- tasks

def _write_design(out, model, problem, theta_f, z):
    mesh = model.mesh
    npn = problem.meta.get("n_per_node", 1)
    theta = problem.full_theta(theta_f)
    node_theta = theta[::npn] if npn > 1 else theta
    outputs.write_grid_csv(out / "design.csv", node_theta, mesh.nx, mesh.ny, 1)
    outputs.write_grid_csv(out / "field_re.csv", z.real, mesh.nx, mesh.ny, npn)
    outputs.write_grid_csv(out / "field_im.csv", z.imag, mesh.nx, mesh.ny, npn)
    shape = (mesh.ny + 1, mesh.nx + 1)
    outputs.svg_heatmap(out / "design.svg", node_theta.reshape(shape), "design", "design")
    w = z[::npn] if npn > 1 else z
    outputs.svg_heatmap(out / "field.svg", np.abs(w).reshape(shape), "max-normalized |field|", "field")


def _extras(model, z):
    if isinstance(model, ModeConverter):
        return {"transmittance": model.transmittance(z)}
    return {}


def relative_gap(objective, bound):
    """(bound - objective) / bound, None when either is missing."""
    if objective is None or bound is None or bound == 0:
        return None
    return (bound - objective) / bound


def task_topopt(cfg, args, out):
    model, problem = build_model(cfg)
    tc = topopt_config(cfg)
    theta, hist = run_topopt(problem, tc, initial_design(cfg, problem, args.seed))
    z = problem.solve(theta)
    _write_design(out, model, problem, theta, z)
    res = {"task": "topopt", "fingerprint": fingerprint(cfg), "objective": hist.final_objective,
           "iterations": hist.iterations, "converged": hist.converged,
           "topopt_seconds": hist.seconds, **_extras(model, z)}
    bfile = out / "bound.json"
    if bfile.exists():
        b = outputs.read_json(bfile)
        if b.get("fingerprint") == res["fingerprint"]:
            res["bound"] = b["bound"]
            g = relative_gap(res["objective"], b["bound"])
            res["gap_percent"] = None if g is None else 100 * g
    outputs.write_json(out / "result.json", res)
    return res


def compute_bound(cfg, problem, cross=True, export=None):
    t0 = time.perf_counter()
    q = build_qcqp(problem, cross_correlation=cross)
    prob = sdp.assemble_relaxation(q)
    if export:
        sdp.export_sdp(prob, export)
    s = cfg.get("sdp", {})
    sol = sdp.solve_sdp(prob, tol=s.get("tol", 1e-7), max_iter=s.get("max_iter", 200))
    cert = sdp.verify_certificate(prob, sol)
    return q, prob, sol, cert, time.perf_counter() - t0


def _bound_record(cfg, sol, cert, seconds, cross):
    lam = sol.eig()[0]
    return {"task": "bound", "fingerprint": fingerprint(cfg), "bound": sol.bound,
            "primal_objective": sol.primal_objective, "status": sol.status,
            "sdp_iterations": sol.iterations, "relative_duality_gap": sol.relative_gap,
            "certificate_passed": cert.passed, "cross_correlation": cross,
            "numerical_rank": recovery.numerical_rank(lam),
            "rank_spectrum": lam[:10] / lam[0] if lam[0] > 0 else lam[:10],
            "bound_seconds": seconds}


def task_bound(cfg, args, out):
    _, problem = build_model(cfg)
    cross = not args.no_cross_correlation
    _, _, sol, cert, secs = compute_bound(cfg, problem, cross, args.export_sdp)
    rec = _bound_record(cfg, sol, cert, secs, cross)
    outputs.write_json(out / "bound.json", rec)
    res = dict(rec)
    tfile = out / "result.json"
    if tfile.exists():
        prev = outputs.read_json(tfile)
        if prev.get("task") == "topopt" and prev.get("fingerprint") == rec["fingerprint"]:
            res["objective"] = prev["objective"]
            g = relative_gap(prev["objective"], sol.bound)
            res["gap_percent"] = None if g is None else 100 * g
    outputs.write_json(out / "result.json", res)
    return res


def task_recover(cfg, args, out):
    model, problem = build_model(cfg)
    q, _, sol, cert, secs = compute_bound(cfg, problem, not args.no_cross_correlation)
    rc = cfg.get("recover", {})
    r = args.rank or rc.get("rank", 1)
    half = rc.get("half", "a")
    approx = recovery.rank_r_recover(sol.X, r, q)
    val_a = recovery.evaluate_recovered(approx, problem, "a")
    val_b = recovery.evaluate_recovered(approx, problem, "b")
    theta = recovery.design_on_free(approx, problem, half)
    z = problem.solve(theta)
    _write_design(out, model, problem, theta, z)
    res = _bound_record(cfg, sol, cert, secs, not args.no_cross_correlation)
    res.update(task="recover", rank=r, half=half, objective=val_a if half == "a" else val_b,
               objective_half_a=val_a, objective_half_b=val_b,
               indeterminate_rows=int(approx.indeterminate_a.sum() + approx.indeterminate_b.sum()),
               **_extras(model, z))
    g = relative_gap(res["objective"], sol.bound)
    res["gap_percent"] = None if g is None else 100 * g
    outputs.write_json(out / "result.json", res)
    return res


SWEEP_COLUMNS = ("value", "objective", "bound", "gap_percent", "transmittance",
                 "topopt_seconds", "bound_seconds")


def task_sweep(cfg, args, out):
    sw = cfg.get("sweep")
    if not sw:
        raise ConfigError("sweep: the sweep task needs a 'sweep' block")
    rows = []
    tc = topopt_config(cfg)
    for v in sw["values"]:
        model, problem = build_model(cfg, {sw["parameter"]: v})
        theta, hist = run_topopt(problem, tc, initial_design(cfg, problem, args.seed))
        z = problem.solve(theta)
        _, _, sol, _, secs = compute_bound(cfg, problem, not args.no_cross_correlation)
        g = relative_gap(hist.final_objective, sol.bound)
        rows.append({"value": v, "objective": hist.final_objective, "bound": sol.bound,
                     "gap_percent": None if g is None else 100 * g,
                     "transmittance": _extras(model, z).get("transmittance"),
                     "topopt_seconds": hist.seconds, "bound_seconds": secs})
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(",".join("" if r[c] is None else repr(float(r[c])) for c in SWEEP_COLUMNS))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    x = [r["value"] for r in rows]
    outputs.svg_lines(out / "sweep.svg", x, {"topopt": [r["objective"] for r in rows],
                                             "bound": [r["bound"] for r in rows]},
                      title="objective and bound", xlabel=sw["parameter"], ylabel="f")
    res = {"task": "sweep", "parameter": sw["parameter"], "points": len(rows),
           "max_gap_percent": max((r["gap_percent"] for r in rows if r["gap_percent"] is not None),
                                  default=None)}
    outputs.write_json(out / "result.json", res)
    return res


def task_ablation(cfg, args, out):
    _, problem = build_model(cfg)
    _, _, with_b, _, t1 = compute_bound(cfg, problem, True)
    _, _, without_b, _, t2 = compute_bound(cfg, problem, False)
    unbounded = without_b.status == "unbounded"
    loosening = None if unbounded else (without_b.bound - with_b.bound) / abs(with_b.bound)
    res = {"task": "ablation", "fingerprint": fingerprint(cfg),
           "bound_with_cross": with_b.bound, "bound_without_cross": without_b.bound,
           "status_with_cross": with_b.status, "status_without_cross": without_b.status,
           "unbounded_without_cross": unbounded, "relative_loosening": loosening,
           "bound_seconds": t1 + t2}
    outputs.write_json(out / "result.json", res)
    return res


TASK_FUNCS = {"topopt": task_topopt, "bound": task_bound, "recover": task_recover,
              "sweep": task_sweep, "ablation": task_ablation}


# ---------------------------------------------------------------- commands

def cmd_run(args):
    cfg = load_config(args.config)
    task = args.task or cfg.get("task")
    if task is None:
        raise ConfigError("task: give it in the config or with --task")
    if args.no_cross_correlation and task not in ("ablation", "bound"):
        raise ConfigError("--no-cross-correlation is meant for the ablation study")
    if args.seed is None:
        args.seed = cfg.get("seed", 0)
    out = Path(args.out or cfg.get("output_dir", "run"))
    out.mkdir(parents=True, exist_ok=True)
    res = TASK_FUNCS[task](cfg, args, out)
    print(summary_text(res))
    return EXIT_OK


def summary_text(res):
    lines = [f"task: {res.get('task')}"]
    obj = res.get("objective")
    bound = res.get("bound")
    if obj is not None:
        lines.append(f"objective: {obj:.6g}")
    if bound is not None:
        lines.append(f"bound: {bound:.6g}")
    elif res.get("task") != "sweep":
        lines.append("bound: no bound computed")
    g = relative_gap(obj, bound)
    if g is not None:
        lines.append(f"relative gap: {100 * g:.2f}%")
    for k in ("transmittance", "status", "numerical_rank", "bound_with_cross", "bound_without_cross",
              "points", "max_gap_percent"):
        if res.get(k) is not None:
            lines.append(f"{k.replace('_', ' ')}: {res[k]}")
    return "\n".join(lines)


def cmd_report(args):
    d = Path(args.dir)
    f = d / "result.json"
    if not f.exists():
        raise ConfigError(f"{f} not found")
    res = outputs.read_json(f)
    if res.get("bound") is None and (d / "bound.json").exists():
        b = outputs.read_json(d / "bound.json")
        if b.get("fingerprint") == res.get("fingerprint"):
            res["bound"] = b["bound"]
    print(summary_text(res))
    return EXIT_OK


def cmd_crosscheck(args):
    try:
        prob = sdp.read_sdp(args.file)
    except (OSError, sdp.SdpFormatError) as exc:
        raise ConfigError(str(exc)) from exc
    sol = sdp.solve_sdp(prob)
    cert = sdp.verify_certificate(prob, sol)
    print(f"bound: {sol.bound:.10g}\nstatus: {sol.status}\ncertificate: "
          f"{'passed' if cert.passed else 'failed: ' + '; '.join(cert.messages)}")
    return EXIT_OK


def make_parser():
    p = argparse.ArgumentParser(prog="topobound", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a task from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--task", choices=TASKS)
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--no-cross-correlation", action="store_true")
    r.add_argument("--rank", type=int)
    r.add_argument("--export-sdp", metavar="FILE")
    r.set_defaults(func=cmd_run)
    rp = sub.add_parser("report", help="summarize a run directory")
    rp.add_argument("dir")
    rp.set_defaults(func=cmd_report)
    c = sub.add_parser("crosscheck", help="solve an exported SDP file")
    c.add_argument("file")
    c.set_defaults(func=cmd_crosscheck)
    return p


NUMERIC_ERRORS = (np.linalg.LinAlgError, SingularMatrixError, NotPositiveDefiniteError,
                  sdp.SdpSolveError, sdp.SdpTooLargeError, ZeroDenominatorError,
                  recovery.RankError, FloatingPointError)


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure ({type(exc).__module__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
