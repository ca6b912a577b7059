"""Plate designs optimized at several frequencies, their bounds and response curves.

For each excitation frequency the script optimizes the mass distribution,
solves the relaxation, and records the frequency response of the optimized
design together with its half-power Q factor. The relaxation has side 1923
on the default 30 x 30 mesh, so each bound takes tens of minutes.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from topobound import outputs, sdp
from topobound.plate import Plate, PlateConfig, QFactorError, frequency_response, q_factor
from topobound.qcqp import build_qcqp
from topobound.topopt import TopoptConfig, run_topopt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/plate_frequency_study")
    ap.add_argument("--n", type=int, default=30, help="elements per side")
    ap.add_argument("--omegas", type=float, nargs="+", default=(5.0, 10.0, 15.0))
    ap.add_argument("--no-bound", action="store_true")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    model = Plate(PlateConfig(nx=args.n, ny=args.n))
    grid = np.linspace(0.5, 25.0, 246)
    rows, curves = [], {}
    for om in args.omegas:
        prob = model.problem(om)
        theta, hist = run_topopt(prob, TopoptConfig(max_iter=1000))
        bound = np.nan
        if not args.no_bound:
            sol = sdp.solve_sdp(sdp.assemble_relaxation(build_qcqp(prob)))
            bound = sol.bound
        vals, _ = frequency_response(model, prob.full_theta(theta), grid)
        try:
            q = q_factor(grid, vals)
        except QFactorError:
            q = np.nan
        curves[f"w={om:g}"] = list(vals)
        rows.append({"omega": om, "objective": hist.final_objective, "bound": bound,
                     "gap_percent": 100 * (bound - hist.final_objective) / bound,
                     "q_factor": q})
        print(rows[-1], flush=True)

    with open(out / "plate_study.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    with open(out / "response.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega"] + list(curves))
        for i, om in enumerate(grid):
            w.writerow([om] + [curves[k][i] for k in curves])
    outputs.svg_lines(out / "response.svg", grid, curves, title="mean |w|^2 of optimized designs",
                      xlabel="omega", ylabel="mean |w|^2")


if __name__ == "__main__":
    main()
