"""Objective and bound of the mode converter versus the design-region size.

Writes sweep.csv, sweep.svg and result.json into the output directory by
running the `sweep` task of the command-line front end.
"""
import argparse
import json
import sys
import tempfile
from pathlib import Path

from topobound import cli

DEFAULT_VALUES = (0.1667, 0.2381, 0.3333, 0.4286, 0.5)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/design_size_sweep")
    ap.add_argument("--nx", type=int, default=112)
    ap.add_argument("--ny", type=int, default=56)
    ap.add_argument("--objective", default="overlap_magnitude",
                    choices=("overlap_magnitude", "normalized_overlap"))
    ap.add_argument("--values", type=float, nargs="+", default=DEFAULT_VALUES)
    ap.add_argument("--max-iter", type=int, default=1000)
    args = ap.parse_args()

    cfg = {
        "problem": "mode_converter",
        "task": "sweep",
        "physics": {"wavelength": 0.8, "eps_r": 10.0, "L_d": args.values[0], "H_c": 0.1667},
        "mesh": {"nx": args.nx, "ny": args.ny},
        "objective": args.objective,
        "topopt": {"max_iter": args.max_iter},
        "sweep": {"parameter": "L_d", "values": list(args.values)},
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
    code = cli.main(["run", "--config", fh.name, "--out", args.out])
    Path(fh.name).unlink()
    if code == 0:
        print((Path(args.out) / "sweep.csv").read_text(), end="")
    return code


if __name__ == "__main__":
    sys.exit(main())
