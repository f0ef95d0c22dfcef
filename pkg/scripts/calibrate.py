"""Regenerate configs/calibration.yaml from the p = 2, A = 0 reference family.

The family is v = Re z^N, N = 1, 2, 3, sampled exactly (these are exact
solutions) and reduced to f, which equals F since omega vanishes
without drift.
"""

import argparse
from pathlib import Path

import yaml

from pucp.beltrami import reduce_solution
from pucp.experiments import TRACE_METHOD, calibrate_constants
from pucp.grid import make_disk_grid
from pucp.manufactured import manufactured_instance

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--safety", type=float, default=2.0)
    ap.add_argument("--out", default=str(ROOT / "configs" / "calibration.yaml"))
    args = ap.parse_args()

    grid = make_disk_grid(args.n, 8.0)
    radii = [2.0 ** -j for j in range(1, 8)]
    maps = []
    for N in (1, 2, 3):
        kind = "affine" if N == 1 else "harmonic_monomial"
        inst = manufactured_instance(kind, 2.0, grid, N=N)
        maps.append(reduce_solution(inst.reference, None, 2.0, "drift", method=TRACE_METHOD).f)
    table = calibrate_constants(maps, radii, safety=args.safety)
    doc = {"calibration": {k: {"value": float(c.value), "provenance": c.provenance, "note": c.note}
                           for k, c in table.items()}}
    header = (f"# generated by scripts/calibrate.py --n {args.n} --safety {args.safety}\n"
              "# reference family: p = 2, A = 0, v = Re z^N for N = 1, 2, 3\n")
    Path(args.out).write_text(header + yaml.safe_dump(doc, sort_keys=True))
    for k, c in table.items():
        print(f"{k:30s} {c.value:.6g}  ({c.note})")


if __name__ == "__main__":
    main()
