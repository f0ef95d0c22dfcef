"""Run every shipped config end to end and tabulate the chain verdicts.

Artifacts land in <out>/<config name>/. The negative control is expected to
fail (exit 1) and bad_case_split to be rejected (exit 2); both count as
agreeing with expectation.
"""

import argparse
import json
import time
from pathlib import Path

from pucp.cli import EXIT_CHAIN, EXIT_CONFIG, EXIT_OK, run_config
from pucp.config import ConfigError, load_config

ROOT = Path(__file__).resolve().parents[1]
EXPECTED = {"negative_control": EXIT_CHAIN, "bad_case_split": EXIT_CONFIG}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default="out/battery")
    ap.add_argument("--n", type=int, help="override the grid size of every config")
    args = ap.parse_args()

    overrides = {"n": args.n} if args.n else None
    rows, agree = [], True
    for path in sorted(Path(args.configs).glob("*.yaml")):
        name = path.stem
        if name == "calibration":
            continue
        t0 = time.perf_counter()
        try:
            cfg = load_config(path, overrides)
        except ConfigError as exc:
            code, first = EXIT_CONFIG, str(exc).splitlines()[0]
        else:
            out = Path(args.out) / name
            code = run_config(cfg, out)
            chain = out / "chain.json"
            first = json.loads(chain.read_text())["first_failure"] if chain.exists() else None
        ok = code == EXPECTED.get(name, EXIT_OK)
        agree &= ok
        rows.append((name, code, first, time.perf_counter() - t0, ok))

    print(f"{'config':24s} {'exit':>4s}  {'time':>7s}  {'as expected':11s}  first failure")
    for name, code, first, dt, ok in rows:
        print(f"{name:24s} {code:4d}  {dt:6.1f}s  {'yes' if ok else 'NO':11s}  {first or '-'}")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
