#!/usr/bin/env python3
"""Run one or more experiment presets and collect CSVs under an output root.

Example:
    python scripts/run_presets.py --out results --seeds 1,2,3,4,5
    python scripts/run_presets.py --out results --presets last-round --seeds 7
"""
import argparse
import sys
from pathlib import Path

from zerosum.cli import PRESET_NAMES, run_preset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output root directory")
    parser.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated seeds")
    parser.add_argument(
        "--presets", default=",".join(PRESET_NAMES),
        help=f"comma-separated preset names (default: all of {', '.join(PRESET_NAMES)})"
    )
    parser.add_argument("--parallelism", type=int, default=4)
    args = parser.parse_args()

    seeds = [int(tok) for tok in args.seeds.split(",")]
    failures = 0
    for name in args.presets.split(","):
        out_dir = Path(args.out) / name
        print(f"running preset {name} -> {out_dir}")
        failures += run_preset(name, out_dir, seeds, parallelism=args.parallelism)
    if failures:
        print(f"{failures} run(s) failed; see the manifests", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
