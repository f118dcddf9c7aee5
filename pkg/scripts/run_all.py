"""Run every shipped config through the CLI and summarise exit codes."""

import argparse
import sys
from pathlib import Path

from pshlab import cli

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="reports")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)
    codes = {}
    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        codes[cfg.stem] = cli.main(["run", "--config", str(cfg), "--out-dir", args.out_dir, "--jobs", str(args.jobs)])
    for name, code in codes.items():
        print(f"{name:<16} exit {code}")
    return max(codes.values())


if __name__ == "__main__":
    sys.exit(main())
