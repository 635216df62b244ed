"""Run the full pipeline for the bundled parameter sets and print a timing table.

Usage: python3 scripts/run_sets.py [config.json ...]
With no arguments the three configs under scripts/configs/ are used.
"""
import argparse
import sys
import time
from pathlib import Path

from shearloc.config import RunConfig
from shearloc.pipeline import run_pipeline

HERE = Path(__file__).resolve().parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", type=Path)
    ap.add_argument("--out-root", type=Path, default=None,
                    help="write each run under this directory instead of the config out_dir")
    args = ap.parse_args(argv)
    paths = args.configs or sorted((HERE / "configs").glob("set*.json"))
    status = 0
    for path in paths:
        cfg = RunConfig.load(path)
        if args.out_root is not None:
            cfg.out_dir = str(args.out_root / path.stem)
        t0 = time.perf_counter()
        report = run_pipeline(cfg)
        dt = time.perf_counter() - t0
        failed = [c["name"] for c in report["checks"] if c["status"] != "PASS"]
        print(f"{path.stem}: {'PASS' if report['pass'] else 'FAIL'} in {dt:.1f} s -> {cfg.out_dir}"
              + (f" (failed: {', '.join(failed)})" if failed else ""))
        status |= 0 if report["pass"] else 2
    return status


if __name__ == "__main__":
    sys.exit(main())
