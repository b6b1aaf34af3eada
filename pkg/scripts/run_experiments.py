#!/usr/bin/env python3
"""Run every scenario config in scripts/configs through ``awp-sim run``.

Each config writes to ``<out>/<config stem>/``; a summary table with exit
codes and wall time is printed at the end. The full-resolution FRFT config
needs several GB of memory and a few minutes; skip it with ``--skip-large``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from awpsim.cli import main as awp_main

HERE = Path(__file__).resolve().parent
LARGE_GRID = 1 << 20


def is_large(cfg: Path) -> bool:
    doc = json.loads(cfg.read_text())
    grid = doc.get("grid", 1 << 23 if doc.get("kind") == "FrftDoubleSlit" else 0)
    return grid >= LARGE_GRID


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--configs", type=Path, default=HERE / "configs")
    p.add_argument("--out", type=Path, default=Path("runs"))
    p.add_argument("--skip-large", action="store_true",
                   help=f"skip configs with >= {LARGE_GRID} samples per axis")
    p.add_argument("--only", nargs="*", default=None, help="config stems to run")
    args = p.parse_args(argv)

    rows = []
    for cfg in sorted(args.configs.glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        if args.skip_large and is_large(cfg):
            rows.append((cfg.stem, "skipped", 0.0))
            continue
        t0 = time.perf_counter()
        code = awp_main(["run", str(cfg), "--out", str(args.out / cfg.stem)])
        rows.append((cfg.stem, str(code), time.perf_counter() - t0))

    w = max(len(r[0]) for r in rows)
    print(f"{'config':<{w}}  exit     time")
    for name, code, dt in rows:
        print(f"{name:<{w}}  {code:<7}  {dt:6.1f}s")
    return 0 if all(c in ("0", "skipped") for _, c, _ in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
