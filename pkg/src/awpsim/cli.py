"""``awp-sim`` command line: run configured scenarios, run the self-test.

Exit codes
----------
0  success
2  configuration error (bad JSON, schema violation, invalid flag value)
3  an asserted metric threshold failed (outputs are still written)
4  numerical guard refusal (aliasing, resolution, cost or geometry guard)
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

from scipy import fft as sp_fft

from . import __version__
from .errors import AliasingWarning, ContractError, NumericalGuardError
from .output import json_bytes, metrics_csv, pgm_bytes, write_atomic_dir
from .scenarios import (
    SCHEMA_DOC,
    ScenarioConfig,
    ScenarioResult,
    config_from_dict,
    config_to_dict,
    run_scenario,
)
from .selftest import BUDGET_S, format_table, run_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_THRESHOLD = 3
EXIT_GUARD = 4
THREADS_ENV = "AWP_SIM_THREADS"


class ConfigError(ContractError):
    """Invalid configuration file or command-line value."""


@dataclass(frozen=True)
class RunManifest:
    config_path: Path
    out_dir: Path
    grid_override: int | None = None
    oracle_enabled: bool = False
    gain_override: float | None = None

    def __post_init__(self):
        g = self.grid_override
        if g is not None and not (32 <= g <= 2048 and g & (g - 1) == 0):
            raise ConfigError(f"--grid must be a power of two in [32, 2048], got {g}")
        if self.gain_override is not None and not self.gain_override >= 0:
            raise ConfigError(f"--gain must be non-negative, got {self.gain_override}")


def parse_config(text: bytes, grid_override: int | None = None,
                 gain_override: float | None = None, oracle: bool = False) -> ScenarioConfig:
    """Decode a UTF-8 JSON config and validate it against the scenario schema."""
    try:
        doc = json.loads(text.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed JSON config: {exc}") from None
    try:
        return config_from_dict(doc, grid_override=grid_override,
                                gain_override=gain_override, oracle=oracle or None)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def render_outputs(m: RunManifest, cfg: ScenarioConfig, res: ScenarioResult,
                   code: int) -> dict[str, bytes]:
    """All output files as bytes, keyed by file name."""
    files: dict[str, bytes] = {}
    rows: list[tuple[str, float]] = list(res.metrics.items())
    for name, I in res.maps.items():
        data, lo, hi = pgm_bytes(I.values)
        files[f"{name}.pgm"] = data
        rows += [(f"{name}.min", lo), (f"{name}.max", hi)]
    rows += [(f"pass.{c.name}", float(c.passed)) for c in res.checks]
    files["metrics.csv"] = metrics_csv(rows)
    files["manifest.json"] = json_bytes({
        "tool": "awp-sim",
        "version": __version__,
        "config_path": str(m.config_path),
        "out_dir": str(m.out_dir),
        "grid_override": m.grid_override,
        "oracle_enabled": m.oracle_enabled,
        "gain_override": m.gain_override,
        "config": config_to_dict(cfg),
        "files": sorted(files) + ["manifest.json"],
        "failed_checks": [c.name for c in res.failed],
        "exit_code": code,
    })
    return files


def run(m: RunManifest) -> int:
    """Execute one scenario run; returns the process exit code."""
    try:
        text = Path(m.config_path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        workers = worker_count()
        cfg = parse_config(text, m.grid_override, m.gain_override, m.oracle_enabled)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with warnings.catch_warnings(), sp_fft.set_workers(workers):
            warnings.simplefilter("error", AliasingWarning)
            res = run_scenario(cfg)
    except (NumericalGuardError, AliasingWarning) as exc:
        print(f"numerical guard refused the run: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ContractError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    code = EXIT_OK if res.passed else EXIT_THRESHOLD
    try:
        write_atomic_dir(m.out_dir, render_outputs(m, cfg, res, code))
    except (OSError, ContractError) as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in res.failed:
        print(f"threshold failed: {c.name} = {c.value:.6g} (required {c.op} {c.threshold:g})",
              file=sys.stderr)
    return code


def selftest(quick: bool = False) -> int:
    t0 = time.perf_counter()
    outcomes = run_checks(quick=quick)
    print(format_table(outcomes))
    elapsed = time.perf_counter() - t0
    if elapsed > BUDGET_S:
        print(f"warning: selftest took {elapsed:.0f} s (budget {BUDGET_S:.0f} s)", file=sys.stderr)
    ok = all(o.passed for o in outcomes)
    print("selftest:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="awp-sim",
        description="Advanced-wave picture simulator for structured-pump down-conversion.",
        epilog=f"Set {THREADS_ENV} to cap FFT worker threads.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario config",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog=SCHEMA_DOC)
    r.add_argument("config", type=Path, help="scenario JSON file")
    r.add_argument("--out", type=Path, required=True, help="output directory")
    r.add_argument("--grid", type=int, default=None,
                   help="override samples per axis (power of two, 32..2048)")
    r.add_argument("--oracle", action="store_true",
                   help="use the direct-quadrature oracle for coincidences")
    r.add_argument("--gain", type=float, default=None,
                   help="stimulated / spontaneous power ratio of preview maps")
    s = sub.add_parser("selftest", help="run the invariant suite")
    s.add_argument("--quick", action="store_true", help="skip the quadrature oracle")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:      # argparse usage errors are config errors
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "selftest":
        return selftest(quick=args.quick)
    try:
        m = RunManifest(args.config, args.out, args.grid, args.oracle, args.gain)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(m)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
