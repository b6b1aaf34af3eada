"""Bit-stable writers: 16-bit PGM maps, metric CSV, JSON manifest.

All writers are deterministic: the same inputs give the same bytes.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from .errors import ContractError

PGM_MAXVAL = 65535


def scale_to_u16(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Min-max scale to 0..65535 (rounded); a constant map becomes all zeros.

    Returns the scaled array and the ``(min, max)`` needed to undo it.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ContractError(f"PGM maps must be 2D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ContractError("PGM maps must be finite")
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        u = np.rint((v - lo) / (hi - lo) * PGM_MAXVAL)
    else:
        u = np.zeros_like(v)
    return u.astype(">u2"), lo, hi


def pgm_bytes(values: np.ndarray) -> tuple[bytes, float, float]:
    """Binary (P5) 16-bit PGM encoding, big-endian samples, rows top to bottom."""
    u, lo, hi = scale_to_u16(values)
    h, w = u.shape
    header = f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + u.tobytes(order="C"), lo, hi


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a 16-bit P5 PGM as written by :func:`pgm_bytes` (header tokens
    separated by single whitespace, no comments)."""
    parts = data.split(maxsplit=4)
    if len(parts) < 5 or parts[0] != b"P5":
        raise ContractError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != PGM_MAXVAL:
        raise ContractError(f"expected maxval {PGM_MAXVAL}, got {maxval}")
    body = data[-2 * w * h:]
    return np.frombuffer(body, dtype=">u2").reshape(h, w).astype(np.uint16)


def format_value(v: float) -> str:
    """Twelve significant digits, ``repr``-free and platform independent."""
    return format(float(v), ".12g")


def metrics_csv(rows: list[tuple[str, float]]) -> bytes:
    lines = ["metric,value"]
    for name, v in rows:
        if "," in name or "\n" in name:
            raise ContractError(f"metric name {name!r} is not CSV-safe")
        lines.append(f"{name},{format_value(v)}")
    return ("\n".join(lines) + "\n").encode("ascii")


def read_metrics_csv(text: str) -> dict[str, float]:
    lines = text.strip().splitlines()
    if not lines or lines[0] != "metric,value":
        raise ContractError("metrics CSV must start with 'metric,value'")
    return {k: float(v) for k, v in (ln.split(",", 1) for ln in lines[1:])}


def json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_atomic_dir(out_dir: str | os.PathLike, files: dict[str, bytes]) -> Path:
    """Populate ``out_dir`` with ``files`` all at once.

    Files are written to a sibling temporary directory which is then renamed
    into place; an existing ``out_dir`` is replaced only after the new one is
    complete, so readers never see a partial set.
    """
    out = Path(out_dir).resolve()
    parent = out.parent
    parent.mkdir(parents=True, exist_ok=True)
    if out.exists() and not out.is_dir():
        raise ContractError(f"output path {out} exists and is not a directory")
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.tmp-", dir=parent))
    try:
        for name, data in sorted(files.items()):
            if os.sep in name or name.startswith("."):
                raise ContractError(f"invalid output file name {name!r}")
            (tmp / name).write_bytes(data)
        if out.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{out.name}.old-", dir=parent))
            os.replace(out, old / out.name)
            os.replace(tmp, out)
            shutil.rmtree(old)
        else:
            os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out
