"""Flat-file output: eigenvalue CSVs, trajectory CSVs, JSON manifests.

All files are written with '\n' line endings and '.' decimal separators
regardless of locale; floats use repr (shortest round-trip), so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path


def _fmt(x) -> str:
    return repr(float(x))


def write_eigenvalue_csv(path, rows) -> None:
    """One ascending eigenvalue vector per line, comma separated, no header."""
    text = "".join(",".join(_fmt(x) for x in row) + "\n" for row in rows)
    Path(path).write_text(text, encoding="ascii", newline="")


def read_eigenvalue_csv(path) -> list:
    out = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if line:
            out.append([float(x) for x in line.split(",")])
    return out


def write_trajectory_csv(path, rows) -> None:
    """Rows of (step, distance_to_target, cesaro_distance) under a header line."""
    lines = ["step,distance_to_target,cesaro_distance\n"]
    for step, dist, ces in rows:
        lines.append(f"{int(step)},{_fmt(dist)},{_fmt(ces)}\n")
    Path(path).write_text("".join(lines), encoding="ascii", newline="")


def write_manifest(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="ascii", newline="")


def manifest_path(out_path) -> Path:
    """Sibling manifest file: foo.csv -> foo.manifest.json."""
    p = Path(out_path)
    return p.with_name(p.stem + ".manifest.json")
