"""File formats: point clouds (CSV / binary), path and corridor JSON, OBJ meshes, sweep CSV.

Binary clouds: the 8 ASCII bytes ``CRGNPCD1``, a little-endian uint64 point
count, then ``count`` little-endian float32 ``(x, y, z)`` triplets.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .corridor import corridor_from_dict
from .errors import InputError, ParseError, ValidationError
from .path import ParametricPath, path_from_dict

MAGIC = b"CRGNPCD1"
SWEEP_HEADER = ["degree", "formulation", "volume", "solve_ms", "assembly_ms", "constraints"]


def _read_csv_cloud(path: Path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header x,y,z", line=1) from None
        cols = [h.strip().lower() for h in header]
        if cols not in (["x", "y", "z"], ["x", "y"]):
            raise ParseError(f"expected header 'x,y,z' or 'x,y', got {','.join(header)!r}", line=1)
        width = len(cols)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} values, got {len(row)}", line=lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ParseError(f"non-numeric value in {','.join(row)!r}", line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ValidationError(f"line {lineno}: non-finite coordinate")
            rows.append(vals)
    pts = np.array(rows, dtype=np.float64).reshape(-1, width)
    if width == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    return pts, width


def _read_bin_cloud(path: Path):
    data = path.read_bytes()
    if len(data) < 16 or data[:8] != MAGIC:
        raise ParseError("missing CRGNPCD1 header")
    (count,) = struct.unpack("<Q", data[8:16])
    need = 16 + 12 * count
    if len(data) != need:
        raise ParseError(f"header announces {count} points but payload has {len(data) - 16} bytes")
    pts = np.frombuffer(data, dtype="<f4", count=3 * count, offset=16).reshape(count, 3).astype(np.float64)
    if not np.all(np.isfinite(pts)):
        raise ValidationError("binary cloud contains non-finite coordinates")
    return pts, 3


def read_cloud(path):
    """Return ``(points (m, 3), dim)``; ``dim`` is 2 for ``x,y`` CSV files.

    The format is detected from the magic bytes.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise InputError(f"cannot read cloud file {path}: {exc}") from exc
    if head == MAGIC:
        return _read_bin_cloud(path)
    try:
        return _read_csv_cloud(path)
    except UnicodeDecodeError as exc:
        raise ParseError(f"not a text CSV file: {exc.reason}") from exc


def load_cloud(path) -> np.ndarray:
    """Read an (m, 3) cloud; planar files get ``z = 0``."""
    return read_cloud(path)[0]


def save_cloud(path, points, binary: bool | None = None, planar: bool = False) -> None:
    """Write a cloud as CSV (9 significant digits) or binary float32.

    ``binary=None`` picks binary for ``.bin``/``.pcd`` suffixes.
    """
    path = Path(path)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if binary is None:
        binary = path.suffix.lower() in (".bin", ".pcd")
    if binary:
        path.write_bytes(MAGIC + struct.pack("<Q", len(pts)) + pts.astype("<f4").tobytes())
        return
    lines = ["x,y" if planar else "x,y,z"]
    if planar:
        lines += [f"{x:.9g},{y:.9g}" for x, y, _ in pts]
    else:
        lines += [f"{x:.9g},{y:.9g},{z:.9g}" for x, y, z in pts]
    path.write_text("\n".join(lines) + "\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc


def load_path(path) -> ParametricPath:
    return path_from_dict(_read_json(path))


def save_path(path, ref: ParametricPath | None = None, waypoints=None) -> None:
    if waypoints is not None:
        data = {"waypoints": np.asarray(waypoints, dtype=float).tolist()}
    elif ref is not None:
        data = ref.to_dict()
    else:
        raise InputError("save_path needs a path or waypoints")
    Path(path).write_text(json.dumps(data))


def save_corridor(path, corridor, include_path: bool = True) -> None:
    Path(path).write_text(json.dumps(corridor.to_dict(include_path=include_path)))


def load_corridor(path, ref: ParametricPath | None = None):
    """Read a corridor; an embedded ``path`` entry is used unless ``ref`` is given."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InputError("corridor file must hold a JSON object")
    if ref is None and "path" in data:
        ref = path_from_dict(data["path"])
    return corridor_from_dict(data, ref)


CORRIDOR_SCHEMA = {
    "type": "object",
    "required": ["dim", "degree", "xi_range", "basis"],
    "properties": {
        "dim": {"enum": [2, 3]},
        "degree": {"type": "integer", "minimum": 0},
        "xi_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "basis": {"const": "chebyshev"},
        **{k: {"type": "array", "items": {"type": "number"}, "minItems": 1}
           for k in ("e11", "e12", "e22", "d1", "d2", "b_plus", "b_minus")},
    },
    "if": {"properties": {"dim": {"const": 3}}},
    "then": {"required": ["e11", "e12", "e22", "d1", "d2"]},
    "else": {"required": ["b_plus", "b_minus"]},
}


def save_mesh(path, mesh) -> None:
    Path(path).write_text(mesh.to_obj())


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow(r.as_csv_row())
