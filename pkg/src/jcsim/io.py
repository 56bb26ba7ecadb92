"""Text output with provenance headers.

CSV files start with ``#``-prefixed header lines (parameters, seed, code
version, method tag, creation time) followed by a column-name row and data
written with 12 significant digits.  JSON files carry the same header under
the ``"header"`` key.  The creation time is the only run-dependent field and
appears only in the header, so identical configurations give identical data.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FMT = "%.12g"


def provenance(params: dict | None = None, seed: int | None = None, method: str = "", **extra) -> dict:
    head = {"code": "jcsim", "version": __version__, "method": method}
    if params is not None:
        head["params"] = params
    if seed is not None:
        head["seed"] = int(seed)
    head.update(extra)
    head["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return head


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(np.real(obj)), "im": float(np.imag(obj))}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def header_lines(header: dict) -> list[str]:
    return ["# " + k + ": " + json.dumps(_jsonable(v), sort_keys=True) for k, v in header.items()]


def _split_complex(columns: dict) -> dict:
    out = {}
    for name, col in columns.items():
        col = np.asarray(col)
        if np.iscomplexobj(col):
            out[name + "_re"] = col.real
            out[name + "_im"] = col.imag
        else:
            out[name] = col.astype(float)
    return out


def write_csv(path, columns: dict, header: dict) -> Path:
    """Write equal-length columns; complex columns become ``_re``/``_im`` pairs."""
    cols = _split_complex(columns)
    lengths = {len(c) for c in cols.values()}
    if len(lengths) != 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack(list(cols.values()))
    with path.open("w") as fh:
        fh.write("\n".join(header_lines(header)) + "\n")
        fh.write(",".join(cols.keys()) + "\n")
        np.savetxt(fh, data, fmt=FLOAT_FMT, delimiter=",")
    return path


def write_matrix_csv(path, matrix: np.ndarray, header: dict) -> Path:
    """Write a real matrix row by row (e.g. Wigner values with axes in the header)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("\n".join(header_lines(header)) + "\n")
        np.savetxt(fh, np.asarray(matrix, dtype=float), fmt=FLOAT_FMT, delimiter=",")
    return path


def write_json(path, payload: dict, header: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"header": _jsonable(header), "data": _jsonable(payload)}
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


def read_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_csv`: returns ``(header, columns)``."""
    header, names, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            header[key] = json.loads(val)
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows).reshape(-1, len(names))
    return header, {n: data[:, k] for k, n in enumerate(names)}


__all__ = [
    "provenance",
    "header_lines",
    "write_csv",
    "write_matrix_csv",
    "write_json",
    "read_csv",
    "FLOAT_FMT",
]
