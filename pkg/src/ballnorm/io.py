"""Reading and writing fields, tables and reports."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .torus import GridSpec, SampledField

_HEADER_PREFIX = "# "


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def field_to_csv(f: SampledField) -> str:
    """One sample per line in row-major order, after a ``# dim=..,n_samples=..,kind=..`` line."""
    kind = "real" if f.is_real else "complex"
    head = f"{_HEADER_PREFIX}dim={f.grid.dim},n_samples={f.grid.n_samples},kind={kind}\n"
    flat = f.values.ravel()
    if f.is_real:
        body = rows_to_csv(["value"], ([v] for v in flat))
    else:
        body = rows_to_csv(["real", "imag"], ([v.real, v.imag] for v in flat))
    return head + body


def field_from_csv(text: str) -> SampledField:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise ValueError("field file lacks its '# dim=...' header line")
    meta = dict(item.split("=", 1) for item in lines[0][len(_HEADER_PREFIX):].strip().split(","))
    try:
        grid = GridSpec(int(meta["dim"]), int(meta["n_samples"]))
        kind = meta["kind"]
    except KeyError as exc:
        raise ValueError(f"field header is missing {exc}") from None
    rows = list(csv.reader(lines[1:]))
    data = np.array(rows[1:], dtype=float)
    if kind == "real":
        values = data[:, 0]
    elif kind == "complex":
        values = data[:, 0] + 1j * data[:, 1]
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    return SampledField(grid, values)


def save_field(path, f: SampledField) -> Path:
    """Write ``.csv`` as text; anything else as a numpy ``.npz`` archive."""
    path = Path(path)
    if path.suffix == ".csv":
        return atomic_write(path, field_to_csv(f))
    with open(path, "wb") as fh:
        np.savez(fh, dim=f.grid.dim, n_samples=f.grid.n_samples, values=f.values)
    return path


def load_field(path) -> SampledField:
    path = Path(path)
    if path.suffix == ".csv":
        return field_from_csv(path.read_text())
    with np.load(path) as data:
        return SampledField(GridSpec(int(data["dim"]), int(data["n_samples"])), data["values"])


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")
