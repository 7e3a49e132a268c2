"""Matrix, state, schedule, report, and CSV file I/O.

Matrices and states use a JSON object {"rows": r, "cols": c,
"entries": [[re, im], ...]} in row-major order; states are r x 1 matrices.
Floats are serialized with Python's shortest round-trip repr, so read/write
round-trips are exact.  All writes are atomic (write to a temp file in the
same directory, then rename).
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile

import numpy as np

from .errors import ParseError


def _atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hsvt-tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_dict(d: dict, path=None) -> np.ndarray:
    for key in ("rows", "cols", "entries"):
        if key not in d:
            raise ParseError(f"missing key {key!r}", path=path, field=key)
    rows, cols = d["rows"], d["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
        raise ParseError("rows/cols must be positive integers", path=path, field="rows")
    entries = d["entries"]
    if len(entries) != rows * cols:
        raise ParseError(
            f"expected {rows * cols} entries, got {len(entries)}",
            path=path, field="entries",
        )
    flat = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(entries):
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise ParseError(f"entry {i} is not a [re, im] pair", path=path, field="entries")
        flat[i] = complex(float(pair[0]), float(pair[1]))
    if not np.all(np.isfinite(flat.real)) or not np.all(np.isfinite(flat.imag)):
        raise ParseError("non-finite entry", path=path, field="entries")
    return flat.reshape(rows, cols)


def write_matrix(path, m: np.ndarray) -> None:
    _atomic_write_text(path, json.dumps(matrix_to_dict(m), indent=1) + "\n")


def read_matrix(path) -> np.ndarray:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", path=path) from exc
    if not isinstance(d, dict):
        raise ParseError("top-level JSON value must be an object", path=path)
    return matrix_from_dict(d, path=path)


def write_state(path, psi: np.ndarray) -> None:
    write_matrix(path, np.asarray(psi, dtype=complex).reshape(-1, 1))


def read_state(path) -> np.ndarray:
    m = read_matrix(path)
    if m.shape[1] != 1:
        raise ParseError(f"state must be a column (cols=1), got cols={m.shape[1]}",
                         path=path, field="cols")
    return m.reshape(-1)


def write_report(path, report: dict) -> None:
    _atomic_write_text(path, json.dumps(report, indent=1, sort_keys=True) + "\n")


def read_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write_text(path, buf.getvalue())
