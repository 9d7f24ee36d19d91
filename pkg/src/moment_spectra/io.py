"""CSV ingestion, JSON reports and atomic file output."""
import csv
import json
import math
import os
import tempfile

import numpy as np

from .exceptions import DimensionError, InputError

SCHEMA = "moment-spectra/1"


def read_points(path):
    """Load an ``(n, d)`` float array from a comma-separated file.

    Blank lines and lines starting with ``#`` are skipped.  A non-numeric
    cell or a ragged row raises :class:`InputError` naming the line.
    """
    rows = []
    width = None
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            cells = next(csv.reader([text]))
            try:
                row = [float(c) for c in cells]
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise InputError(f"{path}, line {lineno}: non-numeric cell {bad.strip()!r}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError(f"{path}, line {lineno}: expected {width} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise DimensionError(f"{path} holds no data rows")
    X = np.array(rows, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InputError(f"{path} contains non-finite values")
    return X


def _is_float(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def format_float(x):
    """17 significant digits, always with a decimal point or exponent."""
    text = f"{float(x):.17g}"
    return text if any(c in text for c in ".en") else text + ".0"


def atomic_write(path, text):
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def points_to_csv(X, comment=None):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lines = [f"# {comment}"] if comment else []
    lines += [",".join(f"{v:.17g}" for v in row) for row in X]
    return "\n".join(lines) + "\n"


def write_points(path, X, comment=None):
    atomic_write(path, points_to_csv(X, comment))


def write_columns(path, columns):
    """CSV with a header row from a mapping of equal-length 1-d arrays."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    body = [",".join(names)] + [",".join(f"{v:.17g}" for v in row) for row in data]
    atomic_write(path, "\n".join(body) + "\n")


class _Float17(float):
    def __repr__(self):
        return format_float(self)


def _prepare(obj):
    # reals are tagged for 17-digit output; non-finite values become null
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _prepare(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _Float17(x) if math.isfinite(x) else None
    return obj


def dumps_report(report):
    return _encode(_prepare(report)) + "\n"


def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, _Float17):
        return format_float(obj)
    return json.dumps(obj)


def write_report(path, report):
    atomic_write(path, dumps_report(report))


def load_report(path):
    with open(path) as fh:
        report = json.load(fh)
    if report.get("schema") != SCHEMA:
        raise InputError(f"{path}: unexpected schema {report.get('schema')!r}")
    return report
