"""Matrix file formats and JSON report encoding.

CSV: one row per line, comma-separated decimal or scientific-notation reals, no
header.  JSON: ``{"rows": u, "cols": v, "entries": [row-major reals]}``.
"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ParseError
from .matrix import as_matrix

FORMATS = ("csv", "json")


def _text(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_float(token, allow_inf):
    token = token.strip()
    try:
        x = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}") from None
    if math.isnan(x) or (math.isinf(x) and not (allow_inf and x > 0)):
        raise ParseError(f"not an admissible number: {token!r}")
    return x


def _parse_csv(text, allow_inf):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(t.strip() for t in r)]
    if not rows:
        raise ParseError("empty CSV input")
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise DimensionMismatch(f"CSV row {k} has {len(r)} fields, expected {width}")
    return np.array([[_parse_float(t, allow_inf) for t in r] for r in rows])


def _parse_json(text, allow_inf):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or not {"rows", "cols", "entries"} <= obj.keys():
        raise ParseError('JSON matrix must be an object with "rows", "cols", "entries"')
    u, v, entries = obj["rows"], obj["cols"], obj["entries"]
    if not (isinstance(u, int) and isinstance(v, int) and u >= 1 and v >= 1):
        raise ParseError('"rows" and "cols" must be positive integers')
    if not isinstance(entries, list):
        raise ParseError('"entries" must be a list')
    if len(entries) != u * v:
        raise DimensionMismatch(f"expected {u * v} entries for {u}x{v}, got {len(entries)}")
    vals = []
    for e in entries:
        if isinstance(e, bool) or not isinstance(e, (int, float, str)):
            raise ParseError(f"not a number: {e!r}")
        vals.append(_parse_float(str(e), allow_inf))
    return np.array(vals, dtype=np.float64).reshape(u, v)


def parse_array(source, format="csv", *, allow_inf=False):
    """Parse a 2-D real array without the non-negativity checks."""
    if format not in FORMATS:
        raise ParseError(f"unknown format {format!r}; expected one of {FORMATS}")
    text = _text(source)
    return _parse_csv(text, allow_inf) if format == "csv" else _parse_json(text, allow_inf)


def read_matrix(source, format="csv"):
    """Parse a matrix from text, bytes or a readable stream and validate it."""
    return as_matrix(parse_array(source, format))


def format_for(path):
    return "json" if str(path).lower().endswith(".json") else "csv"


def load_matrix(path, format=None):
    path = Path(path)
    return read_matrix(path.read_bytes(), format or format_for(path))


def load_array(path, format=None, *, allow_inf=False):
    path = Path(path)
    return parse_array(path.read_bytes(), format or format_for(path), allow_inf=allow_inf)


def load_vector(path):
    """Read a vector stored either as a single CSV row/column or a JSON list."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("["):
        try:
            vals = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
        return np.array([_parse_float(str(x), False) for x in vals])
    a = _parse_csv(text, False)
    if 1 not in a.shape:
        raise DimensionMismatch(f"expected a vector, got shape {a.shape}")
    return a.ravel()


def _num(x):
    text = format(float(x), ".17g")
    # keep floats recognisable as floats in JSON ("1.0", not "1")
    return text if any(ch in text for ch in ".einf") else text + ".0"


def write_matrix(m, format="csv"):
    """Serialize with 17 significant digits so that parsing round-trips exactly."""
    m = np.asarray(m, dtype=np.float64)
    if format == "csv":
        return "".join(",".join(_num(x) for x in row) + "\n" for row in m)
    if format == "json":
        return dumps({"rows": m.shape[0], "cols": m.shape[1], "entries": m.ravel()}) + "\n"
    raise ParseError(f"unknown format {format!r}")


def _encode(obj):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _num(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float printed to 17 significant digits."""
    return _encode(obj)
