"""CSV and JSON writers shared by the experiment outputs.

CSV files are comma separated with ``#``-prefixed metadata lines of the form
``# key: <json value>``, followed by one header row. Floats are written in
scientific notation with 17 significant digits.
"""

import csv
import json
import os

import numpy as np


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.16e}"
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        # strict JSON has no NaN or infinity
        return float(value) if np.isfinite(value) else None
    return value


def _ensure_parent(path):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_csv(path, header, rows, metadata=None):
    _ensure_parent(path)
    with open(path, "w", newline="") as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {json.dumps(_jsonable(value), sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_csv(path):
    """Return ``(metadata, header, rows)``; row values are left as strings."""
    metadata, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = json.loads(value)
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return metadata, header, [row for row in reader if row]


def write_json(path, header, rows, metadata=None):
    records = [dict(zip(header, (_jsonable(v) for v in row))) for row in rows]
    _ensure_parent(path)
    with open(path, "w") as fh:
        json.dump({"metadata": _jsonable(metadata or {}), "data": records}, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    return doc["metadata"], doc["data"]
