"""
JSON and CSV emission for the lq_* commands.

Floats are written with Python's shortest round-trip repr, which reads back
to the identical 64-bit value; complex entries become {"re": ..., "im": ...}.
"""
import csv
import json
import math

import numpy as np


def to_builtin(value):
    """numpy arrays/scalars (possibly nested in dicts and lists) -> JSON-ready builtins."""
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value) and not np.any(value.imag):
            value = value.real
        return to_builtin(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _float(value.real), 'im': _float(value.imag)}
    if isinstance(value, (float, np.floating)):
        return _float(value)
    return value


def _float(value):
    value = float(value)
    # JSON has no literal for these
    if math.isnan(value) or math.isinf(value):
        return repr(value)
    return value


def dumps(report):
    return json.dumps(to_builtin(report), sort_keys=True, indent=2)


def write_json(stream, report):
    stream.write(dumps(report))
    stream.write('\n')


def write_csv(path, header, rows):
    """Write header + rows to `path` (UTF-8). OSError propagates to the caller."""
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(cell) for cell in row])


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def matrix_columns(prefix, rows, cols):
    """Column names prefix_i_j (1-based) in row-major order."""
    return [f'{prefix}_{i + 1}_{j + 1}' for i in range(rows) for j in range(cols)]


def vector_columns(prefix, size):
    return [f'{prefix}_{i + 1}' for i in range(size)]
