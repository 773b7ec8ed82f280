"""CSV ingestion and output serialization for the command line."""

import csv
import io
import json
import math

import numpy as np

from .errors import AsymmetricInput, NonNumericCell, ParseError
from .selection import Dataset

SYMMETRY_TOL = 1e-10


def fmt(x):
    """17 significant digits; round-trips any float64 exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _read_table(path):
    with open(path, newline="") as fh:
        text = fh.read()
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text)))]
    rows = [(ln, [c.strip() for c in r]) for ln, r in rows if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty input", line=1)
    first_ln, first = rows[0]
    if all(_is_number(c) for c in first):
        names = [f"col{i}" for i in range(len(first))]
        body = rows
    else:
        names = first
        body = rows[1:]
    width = len(names)
    values = np.empty((len(body), width))
    for r, (ln, cells) in enumerate(body):
        if len(cells) != width:
            raise ParseError(f"expected {width} fields, found {len(cells)}", line=ln)
        for c, cell in enumerate(cells):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise NonNumericCell(f"non-numeric cell {cell!r}", line=ln, column=c + 1) from None
    return names, values


def read_observations(path):
    """Header row of variable names (optional) followed by numeric rows."""
    names, values = _read_table(path)
    if values.shape[0] < 2:
        raise ParseError("need at least two observation rows")
    return Dataset(values, names)


def read_covariance(path):
    """A p x p matrix with optional header; symmetrized by averaging.

    Raises AsymmetricInput when |M_ij - M_ji| exceeds 1e-10.
    """
    names, values = _read_table(path)
    p = len(names)
    if values.shape != (p, p):
        raise ParseError(f"covariance must be {p}x{p}, got {values.shape[0]} rows")
    gap = np.abs(values - values.T)
    if gap.max() > SYMMETRY_TOL:
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise AsymmetricInput(f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) differ by {gap[i, j]:.3g}")
    return names, 0.5 * (values + values.T)


def ingest(path, kind):
    """Dataset for ``observations_csv``, (names, S) for ``covariance_csv``."""
    if kind == "observations_csv":
        return read_observations(path)
    if kind == "covariance_csv":
        return read_covariance(path)
    raise ValueError(f"unknown input kind {kind!r}")


# -- writers ---------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def to_json(obj):
    # json emits floats with repr(), the shortest string that round-trips exactly
    return json.dumps(_jsonable(obj), indent=1, sort_keys=False) + "\n"


def to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def matrix_csv(names, M):
    return to_csv(names, [list(map(float, r)) for r in np.asarray(M)])


def to_dot(names, edges, Theta):
    """Undirected graph, one ``--`` line per edge weighted by Theta_ij."""
    lines = ["graph precision {"]
    for name in names:
        lines.append(f'  "{name}";')
    for i, j in sorted(edges):
        lines.append(f'  "{names[i]}" -- "{names[j]}" [weight={fmt(Theta[i, j])}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
