"""Model JSON, dataset CSV and trace CSV.

Model documents store every double as a hexadecimal float string
(``float.hex``) so a load/save round trip is bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import ParameterError, ShapeError
from .polybasis import Dataset, OrthonormalBasis, Rescaling
from .regression import PceModel

MODEL_FORMAT = "fsspce-model/1"


def _hex(a):
    return [float(v).hex() for v in np.asarray(a, dtype=float).reshape(-1)]


def _unhex(items):
    return np.array([float.fromhex(s) for s in items], dtype=float)


def model_to_dict(model):
    basis = model.basis
    return {
        "format": MODEL_FORMAT,
        "multi_indices": basis.indices.tolist(),
        "monomial_coefficients": [_hex(row) for row in basis.coefficients],
        "rescale_map": {"lower": _hex(basis.rescaling.lower), "upper": _hex(basis.rescaling.upper)},
        "theta": _hex(model.coefficients),
    }


def model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ParameterError(f"unsupported model format {doc.get('format')!r}")
    try:
        indices = np.array(doc["multi_indices"], dtype=int)
        coefs = np.array([_unhex(row) for row in doc["monomial_coefficients"]])
        rescaling = Rescaling(_unhex(doc["rescale_map"]["lower"]), _unhex(doc["rescale_map"]["upper"]))
        theta = _unhex(doc["theta"])
    except (KeyError, TypeError, ValueError) as err:
        raise ParameterError(f"malformed model document: {err}") from err
    if indices.ndim != 2 or coefs.ndim != 2 or coefs.shape[1] != indices.shape[0]:
        raise ShapeError("monomial coefficients do not match the multi-index list")
    if rescaling.lower.shape[0] != indices.shape[1]:
        raise ShapeError("rescale map does not match the input dimension")
    return PceModel(OrthonormalBasis(indices, coefs, None, rescaling), theta)


def dump_model(model, fh):
    json.dump(model_to_dict(model), fh, indent=2)
    fh.write("\n")


def load_model(fh):
    return model_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# CSV


def write_dataset_csv(data, fh):
    """Header x1..xn,y; values with 17 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{k + 1}" for k in range(data.dimension)] + ["y"])
    for row, y in zip(data.inputs, data.outputs):
        w.writerow([f"{v:.17g}" for v in row] + [f"{y:.17g}"])


def read_dataset_csv(fh, name="<csv>"):
    reader = csv.reader(fh)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParameterError(f"{name}: empty file") from None
    n = len(header) - 1
    expected = [f"x{k + 1}" for k in range(n)] + ["y"]
    if n < 1 or header != expected:
        raise ParameterError(f"{name}: header must be x1..xn,y, got {','.join(header)}")
    rows = []
    for line, rec in enumerate(reader, start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != n + 1:
            raise ParameterError(f"{name}:{line}: expected {n + 1} fields, got {len(rec)}")
        try:
            vals = [float(f) for f in rec]
        except ValueError as err:
            raise ParameterError(f"{name}:{line}: {err}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"{name}:{line}: non-finite value")
        rows.append(vals)
    if not rows:
        raise ParameterError(f"{name}: no data rows")
    a = np.array(rows)
    return Dataset(a[:, :n], a[:, n])


def load_dataset(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return read_dataset_csv(fh, str(path))


TRACE_COLUMNS = ("iteration", "multi_index", "score", "surviving_count", "residual_rss")


def write_trace_csv(trace, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow([r.iteration, ";".join(str(v) for v in r.multi_index), repr(float(r.score)),
                    r.surviving_count, repr(float(r.residual_rss))])


def trace_csv_text(trace):
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()
