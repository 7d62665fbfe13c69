"""Text dataset files and JSON model files.

Dataset file (UTF-8, whitespace separated)::

    KLDA1 <n> <r> <c> <J>
    <label> <x_11> <x_12> ... <x_rc>      # one line per observation, row-major

``<label>`` is ``NA`` for unlabeled data.  Floats are written with 17
significant digits, so write -> read -> write is byte-identical.
"""

import json

import numpy as np

from . import __version__
from .matnorm import LabeledMatrixDataset, ModelParameters

MAGIC = "KLDA1"
MODEL_FORMAT = "matlda-model"


class DataFileError(ValueError):
    pass


def fmt(x):
    return "%.17g" % x


def write_dataset(path, data):
    n = data.n
    r, c = data.shape
    J = data.n_classes if data.labeled else 0
    lines = [f"{MAGIC} {n} {r} {c} {J}"]
    for i in range(n):
        lab = str(int(data.y[i])) if data.labeled else "NA"
        lines.append(" ".join([lab] + [fmt(v) for v in data.X[i].ravel()]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_dataset(path):
    """Parse a dataset file, reporting problems with their line numbers."""
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    rows = [(k + 1, line.split()) for k, line in enumerate(raw) if line.strip()]
    if not rows:
        raise DataFileError(f"{path}: empty file")
    lineno, head = rows[0]
    if len(head) != 5 or head[0] != MAGIC:
        raise DataFileError(f"{path}:{lineno}: expected header '{MAGIC} n r c J'")
    try:
        n, r, c, J = (int(t) for t in head[1:])
    except ValueError:
        raise DataFileError(f"{path}:{lineno}: header counts must be integers") from None
    if min(n, r, c) < 0 or r == 0 or c == 0 or J < 0:
        raise DataFileError(f"{path}:{lineno}: invalid header counts")
    body = rows[1:]
    if len(body) != n:
        raise DataFileError(f"{path}: header says {n} observations, found {len(body)}")
    X = np.empty((n, r, c))
    labels = []
    for i, (lineno, toks) in enumerate(body):
        if len(toks) != r * c + 1:
            raise DataFileError(f"{path}:{lineno}: expected {r * c + 1} fields, got {len(toks)}")
        labels.append(toks[0])
        try:
            vals = np.array([float(t) for t in toks[1:]])
        except ValueError:
            raise DataFileError(f"{path}:{lineno}: could not parse a value") from None
        if not np.all(np.isfinite(vals)):
            raise DataFileError(f"{path}:{lineno}: non-finite value")
        X[i] = vals.reshape(r, c)
    # an empty body is labeled iff the header declares classes
    if (n and all(lab == "NA" for lab in labels)) or (not n and J == 0):
        return LabeledMatrixDataset(X, None, None)
    y = np.empty(n, dtype=np.int64)
    for i, ((lineno, _), lab) in enumerate(zip(body, labels)):
        if not lab.isdigit() or not 1 <= int(lab) <= J:
            raise DataFileError(f"{path}:{lineno}: label {lab!r} not in 1..{J}")
        y[i] = int(lab)
    return LabeledMatrixDataset(X, y, J)


def model_to_dict(params, sigma=None, fit_info=None):
    d = {
        "format": MODEL_FORMAT,
        "software_version": __version__,
        "priors": params.priors.tolist(),
        "means": params.means.tolist(),
        "phi": None if params.phi is None else params.phi.tolist(),
        "delta": None if params.delta is None else params.delta.tolist(),
        "fit": dict(params.metadata) if fit_info is None else fit_info,
    }
    if sigma is not None:
        d["sigma"] = np.asarray(sigma).tolist()
    return d


def save_model(path, params, sigma=None, fit_info=None):
    """Write ``params`` as JSON (floats use the shortest exact representation)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(params, sigma, fit_info), fh, indent=1, sort_keys=True)
        fh.write("\n")


def save_truth(path, priors, means, sigma):
    """Truth file for a non-separable covariance: means, priors and full ``sigma``."""
    d = {"format": MODEL_FORMAT, "software_version": __version__,
         "priors": np.asarray(priors).tolist(), "means": np.asarray(means).tolist(),
         "phi": None, "delta": None, "sigma": np.asarray(sigma).tolist(), "fit": {}}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(d, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{path}: invalid JSON ({exc})") from None
    if d.get("format") != MODEL_FORMAT:
        raise DataFileError(f"{path}: not a {MODEL_FORMAT} file")
    if d.get("phi") is None or d.get("delta") is None:
        raise DataFileError(f"{path}: model has no Kronecker precision factors")
    try:
        return ModelParameters(d["priors"], d["means"], d["phi"], d["delta"],
                               metadata=d.get("fit") or {})
    except (KeyError, ValueError) as exc:
        raise DataFileError(f"{path}: malformed model ({exc})") from None
