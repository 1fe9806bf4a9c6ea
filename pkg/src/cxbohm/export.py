"""CSV and line-delimited JSON writers with a fixed, deterministic layout."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = ("t", "x_re", "x_im", "q_re", "q_im")
CONTOUR_COLUMNS = ("x_re", "x_im", "value")
LEVEL_COLUMNS = ("level", "segment", "closed", "x_re", "x_im")
ENSEMBLE_COLUMNS = ("t", "mean", "var", "ks_stat", "ks_pvalue", "mean_quad", "var_quad", "n_aborted")
CHECK_COLUMNS = ("name", "passed", "measured", "threshold", "detail")


def fmt(v) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_records(path, meta: dict, records):
    """First line is the run metadata, then one JSON object per record."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(json.dumps({"record": "meta", **_plain(meta)}, sort_keys=True) + "\n")
        for rec in records:
            fh.write(json.dumps(_plain(rec), sort_keys=True) + "\n")
    return path


def read_records(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
