"""Flat-file formats: operator windows and reflection coefficients as JSON,
densities as CSV, residual reports as JSON.  Writers are deterministic
(sorted keys, repr floats) so identical inputs give byte-identical files.
"""

import json
import os

import numpy as np

from .errors import ValidationError
from .harmonic import CircleGrid, from_coeff_dict
from .jacobi import JacobiOperator


def load_jacobi(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    for key in ("n_min", "p", "q"):
        if key not in data:
            raise ValidationError(f"{path}: missing field '{key}'")
    p = np.asarray(data["p"], dtype=float)
    q = np.asarray(data["q"], dtype=float)
    if p.shape != q.shape:
        raise ValidationError(f"{path}: p and q must have equal length")
    if p.size and p.min() <= 0:
        raise ValidationError(f"{path}: p must be positive")
    return JacobiOperator(int(data["n_min"]), p, q)


def save_jacobi(J, path):
    payload = {"n_min": int(J.n_min), "p": [float(v) for v in J.p],
               "q": [float(v) for v in J.q]}
    _write_json(payload, path)


def load_scattering(path, coeff_tol=1e-14):
    """Reflection coefficient from sparse real coefficients.

    Symmetry is enforced on load: imaginary parts beyond tolerance are
    rejected, tiny ones dropped.
    """
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if "grid_size" not in data or "coeffs_s_plus" not in data:
        raise ValidationError(f"{path}: missing grid_size or coeffs_s_plus")
    grid = CircleGrid(int(data["grid_size"]))
    pairs = {}
    for entry in data["coeffs_s_plus"]:
        if len(entry) != 2:
            raise ValidationError(f"{path}: coefficient entries must be [k, value]")
        k, v = int(entry[0]), float(entry[1])
        pairs[k] = v
    s_plus = from_coeff_dict(grid, pairs)
    return grid, s_plus


def save_scattering(s_plus, path, coeff_tol=1e-14):
    c = s_plus.coeffs
    half = s_plus.grid.n_samples // 2
    scale = max(float(np.max(np.abs(c))), 1.0)
    entries = []
    for i, v in enumerate(c):
        if abs(v) > coeff_tol * scale:
            entries.append([int(i - half), float(v.real)])
    payload = {"grid_size": int(s_plus.grid.n_samples), "coeffs_s_plus": entries}
    _write_json(payload, path)


def save_density_csv(density, path):
    lines = ["x,rho11,re_rho12,im_rho12,rho22"]
    for x, m in zip(density.x_nodes, density.rho):
        cells = (float(x), float(m[0, 0].real), float(m[0, 1].real),
                 float(m[0, 1].imag), float(m[1, 1].real))
        lines.append(",".join(repr(c) for c in cells))
    _write_text("\n".join(lines) + "\n", path)


def save_trend_csv(rows, header, path):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    _write_text("\n".join(lines) + "\n", path)


def save_report(report, path):
    _write_json(report, path)


def _write_json(payload, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_plain(payload), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_text(text, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
