"""Columnar CSV (and JSON) export with fixed float formatting.

Every float is written with 17 significant digits, so files round-trip
exactly and identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence, TextIO

import numpy as np

from .exceptions import InputError

FLOAT_FORMAT = ".17g"


def fmt(x) -> str:
    return format(float(x), FLOAT_FORMAT)


def write_table(out: TextIO, header: Sequence[str], rows: Iterable[Sequence[float]], form: str = "csv") -> None:
    if form == "csv":
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
    elif form == "json":
        out.write('{"columns": [' + ", ".join(f'"{h}"' for h in header) + '], "rows": [')
        first = True
        for row in rows:
            out.write(("\n  [" if first else ",\n  [") + ", ".join(fmt(v) for v in row) + "]")
            first = False
        out.write("\n]}\n")
    else:
        raise InputError(f"unknown output format {form!r}")


def table_text(header: Sequence[str], rows: Iterable[Sequence[float]], form: str = "csv") -> str:
    buf = io.StringIO()
    write_table(buf, header, rows, form)
    return buf.getvalue()


def read_table(source: TextIO, expected: Sequence[str] | None = None) -> tuple[list[str], np.ndarray]:
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty CSV file") from None
    if expected is not None and header != list(expected):
        raise InputError(f"expected columns {','.join(expected)}, got {','.join(header)}")
    try:
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    except ValueError as exc:
        raise InputError(f"non-numeric CSV entry: {exc}") from exc
    if data.size and data.shape[1] != len(header):
        raise InputError("ragged CSV rows")
    return header, data.reshape(-1, len(header))


# --- row generators for each export schema --------------------------------


def tomogram_rows(family):
    """``X,mu,nu,w`` from a TomogramFamily (frame-major, X fastest)."""
    for i, m in enumerate(family.mu):
        for j, n in enumerate(family.nu):
            for k, x in enumerate(family.X):
                yield x, m, n, family.values[i, j, k]


def wigner_rows(w):
    """``q,p,W``."""
    for i, q in enumerate(w.q):
        for j, p in enumerate(w.p):
            yield q, p, w.values[i, j]


def cdf_rows(cdf):
    """``X,F``."""
    return zip(cdf.X, np.real(cdf.F))


def atom_rows(atoms):
    """``x,prob``."""
    return atoms


def spin_rows(tomo):
    """``m,prob``."""
    return zip(tomo.m, tomo.probs)


def symbol_rows(f):
    """``X,mu,nu,re,im``."""
    for i, m in enumerate(f.mu):
        for j, n in enumerate(f.nu):
            for k, x in enumerate(f.X):
                v = complex(f.values[i, j, k])
                yield x, m, n, v.real, v.imag


def trajectory_rows(traj):
    """``t,X,mu,nu,w``."""
    for a, t in enumerate(traj.times):
        for i, m in enumerate(traj.mu):
            for j, n in enumerate(traj.nu):
                for k, x in enumerate(traj.X):
                    yield t, x, m, n, traj.values[a, i, j, k]


HEADERS = {
    "tomogram": ("X", "mu", "nu", "w"),
    "wigner": ("q", "p", "W"),
    "cdf": ("X", "F"),
    "atoms": ("x", "prob"),
    "spin": ("m", "prob"),
    "symbol": ("X", "mu", "nu", "re", "im"),
    "trajectory": ("t", "X", "mu", "nu", "w"),
    "angles": ("phi", "psi", "theta"),
}


def read_angle_grid(source: TextIO):
    """Rows ``phi,psi,theta`` (radians) as EulerAngles."""
    from .spin import EulerAngles

    _, data = read_table(source, HEADERS["angles"])
    if not data.size:
        raise InputError("angle grid is empty")
    return [EulerAngles(*map(float, row)) for row in data]


def tomogram_family_from_rows(data: np.ndarray):
    """Rebuild a TomogramFamily from ``X,mu,nu,w`` rows on a rectangular grid."""
    from .ctomo import TomogramFamily

    X = np.unique(data[:, 0])
    mu = np.unique(data[:, 1])
    nu = np.unique(data[:, 2])
    if data.shape[0] != X.size * mu.size * nu.size:
        raise InputError("tomogram rows do not form a rectangular (X, mu, nu) grid")
    values = np.empty((mu.size, nu.size, X.size))
    i = np.searchsorted(mu, data[:, 1])
    j = np.searchsorted(nu, data[:, 2])
    k = np.searchsorted(X, data[:, 0])
    values[i, j, k] = data[:, 3]
    return TomogramFamily(mu, nu, X, values)
