"""CSV formats for samples, chains and kriging output.

Sample files have the header ``x_km,y_km,angle``. Chain files start with
``#``-prefixed ``key=value`` metadata lines, including hashes of the config
and data, followed by a CSV table of retained draws.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .circular import CircularSample, wrap
from .errors import ConfigurationError, InputConsistencyError
from .inference import PosteriorDraws

__all__ = [
    "data_hash",
    "read_chain",
    "read_grid",
    "read_sample",
    "write_chain",
    "write_krige",
    "write_sample",
]

SAMPLE_HEADER = ["x_km", "y_km", "angle"]
CHAIN_COLUMNS = ["iteration", "mu", "mu_tilde", "sigma2", "c", "phi", "accepted"]
KRIGE_HEADER = ["x_km", "y_km", "mean_direction_rad", "concentration", "arrow_len"]


def to_radians(values, unit: str):
    values = np.asarray(values, dtype=float)
    return np.radians(values) if unit == "degrees" else values


def from_radians(values, unit: str):
    values = np.asarray(values, dtype=float)
    return np.degrees(values) if unit == "degrees" else values


def read_sample(path, angle_unit: str = "radians") -> CircularSample:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    except OSError as exc:
        raise ConfigurationError(f"cannot read data file {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != SAMPLE_HEADER:
        raise ConfigurationError(f"{path}: expected header {','.join(SAMPLE_HEADER)}")
    try:
        arr = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric entry ({exc})") from exc
    if arr.size == 0:
        raise ConfigurationError(f"{path}: no data rows")
    return CircularSample(to_radians(arr[:, 2], angle_unit), arr[:, :2])


def write_sample(path, sample: CircularSample, angle_unit: str = "radians", comment=None):
    path = Path(path)
    angles = from_radians(sample.angles, angle_unit)
    with path.open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(SAMPLE_HEADER)
        for (xk, yk), a in zip(sample.locations, angles):
            w.writerow([repr(float(xk)), repr(float(yk)), repr(float(a))])


def read_grid(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    if not rows or [h.strip() for h in rows[0][:2]] != ["x_km", "y_km"]:
        raise ConfigurationError(f"{path}: grid files need columns x_km,y_km")
    return np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)


def data_hash(sample: CircularSample) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(sample.locations).tobytes())
    h.update(np.ascontiguousarray(sample.angles).tobytes())
    return h.hexdigest()[:16]


def write_chain(path, draws: PosteriorDraws, *, config_hash: str, data_hash: str):
    path = Path(path)
    n = draws.x.size
    meta = {
        "model": draws.model,
        "kernel": draws.kernel_kind,
        "config_hash": config_hash,
        "data_hash": data_hash,
        "acceptance_rate": repr(draws.acceptance_rate),
        "phi_bounds": json.dumps(draws.phi_bounds),
        "n_sites": str(n),
    }
    with path.open("w", newline="") as fh:
        fh.write("# wrapgp chain\n")
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(CHAIN_COLUMNS + [f"k_{i}" for i in range(n)])
        for row, kk in zip(draws.rows(), draws.k):
            it, mu, mt, s2, c, phi, acc = row
            w.writerow(
                [it, repr(mu), repr(mt), repr(s2), repr(c), repr(phi), int(acc)]
                + kk.tolist()
            )


def read_chain(path, sample: CircularSample | None = None, expect_hash: str | None = None):
    """Load a chain file; returns ``(draws, metadata)``.

    When ``sample`` is given its hash must match the one recorded in the
    file and the draws are re-attached to its angles and sites.
    """
    path = Path(path)
    meta = {}
    lines = []
    try:
        with path.open() as fh:
            for line in fh:
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                else:
                    lines.append(line)
    except OSError as exc:
        raise ConfigurationError(f"cannot read chain file {path}: {exc}") from exc
    rows = list(csv.reader(lines))
    if not rows or rows[0][: len(CHAIN_COLUMNS)] != CHAIN_COLUMNS:
        raise ConfigurationError(f"{path}: not a wrapgp chain file")
    body = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    body = body.reshape(-1, len(rows[0]))
    if sample is not None:
        got = data_hash(sample)
        if meta.get("data_hash") != got:
            raise InputConsistencyError(
                f"chain {path} was fitted to data {meta.get('data_hash')}, "
                f"not the supplied data {got}"
            )
    if expect_hash is not None and meta.get("config_hash") != expect_hash:
        raise InputConsistencyError(f"chain {path} was produced under a different config")
    n = int(meta.get("n_sites", body.shape[1] - len(CHAIN_COLUMNS)))
    bounds = json.loads(meta.get("phi_bounds", "null"))
    draws = PosteriorDraws(
        model=meta.get("model", "spatial"),
        iteration=body[:, 0].astype(np.int64),
        mu=body[:, 1].copy(),
        sigma2=body[:, 3].copy(),
        phi=body[:, 5].copy(),
        k=body[:, len(CHAIN_COLUMNS):].astype(np.int64).reshape(-1, n),
        accepted=body[:, 6].astype(bool),
        acceptance_rate=float(meta.get("acceptance_rate", "nan")),
        x=sample.angles.copy() if sample is not None else np.full(n, np.nan),
        sites=sample.locations.copy() if sample is not None else None,
        kernel_kind=meta.get("kernel", "exponential"),
        phi_bounds=tuple(bounds) if bounds else None,
    )
    return draws, meta


def write_krige(path, results, convention: str = "outgoing"):
    """Kriging rows; the incoming convention rotates directions by pi."""
    path = Path(path)
    shift = math.pi if convention == "incoming" else 0.0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(KRIGE_HEADER)
        for r in results:
            direction = wrap(r.mean_direction + shift)
            w.writerow(
                [repr(r.target[0]), repr(r.target[1]), repr(direction),
                 repr(r.concentration), repr(r.arrow_length)]
            )
