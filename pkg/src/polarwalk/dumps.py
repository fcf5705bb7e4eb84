"""Binary field dumps.

Layout: one ASCII header line

    polarwalk.field/1 n_theta=<int> n_r=<int> r_min=<float> eps=<float> basis=<tag>

terminated by ``\\n``, followed by little-endian IEEE-754 doubles holding
interleaved ``(re, im)`` pairs in component, radial, angular order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spinor import PolarGrid, SpinorField, make_grid

FIELD_FORMAT = "polarwalk.field/1"


def _header(field: SpinorField) -> bytes:
    g = field.grid
    return (
        f"{FIELD_FORMAT} n_theta={g.n_theta} n_r={g.n_r} r_min={g.r_min!r} "
        f"eps={g.eps!r} basis={field.basis}\n"
    ).encode("ascii")


def write_field(path, field: SpinorField) -> None:
    payload = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    with open(Path(path), "wb") as fh:
        fh.write(_header(field))
        fh.write(payload)


def read_field(path) -> SpinorField:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ValueError(f"{path}: missing dump header")
    tokens = raw[:nl].decode("ascii").split()
    if not tokens or tokens[0] != FIELD_FORMAT:
        raise ValueError(f"{path}: not a {FIELD_FORMAT} dump")
    meta = dict(tok.split("=", 1) for tok in tokens[1:])
    grid = make_grid(int(meta["n_theta"]), float(meta["r_min"]), int(meta["n_r"]))
    if abs(float(meta["eps"]) - grid.eps) > 1e-12 * grid.eps:
        raise ValueError(f"{path}: eps inconsistent with n_theta")
    data = np.frombuffer(raw[nl + 1:], dtype="<c16")
    if data.size != 2 * grid.n_r * grid.n_theta:
        raise ValueError(f"{path}: payload size does not match header")
    return SpinorField(grid, data.reshape(grid.shape).astype(np.complex128), meta["basis"])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def grid_dict(grid: PolarGrid) -> dict:
    return {"n_theta": grid.n_theta, "n_r": grid.n_r, "r_min": grid.r_min, "eps": grid.eps}
