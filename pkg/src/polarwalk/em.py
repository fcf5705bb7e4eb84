"""Electromagnetic coupling of the polar walk.

After each free step every site spinor is multiplied by

    U_em = exp(2i eps A_t) diag(exp(-2i eps A_r), exp(2i eps A_r)) Rot(2 eps A_theta / r)

with ``Rot(a) = [[cos a, sin a], [-sin a, cos a]]``.  The charge is fixed to
``q = -1`` and folded into the potentials.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .spinor import SpinorField
from .walk import WalkParams, apply_local, step_free

PotentialFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


def _zero(t, r, theta):
    return np.zeros(np.broadcast(r, theta).shape)


@dataclass(frozen=True)
class PotentialSpec:
    """Three-potential ``(A_t, A_r, A_theta)`` as functions of ``(t, r, theta)``.

    ``axisymmetric`` declares that none of the components depend on
    ``theta``; it is informational and lets callers rely on angular-mode
    decoupling.
    """

    A_t: PotentialFn = _zero
    A_r: PotentialFn = _zero
    A_theta: PotentialFn = _zero
    axisymmetric: bool = True
    name: str = "custom"

    def evaluate(self, t: float, r: np.ndarray, theta: np.ndarray):
        shape = np.broadcast(r, theta).shape
        return tuple(
            np.broadcast_to(np.asarray(f(t, r, theta), dtype=float), shape)
            for f in (self.A_t, self.A_r, self.A_theta)
        )


ZERO_POTENTIAL = PotentialSpec(name="none")


@dataclass(frozen=True)
class UniformMagneticSpec:
    """Uniform magnetic field orthogonal to the plane, ``beta = B q``.

    With ``q = -1`` the field itself is ``B = -beta``.
    """

    beta: float

    @property
    def field_strength(self) -> float:
        return -self.beta


def u_em(eps: float, r, A_t, A_r, A_theta) -> np.ndarray:
    """Site-local coupling matrices, shape ``broadcast(...) + (2, 2)``."""
    r, A_t, A_r, A_theta = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (r, A_t, A_r, A_theta))
    )
    phase = np.exp(2j * eps * A_t)
    d_minus = phase * np.exp(-2j * eps * A_r)
    d_plus = phase * np.exp(2j * eps * A_r)
    a = 2.0 * eps * A_theta / r
    c, s = np.cos(a), np.sin(a)
    out = np.empty(r.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = d_minus * c
    out[..., 0, 1] = d_minus * s
    out[..., 1, 0] = -d_plus * s
    out[..., 1, 1] = d_plus * c
    return out


def uniform_b_potential(spec: UniformMagneticSpec) -> PotentialSpec:
    """Symmetric-type gauge ``A_theta = B r^2 / 2 = -beta r^2 / 2``.

    ``(1/r) d(A_theta)/dr`` equals the field ``B``.  The sign follows from
    ``q = -1``; with it the walk converges to the Landau eigenstates at
    second order in ``eps`` (see :mod:`polarwalk.landau`).
    """
    if not spec.beta > 0.0:
        raise ValueError(f"only beta = Bq > 0 is supported, got {spec.beta!r}")
    B = spec.field_strength

    def A_theta(t, r, theta):
        return 0.5 * B * np.asarray(r, dtype=float) ** 2 + 0.0 * np.asarray(theta)

    return PotentialSpec(A_theta=A_theta, axisymmetric=True, name="uniform-b")


def angular_ripple_potential(amplitude: float) -> PotentialSpec:
    """``A_t = amplitude * cos(theta)``; breaks rotational symmetry."""

    def A_t(t, r, theta):
        return amplitude * np.cos(theta) + 0.0 * np.asarray(r)

    return PotentialSpec(A_t=A_t, axisymmetric=False, name="angular-ripple")


def tabulated_potential(table: np.ndarray, axisymmetric: Optional[bool] = None) -> PotentialSpec:
    """Time-independent potential from an ``(3, n_r, n_theta)`` site table."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 3 or table.shape[0] != 3:
        raise ValueError("potential table must have shape (3, n_r, n_theta)")
    if axisymmetric is None:
        axisymmetric = bool(np.all(table == table[:, :, :1]))

    def component(i):
        def f(t, r, theta):
            return table[i]

        return f

    return PotentialSpec(component(0), component(1), component(2), axisymmetric, "table")


def load_potential_csv(path, n_r: int, n_theta: int) -> PotentialSpec:
    """Read a ``j,h,A_t,A_r,A_theta`` CSV; missing sites default to zero."""
    table = np.zeros((3, n_r, n_theta))
    with open(Path(path), newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        missing = {"j", "h", "A_t", "A_r", "A_theta"} - set(rows.fieldnames or ())
        if missing:
            raise ValueError(f"potential CSV lacks columns {sorted(missing)}")
        for row in rows:
            j, h = int(row["j"]), int(row["h"])
            if not (0 <= j < n_r and 0 <= h < n_theta):
                raise ValueError(f"site ({j}, {h}) outside the grid")
            table[:, j, h] = float(row["A_t"]), float(row["A_r"]), float(row["A_theta"])
    return tabulated_potential(table)


def step_em(
    field: SpinorField,
    params: WalkParams,
    pot: PotentialSpec,
    t: float = 0.0,
    potential_time: str = "post",
) -> SpinorField:
    """One coupled step: the free step followed by ``U_em`` at every site.

    Potentials are evaluated at ``t + 2*eps`` (``potential_time="post"``) or
    at ``t`` (``"pre"``).
    """
    out = step_free(field, params)
    grid = params.grid
    if potential_time == "post":
        t_eval = t + 2.0 * grid.eps
    elif potential_time == "pre":
        t_eval = t
    else:
        raise ValueError(f"potential_time must be 'post' or 'pre', got {potential_time!r}")
    R, TH = grid.mesh()
    A_t, A_r, A_theta = pot.evaluate(t_eval, R, TH)
    if not (np.any(A_t) or np.any(A_r) or np.any(A_theta)):
        return out
    m = u_em(grid.eps, R, A_t, A_r, A_theta)
    return out.with_data(apply_local(m, out.data))

