"""Free polar Dirac quantum walk.

One step applies, right to left,

    V = Pi^-1 [W_1(a12) W_2(a22)] Pi [W_2(a21) W_1(a11)] Q(m eps)

with ``W_i(a) = R^-1(a) U(a) S_i U(a) S_i R(a)``.  Axis 1 is radial and
axis 2 is angular.  The only site-dependent angle, ``a22 = arccos(1/r)``,
enters a ``W`` that shifts along the angular axis, so every matrix in that
product sees the same radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spinor import POLAR, PolarGrid, SpinorField

RADIAL = "radial"
ANGULAR = "angular"
PERIODIC = "periodic"
ABSORBING = "absorbing-zero"
BOUNDARIES = (PERIODIC, ABSORBING)

_AXIS_INDEX = {RADIAL: 0, ANGULAR: 1}


def coin_U(alpha) -> np.ndarray:
    c, s = np.cos(alpha), np.sin(alpha)
    return _stack(-c, 1j * s, -1j * s, c)


def rot_R(alpha) -> np.ndarray:
    c, s = np.cos(alpha / 2.0), np.sin(alpha / 2.0)
    return _stack(1j * c, 1j * s, -s, c)


def mass_Q(M) -> np.ndarray:
    c, s = np.cos(2.0 * M), np.sin(2.0 * M)
    return _stack(c, -1j * s, -1j * s, c)


def mixer_Pi() -> np.ndarray:
    return np.array([[-1j, 1.0], [-1.0, 1j]], dtype=np.complex128) / np.sqrt(2.0)


def mixer_Pi_inv() -> np.ndarray:
    return np.conj(mixer_Pi().T)


def _stack(a, b, c, d) -> np.ndarray:
    """2x2 matrix (or batch, trailing axes) from its four entries."""
    a, b, c, d = np.broadcast_arrays(*(np.asarray(x, dtype=np.complex128) for x in (a, b, c, d)))
    out = np.empty(a.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


def apply_local(m: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Multiply every site spinor by its 2x2 matrix.

    ``m`` has shape ``(2, 2)`` or ``(..., 2, 2)`` broadcastable against the
    ``(n_r, n_theta)`` site axes.
    """
    f0, f1 = data[0], data[1]
    out = np.empty_like(data)
    out[0] = m[..., 0, 0] * f0 + m[..., 0, 1] * f1
    out[1] = m[..., 1, 0] * f0 + m[..., 1, 1] * f1
    return out


@dataclass(frozen=True)
class WalkAngles:
    """Coin angles of the walk; ``a22`` may depend on the radius."""

    a11: float = 0.0
    a12: float = np.pi / 2
    a21: float = np.pi / 2
    a22: Callable[[np.ndarray], np.ndarray] = field(default=None)

    def a22_at(self, r: np.ndarray) -> np.ndarray:
        if self.a22 is None:
            return angles_for_radius(r)[3]
        return np.asarray(self.a22(r), dtype=float)


POLAR_ANGLES = WalkAngles()


@dataclass(frozen=True)
class WalkParams:
    grid: PolarGrid
    mass: float = 0.0
    boundary: str = PERIODIC
    angles: WalkAngles = POLAR_ANGLES

    def __post_init__(self):
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if not self.mass >= 0.0:
            raise ValueError(f"mass must be non-negative, got {self.mass!r}")


def angles_for_radius(r):
    """Polar walk angles ``(a11, a12, a21, a22)`` at radius ``r >= 1``.

    ``a22 = arccos(1/r)`` matches the angular n-bein component ``1/r``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise ValueError("walk angles need r >= 1 (arccos(1/r) undefined below)")
    return 0.0, np.pi / 2, np.pi / 2, np.arccos(1.0 / r)


def shift_data(data: np.ndarray, axis: str, boundary: str = PERIODIC) -> np.ndarray:
    """Pull ``phi^-`` from index ``+1`` and ``phi^+`` from index ``-1``."""
    ax = _AXIS_INDEX[axis]
    out = np.empty_like(data)
    out[0] = np.roll(data[0], -1, axis=ax)
    out[1] = np.roll(data[1], 1, axis=ax)
    if axis == RADIAL and boundary == ABSORBING:
        out[0, -1, :] = 0.0
        out[1, 0, :] = 0.0
    return out


def shift(field: SpinorField, axis: str, boundary: str = PERIODIC) -> SpinorField:
    """Shift operator ``S_1`` (radial) or ``S_2`` (angular).

    The angular axis always wraps around the ``4*pi`` circle; the radial
    axis wraps or injects zeros depending on ``boundary``.
    """
    if axis not in _AXIS_INDEX:
        raise ValueError(f"axis must be 'radial' or 'angular', got {axis!r}")
    return field.with_data(shift_data(field.data, axis, boundary))


def _site_matrices(alpha) -> tuple:
    """``(R, U, R^-1)`` for a scalar angle or an ``(n_r, 1)`` column."""
    R = rot_R(alpha)
    U = coin_U(alpha)
    R_inv = np.conj(np.swapaxes(R, -1, -2))
    return R, U, R_inv


def _w_data(data, axis, alpha, boundary):
    R, U, R_inv = _site_matrices(alpha)
    data = apply_local(R, data)
    data = shift_data(data, axis, boundary)
    data = apply_local(U, data)
    data = shift_data(data, axis, boundary)
    data = apply_local(U, data)
    return apply_local(R_inv, data)


def _check_alpha(alpha):
    a = np.asarray(alpha, dtype=float)
    if not np.all(np.isfinite(a)) or np.any(a < 0.0) or np.any(a > np.pi):
        raise ValueError("coin angle outside [0, pi]")


def w_operator(field: SpinorField, axis: str, alpha, boundary: str = PERIODIC) -> SpinorField:
    """Apply ``W_i(alpha) = R^-1 U S_i U S_i R``.

    ``alpha`` is a scalar, a callable of the radius, or an array
    broadcastable against the ``(n_r, n_theta)`` site axes.
    """
    if axis not in _AXIS_INDEX:
        raise ValueError(f"axis must be 'radial' or 'angular', got {axis!r}")
    if callable(alpha):
        alpha = np.asarray(alpha(field.grid.r), dtype=float)[:, None]
    _check_alpha(alpha)
    return field.with_data(_w_data(field.data, axis, alpha, boundary))


def _v_data(data, params: WalkParams):
    grid = params.grid
    ang = params.angles
    a22 = ang.a22_at(grid.r)[:, None]
    bc = params.boundary
    data = apply_local(mass_Q(params.mass * grid.eps), data)
    data = _w_data(data, RADIAL, ang.a11, bc)
    data = _w_data(data, ANGULAR, ang.a21, bc)
    data = apply_local(mixer_Pi(), data)
    data = _w_data(data, ANGULAR, a22, bc)
    data = _w_data(data, RADIAL, ang.a12, bc)
    return apply_local(mixer_Pi_inv(), data)


def step_free(field: SpinorField, params: WalkParams) -> SpinorField:
    """Advance the walk by one step (physical time ``2*eps``)."""
    if field.basis != POLAR:
        raise ValueError("the walk acts on polar-basis fields")
    if field.grid != params.grid:
        raise ValueError("field and walk parameters use different grids")
    return field.with_data(_v_data(field.data, params))


def evolve_free(field: SpinorField, params: WalkParams, steps: int) -> SpinorField:
    for _ in range(steps):
        field = step_free(field, params)
    return field
