"""Two-spinor fields on the 4*pi-extended polar grid.

A field stores the amplitudes ``(phi^-, phi^+)`` at every site ``(j, h)`` of
a polar lattice with radius ``r_min + j*eps`` and angle ``h*eps``.  The
angular lattice covers ``[0, 4*pi)`` so that spinor components, which are
anti-periodic under a ``2*pi`` rotation, close on themselves.

Reductions use the flat measure ``eps**2`` on the walk state, i.e. on
``Phi = sqrt(r) * Psi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Tuple

import numpy as np

FOUR_PI = 4.0 * np.pi

CARTESIAN = "cartesian"
POLAR = "polar"
BASES = (CARTESIAN, POLAR)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)


class GridMismatchError(ValueError):
    """Raised when two fields living on different grids are combined."""


@dataclass(frozen=True)
class PolarGrid:
    """Polar lattice with identical radial and angular steps ``eps``.

    Parameters
    ----------
    n_theta : int
        Number of angular sites on ``[0, 4*pi)``.
    r_min : float
        Innermost radius, at least 1 so that ``arccos(1/r)`` is defined.
    n_r : int
        Number of radial sites.
    """

    n_theta: int
    r_min: float
    n_r: int

    @property
    def eps(self) -> float:
        return FOUR_PI / self.n_theta

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.eps * np.arange(self.n_r)

    @property
    def theta(self) -> np.ndarray:
        return self.eps * np.arange(self.n_theta)

    @property
    def r_max(self) -> float:
        return self.r_min + self.eps * (self.n_r - 1)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (2, self.n_r, self.n_theta)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(R, TH)`` arrays of shape ``(n_r, n_theta)``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")


def make_grid(n_theta: int, r_min: float = 1.0, n_r: int = 64) -> PolarGrid:
    """Build a validated :class:`PolarGrid`.

    ``eps`` is fixed by ``n_theta`` through ``eps = 4*pi / n_theta`` so the
    angular lattice closes exactly.
    """
    if int(n_theta) != n_theta or n_theta < 8:
        raise ValueError(f"n_theta must be an integer >= 8, got {n_theta!r}")
    if n_theta % 2:
        raise ValueError(f"n_theta must be even, got {n_theta}")
    if int(n_r) != n_r or n_r < 2:
        raise ValueError(f"n_r must be an integer >= 2, got {n_r!r}")
    if not np.isfinite(r_min) or r_min < 1.0:
        raise ValueError(f"r_min must be >= 1, got {r_min!r}")
    return PolarGrid(int(n_theta), float(r_min), int(n_r))


def grid_for_radius(n_theta: int, r_min: float, r_max: float) -> PolarGrid:
    """Grid whose outermost radius reaches at least ``r_max``."""
    eps = FOUR_PI / n_theta
    n_r = int(np.ceil((r_max - r_min) / eps - 1e-9)) + 1
    return make_grid(n_theta, r_min, max(n_r, 2))


@dataclass
class SpinorField:
    """Complex two-spinor per site, stored component-major.

    ``data[c, j, h]`` is component ``c`` (0 for ``phi^-``, 1 for ``phi^+``)
    at radial index ``j`` and angular index ``h``.
    """

    grid: PolarGrid
    data: np.ndarray
    basis: str = POLAR
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if self.data.shape != self.grid.shape:
            raise ValueError(
                f"data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        if self.basis not in BASES:
            raise ValueError(f"unknown spin basis {self.basis!r}")

    @classmethod
    def zeros(cls, grid: PolarGrid, basis: str = POLAR) -> "SpinorField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), basis)

    def with_data(self, data: np.ndarray) -> "SpinorField":
        return SpinorField(self.grid, data, self.basis)

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.data.copy(), self.basis, dict(self.meta))

    def norm_squared(self) -> float:
        return float(inner_product(self, self).real)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def normalized(self) -> "SpinorField":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize a zero field")
        return self.with_data(self.data / nrm)

    @property
    def minus(self) -> np.ndarray:
        return self.data[0]

    @property
    def plus(self) -> np.ndarray:
        return self.data[1]


def _check_same_grid(a: SpinorField, b: SpinorField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def inner_product(a: SpinorField, b: SpinorField) -> complex:
    """Flat-measure inner product ``sum conj(a) b * eps**2``.

    The sum is numpy's pairwise reduction over the flattened, contiguous
    array, which fixes the summation order independently of threading.
    """
    _check_same_grid(a, b)
    prod = np.conj(a.data) * b.data
    return complex(prod.ravel().sum() * a.grid.eps**2)


def l1_distance(a: SpinorField, b: SpinorField) -> float:
    """Sum over sites and components of ``|a - b| * eps**2``."""
    _check_same_grid(a, b)
    return float(np.abs(a.data - b.data).ravel().sum() * a.grid.eps**2)


def basis_change_matrix(theta: float, direction: str = "polar->cartesian") -> np.ndarray:
    """Spin-frame rotation between the polar and cartesian bases.

    ``"polar->cartesian"`` returns ``M(theta) = exp(-i theta sigma_1 / 2)``;
    ``"cartesian->polar"`` returns its inverse.
    """
    if direction == "polar->cartesian":
        sign = -1.0
    elif direction == "cartesian->polar":
        sign = 1.0
    else:
        raise ValueError(f"unknown direction {direction!r}")
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    return np.array([[c, sign * 1j * s], [sign * 1j * s, c]], dtype=np.complex128)


def change_spin_basis(field: SpinorField, basis: str) -> SpinorField:
    """Re-express ``field`` in ``basis`` by applying ``M(theta_h)`` site-wise."""
    if basis not in BASES:
        raise ValueError(f"unknown spin basis {basis!r}")
    if field.basis == basis:
        raise ValueError(f"field is already in the {basis} basis")
    sign = -1.0 if basis == CARTESIAN else 1.0
    half = field.grid.theta / 2.0
    c = np.cos(half)[None, :]
    s = sign * 1j * np.sin(half)[None, :]
    f0, f1 = field.data
    out = np.empty_like(field.data)
    out[0] = c * f0 + s * f1
    out[1] = s * f0 + c * f1
    return SpinorField(field.grid, out, basis)


def sample_field(
    grid: PolarGrid,
    f: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]],
    basis: str = POLAR,
) -> SpinorField:
    """Evaluate ``f(r, theta) -> (minus, plus)`` on every site.

    ``f`` receives broadcast ``(n_r, n_theta)`` arrays.  No normalization is
    applied.
    """
    R, TH = grid.mesh()
    minus, plus = f(R, TH)
    data = np.empty(grid.shape, dtype=np.complex128)
    data[0] = minus
    data[1] = plus
    if not np.all(np.isfinite(data)):
        raise ValueError("sampled field contains non-finite values")
    return SpinorField(grid, data, basis)


def check_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    """True if ``m^dagger m`` equals the identity entrywise within ``tol``.

    ``m`` may carry leading batch axes ``(..., 2, 2)``.
    """
    m = np.asarray(m)
    prod = np.conj(np.swapaxes(m, -1, -2)) @ m
    return bool(np.all(np.abs(prod - IDENTITY) <= tol))


def random_antiperiodic_field(
    grid: PolarGrid,
    rng: np.random.Generator,
    max_mode: float | None = None,
    r_support: Tuple[float, float] | None = None,
) -> SpinorField:
    """Random normalized field containing only half-integer angular modes.

    Modes are drawn with ``|k| <= max_mode`` (default ``n_theta/8``) so the
    field stays well inside the lattice band.  ``r_support`` optionally
    restricts the radial profile to a smooth bump between two radii.
    """
    n = grid.n_theta
    if max_mode is None:
        max_mode = n / 8.0
    p = np.fft.fftfreq(n, d=1.0 / n)
    allowed = (p % 2 == 1) & (np.abs(p / 2.0) <= max_mode)
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs[..., ~allowed] = 0.0
    data = np.fft.ifft(coeffs, axis=-1)
    if r_support is not None:
        lo, hi = r_support
        r = grid.r
        bump = np.where((r > lo) & (r < hi), np.sin(np.pi * (r - lo) / (hi - lo)) ** 2, 0.0)
        data = data * bump[None, :, None]
    return SpinorField(grid, data).normalized()
