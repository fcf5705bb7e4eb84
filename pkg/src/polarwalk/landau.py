"""Relativistic Landau eigenstates of the polar Dirac equation.

For ``beta = Bq > 0`` the radial functions

    u^-(r) = beta/(m - E) C r^(1-kappa) exp(-beta r^2/4) L_{n-1}^{alpha+1}(beta r^2/2)
    u^+(r) = C r^(-kappa) exp(-beta r^2/4) L_n^alpha(beta r^2/2)

solve ``+-u^+-' + (kappa/r + beta r/2) u^+- - (E -+ m) u^-+ = 0`` with
``E = sqrt(m^2 + 2 beta n)`` and ``kappa = -alpha - 1/2``.  The walk state
is ``Phi = exp(-iEt) Xi(r) exp(i kappa theta)`` where ``Xi = (xi^-, xi^+)``
is obtained from ``u`` by a fixed unitary map.  With the gauge of
:func:`polarwalk.em.uniform_b_potential` this is the pairing the walk
reproduces at second order in ``eps``; the angular momentum of the state is
``J = kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .spinor import POLAR, PolarGrid, SpinorField

_C_XI = np.exp(1j * np.pi / 4) / np.sqrt(2.0)


def _laguerre_recurrence(n: int, alpha: float, x):
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = alpha + 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def laguerre(n: int, alpha: float, x):
    """Associated Laguerre polynomial ``L_n^alpha(x)``.

    Uses the three-term recurrence.  For negative integer ``alpha`` with
    ``-n <= alpha <= -1`` the recurrence cancels catastrophically near
    ``x = 0``; there the identity
    ``L_n^{-k}(x) = (-x)^k (n-k)!/n! L_{n-k}^k(x)`` is applied first.
    Non-integer ``alpha < -1`` has no such identity and is accurate only
    in absolute terms near ``x = 0``, where ``L_n^alpha(0) = C(n+alpha, n)``
    can be arbitrarily small.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"Laguerre degree must be a non-negative integer, got {n!r}")
    n = int(n)
    x = np.asarray(x, dtype=float)
    if alpha < 0 and float(alpha).is_integer() and -alpha <= n:
        k = int(-alpha)
        scale = math.factorial(n - k) / math.factorial(n)
        return (-x) ** k * scale * _laguerre_recurrence(n - k, float(k), x)
    return _laguerre_recurrence(n, float(alpha), x)


def _series_terms(n: int, alpha: float, x: float):
    terms = []
    for i in range(n + 1):
        k = n - i
        binom = 1.0
        for j in range(k):
            binom *= (n + alpha - j) / (j + 1)
        terms.append((-1) ** i * binom * x**i / math.factorial(i))
    return terms


def laguerre_series_oracle(n: int, alpha: float, x: float, with_scale: bool = False):
    """Finite-sum ``sum_i (-1)^i C(n+alpha, n-i) x^i / i!`` (test oracle).

    The generalized binomial is formed as a product so that negative
    ``alpha`` needs no gamma-function poles.  ``with_scale=True`` also
    returns ``sum_i |term_i|``, the natural magnitude against which rounding
    errors are measured near roots.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a non-negative integer, got {n!r}")
    if n > 15:
        raise ValueError("series oracle limited to n <= 15")
    terms = _series_terms(int(n), float(alpha), float(x))
    value = math.fsum(terms)
    if with_scale:
        return value, math.fsum(abs(t) for t in terms)
    return value


@dataclass(frozen=True)
class LandauSpec:
    n: int
    alpha: int
    beta: float
    mass: float
    energy: float
    kappa: float
    c2: float

    @property
    def amplitude(self) -> float:
        """``C``, chosen real and positive."""
        return math.sqrt(self.c2)

    @property
    def angular_momentum(self) -> float:
        return self.kappa

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "beta": self.beta,
            "mass": self.mass,
            "energy": self.energy,
            "kappa": self.kappa,
            "c2": self.c2,
        }


def landau_energy(n: int, beta: float, mass: float) -> float:
    return math.sqrt(mass * mass + 2.0 * beta * n)


def landau_c2(n: int, alpha: int, beta: float, mass: float, energy: float) -> float:
    d2 = (mass - energy) ** 2
    return (
        d2 * beta ** (alpha + 1) * math.factorial(n)
        / (math.pi * 2.0 ** (alpha + 1) * math.factorial(n + alpha) * (2.0 * beta * n + d2))
    )


def make_landau_spec(n: int, alpha: int, beta: float, mass: float) -> LandauSpec:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if int(alpha) != alpha or alpha < -n:
        raise ValueError(f"alpha must be an integer >= -n, got {alpha!r}")
    if not beta > 0.0:
        raise ValueError(f"only beta = Bq > 0 is supported, got {beta!r}")
    if not mass >= 0.0:
        raise ValueError(f"mass must be non-negative, got {mass!r}")
    n, alpha = int(n), int(alpha)
    energy = landau_energy(n, beta, mass)
    if math.isclose(energy, mass) or math.isclose(energy, -mass):
        raise ValueError("degenerate level E = +-m")
    kappa = -alpha - 0.5
    return LandauSpec(n, alpha, float(beta), float(mass), energy, kappa,
                      landau_c2(n, alpha, beta, mass, energy))


def u_components(spec: LandauSpec, r, amplitude: float | None = None):
    """Closed-form ``(u^-, u^+)`` at radius ``r > 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("u components need r > 0")
    C = spec.amplitude if amplitude is None else amplitude
    b, k = spec.beta, spec.kappa
    x = 0.5 * b * r * r
    g = np.exp(-0.5 * x)
    u_plus = C * r ** (-k) * g * laguerre(spec.n, spec.alpha, x)
    u_minus = b / (spec.mass - spec.energy) * C * r ** (1.0 - k) * g * laguerre(
        spec.n - 1, spec.alpha + 1, x
    )
    return u_minus, u_plus


def xi_from_u(u_minus, u_plus):
    """Invert ``u^- = i c (xi^- + xi^+)``, ``u^+ = c (xi^+ - xi^-)``, ``c = e^{i pi/4}/sqrt 2``."""
    s = -1j * np.asarray(u_minus) / _C_XI
    d = np.asarray(u_plus) / _C_XI
    return 0.5 * (s - d), 0.5 * (s + d)


def u_from_xi(xi_minus, xi_plus):
    xi_minus, xi_plus = np.asarray(xi_minus), np.asarray(xi_plus)
    return 1j * _C_XI * (xi_minus + xi_plus), _C_XI * (xi_plus - xi_minus)


def radial_profile(spec: LandauSpec, r):
    return xi_from_u(*u_components(spec, r))


def _peak_modulus(spec: LandauSpec) -> float:
    r_scale = math.sqrt(2.0 * (2 * spec.n + abs(spec.alpha) + 2) / spec.beta)
    r = np.linspace(1e-6, 4.0 * r_scale, 4001)
    xm, xp = radial_profile(spec, r)
    return float(np.max(np.sqrt(np.abs(xm) ** 2 + np.abs(xp) ** 2)))


def tail_ratio(spec: LandauSpec, r_max: float) -> float:
    """Largest ``|Xi(r)| / max|Xi|`` over ``r >= r_max``."""
    r = r_max + np.linspace(0.0, 10.0, 201)
    xm, xp = radial_profile(spec, r)
    return float(np.max(np.sqrt(np.abs(xm) ** 2 + np.abs(xp) ** 2)) / _peak_modulus(spec))


def inner_tail_mass(spec: LandauSpec, r_min: float) -> float:
    """Analytic norm (2*pi convention) discarded below ``r_min``."""
    if r_min <= 0.0:
        return 0.0
    r = np.linspace(0.0, r_min, 4001)[1:]
    xm, xp = radial_profile(spec, r)
    dens = np.abs(xm) ** 2 + np.abs(xp) ** 2
    r = np.concatenate([[0.0], r])
    dens = np.concatenate([[0.0], dens])
    return float(2.0 * np.pi * simpson(dens, x=r))


def eigenstate_field(
    grid: PolarGrid,
    spec: LandauSpec,
    t: float = 0.0,
    tail_tol: float = 1e-10,
    normalize: bool = True,
) -> SpinorField:
    """Sample ``Phi = exp(-iEt) Xi(r) exp(i kappa theta)`` on ``grid``.

    The sampled field is rescaled to unit grid norm.  ``field.meta`` keeps
    the pre-scaling grid norm squared, its ratio to the analytic ``4*pi``
    value, the outer tail ratio and the analytic mass lost below ``r_min``.
    """
    if abs(spec.kappa) >= grid.n_theta / 4:
        raise ValueError("angular mode exceeds the lattice band")
    ratio = tail_ratio(spec, grid.r_max)
    if ratio >= tail_tol:
        raise ValueError(
            f"radial window too small: tail ratio {ratio:.3e} at r_max={grid.r_max:.3f}"
        )
    xm, xp = radial_profile(spec, grid.r)
    angular = np.exp(1j * spec.kappa * grid.theta)
    phase = np.exp(-1j * spec.energy * t)
    data = np.empty(grid.shape, dtype=np.complex128)
    data[0] = phase * xm[:, None] * angular[None, :]
    data[1] = phase * xp[:, None] * angular[None, :]
    field = SpinorField(grid, data, POLAR)
    discrete = field.norm_squared()
    if normalize:
        field = field.with_data(data / math.sqrt(discrete))
    field.meta.update(
        {
            "grid_norm_squared": discrete,
            # analytic norm over [0, 4*pi) is twice the 2*pi convention
            "analytic_to_discrete_ratio": 2.0 / discrete,
            "tail_ratio": ratio,
            "inner_tail_mass": inner_tail_mass(spec, grid.r_min),
        }
    )
    return field


def ode_residual(
    spec: LandauSpec,
    r,
    energy: float | None = None,
    amplitude: float | None = None,
):
    """Residuals of both radial equations at ``r``.

    Derivatives are analytic, using ``d/dx L_n^a = -L_{n-1}^{a+1}``.
    ``energy`` replaces ``E`` in the equations only, to probe sensitivity;
    ``amplitude`` overrides ``C``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("residual needs r > 0")
    E = spec.energy if energy is None else energy
    m, b, k, n, a = spec.mass, spec.beta, spec.kappa, spec.n, spec.alpha
    C = spec.amplitude if amplitude is None else amplitude
    x = 0.5 * b * r * r
    g = np.exp(-0.5 * x)
    Lp = laguerre(n, a, x)
    dLp = -laguerre(n - 1, a + 1, x) if n >= 1 else 0.0 * x
    Lm = laguerre(n - 1, a + 1, x)
    dLm = -laguerre(n - 2, a + 2, x) if n >= 2 else 0.0 * x
    K = b * C / (m - spec.energy)
    u_p = C * r ** (-k) * g * Lp
    u_m = K * r ** (1.0 - k) * g * Lm
    du_p = C * g * r ** (-k) * ((-k / r - 0.5 * b * r) * Lp + b * r * dLp)
    du_m = K * g * r ** (1.0 - k) * (((1.0 - k) / r - 0.5 * b * r) * Lm + b * r * dLm)
    P = k / r + 0.5 * b * r
    res_plus = du_p + P * u_p - (E - m) * u_m
    res_minus = -du_m + P * u_m - (E + m) * u_p
    return np.abs(res_minus), np.abs(res_plus)


def normalization_quadrature_check(
    spec: LandauSpec,
    n_points: int = 40001,
    amplitude: float | None = None,
    use_u: bool = False,
) -> float:
    """``2*pi * int_0^inf (|xi^-|^2 + |xi^+|^2) dr`` by composite Simpson.

    A correctly normalized state gives 1.  The upper limit is placed where
    the Gaussian factor has decayed far below double precision; a failed
    tail bound raises.
    """
    x_hi = 4.0 * (spec.n + abs(spec.alpha)) + 80.0
    r_hi = math.sqrt(2.0 * x_hi / spec.beta)
    r = np.linspace(0.0, r_hi, n_points)[1:]
    um, up = u_components(spec, r, amplitude)
    if use_u:
        dens = np.abs(um) ** 2 + np.abs(up) ** 2
    else:
        xm, xp = xi_from_u(um, up)
        dens = np.abs(xm) ** 2 + np.abs(xp) ** 2
    if dens[-1] > 1e-14 * max(dens.max(), 1e-300):
        raise ValueError("normalization quadrature tail bound violated")
    # the density vanishes at the origin for every admissible (n, alpha)
    r = np.concatenate([[0.0], r])
    dens = np.concatenate([[0.0], dens])
    return float(2.0 * np.pi * simpson(dens, x=r))
