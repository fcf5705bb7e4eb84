"""Connection coefficients of diagonal (1+2)D metrics, by finite differences.

Coordinates are ``x = (t, r, theta)`` and the frame metric is
``eta = diag(1, -1, -1)``.  Index conventions for returned arrays:

* ``christoffel(...)[nu, sigma, mu]`` is ``Gamma^nu_{sigma mu}``
* ``nbein(...)`` returns ``(e^a_mu, e^mu_a)`` with row index first
* ``ricci_rotation(...)[c, mu, d]`` is ``omega^c_{mu d}``
* ``spin_connection(...)[mu]`` is the 2x2 matrix ``Gamma_mu``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .spinor import SIGMA_1, SIGMA_2, SIGMA_3
from .walk import angles_for_radius

ETA = np.diag([1.0, -1.0, -1.0])
GAMMA = (SIGMA_1, 1j * SIGMA_2, 1j * SIGMA_3)
REL_STEP = 1e-5

MetricFn = Callable[[float, float, float], Sequence[float]]


@dataclass(frozen=True)
class MetricSpec:
    """Diagonal metric ``diag(g_tt, g_rr, g_thth)`` with signature (+, -, -)."""

    diag: MetricFn
    name: str = "metric"

    def at(self, point) -> np.ndarray:
        g = np.asarray(self.diag(*point), dtype=float)
        if g.shape != (3,):
            raise ValueError("metric must return three diagonal components")
        if not (g[0] > 0 and g[1] < 0 and g[2] < 0):
            raise ValueError(f"signature violated at {tuple(point)}: {g}")
        return g


def polar_metric() -> MetricSpec:
    return MetricSpec(lambda t, r, th: (1.0, -1.0, -r * r), "polar")


def flat_metric() -> MetricSpec:
    return MetricSpec(lambda t, x, y: (1.0, -1.0, -1.0), "flat")


@dataclass
class ConnectionReport:
    christoffel: np.ndarray
    ricci_rotation: np.ndarray
    spin_connection: np.ndarray


def _step(x: float) -> float:
    return REL_STEP * max(1.0, abs(x))


def _partials(f: Callable[[np.ndarray], np.ndarray], point) -> np.ndarray:
    """Central-difference ``d f / d x^mu``; result indexed ``[mu, ...]``."""
    point = np.asarray(point, dtype=float)
    out = []
    for mu in range(3):
        h = _step(point[mu])
        hi, lo = point.copy(), point.copy()
        hi[mu] += h
        lo[mu] -= h
        out.append((np.asarray(f(hi)) - np.asarray(f(lo))) / (2.0 * h))
    return np.array(out)


def christoffel(metric: MetricSpec, point) -> np.ndarray:
    g = metric.at(point)
    if np.any(g == 0.0):
        raise ValueError("metric not invertible at point")
    dg = _partials(metric.at, point)  # dg[mu, rho] = d_mu g_{rho rho}
    G = np.diag(g)
    dG = np.zeros((3, 3, 3))  # dG[mu, rho, sigma] = d_mu g_{rho sigma}
    for mu in range(3):
        dG[mu] = np.diag(dg[mu])
    lowered = 0.5 * (
        np.einsum("mrs->rsm", dG) + np.einsum("srm->rsm", dG) - np.einsum("rsm->rsm", dG)
    )
    # lowered[rho, sigma, mu] = 1/2 (d_mu g_rs + d_s g_rm - d_r g_sm)
    return np.einsum("nr,rsm->nsm", np.linalg.inv(G), lowered)


def nbein(metric: MetricSpec, point):
    g = metric.at(point)
    e_lower = np.diag(np.sqrt(np.array([g[0], -g[1], -g[2]])))
    return e_lower, np.diag(1.0 / np.diag(e_lower))


def ricci_rotation(metric: MetricSpec, point) -> np.ndarray:
    gam = christoffel(metric, point)
    e_lower, e_upper = nbein(metric, point)
    de_upper = _partials(lambda p: nbein(metric, p)[1], point)  # [mu, nu, d]
    term1 = np.einsum("cn,sd,nsm->cmd", e_lower, e_upper, gam)
    term2 = np.einsum("cn,mnd->cmd", e_lower, de_upper)
    return term1 + term2


def lower_frame_index(omega: np.ndarray) -> np.ndarray:
    """``omega_{mu c d} = eta_{c a} omega^a_{mu d}``, indexed ``[mu, c, d]``."""
    return np.einsum("ca,amd->mcd", ETA, omega)


def spin_connection(metric: MetricSpec, point) -> np.ndarray:
    low = lower_frame_index(ricci_rotation(metric, point))
    comm = np.array([[g1 @ g2 - g2 @ g1 for g2 in GAMMA] for g1 in GAMMA])
    return np.einsum("mcd,cdij->mij", low, comm) / 8.0


def connection_report(metric: MetricSpec, point) -> ConnectionReport:
    return ConnectionReport(
        christoffel(metric, point), ricci_rotation(metric, point), spin_connection(metric, point)
    )


def metric_compatibility_residual(metric: MetricSpec, point) -> float:
    """``max |nabla_mu g_{nu rho}|`` with the computed Christoffels."""
    gam = christoffel(metric, point)
    G = np.diag(metric.at(point))
    dg = _partials(metric.at, point)
    dG = np.array([np.diag(dg[mu]) for mu in range(3)])
    nabla = (
        dG
        - np.einsum("lmn,lr->mnr", gam, G)
        - np.einsum("lmr,nl->mnr", gam, G)
    )
    return float(np.max(np.abs(nabla)))


def verify_walk_angles(r: float, tol: float = 1e-9) -> dict:
    """Compare walk coin cosines with the polar inverse n-bein at ``r``."""
    if r < 1.0:
        raise ValueError("walk angles need r >= 1")
    _, e_upper = nbein(polar_metric(), (0.0, r, 0.0))
    a11, a12, a21, a22 = angles_for_radius(r)
    pairs = {
        "cos_a11_vs_e^r_1": (np.cos(a11), e_upper[1, 1]),
        "cos_a12_vs_e^r_2": (np.cos(a12), e_upper[1, 2]),
        "cos_a21_vs_e^th_1": (np.cos(a21), e_upper[2, 1]),
        "cos_a22_vs_e^th_2": (np.cos(float(a22)), e_upper[2, 2]),
    }
    devs = {k: abs(float(a) - float(b)) for k, (a, b) in pairs.items()}
    worst = max(devs.values())
    if worst > tol:
        bad = max(devs, key=devs.get)
        raise ValueError(f"walk angle mismatch at r={r}: {bad} off by {worst:.3e}")
    return {"r": float(r), "deviations": devs, "max_deviation": worst}
