"""Angular spectrum, angular momentum and conservation diagnostics.

Angular Fourier index ``p`` of a length-``n_theta`` transform over the
``4*pi`` circle corresponds to the wave number

    k = ((p + n_theta/2) mod n_theta - n_theta/2) / 2

so physical (2*pi-anti-periodic) polar components live on half-integer
``k`` and integer ``k`` signals contamination.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np

from .spinor import CARTESIAN, SpinorField, change_spin_basis


@dataclass
class ThetaSpectrum:
    """Unitary angular DFT of a field.

    ``coeffs[c, j, p]`` is the amplitude of component ``c`` at radius ``j``
    in FFT bin ``p``; ``k[p]`` is the signed wave number of that bin.
    """

    k: np.ndarray
    coeffs: np.ndarray
    eps: float

    def mode_energy(self) -> np.ndarray:
        """Energy per bin, summed over components and radii."""
        return (np.abs(self.coeffs) ** 2).sum(axis=(0, 1)) * self.eps**2

    def total_energy(self) -> float:
        return float(self.mode_energy().sum())

    def inverse(self) -> np.ndarray:
        n = self.coeffs.shape[-1]
        return np.fft.ifft(self.coeffs, axis=-1) * np.sqrt(n)


def mode_numbers(n_theta: int) -> np.ndarray:
    p = np.arange(n_theta)
    return ((p + n_theta // 2) % n_theta - n_theta // 2) / 2.0


def theta_spectrum(field: SpinorField) -> ThetaSpectrum:
    n = field.grid.n_theta
    coeffs = np.fft.fft(field.data, axis=-1) / np.sqrt(n)
    return ThetaSpectrum(mode_numbers(n), coeffs, field.grid.eps)


def _integer_mask(k: np.ndarray) -> np.ndarray:
    return np.asarray(k) == np.round(k)


def even_mode_energy_fraction(field: SpinorField) -> float:
    """Fraction of the energy carried by integer wave numbers."""
    spec = theta_spectrum(field)
    e = spec.mode_energy()
    total = e.sum()
    if total == 0.0:
        raise ValueError("even-mode fraction undefined for a zero field")
    return float(e[_integer_mask(spec.k)].sum() / total)


def angular_momentum(field: SpinorField) -> float:
    """Spectral expectation of ``J = -i d/dtheta`` per unit norm."""
    spec = theta_spectrum(field)
    e = spec.mode_energy()
    total = e.sum()
    if total == 0.0:
        raise ValueError("angular momentum undefined for a zero field")
    return float((spec.k * e).sum() / total)


def orbital_spin_decomposition(field: SpinorField):
    """Split ``<J>`` into orbital and spin parts.

    The field is rotated to the cartesian spin basis, where the orbital
    part is ``<-i d/dtheta>`` of the (integer-mode) components and the spin
    part is ``<sigma_1>/2``.  Their sum reproduces :func:`angular_momentum`
    of the polar field provided the field carries no energy in the top
    half-integer bin, which would alias after the half-mode shift.
    """
    cart = field if field.basis == CARTESIAN else change_spin_basis(field, CARTESIAN)
    total = cart.norm_squared()
    if total == 0.0:
        raise ValueError("decomposition undefined for a zero field")
    spec = theta_spectrum(cart)
    orbital = float((spec.k * spec.mode_energy()).sum() / total)
    f0, f1 = cart.data
    sigma1 = 2.0 * (np.conj(f0) * f1).real.ravel().sum() * cart.grid.eps**2
    spin = 0.5 * float(sigma1) / total
    return orbital, spin


def mode_energies(field: SpinorField) -> np.ndarray:
    return theta_spectrum(field).mode_energy()


@dataclass
class AuditRow:
    step: int
    norm: float
    J_expectation: float
    even_mode_fraction: float


@dataclass
class AuditReport:
    rows: List[AuditRow] = field(default_factory=list)

    @property
    def norm_drift(self) -> float:
        n = np.array([r.norm for r in self.rows])
        return float(np.max(np.abs(n - n[0])))

    @property
    def J_drift(self) -> float:
        j = np.array([r.J_expectation for r in self.rows])
        return float(np.max(np.abs(j - j[0])))

    @property
    def max_even_mode_fraction(self) -> float:
        return float(max(r.even_mode_fraction for r in self.rows))

    def summary(self) -> dict:
        return {
            "snapshots": len(self.rows),
            "norm_drift": self.norm_drift,
            "J_initial": self.rows[0].J_expectation,
            "J_drift": self.J_drift,
            "max_even_mode_fraction": self.max_even_mode_fraction,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("# format: polarwalk.audit/1\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "norm", "J_expectation", "even_mode_fraction"])
            for r in self.rows:
                w.writerow([r.step, repr(r.norm), repr(r.J_expectation), repr(r.even_mode_fraction)])


def audit_row(step: int, f: SpinorField) -> AuditRow:
    return AuditRow(step, f.norm(), angular_momentum(f), even_mode_energy_fraction(f))


def conservation_audit(history: Sequence[SpinorField], steps: Iterable[int] | None = None) -> AuditReport:
    """Norm, ``<J>`` and even-mode fraction for each snapshot."""
    history = list(history)
    if len(history) < 2:
        raise ValueError("an audit needs at least two snapshots")
    steps = list(range(len(history))) if steps is None else list(steps)
    return AuditReport([audit_row(s, f) for s, f in zip(steps, history)])


def read_audit_csv(path) -> AuditReport:
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return AuditReport(
            [
                AuditRow(int(r["step"]), float(r["norm"]), float(r["J_expectation"]),
                         float(r["even_mode_fraction"]))
                for r in rows
            ]
        )

