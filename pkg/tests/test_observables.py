import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarwalk.observables import (
    AuditReport,
    AuditRow,
    angular_momentum,
    conservation_audit,
    even_mode_energy_fraction,
    mode_energies,
    mode_numbers,
    orbital_spin_decomposition,
    read_audit_csv,
    theta_spectrum,
)
from polarwalk.spinor import CARTESIAN, SpinorField, make_grid, sample_field
from polarwalk.walk import WalkParams, step_free

from conftest import antiperiodic, random_field


def _modes(grid, *ks, weights=None, spinor=(1.0, 0.0)):
    weights = weights or [1.0] * len(ks)

    def f(r, th):
        ang = sum(w * np.exp(1j * k * th) for k, w in zip(ks, weights))
        return spinor[0] * ang + 0 * r, spinor[1] * ang + 0 * r

    return sample_field(grid, f)


class TestSpectrum:
    def test_mode_numbers(self):
        np.testing.assert_array_equal(mode_numbers(8), [0, 0.5, 1, 1.5, -2, -1.5, -1, -0.5])

    def test_parseval(self, small_grid, rng):
        f = random_field(small_grid, rng)
        assert theta_spectrum(f).total_energy() == pytest.approx(f.norm_squared(), rel=1e-13)
        assert mode_energies(f).sum() == pytest.approx(f.norm_squared(), rel=1e-13)

    def test_inverse(self, small_grid, rng):
        f = random_field(small_grid, rng)
        np.testing.assert_allclose(theta_spectrum(f).inverse(), f.data, atol=1e-14)

    @pytest.mark.parametrize("k", [0.5, -1.5, 2.5, -3.5])
    def test_single_half_integer_mode(self, small_grid, k):
        f = _modes(small_grid, k)
        assert angular_momentum(f) == pytest.approx(k, abs=1e-13)
        assert even_mode_energy_fraction(f) < 1e-28

    def test_integer_mode(self, small_grid):
        assert even_mode_energy_fraction(_modes(small_grid, 1.0)) == pytest.approx(1.0, abs=1e-14)

    def test_half_and_integer(self, small_grid):
        f = _modes(small_grid, 0.5, 1.0)
        assert even_mode_energy_fraction(f) == pytest.approx(0.5, abs=1e-14)

    def test_superposition_expectation(self, small_grid):
        assert angular_momentum(_modes(small_grid, 0.5, 1.5)) == pytest.approx(1.0, abs=1e-13)
        w = [np.sqrt(3.0), 1.0]
        assert angular_momentum(_modes(small_grid, 0.5, -1.5, weights=w)) == pytest.approx(
            0.75 * 0.5 + 0.25 * -1.5, abs=1e-13
        )

    def test_zero_field(self, small_grid):
        z = SpinorField.zeros(small_grid)
        for fn in (angular_momentum, even_mode_energy_fraction, orbital_spin_decomposition):
            with pytest.raises(ValueError):
                fn(z)

    def test_random_antiperiodic_has_no_integer_modes(self, small_grid, rng):
        assert even_mode_energy_fraction(antiperiodic(small_grid, rng)) < 1e-28


class TestDecomposition:
    def test_constant_polar_spinor(self):
        grid = make_grid(32, 1.0, 3)
        orb, spin = orbital_spin_decomposition(_modes(grid, 0.5))
        assert orb == pytest.approx(0.5, abs=1e-13)
        assert spin == pytest.approx(0.0, abs=1e-13)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_pure_spin(self, sign):
        grid = make_grid(16, 1.0, 3)
        f = _modes(grid, 0.0, spinor=(1.0, sign))
        f = SpinorField(grid, f.data, CARTESIAN)
        orb, spin = orbital_spin_decomposition(f)
        assert orb == pytest.approx(0.0, abs=1e-14)
        assert spin == pytest.approx(0.5 * sign, abs=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_sum_rule(self, seed):
        grid = make_grid(32, 1.0, 6)
        f = antiperiodic(grid, np.random.default_rng(seed))
        orb, spin = orbital_spin_decomposition(f)
        assert abs(angular_momentum(f) - (orb + spin)) < 1e-10

    def test_top_bin_aliasing(self):
        # the top half-integer bin aliases after the half-mode shift
        grid = make_grid(16, 1.0, 3)
        f = _modes(grid, 3.5)
        orb, spin = orbital_spin_decomposition(f)
        assert abs(angular_momentum(f) - (orb + spin)) > 1.0


class TestAudit:
    def test_rows_and_drifts(self, small_grid, rng):
        f = antiperiodic(small_grid, rng)
        p = WalkParams(small_grid, 1.0)
        hist = [f]
        for _ in range(5):
            hist.append(step_free(hist[-1], p))
        rep = conservation_audit(hist)
        assert [r.step for r in rep.rows] == list(range(6))
        assert rep.norm_drift < 1e-13
        assert rep.J_drift < 1e-12
        assert rep.max_even_mode_fraction < 1e-26
        s = rep.summary()
        assert s["snapshots"] == 6 and s["J_initial"] == rep.rows[0].J_expectation

    def test_needs_two_snapshots(self, small_grid, rng):
        with pytest.raises(ValueError):
            conservation_audit([random_field(small_grid, rng)])

    def test_csv_round_trip(self, tmp_path):
        rep = AuditReport([AuditRow(0, 1.0, 0.1 + 0.2, 1e-300), AuditRow(10, 0.9999999, -2.5, 0.0)])
        rep.write_csv(tmp_path / "a.csv")
        text = (tmp_path / "a.csv").read_text()
        assert text.splitlines()[0] == "# format: polarwalk.audit/1"
        assert text.splitlines()[1] == "step,norm,J_expectation,even_mode_fraction"
        back = read_audit_csv(tmp_path / "a.csv")
        assert back.rows == rep.rows
