import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarwalk.geometry import (
    MetricSpec,
    christoffel,
    connection_report,
    flat_metric,
    lower_frame_index,
    metric_compatibility_residual,
    nbein,
    polar_metric,
    ricci_rotation,
    spin_connection,
    verify_walk_angles,
)
from polarwalk.harness import geometry_checks, typo_metric

SIGMA_1 = np.array([[0, 1], [1, 0]])


@pytest.mark.parametrize("r", [1.5, 2.0, 5.0])
def test_polar_christoffel(r):
    gam = christoffel(polar_metric(), (0.0, r, 0.4))
    expect = np.zeros((3, 3, 3))
    expect[1, 2, 2] = -r
    expect[2, 1, 2] = expect[2, 2, 1] = 1.0 / r
    np.testing.assert_allclose(gam, expect, atol=1e-7)


@pytest.mark.parametrize("r", [1.5, 2.0, 5.0])
def test_polar_ricci_rotation(r):
    om = ricci_rotation(polar_metric(), (0.0, r, 0.4))
    expect = np.zeros((3, 3, 3))
    expect[1, 2, 2] = -1.0
    expect[2, 2, 1] = 1.0
    np.testing.assert_allclose(om, expect, atol=1e-7)


@pytest.mark.parametrize("r", [1.5, 2.0, 5.0])
def test_polar_spin_connection(r):
    sc = spin_connection(polar_metric(), (0.0, r, 0.4))
    np.testing.assert_allclose(sc[0], 0, atol=1e-7)
    np.testing.assert_allclose(sc[1], 0, atol=1e-7)
    np.testing.assert_allclose(sc[2], -0.5j * SIGMA_1, atol=1e-7)


def test_polar_nbein():
    e_low, e_up = nbein(polar_metric(), (0.0, 4.0, 0.0))
    np.testing.assert_allclose(np.diag(e_low), [1, 1, 4])
    np.testing.assert_allclose(np.diag(e_up), [1, 1, 0.25])


def test_flat_metric_is_connection_free():
    rep = connection_report(flat_metric(), (0.3, -0.2, 0.9))
    for arr in (rep.christoffel, rep.ricci_rotation, rep.spin_connection):
        assert np.max(np.abs(arr)) == 0.0


def _wavy(a, b):
    return MetricSpec(lambda t, r, th: (1.0 + a * np.sin(t + r) ** 2, -(1.0 + b * r * r),
                                        -r * r * (1.0 + a * np.cos(th) ** 2)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5), st.floats(1.0, 3.0), st.floats(0, 6.28))
def test_structural_identities(a, b, r, th):
    m = _wavy(a, b)
    pt = (0.2, r, th)
    gam = christoffel(m, pt)
    np.testing.assert_allclose(gam, np.swapaxes(gam, 1, 2), atol=1e-12)
    low = lower_frame_index(ricci_rotation(m, pt))
    np.testing.assert_allclose(low, -np.swapaxes(low, 1, 2), atol=1e-7)
    assert metric_compatibility_residual(m, pt) < 1e-7


def test_signature_check():
    bad = MetricSpec(lambda t, r, th: (1.0, 1.0, -1.0))
    with pytest.raises(ValueError):
        christoffel(bad, (0.0, 1.0, 0.0))


@pytest.mark.parametrize("r", [1.0, 1.5, 10.0, 100.0])
def test_walk_angles_match_nbein(r):
    assert verify_walk_angles(r)["max_deviation"] < 1e-12


def test_walk_angles_below_one():
    with pytest.raises(ValueError):
        verify_walk_angles(0.5)


def test_geometry_checks_pass():
    res = geometry_checks()
    assert res["passed"], res["failures"]


def test_typo_metric_is_caught():
    res = geometry_checks(typo_metric())
    assert not res["passed"]
    assert any("Gamma^r_thth" in f for f in res["failures"])
