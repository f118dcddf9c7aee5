import numpy as np
import pytest
from hypothesis import given, strategies as st

from pshlab.envelope import rooftop, sh_envelope
from pshlab.geodesic import geodesic_dr
from pshlab.grid import Field, build_grid, make_field
from pshlab.regularity import (
    C11Table,
    c11_scan,
    default_lags,
    eta,
    eta_example_check,
    holder_fit,
    holder_geodesic_experiment,
    lag_moduli,
)

SQ = build_grid("rectangle(1)", 81)


def test_default_lags():
    lags = default_lags()
    assert len(lags) == 16
    assert (8, 0) in lags and (0, 4) in lags and (2, 2) in lags and (1, -1) in lags


@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0])
def test_calibration_on_axis_power(beta):
    assert holder_fit(Field(SQ, np.abs(SQ.x) ** beta)).exponent == pytest.approx(beta, abs=0.03)


@given(st.floats(0.2, 1.0))
def test_calibration_on_radial_power(beta):
    g = build_grid("disk(1)", 61)
    assert holder_fit(Field(g, np.abs(g.z) ** beta)).exponent == pytest.approx(beta, abs=0.03)


def test_constant_field_has_infinite_exponent():
    assert holder_fit(make_field(SQ, "constant(2)")).exponent == np.inf


def test_lag_moduli_are_worst_case():
    g = build_grid("rectangle(1)", 21)
    f = make_field(g, "linear(3, 0)")
    radii, mods = lag_moduli(f, [(1, 0), (0, 1)], min_pairs=1)
    np.testing.assert_allclose(radii, [g.spacing, g.spacing])
    np.testing.assert_allclose(mods, [3 * g.spacing, 0.0], atol=1e-12)


def test_c11_scan_of_rooftop():
    g = build_grid("disk(1)", 61)
    roof = rooftop(make_field(g, "toric_sample(2)"), make_field(g, "quadratic(0.5, 0, 0.5, 0.3, 0, 0.1)")).envelope
    tab = c11_scan(roof, (0.5, 0.8))
    assert isinstance(tab, C11Table)
    assert all(np.isfinite(tab.values))
    assert min(tab.lower) >= -1e-8
    ratio, target = tab.ratio(0, 1)
    assert target == pytest.approx((0.5 / 0.2) ** 2)
    assert ratio <= 2 * target
    assert [r["K"] for r in tab.rows()] == [0.5, 0.8]


def test_c11_scan_of_envelope_is_bounded_below():
    g = build_grid("disk(1)", 61)
    env = sh_envelope(make_field(g, "smooth_bump(0.2, 0.1, 0.4, 1)")).envelope
    assert min(c11_scan(env, (0.5, 0.8)).lower) >= -1e-8


def test_c11_scan_of_slab():
    g = build_grid("disk(1)", 41)
    slab = geodesic_dr(make_field(g, "toric_sample(4)"), make_field(g, "toric_sample(2)") * 2.0, n_t=5, n_C=41)
    tab = c11_scan(slab, (0.5, 0.8))
    assert all(np.isfinite(tab.values))


@given(st.floats(0.1, 2.0), st.integers(0, 1000))
def test_eta_boundary_identity(alpha, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    z1, z2 = complex(v[0], v[1]), complex(v[2], v[3])
    # on the sphere eta is -|z - z0|^alpha with z0 = (1, 0)
    expected = -np.sqrt(abs(z1 - 1) ** 2 + abs(z2) ** 2) ** alpha
    assert eta(z1, z2, alpha) == pytest.approx(expected, abs=1e-12)


def test_eta_pole_and_alpha_one_entry():
    assert eta(1.0, 0.0, 0.5) == 0.0
    rep = eta_example_check(1.0, n_samples=200)
    assert rep["boundary_identity_error"] <= 1e-12
    assert rep["hessian_entry_nonnegative"] is True
    assert rep["det_fd_max"] <= 1e-6


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0, 1.5])
def test_eta_example_passes(alpha):
    rep = eta_example_check(alpha)
    assert rep["boundary_identity_error"] <= 1e-12
    assert rep["det_closed_form_max"] == 0.0
    assert rep["det_fd_max"] <= 1e-6
    assert rep["at_pole"] == 0.0
    assert rep["hessian_entry_nonnegative"]


def test_cusp_experiment_within_guarantee():
    rep = holder_geodesic_experiment(0.5, n=41, n_t=11, n_C=41)
    assert 0.5 / 2 - 0.1 <= rep["min_exponent"] <= rep["max_exponent"] <= 1.0
