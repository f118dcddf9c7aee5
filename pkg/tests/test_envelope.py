import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pshlab.envelope import (
    EnvelopeError,
    convex_envelope_1d,
    monotone_convex_envelope,
    radial_profile_envelope,
    rooftop,
    sh_envelope,
    solve_obstacle,
    subharmonicity_defect,
    toric_rooftop,
)
from pshlab.grid import Field, build_grid, laplacian, make_field

GRID = build_grid("disk(1)", 15)
SPECS = ["cone(4, -3, 0)", "smooth_bump(0.2, 0.1, 0.4, 1)", "holder_cusp(0.5, 1, 0)", "quadratic(-1, 0, -1)", "linear(1, -0.5)"]
weights = st.lists(st.floats(-2, 2, allow_nan=False), min_size=len(SPECS), max_size=len(SPECS))


def _mix(w, grid=GRID):
    f = make_field(grid, "constant(0)")
    for wi, spec in zip(w, SPECS):
        f = f + wi * make_field(grid, spec)
    return f


def _support_line_hull(s, y):
    # brute force: every maximal support line passes through two samples
    best = np.full(s.size, -np.inf)
    for i, j in itertools.combinations(range(s.size), 2):
        a = (y[j] - y[i]) / (s[j] - s[i])
        b = y[i] - a * s[i]
        if np.all(a * s + b <= y + 1e-12):
            best = np.maximum(best, a * s + b)
    return best


def test_harmonic_obstacle_is_fixed():
    g = build_grid("rectangle(1)", 31)
    h = make_field(g, "linear(1, -0.5, 0.2)")
    rep = sh_envelope(h)
    assert rep.converged
    np.testing.assert_allclose(rep.envelope.values, h.values, atol=1e-12)
    assert rep.contact_fraction == pytest.approx(1.0)


def test_harmonic_obstacle_on_disk_within_snapping_error(disk41):
    # projected boundary values perturb harmonicity at first order in the spacing
    h = make_field(disk41, "linear(1, 0)")
    env = sh_envelope(h).envelope
    assert np.max(np.abs(env.values - h.values)[disk41.active]) <= disk41.spacing


def test_superharmonic_cap_becomes_boundary_constant(disk41):
    env = sh_envelope(make_field(disk41, "quadratic(-1, 0, -1)")).envelope
    np.testing.assert_allclose(env.values[disk41.active], -1.0, atol=1e-9)


def test_radial_cone_matches_log_hull():
    g = build_grid("disk(1)", 101)
    rep = sh_envelope(make_field(g, "cone(4, -3, 0)"))
    s, hull = radial_profile_envelope(lambda r: np.minimum(0, 4 * r - 3), g.spacing * 1e-2)
    r = np.abs(g.z_eval)
    m = g.active
    oracle = np.interp(np.log(np.maximum(r[m], np.exp(s[0]))), s, hull)
    assert np.max(np.abs(rep.envelope.values[m] - oracle)) <= 2e-2


def test_boundary_identity_and_below_obstacle(disk41):
    for spec in SPECS:
        h = make_field(disk41, spec)
        env = sh_envelope(h).envelope
        assert np.array_equal(env.values[disk41.boundary], h.values[disk41.boundary])
        assert np.max((env.values - h.values)[disk41.active]) <= 1e-12


def test_result_is_discretely_subharmonic(disk41):
    rep = sh_envelope(make_field(disk41, "smooth_bump(0.2, 0.1, 0.4, 1)"))
    lap = laplacian(rep.envelope).values[disk41.interior]
    assert lap.min() >= -10 * rep.tol / disk41.spacing**2
    assert subharmonicity_defect(rep.envelope) <= 10 * rep.tol / disk41.spacing**2


def test_policy_and_sweep_agree(disk21):
    h = make_field(disk21, "holder_cusp(0.5, 1, 0)")
    a = sh_envelope(h, 1e-12).envelope
    b = sh_envelope(h, 1e-12, method="sweep").envelope
    np.testing.assert_allclose(a.values, b.values, atol=1e-8, equal_nan=True)


def test_coarse_warm_start_does_not_change_result():
    g = build_grid("disk(1)", 51)
    h = make_field(g, "smooth_bump(0.2, 0.1, 0.4, 1)") + make_field(g, "cone(4, -3, 0)")
    warm = sh_envelope(h).envelope
    cold = sh_envelope(h, init_contact=np.zeros(g.shape, bool)).envelope
    np.testing.assert_allclose(warm.values, cold.values, atol=1e-9, equal_nan=True)


def test_non_convergence_is_reported(disk21):
    h = make_field(disk21, "cone(4, -3, 0)")
    rep = sh_envelope(h, max_iter=1, method="sweep")
    assert not rep.converged and rep.final_update > rep.tol
    with pytest.raises(EnvelopeError) as info:
        sh_envelope(h, max_iter=1, method="sweep", raise_on_failure=True)
    assert info.value.report is not None


def test_sidecar_is_json(disk21):
    import json

    rep = sh_envelope(make_field(disk21, "cone(4, -3, 0)"))
    d = json.loads(rep.to_json())
    assert d["converged"] is True and d["iterations"] == rep.iterations


def test_solve_obstacle_on_path():
    import scipy.sparse as sp

    W = sp.csr_matrix(np.array([[0.5, 0.0, 0.5]]))
    sol = solve_obstacle(W, np.array([0.0]), np.array([0.0, 5.0, 0.0]), np.array([1]))
    np.testing.assert_allclose(sol.u, [0, 0, 0])
    sol = solve_obstacle(W, np.array([1.0]), np.array([0.0, 5.0, 0.0]), np.array([1]))
    np.testing.assert_allclose(sol.u, [0, 1, 0])


@given(weights, st.floats(0, 1))
def test_envelope_is_monotone(w, eps):
    h = _mix(w)
    bump = make_field(GRID, "smooth_bump(-0.2, 0.3, 0.3, 1)")
    lo = sh_envelope(h, 1e-12).envelope.values
    hi = sh_envelope(h + eps * bump, 1e-12).envelope.values
    assert np.all(lo[GRID.active] <= hi[GRID.active] + 1e-9)


@given(weights)
def test_envelope_is_idempotent(w):
    once = sh_envelope(_mix(w), 1e-12).envelope
    twice = sh_envelope(once, 1e-12).envelope
    np.testing.assert_allclose(once.values, twice.values, atol=1e-9, equal_nan=True)


@given(weights, st.floats(-3, 3))
def test_envelope_commutes_with_constants(w, c):
    h = _mix(w)
    a = sh_envelope(h + c, 1e-12).envelope
    b = sh_envelope(h, 1e-12).envelope + c
    np.testing.assert_allclose(a.values, b.values, atol=1e-9, equal_nan=True)


def test_rooftop_examples(disk41):
    sq = build_grid("rectangle(1)", 21)
    u = make_field(sq, "toric_sample(2)")
    np.testing.assert_allclose(rooftop(u, u + 1.0).envelope.values, u.values, atol=1e-12)
    u = make_field(disk41, "toric_sample(2)")
    w = make_field(disk41, "cone(4, -3, 0)")
    np.testing.assert_array_equal(rooftop(w, w).envelope.values, sh_envelope(w).envelope.values)
    roof = rooftop(u, make_field(disk41, "linear(1, 0)")).envelope
    mn = u.minimum(make_field(disk41, "linear(1, 0)"))
    assert np.array_equal(roof.values[disk41.boundary], mn.values[disk41.boundary])


def test_rooftop_radial_against_toric_oracle():
    g = build_grid("disk(1)", 101)
    u = make_field(g, "radial_log(1, 0, -1)")
    v = make_field(g, "quadratic(1, 0, 1, 0, 0, -0.9)")
    env = rooftop(u, v).envelope
    s = np.linspace(np.log(g.spacing * 1e-2), 0, 2001)
    r = np.exp(s)
    oracle = toric_rooftop(np.maximum(s, -1), r**2 - 0.9, s)
    rr = np.abs(g.z_eval[g.active])
    ref = np.interp(np.log(np.maximum(rr, r[0])), s, oracle)
    assert np.max(np.abs(env.values[g.active] - ref)) <= 2e-2


def test_convex_envelope_examples():
    s = np.linspace(0, 1, 9)
    np.testing.assert_allclose(convex_envelope_1d(s**2, s), s**2)
    np.testing.assert_allclose(convex_envelope_1d([0, 1, 0]), [0, 0, 0])
    s = np.linspace(-3, 0, 61)
    y = np.minimum(0, s + 1)
    out = convex_envelope_1d(y, s)
    np.testing.assert_allclose(out, _support_line_hull(s, y), atol=1e-12)
    # the hull is the chord from (-3, -2) to (0, 0)
    np.testing.assert_allclose(out, (2.0 / 3.0) * s, atol=1e-12)


def test_convex_envelope_rejects_bad_input():
    with pytest.raises(ValueError):
        convex_envelope_1d([1.0])
    with pytest.raises(ValueError):
        convex_envelope_1d([0.0, np.nan, 1.0])


samples = st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=40)


@given(samples)
def test_convex_envelope_properties(y):
    y = np.asarray(y)
    s = np.arange(y.size, dtype=float)
    out = convex_envelope_1d(y, s)
    assert np.all(out <= y + 1e-9)
    assert np.all(np.diff(out, 2) >= -1e-9)
    np.testing.assert_allclose(convex_envelope_1d(out, s), out, atol=1e-9)
    np.testing.assert_allclose(out, _support_line_hull(s, y), atol=1e-8)


@given(samples, st.lists(st.floats(0, 5), min_size=40, max_size=40))
def test_convex_envelope_monotone(y, bump):
    y = np.asarray(y)
    z = y + np.asarray(bump[: y.size])
    assert np.all(convex_envelope_1d(y) <= convex_envelope_1d(z) + 1e-9)


@given(samples)
def test_monotone_envelope_is_nondecreasing(y):
    out = monotone_convex_envelope(y)
    assert np.all(np.diff(out) >= -1e-12)
    assert np.all(out <= np.asarray(y) + 1e-9)


def test_toric_rooftop_requires_monotone_inputs():
    s = np.linspace(-2, 0, 11)
    with pytest.raises(ValueError):
        toric_rooftop(-s, s, s)
    out = toric_rooftop(np.maximum(s, -1), np.zeros_like(s), s)
    np.testing.assert_allclose(out, np.maximum(s, -1))
