import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pshlab.duality import (
    ConeError,
    ConeModel,
    cone_members,
    continuity_modulus,
    edwards_gap,
    jensen_lp,
    path_model,
    primal_envelope,
    random_cone,
)
from pshlab.envelope import EnvelopeError

H = np.array([0.0, 5.0, 0.0])


def _cycle(n, slack):
    return ConeModel(n, tuple((i, (i + 1) % n) for i in range(n)), np.arange(n), np.full(n, slack), "compact")


def test_path_primal_examples():
    np.testing.assert_allclose(primal_envelope(path_model(0.0), H), [0, 0, 0])
    np.testing.assert_allclose(primal_envelope(path_model(1.0), H), [0, 1, 0])


def test_path_dual_examples():
    cert = jensen_lp(path_model(0.0), H, 1)
    np.testing.assert_allclose(cert.mu, [0.5, 0, 0.5], atol=1e-12)
    assert cert.b == pytest.approx(0.0) and cert.objective == pytest.approx(0.0)
    cert = jensen_lp(path_model(1.0), H, 1)
    np.testing.assert_allclose(cert.mu, [0.5, 0, 0.5], atol=1e-12)
    # the offset carries the slack
    assert cert.b == pytest.approx(1.0)
    assert cert.objective + cert.b == pytest.approx(1.0)
    assert abs(cert.gap) <= 1e-12


def test_member_gets_point_mass():
    cone = path_model(0.0)
    h = np.array([1.0, 0.5, 0.0])
    assert cone.contains(h)
    np.testing.assert_allclose(primal_envelope(cone, h), h)
    for x in range(3):
        cert = jensen_lp(cone, h, x)
        assert cert.objective + cert.b == pytest.approx(h[x])
    cert = jensen_lp(cone, h, 0)
    np.testing.assert_allclose(cert.mu, [1, 0, 0])


def test_lp_duals_equal_envelope():
    rng = np.random.default_rng(3)
    cone = random_cone(rng, 20, "local")
    h = rng.standard_normal(20)
    cert = jensen_lp(cone, h, 4)
    np.testing.assert_allclose(cert.dual_envelope, primal_envelope(cone, h), atol=1e-9)


@pytest.mark.parametrize(
    "args",
    [
        (1, (), [0], [0.0], "local"),
        (3, ((0, 1),), [1], [0.0], "local"),
        (3, ((0, 1), (1, 2)), [0, 1, 2], [0, 0, 0], "local"),
        (3, ((0, 1), (1, 2)), [1], [-1.0], "local"),
        (3, ((0, 1), (1, 2)), [1], [0.0], "compact"),
        (3, ((0, 1), (1, 2)), [1], [0.0], "weird"),
        (3, ((0, 0), (1, 2)), [1], [0.0], "local"),
    ],
)
def test_validation(args):
    n, edges, con, slack, kind = args
    with pytest.raises(ConeError):
        ConeModel(n, edges, np.array(con), np.array(slack), kind)


def test_json_roundtrip():
    cone = random_cone(np.random.default_rng(1), 12, "compact", (0.0, 0.5))
    back = ConeModel.from_json(cone.to_json())
    assert back.to_dict() == cone.to_dict()
    with pytest.raises(ConeError):
        ConeModel.from_dict({"nodes": 3, "edges": [[0, 1], [1, 2]]})
    d = json.loads(jensen_lp(cone, np.zeros(12), 0).to_json())
    assert set(d) == {"barycenter", "mu", "b", "objective", "primal", "gap"}


def test_bad_obstacle_and_barycenter():
    with pytest.raises(ConeError):
        primal_envelope(path_model(), np.array([0.0, np.nan, 0.0]))
    with pytest.raises(ConeError):
        jensen_lp(path_model(), H, 5)


def test_non_convergence_raises():
    with pytest.raises(EnvelopeError):
        primal_envelope(_cycle(40, 0.0), np.random.default_rng(0).standard_normal(40), tol=0.0, max_iter=1)


@given(st.integers(0, 10**6), st.integers(5, 40), st.sampled_from(["local", "compact"]))
def test_edwards_gap_random(seed, n, kind):
    rng = np.random.default_rng(seed)
    cone = random_cone(rng, n, kind, 0.0 if kind == "local" else (0.0, 0.5))
    assert edwards_gap(cone, rng.standard_normal(n)) <= 1e-7


def test_compact_cycle_gap():
    h = np.random.default_rng(8).standard_normal(8)
    assert edwards_gap(_cycle(8, 0.3), h) <= 1e-7


def test_certificates_bound_members():
    rng = np.random.default_rng(5)
    for kind, slack in (("local", 0.0), ("compact", (0.0, 0.4))):
        cone = random_cone(rng, 25, kind, slack)
        h = rng.standard_normal(25)
        members = cone_members(cone, rng, 50)
        assert all(cone.contains(u) for u in members)
        for x in range(0, 25, 4):
            cert = jensen_lp(cone, h, x)
            assert cert.mu.min() >= 0 and cert.mu.sum() == pytest.approx(1.0)
            assert cert.check(members) <= 1e-9


def test_unconstrained_nodes_get_point_mass():
    rng = np.random.default_rng(11)
    cone = random_cone(rng, 30, "local")
    h = rng.standard_normal(30)
    for x in np.setdiff1d(np.arange(30), cone.constrained):
        cert = jensen_lp(cone, h, x)
        assert cert.mu[x] == pytest.approx(1.0) and cert.b == pytest.approx(0.0)


@given(st.integers(0, 10**6), st.floats(-2, 2))
def test_continuity_modulus(seed, eps):
    rng = np.random.default_rng(seed)
    cone = random_cone(rng, 15, "compact", (0.0, 0.5))
    h1 = rng.standard_normal(15)
    h2 = h1 + rng.uniform(-1, 1, 15)
    lhs, rhs = continuity_modulus(cone, h1, h2)
    assert lhs <= rhs + 1e-12
    p = primal_envelope(cone, h1)
    lhs, rhs = continuity_modulus(cone, p, p + eps)
    assert lhs == pytest.approx(abs(eps), abs=1e-9) and rhs == pytest.approx(abs(eps), abs=1e-12)
