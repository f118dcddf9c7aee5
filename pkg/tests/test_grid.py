import numpy as np
import pytest
from hypothesis import given, strategies as st

from pshlab.grid import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    Domain,
    Field,
    GeneratorSpec,
    GridError,
    build_grid,
    laplacian,
    make_field,
    second_difference,
    shifted,
)

coef = st.floats(-3, 3, allow_nan=False)


def _four_neighbours(cls):
    pad = np.pad(cls, 1, constant_values=EXTERIOR)
    ny, nx = cls.shape
    return [pad[1 + di:1 + di + ny, 1 + dj:1 + dj + nx] for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1))]


@pytest.mark.parametrize("rule", ["nearest", "band", "stencil"])
def test_disk_classes_and_projection(rule):
    g = build_grid("disk(1)", 41, rule)
    r = np.abs(g.z)
    assert np.all(r[g.interior] < 1.0)
    # boundary data is evaluated exactly on the unit circle
    np.testing.assert_allclose(np.abs(g.z_eval[g.boundary]), 1.0, atol=1e-14)
    np.testing.assert_array_equal(g.z_eval[g.interior], g.z[g.interior])
    for nb in _four_neighbours(g.node_class):
        assert not np.any(g.interior & (nb == EXTERIOR))


def test_nearest_rule_selects_half_spacing_shell():
    g = build_grid("disk(1)", 51)
    r = np.abs(g.z)
    shell = np.abs(r - 1.0) <= 0.5 * g.spacing + 1e-12
    assert np.all(g.boundary[shell])
    # nodes outside the shell are boundary only when demoted next to the exterior
    extra = g.boundary & ~shell
    assert np.all(r[extra] < 1.0)


def test_rectangle_boundary_is_frame():
    g = build_grid("rectangle(1)", 11)
    assert g.boundary[0].all() and g.boundary[-1].all()
    assert g.boundary[:, 0].all() and g.boundary[:, -1].all()
    assert g.interior[1:-1, 1:-1].all()
    assert not np.any(g.node_class == EXTERIOR)


def test_annulus_has_two_boundary_circles():
    g = build_grid("annulus_radial(0.4, 1)", 61)
    re = np.abs(g.z_eval[g.boundary])
    assert np.all(np.isclose(re, 0.4) | np.isclose(re, 1.0))
    assert np.any(np.isclose(re, 0.4)) and np.any(np.isclose(re, 1.0))
    assert g.node_class[30, 30] == EXTERIOR


@pytest.mark.parametrize("bad", [("ellipse", 21, "nearest"), ("disk(1)", 5, "nearest"), ("disk(1)", 21, "wide")])
def test_grid_errors(bad):
    with pytest.raises(GridError):
        build_grid(*bad)


def test_domain_parse():
    assert Domain.parse("disk(2)").half_width == 2.0
    assert Domain.parse("rectangle(0.5)").params == (0.5, 0.5)
    assert Domain.parse("annulus_radial").params == (0.5, 1.0)


def test_field_masks_exterior(disk21):
    f = Field(disk21, np.ones(disk21.shape))
    assert np.all(np.isnan(f.values[~disk21.active]))
    assert not f.values.flags.writeable
    bad = np.ones(disk21.shape)
    bad[10, 10] = np.inf
    with pytest.raises(GridError):
        Field(disk21, bad)


def test_field_arithmetic(disk21):
    a = make_field(disk21, "linear(1, 0)")
    b = make_field(disk21, "constant(2)")
    np.testing.assert_allclose((a + b - b).values, a.values)
    np.testing.assert_allclose((2 * a).values, (a + a).values)
    assert (a.minimum(b)).max() <= 2.0
    other = make_field(build_grid("disk(1)", 21), "constant(0)")
    with pytest.raises(GridError):
        a + other


def test_field_csv_rows(disk21):
    text = make_field(disk21, "constant(1)").to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "x,y,value"
    assert len(lines) - 1 == int(disk21.active.sum())


def test_field_at_uses_nearest_node():
    g = build_grid("rectangle(1)", 11)
    f = make_field(g, "linear(1, 2)")
    assert f.at(0.21, -0.39) == pytest.approx(0.2 + 2 * -0.4)


@pytest.mark.parametrize(
    "text, name, params",
    [("cone(4, -3, 0)", "cone", (4.0, -3.0, 0.0)), ("constant(1)", "constant", (1.0,)), (" toric_sample(2,4) ", "toric_sample", (2.0, 4.0))],
)
def test_generator_parse(text, name, params):
    spec = GeneratorSpec.parse(text)
    assert spec.name == name and spec.params == params


@pytest.mark.parametrize("text", ["nope(1)", "constant()", "holder_cusp(1.5)", "linear(1, x)", "cone(1, 2"])
def test_generator_parse_errors(text):
    with pytest.raises(GridError):
        GeneratorSpec.parse(text)


def test_generator_values():
    z = np.array([0.5, 1j, -0.25 + 0.25j])
    np.testing.assert_allclose(GeneratorSpec.parse("radial_log(1, 0, -1)")(z), np.maximum(np.log(np.abs(z)), -1))
    np.testing.assert_allclose(GeneratorSpec.parse("holder_cusp(0.5, 1, 0)")(z), -np.abs(z - 1) ** 0.5)
    np.testing.assert_allclose(GeneratorSpec.parse("cone(4, -3)")(z), np.minimum(0, 4 * np.abs(z) - 3))
    np.testing.assert_allclose(GeneratorSpec.parse("quadratic(1, 2, 3, 4, 5, 6)")(z),
                               z.real**2 + 2 * z.real * z.imag + 3 * z.imag**2 + 4 * z.real + 5 * z.imag + 6)


def test_shifted_reads_neighbour():
    v = np.arange(12.0).reshape(3, 4)
    s = shifted(v, (1, 0))
    assert s[0, 0] == v[0, 1]
    assert np.isnan(s[0, -1])
    assert shifted(v, (0, 1))[0, 0] == v[1, 0]


@given(coef, coef, coef, coef, coef)
def test_laplacian_exact_on_quadratics(axx, axy, ayy, ax, ay):
    g = build_grid("rectangle(1)", 15)
    f = Field(g, axx * g.x**2 + axy * g.x * g.y + ayy * g.y**2 + ax * g.x + ay * g.y)
    lap = laplacian(f).values
    np.testing.assert_allclose(lap[g.interior], 2 * (axx + ayy), atol=1e-9)
    assert np.all(np.isnan(lap[~g.interior]))


@given(coef, coef, st.sampled_from([(1, 0), (0, 2), (1, 1), (2, -1)]))
def test_second_difference_is_linear(a, b, k):
    g = build_grid("disk(1)", 17)
    f1 = make_field(g, "smooth_bump(0.1, 0, 0.5, 1)")
    f2 = make_field(g, "toric_sample(2, 3)")
    lhs = second_difference(a * f1 + b * f2, k).values
    rhs = a * second_difference(f1, k).values + b * second_difference(f2, k).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_second_difference_of_quadratic():
    g = build_grid("rectangle(1)", 11)
    f = Field(g, g.x**2)
    d = second_difference(f, (1, 1)).values
    np.testing.assert_allclose(d[1:-1, 1:-1], 2 * g.spacing**2, atol=1e-14)


def test_neighbor_mean_operator_rows(disk21):
    W = disk21.neighbor_mean_operator
    assert W.shape == (disk21.interior_index.size, disk21.nx * disk21.ny)
    np.testing.assert_allclose(np.asarray(W.sum(axis=1)).ravel(), 1.0)
    assert disk21.node_class.ravel()[W.indices].max() in (INTERIOR, BOUNDARY)
