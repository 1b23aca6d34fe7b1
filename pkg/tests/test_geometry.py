"""Curve evaluation, discretization, spectral differentiation, and the
geometry validity checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerscat.errors import ConfigurationError, GeometryError
from layerscat.geometry import (ParametricCurve, StarlikeShape, curve_is_simple,
                                discretize, eval_curve, spectral_derivative,
                                validate_pair)

PRESETS = ("apple", "kite", "rounded_square", "rounded_triangle")


def test_preset_point_values():
    tri = ParametricCurve.preset("rounded_triangle")
    assert np.allclose(eval_curve(tri, 0.0), [2.3, 0.0], atol=1e-15)
    circ = ParametricCurve.preset("circle", radius=2.4)
    assert np.allclose(eval_curve(circ, np.pi / 2), [0.0, 2.4], atol=1e-15)
    kite = ParametricCurve.preset("kite")
    assert np.allclose(eval_curve(kite, np.pi), [-1.0, 0.0], atol=1e-14)


def test_unknown_preset_rejected():
    with pytest.raises(ConfigurationError):
        ParametricCurve.preset("pentagon")
    with pytest.raises(ConfigurationError):
        ParametricCurve.preset("circle")  # radius missing


def test_circle_discretization():
    g = discretize(ParametricCurve.preset("circle", radius=1.0), 8)
    assert g.size == 16
    assert np.max(np.abs(g.speed - 1.0)) < 1e-12
    assert np.max(np.abs(g.curvature - 1.0)) < 1e-12


def test_kite_speed_at_zero():
    g = discretize(ParametricCurve.preset("kite"), 32)
    # |x'(0)| = |(-0.65*2*sin0 - sin0, 1.5 cos0)| = 1.5
    assert abs(g.speed[0] - 1.5) < 1e-14


@pytest.mark.parametrize("name", PRESETS)
def test_normals_orthogonal_and_unit(name):
    g = discretize(ParametricCurve.preset(name), 64)
    assert np.max(np.abs(np.sum(g.normal * g.dx, axis=1))) < 1e-12
    assert np.max(np.abs(np.linalg.norm(g.normal, axis=1) - 1.0)) < 1e-12


@pytest.mark.parametrize("name", PRESETS)
def test_spectral_derivative_matches_analytic(name):
    g = discretize(ParametricCurve.preset(name), 64)
    dx = np.stack([spectral_derivative(g.x[:, 0]),
                   spectral_derivative(g.x[:, 1])], axis=-1)
    assert np.max(np.abs(dx - g.dx)) < 1e-10


def test_spectral_derivative_examples():
    t = np.pi * np.arange(16) / 8
    assert np.max(np.abs(spectral_derivative(np.cos(t)) + np.sin(t))) < 1e-12
    assert np.max(np.abs(spectral_derivative(np.ones(16)))) < 1e-14
    assert abs(spectral_derivative(np.sin(3 * t))[0] - 3.0) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=4, max_value=24),
       st.integers(min_value=0, max_value=3),
       st.floats(-2, 2), st.floats(-2, 2))
def test_spectral_derivative_exact_on_low_degree(n, mode, a, b):
    t = np.pi * np.arange(2 * n) / n
    m = min(mode, n - 1)
    v = a * np.cos(m * t) + b * np.sin(m * t)
    dv = -a * m * np.sin(m * t) + b * m * np.cos(m * t)
    assert np.max(np.abs(spectral_derivative(v) - dv)) < 1e-10


def test_starlike_radius_and_derivatives():
    s = StarlikeShape((0.5, -0.25), [1.0, 0.2, 0.0, -0.1, 0.05])
    theta = np.linspace(0, 2 * np.pi, 7)
    r, rp, rpp = s.radius_derivatives(theta)
    h = 1e-6
    rp_fd = (s.radius(theta + h) - s.radius(theta - h)) / (2 * h)
    assert np.max(np.abs(rp - rp_fd)) < 1e-8
    h = 1e-4
    rpp_fd = (s.radius(theta + h) - 2 * r + s.radius(theta - h)) / h**2
    assert np.max(np.abs(rpp - rpp_fd)) < 1e-6


def test_starlike_positivity_enforced():
    bad = StarlikeShape((0.0, 0.0), [0.3, 0.4, 0.0])  # dips to -0.1
    with pytest.raises(GeometryError):
        bad.validate()
    nearly = StarlikeShape((0.0, 0.0), [0.06, 0.02, 0.0])  # min 0.04 < floor
    with pytest.raises(GeometryError):
        nearly.validate()
    StarlikeShape((0.0, 0.0), [1.0, 0.3, 0.2]).validate()


def test_even_coefficient_count_rejected():
    with pytest.raises(ConfigurationError):
        StarlikeShape((0.0, 0.0), [1.0, 0.1])


def test_degenerate_curve_detected():
    # starlike "curve" collapsing to near-zero radius has tiny |x'|
    s = StarlikeShape((0.0, 0.0), [1e-12])
    with pytest.raises(GeometryError):
        discretize(ParametricCurve.starlike(s), 8)
    with pytest.raises(ConfigurationError):
        discretize(ParametricCurve.preset("apple"), 2)


def test_simplicity_check():
    for name in PRESETS:
        assert curve_is_simple(ParametricCurve.preset(name))


def test_containment_of_example_pairings():
    validate_pair(ParametricCurve.preset("rounded_triangle"),
                  ParametricCurve.preset("apple"))
    validate_pair(ParametricCurve.preset("rounded_square"),
                  ParametricCurve.preset("kite"))


def test_containment_violations():
    apple = ParametricCurve.preset("apple")
    kite = ParametricCurve.preset("kite")
    with pytest.raises(GeometryError):
        validate_pair(apple, kite)  # kite pokes far outside the apple
    # concentric circles too close for the margin
    with pytest.raises(GeometryError):
        validate_pair(ParametricCurve.preset("circle", radius=1.0),
                      ParametricCurve.preset("circle", radius=0.97))
    # inner node count inside outer polygon but polylines crossing: an
    # off-center circle cut by the interface
    s = StarlikeShape((0.9, 0.0), [0.5])
    with pytest.raises(GeometryError):
        validate_pair(ParametricCurve.preset("circle", radius=1.2),
                      ParametricCurve.starlike(s))


def test_curves_immutable():
    g = discretize(ParametricCurve.preset("apple"), 16)
    with pytest.raises(ValueError):
        g.x[0, 0] = 0.0
    s = StarlikeShape((0.0, 0.0), [1.0])
    with pytest.raises(ValueError):
        s.coeffs[0] = 2.0
