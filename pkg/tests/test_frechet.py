"""Derivative boundary data and the far-field Jacobian against the
finite-difference oracle."""

import numpy as np
import pytest

from layerscat.errors import DomainError
from layerscat.forward import MediumParams, observation_directions
from layerscat.frechet import (PerturbationDirection, canonical_directions,
                               derivative_boundary_data, derivative_far_field,
                               radial_normal_component, surface_divergence)
from layerscat.geometry import ParametricCurve, StarlikeShape, discretize
from layerscat.inverse import ShapeState, SolverConfig, _forward_all, finite_difference_check


def test_surface_divergence_on_circles():
    g1 = discretize(ParametricCurve.preset("circle", radius=1.0), 16)
    g2 = discretize(ParametricCurve.preset("circle", radius=2.0), 16)
    assert np.max(np.abs(surface_divergence(np.ones(32), g1))) < 1e-14
    got = surface_divergence(np.cos(g1.t), g1)
    assert np.max(np.abs(got + np.sin(g1.t))) < 1e-12
    got2 = surface_divergence(np.cos(g2.t), g2)
    assert np.max(np.abs(got2 + np.sin(g2.t) / 2.0)) < 1e-12


def test_radial_normal_component_on_circle():
    # on a circle centered at the shape center, e_r = nu exactly
    g = discretize(ParametricCurve.preset("circle", radius=1.7), 16)
    for idx, modes in ((0, 3), (2, 3), (5, 3)):
        got = radial_normal_component(g, (0.0, 0.0), idx, modes)
        if idx == 0:
            expected = np.ones_like(g.t)
        elif idx <= modes:
            expected = np.cos(idx * g.t)
        else:
            expected = np.sin((idx - modes) * g.t)
        assert np.max(np.abs(got - expected)) < 1e-12


def test_center_shift_normal_component():
    g = discretize(ParametricCurve.preset("apple"), 32)
    dirs = canonical_directions(g, g, (0.1, 0.2), 2, "lambda")
    a1 = [d for d in dirs if d.label == "a1"][0]
    assert np.array_equal(a1.h1_nu, g.normal[:, 0])


def _base_setup():
    state = ShapeState(
        gamma0=StarlikeShape((0.0, 0.0), [2.4, 0.15, 0.0, 0.0, 0.0, -0.1, 0.0]),
        gamma1=StarlikeShape((0.1, -0.05), [0.5, 0.0, 0.05, 0.0, 0.04, 0.0, 0.0]),
        lambda1=10.0, tau1=0.1)
    config = SolverConfig(modes=3, num_incident=1, n_obs=16, n_solve=24,
                          frequencies=(2.0,))
    incident = observation_directions(1)
    obs = observation_directions(16)
    system, g0, g1, ffs, traces = _forward_all(state, 2.0, config, incident, obs)
    return state, config, system, g0, g1, ffs, traces, obs


def test_zero_direction_gives_zero_far_field():
    _, _, system, g0, g1, _, traces, obs = _base_setup()
    null = PerturbationDirection(label="null")
    cols = derivative_far_field(system, traces[0], [null], obs)
    assert np.max(np.abs(cols)) == 0.0


def test_pure_lambda_direction_populates_only_f4():
    state, _, system, g0, g1, _, traces, obs = _base_setup()
    d = PerturbationDirection(label="lambda1", delta_lambda1=1.0)
    data = derivative_boundary_data(traces[0], d, system.params, g0, g1)
    assert np.max(np.abs(data.f1)) == 0.0
    assert np.max(np.abs(data.f2)) == 0.0
    assert np.max(np.abs(data.f3)) == 0.0
    # (dlambda/lambda) du+/dnu = dlambda du-/dnu via the transmission
    # condition
    assert np.allclose(data.f4, traces[0].dn_u1_minus, rtol=0, atol=1e-14)


def test_derivative_data_linear_in_direction():
    state, _, system, g0, g1, _, traces, obs = _base_setup()
    h = radial_normal_component(g0, (0.0, 0.0), 1, 3)
    d1 = PerturbationDirection(label="x", h0_nu=h, delta_lambda1=0.5)
    d2 = PerturbationDirection(label="2x", h0_nu=2.0 * h, delta_lambda1=1.0)
    b1 = derivative_boundary_data(traces[0], d1, system.params, g0, g1)
    b2 = derivative_boundary_data(traces[0], d2, system.params, g0, g1)
    for f1, f2 in ((b1.f1, b2.f1), (b1.f2, b2.f2), (b1.f4, b2.f4)):
        assert np.allclose(2.0 * f1, f2, rtol=1e-13, atol=1e-13)
    # column scaling through the solve
    cols = derivative_far_field(system, traces[0], [d1, d2], obs)
    assert np.max(np.abs(2.0 * cols[:, 0] - cols[:, 1])) \
        < 1e-12 * np.max(np.abs(cols[:, 1]))


def test_division_guard():
    state, _, system, g0, g1, _, traces, obs = _base_setup()
    bad = MediumParams(k0=2.0, k1=1.6, k2=1.6, lambda0=1.2, lambda1=0.0,
                       tau1=0.0)
    with pytest.raises(DomainError):
        derivative_boundary_data(
            traces[0], PerturbationDirection(label="lambda1",
                                             delta_lambda1=1.0),
            bad, g0, g1)
    with pytest.raises(DomainError):
        derivative_boundary_data(
            traces[0], PerturbationDirection(label="tau1", delta_tau1=1.0),
            bad, g0, g1)


def test_chain_rule_between_forms():
    state, config, system, g0, g1, ffs, traces, obs = _base_setup()
    lam_dir = PerturbationDirection(label="lambda1", delta_lambda1=1.0)
    tau_dir = PerturbationDirection(label="tau1", delta_tau1=1.0)
    cols = derivative_far_field(system, traces[0], [lam_dir, tau_dir], obs)
    lam = system.params.lambda1
    err = np.max(np.abs(cols[:, 1] + lam**2 * cols[:, 0]))
    assert err < 1e-8 * np.max(np.abs(cols[:, 1]))


def test_jacobian_against_finite_differences_coarse():
    state, config, *_ = _base_setup()
    errors = finite_difference_check(state, config, k0=2.0, step=1e-3)
    assert max(errors.values()) < 1e-2
    # a tau-form state exercises the other constant slot
    state_t = ShapeState(gamma0=state.gamma0, gamma1=state.gamma1,
                         lambda1=10.0, tau1=0.1, active_form="tau")
    errors_t = finite_difference_check(state_t, config, k0=2.0, step=1e-3)
    assert max(errors_t.values()) < 1e-2
