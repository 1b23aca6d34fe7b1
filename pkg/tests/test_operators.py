"""Operator blocks against circle eigenvalue oracles, brute-force
references, and the jump relations."""

import numpy as np
import pytest
from scipy import special as ssp

from layerscat.geometry import ParametricCurve, discretize
from layerscat.operators import (assemble_block, assemble_blocks,
                                 assemble_farfield, evaluate_potential)

from _oracles import circle_double_layer_offset, circle_eigenvalues


@pytest.mark.parametrize("radius,k,n", [(1.0, 2.0, 32), (2.4, 2.0, 32),
                                         (1.0, 1.6, 64), (0.5, 3.2, 32)])
def test_same_curve_blocks_match_circle_eigenvalues(radius, k, n):
    g = discretize(ParametricCurve.preset("circle", radius=radius), n)
    blocks = assemble_blocks(g, g, k)
    for m in range(0, 13):
        vec = np.exp(1j * m * g.t)
        s_eig, k_eig, t_eig = circle_eigenvalues(radius, k, m)
        for kind, eig in (("S", s_eig), ("K", k_eig), ("KT", k_eig),
                          ("T", t_eig)):
            err = np.max(np.abs(blocks[kind].matrix @ vec - eig * vec))
            assert err < 1e-11, (kind, m, err)


def test_single_layer_constant_density_identity():
    # S[1] on the unit circle = (i pi / 2) J0(k) H0(k) at every node
    k = 2.0
    g = discretize(ParametricCurve.preset("circle", radius=1.0), 32)
    val = assemble_block(g, g, k, "S").matrix @ np.ones(g.size)
    expected = 0.5j * np.pi * ssp.jv(0, k) * ssp.hankel1(0, k)
    assert np.max(np.abs(val - expected)) < 1e-12


def test_double_layer_laplace_limit():
    # K[1] -> -1/2 as k -> 0 (Gauss identity), extrapolated in k^2
    g = discretize(ParametricCurve.preset("apple"), 64)
    ones = np.ones(g.size)
    vals = {}
    for k in (2e-3, 1e-3):
        vals[k] = assemble_block(g, g, k, "K").matrix @ ones
    assert np.max(np.abs(vals[1e-3] + 0.5)) < 1e-4
    # Richardson in k^2 sharpens the limit by two orders
    extrap = (4 * vals[1e-3] - vals[2e-3]) / 3.0
    assert np.max(np.abs(extrap + 0.5)) < 1e-6


def test_cross_block_against_brute_force():
    # well-separated circles; reference = trapezoid on a very fine grid
    k = 2.0
    g_t = discretize(ParametricCurve.preset("circle", radius=2.4), 24)
    g_s = discretize(ParametricCurve.preset("circle", radius=0.5), 16)
    block = assemble_block(g_t, g_s, k, "S").matrix
    dens = np.exp(np.cos(g_s.t))
    g_fine = discretize(ParametricCurve.preset("circle", radius=0.5), 2048)
    diff = g_t.x[:, None, :] - g_fine.x[None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    ref_kernel = 0.25j * ssp.hankel1(0, k * r) * g_fine.speed[None, :]
    ref = (np.pi / 2048) * ref_kernel @ np.exp(np.cos(g_fine.t))
    assert np.max(np.abs(block @ dens - ref)) < 1e-12


def test_block_shapes_and_finiteness():
    g0 = discretize(ParametricCurve.preset("rounded_triangle"), 16)
    g1 = discretize(ParametricCurve.preset("apple"), 12)
    b = assemble_block(g0, g1, 2.0, "K", target_id=0, source_id=1)
    assert b.matrix.shape == (32, 24)
    assert b.target_id == 0 and b.source_id == 1
    assert np.all(np.isfinite(b.matrix.view(float)))


def test_close_curves_warn():
    g0 = discretize(ParametricCurve.preset("circle", radius=1.0), 16)
    g1 = discretize(ParametricCurve.preset("circle", radius=0.97), 16)
    with pytest.warns(RuntimeWarning):
        assemble_block(g0, g1, 1.0, "S")


@pytest.mark.parametrize("name,k,tol", [
    ("rounded_triangle", 2.0, 1e-11),
    ("rounded_triangle", 8.0, 1e-11),
    ("kite", 8.0, 1e-9),
    ("rounded_square", 8.0, 1e-8),
    ("apple", 6.4, 1e-7),
])
def test_same_curve_spectral_self_convergence(name, k, tol):
    # doubling the grid changes nothing above the density-resolution
    # floor of each shape (the apple's analyticity strip is narrowest)
    curve = ParametricCurve.preset(name)
    vals = {}
    for n in (64, 128):
        g = discretize(curve, n)
        dens = np.exp(np.cos(g.t)) + 1j * np.sin(2 * g.t)
        blocks = assemble_blocks(g, g, k)
        vals[n] = {kind: blocks[kind].matrix @ dens for kind in blocks}
    for kind in vals[64]:
        err = np.max(np.abs(vals[128][kind][::2] - vals[64][kind]))
        assert err < tol, (kind, err)


def test_farfield_operator_constant_density():
    k0 = 2.0
    g = discretize(ParametricCurve.preset("circle", radius=1.0), 32)
    dirs = np.stack([np.cos([0.0, 1.3]), np.sin([0.0, 1.3])], axis=-1)
    pref = np.exp(0.25j * np.pi) / np.sqrt(8 * np.pi * k0)
    ones = np.ones(g.size)
    s_inf = assemble_farfield(g, k0, dirs, "S_inf")
    assert s_inf.k0 == k0
    assert np.max(np.abs(s_inf.matrix @ ones
                         - pref * 2 * np.pi * ssp.jv(0, k0))) < 1e-13
    k_inf = assemble_farfield(g, k0, dirs, "K_inf")
    # Jacobi-Anger: integral of -i k (xhat.nu) e^{-ik xhat.y} over the
    # unit circle equals -2 pi k J1(k)
    assert np.max(np.abs(k_inf.matrix @ ones
                         - pref * (-2 * np.pi) * k0 * ssp.jv(1, k0))) < 1e-13
    assert np.max(np.abs(s_inf.matrix @ np.zeros(g.size))) == 0.0


def test_farfield_prefactor_row():
    # one row must be exactly the prefactor times the phase samples
    k0 = 1.7
    g = discretize(ParametricCurve.preset("circle", radius=1.0), 8)
    d = np.array([[1.0, 0.0]])
    s_inf = assemble_farfield(g, k0, d, "S_inf")
    pref = np.exp(0.25j * np.pi) / np.sqrt(8 * np.pi * k0)
    manual = pref * (np.pi / 8) * np.exp(-1j * k0 * g.x[:, 0]) * g.speed
    assert np.max(np.abs(s_inf.matrix[0] - manual)) < 1e-15


def test_double_layer_jump_relation():
    # D(x + h nu) - D(x - h nu) = phi + 2 h (T phi) + O(h^2); after
    # removing the known 2hT term, Richardson over h in
    # {0.8, 0.4, 0.2, 0.1} eliminates h^2..h^4 and recovers the jump phi
    k = 2.0
    radius = 1.0
    g = discretize(ParametricCurve.preset("circle", radius=radius), 64)
    m = 1
    phi = np.exp(1j * m * g.t)
    x0 = g.x[5]
    nu0 = g.normal[5]
    t_eig = circle_eigenvalues(radius, k, m)[2]

    def jump(h):
        up = evaluate_potential(g, k, x0 + h * nu0, phi, "double")[0]
        dn = evaluate_potential(g, k, x0 - h * nu0, phi, "double")[0]
        return up - dn - 2 * h * t_eig * phi[5]

    hs = np.array([0.8, 0.4, 0.2, 0.1])
    vals = np.array([jump(h) for h in hs])
    vander = np.stack([np.ones(4), hs**2, hs**3, hs**4], axis=1)
    extrap = np.linalg.solve(vander, vals)[0]
    assert abs(extrap - phi[5]) < 1e-4
    # cross-check the off-boundary values themselves against the
    # addition-theorem closed form
    val = evaluate_potential(g, k, x0 + 0.4 * nu0, phi, "double")[0]
    ref = circle_double_layer_offset(radius, k, m, 1.4) * np.exp(1j * m * g.t[5])
    assert abs(val - ref) < 1e-8
