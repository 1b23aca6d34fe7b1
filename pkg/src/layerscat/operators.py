"""Discrete boundary integral operators between the two curves.

Assembles dense Nystrom matrices for the single layer S, double layer K,
its transpose KT, and the hypersingular T, at any wavenumber, plus the
far-field maps.  Same-curve blocks use the logarithmic-singularity rule
on the standard kernel splitting

    M(t, tau) = M1(t, tau) ln(4 sin^2((t - tau)/2)) + M2(t, tau)

with closed-form diagonal limits; the same-curve T additionally uses the
finite-part cotangent rule through the decomposition

    T = 1/|x'| [ (1/2) H + d/dt ( S_reg d/dtau ) ] + k^2 nu . S [nu .]

obtained from the Maue identity, where H is the cotangent operator and
S_reg is the parametric single-layer kernel with its constant
logarithmic part removed.  Cross-curve kernels are smooth and use the
trapezoid rule on a 4x-oversampled source grid (the density is carried
there by exact trigonometric interpolation): the two curves may pass
within a fraction of a wavelength of each other, and plain same-grid
trapezoid stalls near 1e-4 in that regime.  All entries absorb the
arc-length factor |x'(tau)| pi/n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SolverError
from .geometry import CONTAINMENT_MARGIN, DiscretizedBoundary, discretize
from .quadrature import hypersingular_weight_matrix, log_weight_matrix
from .specfun import EULER_GAMMA, bessel_j0j1y0y1

BLOCK_KINDS = ("S", "K", "KT", "T")
FARFIELD_KINDS = ("S_inf", "K_inf")
CROSS_OVERSAMPLE = 4


@lru_cache(maxsize=16)
def _interp_matrix(n: int, q: int):
    """Trigonometric interpolation matrix from 2n nodes to 2nq nodes.

    Exact on the nodal trig-interpolation space (Nyquist mode split
    evenly between +-n as a cosine).
    """
    m_coarse = 2 * n
    m_fine = m_coarse * q
    f = np.fft.fft(np.eye(m_coarse), axis=0)
    pad = np.zeros((m_fine, m_coarse), dtype=complex)
    pad[:n] = f[:n]
    pad[n] = 0.5 * f[n]
    pad[m_fine - n] = 0.5 * f[n]
    pad[m_fine - n + 1:] = f[n + 1:]
    mat = (np.fft.ifft(pad, axis=0) * q).real
    mat.setflags(write=False)
    return mat


@dataclass
class OperatorBlock:
    """One dense operator matrix mapping a source-grid density to
    target-grid values."""

    kind: str
    k: float
    matrix: np.ndarray
    target_id: int = -1
    source_id: int = -1


@dataclass
class FarFieldOperator:
    """Far-field map of a layer density on the interface.

    ``S_inf`` integrates exp(-i k0 xhat.y); ``K_inf`` integrates its
    normal derivative -i k0 (xhat.nu(y)) exp(-i k0 xhat.y).  Both carry
    the prefactor exp(i pi/4)/sqrt(8 pi k0).
    """

    kind: str
    k0: float
    matrix: np.ndarray


class _PairData:
    """Geometry and kernel evaluations shared by all blocks of one
    (target, source, k) combination."""

    def __init__(self, target: DiscretizedBoundary, source: DiscretizedBoundary,
                 k: float):
        self.target = target
        self.source = source
        self.k = k
        self.same = target is source
        if self.same:
            self.fine = source
            self.interp = None
        else:
            self.fine = discretize(source.curve, source.n * CROSS_OVERSAMPLE)
            self.interp = _interp_matrix(source.n, CROSS_OVERSAMPLE)
        diff = target.x[:, None, :] - self.fine.x[None, :, :]  # (2m, 2nq, 2)
        self.diff = diff
        r = np.sqrt(np.sum(diff * diff, axis=-1))
        if self.same:
            np.fill_diagonal(r, 1.0)  # placeholder; diagonals are analytic
        self.r = r
        j0, j1, y0, y1 = bessel_j0j1y0y1(k * r)
        self.j0, self.j1 = j0, j1
        self.h0 = j0 + 1j * y0
        self.h1 = j1 + 1j * y1
        if self.same:
            n2 = target.size
            tdiff = target.t[:, None] - target.t[None, :]
            log_4sin2 = np.log(4.0 * np.sin(0.5 * tdiff) ** 2 + np.eye(n2))
            np.fill_diagonal(log_4sin2, 0.0)
            self.log_4sin2 = log_4sin2
            self.off_diag = ~np.eye(n2, dtype=bool)


def _clear_diag(mat):
    np.fill_diagonal(mat, 0.0)
    return mat


def _single_layer_diag(grid: DiscretizedBoundary, k: float):
    """Diagonal of the smooth part of the arc-length single-layer kernel."""
    return (0.25j - EULER_GAMMA / (2.0 * np.pi)
            - np.log(0.5 * k * grid.speed) / (2.0 * np.pi)) * grid.speed


def _same_curve_matrices(pd: _PairData, kinds):
    g = pd.target
    n = g.n
    k = pd.k
    rmat = log_weight_matrix(n)
    trap = np.pi / n
    speed_row = g.speed[None, :]
    out = {}

    if "S" in kinds:
        m1 = _clear_diag(-(1.0 / (4.0 * np.pi)) * pd.j0 * speed_row.copy())
        np.fill_diagonal(m1, -(1.0 / (4.0 * np.pi)) * g.speed)
        m2 = np.where(pd.off_diag,
                      0.25j * pd.h0 * speed_row - m1 * pd.log_4sin2, 0.0)
        np.fill_diagonal(m2, _single_layer_diag(g, k))
        out["S"] = rmat * m1 + trap * m2

    if "K" in kinds or "KT" in kinds:
        kdiag = -g.curvature * g.speed / (4.0 * np.pi)
    if "K" in kinds:
        # q = <x(t) - x(tau), nu(tau)> |x'(tau)|
        q = np.sum(pd.diff * (g.normal * g.speed[:, None])[None, :, :], axis=-1)
        core = q / pd.r
        k1 = _clear_diag(-(k / (4.0 * np.pi)) * pd.j1 * core)
        k2 = np.where(pd.off_diag,
                      0.25j * k * pd.h1 * core - k1 * pd.log_4sin2, 0.0)
        np.fill_diagonal(k2, kdiag)
        out["K"] = rmat * k1 + trap * k2

    if "KT" in kinds:
        # q' = <x(tau) - x(t), nu(t)> |x'(tau)|
        qt = -np.sum(pd.diff * g.normal[:, None, :], axis=-1) * speed_row
        core = qt / pd.r
        k1 = _clear_diag(-(k / (4.0 * np.pi)) * pd.j1 * core)
        k2 = np.where(pd.off_diag,
                      0.25j * k * pd.h1 * core - k1 * pd.log_4sin2, 0.0)
        np.fill_diagonal(k2, kdiag)
        out["KT"] = rmat * k1 + trap * k2

    if "T" in kinds:
        # parametric single layer (no arc-length factor) minus its
        # constant-coefficient log part
        a_sharp = _clear_diag(-(1.0 / (4.0 * np.pi)) * (pd.j0 - 1.0))
        b = np.where(pd.off_diag,
                     0.25j * pd.h0
                     + (1.0 / (4.0 * np.pi)) * pd.j0 * pd.log_4sin2, 0.0)
        np.fill_diagonal(b, _single_layer_diag(g, k) / g.speed)
        p_sharp = rmat * a_sharp + trap * b

        dmat = _spectral_diff_matrix(n)
        tcot = hypersingular_weight_matrix(n)

        nu_dot = g.normal @ g.normal.T
        aq = -(k * k / (4.0 * np.pi)) * pd.j0 * nu_dot * speed_row
        np.fill_diagonal(aq, -(k * k / (4.0 * np.pi)) * g.speed)
        bq = np.where(pd.off_diag,
                      0.25j * k * k * pd.h0 * nu_dot * speed_row
                      - aq * pd.log_4sin2, 0.0)
        np.fill_diagonal(bq, k * k * _single_layer_diag(g, k))
        q_block = rmat * aq + trap * bq

        out["T"] = (0.5 * tcot + dmat @ p_sharp @ dmat) / g.speed[:, None] + q_block

    return out


def _spectral_diff_matrix(n: int):
    """Trigonometric differentiation matrix on the 2n-node grid.

    D[i, j] = (1/2) (-1)^(i-j) cot(pi (i-j) / (2n)), zero diagonal;
    identical to FFT differentiation with the Nyquist mode dropped.
    """
    m2 = 2 * n
    idx = np.arange(m2)
    d = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        mat = 0.5 * (-1.0) ** d / np.tan(np.pi * d / m2)
    np.fill_diagonal(mat, 0.0)
    return mat


def _cross_curve_matrices(pd: _PairData, kinds):
    gt, gf = pd.target, pd.fine
    k = pd.k
    trap = np.pi / gf.n
    speed_row = gf.speed[None, :]
    dmin = float(np.min(pd.r))
    if dmin < CONTAINMENT_MARGIN:
        warnings.warn(
            f"curves are {dmin:.3g} apart (< {CONTAINMENT_MARGIN}); "
            "cross-curve quadrature is poorly resolved",
            RuntimeWarning,
            stacklevel=3,
        )
    out = {}
    if "S" in kinds:
        out["S"] = (trap * 0.25j * pd.h0 * speed_row) @ pd.interp
    if "K" in kinds:
        q = np.sum(pd.diff * gf.normal[None, :, :], axis=-1)
        out["K"] = (trap * 0.25j * k * pd.h1 * q / pd.r * speed_row) @ pd.interp
    if "KT" in kinds:
        qt = -np.sum(pd.diff * gt.normal[:, None, :], axis=-1)
        out["KT"] = (trap * 0.25j * k * pd.h1 * qt / pd.r * speed_row) @ pd.interp
    if "T" in kinds:
        px = np.sum(pd.diff * gt.normal[:, None, :], axis=-1)
        py = np.sum(pd.diff * gf.normal[None, :, :], axis=-1)
        nu_dot = gt.normal @ gf.normal.T
        kern = (k * pd.h0 * px * py / pd.r**2
                - 2.0 * pd.h1 * px * py / pd.r**3
                + pd.h1 * nu_dot / pd.r)
        out["T"] = (trap * 0.25j * k * kern * speed_row) @ pd.interp
    return out


def assemble_blocks(target: DiscretizedBoundary, source: DiscretizedBoundary,
                    k: float, kinds=BLOCK_KINDS, target_id=-1, source_id=-1):
    """Assemble several operator kinds for one (target, source, k) pair,
    sharing kernel evaluations.  Returns {kind: OperatorBlock}."""
    pd = _PairData(target, source, k)
    if pd.same:
        mats = _same_curve_matrices(pd, kinds)
    else:
        mats = _cross_curve_matrices(pd, kinds)
    blocks = {}
    for kind, mat in mats.items():
        if not np.all(np.isfinite(mat)):
            raise SolverError(f"non-finite entries in {kind} block at k={k}")
        blocks[kind] = OperatorBlock(kind=kind, k=k, matrix=mat,
                                     target_id=target_id, source_id=source_id)
    return blocks


def assemble_block(target: DiscretizedBoundary, source: DiscretizedBoundary,
                   k: float, kind: str, target_id=-1, source_id=-1) -> OperatorBlock:
    """Assemble a single S/K/KT/T block (see module docstring)."""
    if kind not in BLOCK_KINDS:
        raise SolverError(f"unknown operator kind {kind!r}")
    return assemble_blocks(target, source, k, (kind,), target_id, source_id)[kind]


def assemble_farfield(source: DiscretizedBoundary, k0: float, directions,
                      kind: str) -> FarFieldOperator:
    """Far-field operator rows for the given observation directions.

    ``directions``: (n_obs, 2) unit vectors.
    """
    if kind not in FARFIELD_KINDS:
        raise SolverError(f"unknown far-field kind {kind!r}")
    dirs = np.asarray(directions, dtype=float)
    if np.max(np.abs(np.linalg.norm(dirs, axis=-1) - 1.0)) > 1e-12:
        raise SolverError("observation directions must be unit vectors")
    pref = np.exp(0.25j * np.pi) / np.sqrt(8.0 * np.pi * k0)
    phase = np.exp(-1j * k0 * dirs @ source.x.T)  # (n_obs, 2n)
    trap = np.pi / source.n
    if kind == "S_inf":
        mat = pref * trap * phase * source.speed[None, :]
    else:
        xn = dirs @ source.normal.T  # (n_obs, 2n)
        mat = pref * trap * (-1j * k0) * xn * phase * source.speed[None, :]
    if not np.all(np.isfinite(mat)):
        raise SolverError(f"non-finite entries in {kind} operator")
    return FarFieldOperator(kind=kind, k0=k0, matrix=mat)


def evaluate_potential(source: DiscretizedBoundary, k: float, points,
                       density, layer: str):
    """Single- or double-layer potential at off-boundary points
    (plain trapezoid; accurate only away from the source curve)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    diff = pts[:, None, :] - source.x[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    j0, j1, y0, y1 = bessel_j0j1y0y1(k * r)
    trap = np.pi / source.n
    if layer == "single":
        kern = 0.25j * (j0 + 1j * y0)
    elif layer == "double":
        q = np.sum(diff * source.normal[None, :, :], axis=-1)
        kern = 0.25j * k * (j1 + 1j * y1) * q / r
    else:
        raise SolverError(f"unknown layer {layer!r}")
    return (kern * source.speed[None, :]) @ np.asarray(density) * trap
