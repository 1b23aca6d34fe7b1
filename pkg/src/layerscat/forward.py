"""Forward solver for the two-layer transmission scattering problem.

The scattered/total field is represented by combined single- and
double-layer potentials on both boundaries with densities
psi = (psi1, psi2, psi3, psi4); the jump relations turn the transmission
conditions into a 4x4 block system (I + A) psi = R that is assembled
densely, LU-factored once per geometry, and reused for every right-hand
side (incident directions and derivative problems alike).

The far field of the exterior representation is

    u_inf = lambda0 (K_inf psi1) + (S_inf psi2),

i.e. the double-layer density pairs with the far-field kernel containing
the normal derivative.  A separation-of-variables solution on concentric
circles provides an independent cross-check of the whole chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy import special as ssp

from .errors import ConfigurationError, SolverError
from .geometry import DiscretizedBoundary, ParametricCurve, discretize, spectral_derivative
from .operators import assemble_blocks, assemble_farfield

LAMBDA_POLE_GUARD = 1e-6
EQUILIBRATE_THRESHOLD = 1e3
RESIDUAL_RTOL = 1e-10


@dataclass
class MediumParams:
    """Wavenumbers and transmission constants of the three-region medium.

    ``k1 = k0 sqrt(n1)``; ``k2`` is a free modeling parameter (equal to
    k1 by default).  ``tau1 = 1/lambda1`` is kept alongside lambda1; the
    tau form of the problem is solved through the identical lambda-form
    system, so ``active_form`` only selects which unknown the inverse
    iteration updates.
    """

    k0: float
    k1: float
    k2: float
    lambda0: float
    lambda1: float
    tau1: float
    active_form: str = "lambda"

    def __post_init__(self):
        if min(self.k0, self.k1, self.k2) <= 0.0:
            raise ConfigurationError("wavenumbers must be positive")
        if self.lambda0 <= 0.0:
            raise ConfigurationError("lambda0 must be positive")
        if abs(1.0 + self.lambda0) < LAMBDA_POLE_GUARD:
            raise ConfigurationError("lambda0 too close to -1 (mu0 pole)")
        if abs(1.0 + self.lambda1) < LAMBDA_POLE_GUARD:
            raise ConfigurationError("lambda1 too close to -1 (mu1 pole)")
        if self.active_form not in ("lambda", "tau"):
            raise ConfigurationError(f"unknown form {self.active_form!r}")

    @classmethod
    def create(cls, k0, n1, lambda0, lambda1=None, tau1=None, k2="k1",
               active_form=None):
        """Build params from the configuration quantities.

        Exactly one of ``lambda1``/``tau1`` must be given; the other is
        derived.  ``k2`` is the string ``"k1"`` or an explicit positive
        wavenumber.
        """
        if (lambda1 is None) == (tau1 is None):
            raise ConfigurationError("specify exactly one of lambda1, tau1")
        if lambda1 is None:
            if tau1 == 0.0:
                raise ConfigurationError("tau1 must be nonzero")
            lambda1 = 1.0 / tau1
            form = "tau"
        else:
            if lambda1 == 0.0:
                raise ConfigurationError("lambda1 must be nonzero")
            tau1 = 1.0 / lambda1
            form = "lambda"
        if active_form is not None:
            form = active_form
        k1 = k0 * np.sqrt(n1)
        if isinstance(k2, str):
            if k2 != "k1":
                raise ConfigurationError(f"unknown k2 rule {k2!r}")
            k2_val = k1
        else:
            k2_val = float(k2)
        return cls(k0=float(k0), k1=float(k1), k2=float(k2_val),
                   lambda0=float(lambda0), lambda1=float(lambda1),
                   tau1=float(tau1), active_form=form)

    @property
    def mu0(self) -> float:
        return 2.0 / (1.0 + self.lambda0)

    @property
    def mu1(self) -> float:
        return 2.0 / (1.0 + self.lambda1)


@dataclass
class BoundaryData:
    """Transmission-jump data (f1, f2 on the interface; f3, f4 on the
    buried boundary)."""

    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray

    def stacked(self, mu0, mu1):
        return np.concatenate([mu0 * self.f1, -mu0 * self.f2,
                               mu1 * self.f3, -mu1 * self.f4])


@dataclass
class DensityVector:
    """Layer densities at the quadrature nodes: psi1/psi2 on the
    interface, psi3/psi4 on the buried boundary."""

    psi1: np.ndarray
    psi2: np.ndarray
    psi3: np.ndarray
    psi4: np.ndarray

    @classmethod
    def from_stacked(cls, vec, n0_size, n1_size):
        return cls(psi1=vec[:n0_size],
                   psi2=vec[n0_size:2 * n0_size],
                   psi3=vec[2 * n0_size:2 * n0_size + n1_size],
                   psi4=vec[2 * n0_size + n1_size:])


@dataclass
class BoundaryTraces:
    """Interior and exterior traces of the total field on both curves,
    with tangential derivatives for the shape-derivative data."""

    u0: np.ndarray          # Dirichlet trace on the interface (u+ = u-)
    dn_u0_minus: np.ndarray
    dn_u0_plus: np.ndarray
    duds0: np.ndarray
    u1: np.ndarray          # Dirichlet trace on the buried boundary
    dn_u1_minus: np.ndarray
    dn_u1_plus: np.ndarray
    duds1: np.ndarray


class TransmissionSystem:
    """Assembled and factored discrete system for one geometry/medium."""

    def __init__(self, grid0: DiscretizedBoundary, grid1: DiscretizedBoundary,
                 params: MediumParams):
        self.grid0 = grid0
        self.grid1 = grid1
        self.params = params
        self._ff_cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
        self._assemble()
        self._factor()

    def _assemble(self):
        p = self.params
        g0, g1 = self.grid0, self.grid1
        b0_k0 = assemble_blocks(g0, g0, p.k0, target_id=0, source_id=0)
        b0_k1 = assemble_blocks(g0, g0, p.k1, target_id=0, source_id=0)
        b1_k1 = assemble_blocks(g1, g1, p.k1, target_id=1, source_id=1)
        if p.k2 == p.k1:
            b1_k2 = b1_k1
        else:
            b1_k2 = assemble_blocks(g1, g1, p.k2, target_id=1, source_id=1)
        c01 = assemble_blocks(g0, g1, p.k1, target_id=0, source_id=1)
        c10 = assemble_blocks(g1, g0, p.k1, target_id=1, source_id=0)
        self.blocks = {
            "0k0": b0_k0, "0k1": b0_k1, "1k1": b1_k1, "1k2": b1_k2,
            "01": c01, "10": c10,
        }

        def m(group, kind):
            return self.blocks[group][kind].matrix

        mu0, mu1, la0, la1 = p.mu0, p.mu1, p.lambda0, p.lambda1
        row1 = [mu0 * (la0 * m("0k0", "K") - m("0k1", "K")),
                mu0 * (m("0k0", "S") - m("0k1", "S")),
                -mu0 * la1 * m("01", "K"),
                -mu0 * m("01", "S")]
        row2 = [-mu0 * la0 * (m("0k0", "T") - m("0k1", "T")),
                -mu0 * (m("0k0", "KT") - la0 * m("0k1", "KT")),
                mu0 * la0 * la1 * m("01", "T"),
                mu0 * la0 * m("01", "KT")]
        row3 = [mu1 * m("10", "K"),
                mu1 * m("10", "S"),
                mu1 * (la1 * m("1k1", "K") - m("1k2", "K")),
                mu1 * (m("1k1", "S") - m("1k2", "S"))]
        row4 = [-mu1 * m("10", "T"),
                -mu1 * m("10", "KT"),
                -mu1 * la1 * (m("1k1", "T") - m("1k2", "T")),
                -mu1 * (m("1k1", "KT") - la1 * m("1k2", "KT"))]
        a = np.block([row1, row2, row3, row4])
        self.matrix = a + np.eye(a.shape[0])

    def _factor(self):
        m = self.matrix
        n = m.shape[0]
        if abs(self.params.lambda1) > EQUILIBRATE_THRESHOLD:
            col = np.max(np.abs(m), axis=0)
            col[col == 0.0] = 1.0
            scaled = m / col[None, :]
            row = np.max(np.abs(scaled), axis=1)
            row[row == 0.0] = 1.0
            scaled = scaled / row[:, None]
            self._col_scale = col
            self._row_scale = row
            work = scaled
        else:
            self._col_scale = np.ones(n)
            self._row_scale = np.ones(n)
            work = m
        try:
            self._lu = sla.lu_factor(work)
        except sla.LinAlgError as exc:  # pragma: no cover - defensive
            raise SolverError(f"transmission system singular: {exc}") from exc

    def _raw_solve(self, rhs):
        y = sla.lu_solve(self._lu, rhs / self._row_scale[:, None]
                         if rhs.ndim == 2 else rhs / self._row_scale)
        if rhs.ndim == 2:
            return y / self._col_scale[:, None]
        return y / self._col_scale

    def solve_stacked(self, rhs):
        """Solve (I+A) x = rhs with iterative refinement; rhs may hold
        several right-hand sides as columns."""
        rhs = np.asarray(rhs, dtype=complex)
        single = rhs.ndim == 1
        b = rhs[:, None] if single else rhs
        x = self._raw_solve(b)
        scale = np.max(np.abs(b), axis=0)
        scale[scale == 0.0] = 1.0
        for _ in range(3):
            res = b - self.matrix @ x
            if np.all(np.max(np.abs(res), axis=0) <= RESIDUAL_RTOL * scale):
                break
            x = x + self._raw_solve(res)
        res = b - self.matrix @ x
        bad = np.max(np.abs(res), axis=0) > RESIDUAL_RTOL * scale
        if np.any(bad):
            cond = np.linalg.cond(self.matrix, 1)
            raise SolverError(
                f"discrete residual {np.max(np.abs(res)):.3e} exceeds "
                f"{RESIDUAL_RTOL:g} * ||R||; condition estimate {cond:.3e}"
            )
        return x[:, 0] if single else x

    def solve(self, data: BoundaryData) -> DensityVector:
        """Solve the block system for one set of boundary data."""
        rhs = data.stacked(self.params.mu0, self.params.mu1)
        x = self.solve_stacked(rhs)
        return DensityVector.from_stacked(x, self.grid0.size, self.grid1.size)

    # -- far field ---------------------------------------------------------
    def farfield_maps(self, directions):
        key = np.asarray(directions, dtype=float).tobytes()
        if key not in self._ff_cache:
            sinf = assemble_farfield(self.grid0, self.params.k0, directions, "S_inf")
            kinf = assemble_farfield(self.grid0, self.params.k0, directions, "K_inf")
            self._ff_cache[key] = (sinf.matrix, kinf.matrix)
        return self._ff_cache[key]

    def far_field(self, densities: DensityVector, directions):
        """u_inf on the observation directions (n_obs, 2)."""
        s_mat, k_mat = self.farfield_maps(directions)
        return self.params.lambda0 * (k_mat @ densities.psi1) + s_mat @ densities.psi2

    # -- boundary traces ---------------------------------------------------
    def boundary_traces(self, densities: DensityVector) -> BoundaryTraces:
        """Traces of the total field for a plane-wave (homogeneous f3, f4)
        solve, via interior representations and exact jump constants."""
        p = self.params
        b = self.blocks

        def m(group, kind):
            return b[group][kind].matrix

        ps1, ps2, ps3, ps4 = (densities.psi1, densities.psi2,
                              densities.psi3, densities.psi4)
        u0 = (m("0k1", "K") @ ps1 - 0.5 * ps1 + m("0k1", "S") @ ps2
              + p.lambda1 * (m("01", "K") @ ps3) + m("01", "S") @ ps4)
        dn0 = (m("0k1", "T") @ ps1 + m("0k1", "KT") @ ps2 + 0.5 * ps2
               + p.lambda1 * (m("01", "T") @ ps3) + m("01", "KT") @ ps4)
        u1 = m("1k2", "K") @ ps3 - 0.5 * ps3 + m("1k2", "S") @ ps4
        dn1 = m("1k2", "T") @ ps3 + m("1k2", "KT") @ ps4 + 0.5 * ps4
        return BoundaryTraces(
            u0=u0, dn_u0_minus=dn0, dn_u0_plus=p.lambda0 * dn0,
            duds0=spectral_derivative(u0) / self.grid0.speed,
            u1=u1, dn_u1_minus=dn1, dn_u1_plus=p.lambda1 * dn1,
            duds1=spectral_derivative(u1) / self.grid1.speed,
        )


def assemble_system(grid0: DiscretizedBoundary, grid1: DiscretizedBoundary,
                    params: MediumParams) -> TransmissionSystem:
    """Assemble and LU-factor the 4-block transmission system."""
    return TransmissionSystem(grid0, grid1, params)


def solve_transmission(system: TransmissionSystem, data: BoundaryData) -> DensityVector:
    """Solve the factored system for the given boundary data."""
    return system.solve(data)


def plane_wave_data(grid0: DiscretizedBoundary, grid1: DiscretizedBoundary,
                    k0: float, d) -> BoundaryData:
    """Boundary data (-u^i, -du^i/dnu, 0, 0) of the incident plane wave."""
    d = np.asarray(d, dtype=float)
    ui = np.exp(1j * k0 * (grid0.x @ d))
    dn_ui = 1j * k0 * (grid0.normal @ d) * ui
    return BoundaryData(f1=-ui, f2=-dn_ui,
                        f3=np.zeros(grid1.size, dtype=complex),
                        f4=np.zeros(grid1.size, dtype=complex))


def observation_directions(n_obs: int):
    """Unit observation directions at angles 2 pi (i-1)/n_obs."""
    ang = 2.0 * np.pi * np.arange(n_obs) / n_obs
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def incident_directions(p: int):
    """Unit incident directions at angles 2 pi (i-1)/P."""
    return observation_directions(p)


def solve_plane_wave(curve0: ParametricCurve, curve1: ParametricCurve,
                     params: MediumParams, d, n: int, obs_directions):
    """Full forward solve for one incident direction.

    Returns (far-field samples, boundary traces, densities, system); the
    system can be reused for further right-hand sides on the same
    geometry.
    """
    grid0 = discretize(curve0, n)
    grid1 = discretize(curve1, n)
    system = assemble_system(grid0, grid1, params)
    dens = system.solve(plane_wave_data(grid0, grid1, params.k0, d))
    ff = system.far_field(dens, obs_directions)
    traces = system.boundary_traces(dens)
    return ff, traces, dens, system


def oracle_concentric_circles(radius0: float, radius1: float,
                              params: MediumParams, d, obs_directions,
                              modes: int = 40):
    """Separation-of-variables far field for origin-centered circles.

    Independent of the integral-equation path: per Fourier mode a 4x4
    system enforces the two transmission conditions; the scattered field
    is summed over ``modes`` modes each side.

    Returns far-field samples on the observation directions.
    """
    if radius1 >= radius0:
        raise ConfigurationError("buried circle must be strictly inside")
    p = params
    d = np.asarray(d, dtype=float)
    theta_d = np.arctan2(d[1], d[0])
    obs = np.asarray(obs_directions, dtype=float)
    theta_obs = np.arctan2(obs[:, 1], obs[:, 0])

    u_inf = np.zeros(len(obs), dtype=complex)
    pref = np.sqrt(2.0 / (np.pi * p.k0)) * np.exp(-0.25j * np.pi)
    for m in range(-modes, modes + 1):
        alpha = (1j) ** m * np.exp(-1j * m * theta_d)
        z00, z10 = p.k0 * radius0, p.k1 * radius0
        z11, z21 = p.k1 * radius1, p.k2 * radius1
        mat = np.array([
            [ssp.hankel1(m, z00), -ssp.jv(m, z10), -ssp.yv(m, z10), 0.0],
            [p.k0 * ssp.h1vp(m, z00), -p.lambda0 * p.k1 * ssp.jvp(m, z10),
             -p.lambda0 * p.k1 * ssp.yvp(m, z10), 0.0],
            [0.0, ssp.jv(m, z11), ssp.yv(m, z11), -ssp.jv(m, z21)],
            [0.0, p.k1 * ssp.jvp(m, z11), p.k1 * ssp.yvp(m, z11),
             -p.lambda1 * p.k2 * ssp.jvp(m, z21)],
        ], dtype=complex)
        rhs = np.array([-alpha * ssp.jv(m, z00),
                        -alpha * p.k0 * ssp.jvp(m, z00), 0.0, 0.0],
                       dtype=complex)
        try:
            coef = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"oracle mode system singular at m={m}") from exc
        a_m = coef[0]
        u_inf += a_m * (-1j) ** m * np.exp(1j * m * theta_obs)
    return pref * u_inf
