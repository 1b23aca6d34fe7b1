"""Closed analytic boundary curves and their spectral discretization.

Two curve families:

* starlike trig-polynomial shapes ``center + r(theta)(cos theta, sin theta)``
  with ``r`` a degree-M trigonometric polynomial -- the reconstruction
  space of the inverse solver;
* named preset shapes used as synthetic-data truth geometry (circle,
  apple, kite, rounded_square, rounded_triangle).

All evaluation is vectorized over the parameter; derivatives are closed
form, never finite differences.  Geometry values are immutable after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GeometryError

RADIUS_FLOOR = 0.05
CONTAINMENT_MARGIN = 0.05
SPEED_FLOOR = 1e-10
VALIDATION_GRID = 512

PRESET_NAMES = ("circle", "apple", "kite", "rounded_square", "rounded_triangle")


def _readonly(a):
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass
class StarlikeShape:
    """Starlike boundary: center + r(theta) (cos theta, sin theta).

    ``coeffs`` holds 2M+1 reals laid out as (a_0, a_1..a_M cosine,
    a_{M+1}..a_{2M} sine) so that

        r(theta) = a_0 + sum_l [a_l cos(l theta) + a_{l+M} sin(l theta)].
    """

    center: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.center = _readonly(np.asarray(self.center, dtype=float).reshape(2))
        coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if coeffs.size % 2 != 1:
            raise ConfigurationError(
                f"starlike coefficient count must be odd (2M+1), got {coeffs.size}"
            )
        self.coeffs = _readonly(coeffs)

    @property
    def modes(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def circle(cls, radius, center=(0.0, 0.0), modes=0):
        coeffs = np.zeros(2 * modes + 1)
        coeffs[0] = radius
        return cls(np.asarray(center, dtype=float), coeffs)

    def radius(self, theta):
        r, _, _ = self.radius_derivatives(theta)
        return r

    def radius_derivatives(self, theta):
        """Return (r, r', r'') at the given angles."""
        theta = np.asarray(theta, dtype=float)
        m = self.modes
        r = np.full_like(theta, self.coeffs[0])
        rp = np.zeros_like(theta)
        rpp = np.zeros_like(theta)
        for l in range(1, m + 1):
            c, s = np.cos(l * theta), np.sin(l * theta)
            ac, as_ = self.coeffs[l], self.coeffs[l + m]
            r += ac * c + as_ * s
            rp += l * (-ac * s + as_ * c)
            rpp += l * l * (-ac * c - as_ * s)
        return r, rp, rpp

    def validate(self, floor=RADIUS_FLOOR, n_check=VALIDATION_GRID):
        """Raise GeometryError unless r(theta) >= floor on a dense grid."""
        theta = np.linspace(0.0, 2.0 * np.pi, n_check, endpoint=False)
        r = self.radius(theta)
        rmin = float(np.min(r))
        if rmin < floor:
            raise GeometryError(
                f"starlike radius dips to {rmin:.4g} < floor {floor} "
                f"(center {tuple(self.center)})"
            )


def _polar_xyz(center, r, rp, rpp, theta):
    """Point/derivative arrays for x = center + r(theta)(cos, sin)."""
    c, s = np.cos(theta), np.sin(theta)
    e = np.stack([c, s], axis=-1)
    ep = np.stack([-s, c], axis=-1)
    x = center + r[..., None] * e
    dx = rp[..., None] * e + r[..., None] * ep
    ddx = (rpp - r)[..., None] * e + 2.0 * rp[..., None] * ep
    return x, dx, ddx


def _apple_radius(theta):
    u = 0.5 + 0.4 * np.cos(theta) + 0.1 * np.sin(2.0 * theta)
    v = 1.0 + 0.7 * np.cos(theta)
    up = -0.4 * np.sin(theta) + 0.2 * np.cos(2.0 * theta)
    vp = -0.7 * np.sin(theta)
    upp = -0.4 * np.cos(theta) - 0.4 * np.sin(2.0 * theta)
    vpp = -0.7 * np.cos(theta)
    r = u / v
    rp = (up * v - u * vp) / v**2
    rpp = (upp * v - u * vpp) / v**2 - 2.0 * vp * (up * v - u * vp) / v**3
    return r, rp, rpp


@dataclass
class ParametricCurve:
    """A closed analytic 2pi-periodic boundary curve.

    ``kind`` is ``"starlike"`` (with ``shape`` set) or one of the preset
    names.  Preset curves are origin-centered with the standard
    parameters; ``"circle"`` additionally takes ``radius``.
    """

    kind: str
    shape: StarlikeShape | None = None
    radius_param: float | None = None

    def __post_init__(self):
        if self.kind == "starlike":
            if self.shape is None:
                raise ConfigurationError("starlike curve requires a StarlikeShape")
        elif self.kind not in PRESET_NAMES:
            raise ConfigurationError(
                f"unknown preset curve {self.kind!r}; expected one of {PRESET_NAMES}"
            )
        elif self.kind == "circle" and self.radius_param is None:
            raise ConfigurationError("preset 'circle' requires a radius")

    @classmethod
    def starlike(cls, shape: StarlikeShape):
        return cls(kind="starlike", shape=shape)

    @classmethod
    def preset(cls, name: str, radius: float | None = None):
        return cls(kind=name, radius_param=radius)

    def evaluate(self, t):
        """Return (x, x', x'') arrays of shape t.shape + (2,)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "starlike":
            r, rp, rpp = self.shape.radius_derivatives(t)
            return _polar_xyz(self.shape.center, r, rp, rpp, t)
        if self.kind == "circle":
            r0 = float(self.radius_param)
            z = np.zeros_like(t)
            return _polar_xyz(np.zeros(2), np.full_like(t, r0), z, z, t)
        if self.kind == "apple":
            r, rp, rpp = _apple_radius(t)
            return _polar_xyz(np.zeros(2), r, rp, rpp, t)
        if self.kind == "rounded_triangle":
            r = 2.0 + 0.3 * np.cos(3.0 * t)
            rp = -0.9 * np.sin(3.0 * t)
            rpp = -2.7 * np.cos(3.0 * t)
            return _polar_xyz(np.zeros(2), r, rp, rpp, t)
        if self.kind == "kite":
            c, s = np.cos(t), np.sin(t)
            c2, s2 = np.cos(2.0 * t), np.sin(2.0 * t)
            x = np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], axis=-1)
            dx = np.stack([-s - 1.3 * s2, 1.5 * c], axis=-1)
            ddx = np.stack([-c - 2.6 * c2, -1.5 * s], axis=-1)
            return x, dx, ddx
        # rounded_square
        c, s = np.cos(t), np.sin(t)
        x = 1.5 * np.stack([c**3 + c, s**3 + s], axis=-1)
        dx = 1.5 * np.stack([-s * (3.0 * c**2 + 1.0), c * (3.0 * s**2 + 1.0)], axis=-1)
        ddx = 1.5 * np.stack(
            [-c * (3.0 * c**2 + 1.0) + 6.0 * c * s**2,
             -s * (3.0 * s**2 + 1.0) + 6.0 * s * c**2],
            axis=-1,
        )
        return x, dx, ddx

    def point(self, t):
        return self.evaluate(t)[0]


def eval_curve(curve: ParametricCurve, t):
    """Point x(t) on the curve (vectorized over t)."""
    return curve.point(t)


@dataclass
class DiscretizedBoundary:
    """Equispaced parameter grid t_j = pi j / n with pointwise curve data.

    Normals are outward unit vectors for the counterclockwise preset and
    starlike parametrizations; ``speed`` is |x'(t_j)| and absorbs the
    arc-length factor in all quadratures.
    """

    curve: ParametricCurve
    n: int
    t: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    dx: np.ndarray = field(repr=False)
    ddx: np.ndarray = field(repr=False)
    speed: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 2 * self.n


def discretize(curve: ParametricCurve, n: int) -> DiscretizedBoundary:
    """Sample the curve at the 2n Nystrom nodes t_j = pi j / n.

    Raises GeometryError if the parametrization degenerates
    (|x'| < 1e-10 at any node).
    """
    if n < 4:
        raise ConfigurationError(f"need n >= 4 nodes per half period, got {n}")
    t = np.pi * np.arange(2 * n) / n
    x, dx, ddx = curve.evaluate(t)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    if np.min(speed) < SPEED_FLOOR:
        raise GeometryError(
            f"degenerate curve: |x'| = {np.min(speed):.3g} at a node"
        )
    normal = np.stack([dx[:, 1], -dx[:, 0]], axis=-1) / speed[:, None]
    curvature = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
    for a in (t, x, dx, ddx, speed, normal, curvature):
        a.setflags(write=False)
    return DiscretizedBoundary(
        curve=curve, n=n, t=t, x=x, dx=dx, ddx=ddx,
        speed=speed, normal=normal, curvature=curvature,
    )


def spectral_derivative(values):
    """Derivative of the trigonometric interpolant at the 2n nodes.

    Exact for trigonometric polynomials of degree < n; the Nyquist mode
    contributes zero derivative at the nodes.
    """
    v = np.asarray(values)
    m2 = v.shape[-1]
    if m2 % 2 != 0:
        raise ConfigurationError("spectral_derivative expects an even sample count")
    freq = np.fft.fftfreq(m2, d=1.0 / m2)  # integer wavenumbers
    freq[m2 // 2] = 0.0  # Nyquist derivative vanishes at the nodes
    dv = np.fft.ifft(1j * freq * np.fft.fft(v, axis=-1), axis=-1)
    if np.isrealobj(v):
        return dv.real
    return dv


# ---------------------------------------------------------------------------
# Validation of curves and curve pairs
# ---------------------------------------------------------------------------
def _polyline(curve: ParametricCurve, n_check: int):
    t = np.linspace(0.0, 2.0 * np.pi, n_check, endpoint=False)
    return curve.point(t)


def _segments_intersect(p, q):
    """Any proper intersection between segment sets p and q.

    p, q: arrays (Np, 2, 2) / (Nq, 2, 2) of segment endpoints.
    """
    a, b = p[:, None, 0], p[:, None, 1]  # (Np, 1, 2)
    c, d = q[None, :, 0], q[None, :, 1]  # (1, Nq, 2)

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    d1 = cross(b - a, c - a)
    d2 = cross(b - a, d - a)
    d3 = cross(d - c, a - c)
    d4 = cross(d - c, b - c)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    return bool(np.any(hit))


def curve_is_simple(curve: ParametricCurve, n_check=VALIDATION_GRID) -> bool:
    """Pairwise polyline check that the closed curve has no self-crossing."""
    if curve.kind == "starlike":
        # positive radius makes a starlike curve simple by construction
        curve.shape.validate()
        return True
    pts = _polyline(curve, n_check)
    seg = np.stack([pts, np.roll(pts, -1, axis=0)], axis=1)  # (N, 2, 2)
    a, b = seg[:, None, 0], seg[:, None, 1]
    c, d = seg[None, :, 0], seg[None, :, 1]

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    d1 = cross(b - a, c - a)
    d2 = cross(b - a, d - a)
    d3 = cross(d - c, a - c)
    d4 = cross(d - c, b - c)
    hit = (d1 * d2 < 0) & (d3 * d4 < 0)
    n = len(pts)
    idx = np.arange(n)
    adjacent = (np.abs(idx[:, None] - idx[None, :]) <= 1) | (
        np.abs(idx[:, None] - idx[None, :]) == n - 1
    )
    return not bool(np.any(hit & ~adjacent))


def _points_in_polygon(points, poly):
    """Ray-casting (crossing-number) containment test, vectorized."""
    x, y = points[:, 0, None], points[:, 1, None]  # (Np, 1)
    x1, y1 = poly[None, :, 0], poly[None, :, 1]  # (1, Nv)
    x2, y2 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddles = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at_y = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    crossings = np.sum(straddles & (x_at_y > x), axis=1)
    return crossings % 2 == 1


def _min_point_polyline_distance(points, poly):
    """Minimum distance from each point to a closed polyline, then overall min."""
    a = poly  # (Nv, 2)
    b = np.roll(poly, -1, axis=0)
    ab = b - a  # (Nv, 2)
    ab2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    ap = points[:, None, :] - a[None, :, :]  # (Np, Nv, 2)
    s = np.clip(np.sum(ap * ab[None, :, :], axis=2) / ab2[None, :], 0.0, 1.0)
    closest = a[None, :, :] + s[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - closest, axis=2)
    return float(np.min(d))


def validate_pair(outer: ParametricCurve, inner: ParametricCurve,
                  margin=CONTAINMENT_MARGIN, n_check=VALIDATION_GRID):
    """Check the buried curve lies strictly inside the outer one.

    Raises GeometryError if any inner node falls outside the outer
    polygon, the polylines come closer than ``margin``, or they
    intersect.  Starlike inputs are also radius-validated.
    """
    for c in (outer, inner):
        if c.kind == "starlike":
            c.shape.validate()
        elif not curve_is_simple(c, n_check):
            raise GeometryError(f"preset curve {c.kind!r} polyline self-intersects")
    pts_outer = _polyline(outer, n_check)
    pts_inner = _polyline(inner, n_check)
    if not np.all(_points_in_polygon(pts_inner, pts_outer)):
        raise GeometryError("buried boundary is not strictly inside the interface")
    dmin = min(
        _min_point_polyline_distance(pts_inner, pts_outer),
        _min_point_polyline_distance(pts_outer, pts_inner),
    )
    if dmin < margin:
        raise GeometryError(
            f"boundaries too close: min distance {dmin:.4g} < margin {margin}"
        )
    seg_o = np.stack([pts_outer, np.roll(pts_outer, -1, axis=0)], axis=1)
    seg_i = np.stack([pts_inner, np.roll(pts_inner, -1, axis=0)], axis=1)
    if _segments_intersect(seg_o, seg_i):
        raise GeometryError("interface and buried boundary polylines intersect")
