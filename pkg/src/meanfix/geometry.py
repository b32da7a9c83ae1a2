"""Strictly convex planar domain catalog.

Every shape here has an exact inside test, Euclidean boundary distance,
nearest-boundary-point projection and closed-form diameter.  Only strictly
convex shapes are shipped: no boundary segment, so the midpoint of any two
boundary points lies in the open interior.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Width of the boundary classification band.  Far below any grid spacing in
# use, so node classification cannot flip under arithmetic noise.
TOL_GEOM = 1e-10

_SCAN_SAMPLES = 256
_NEWTON_STEPS = 60
_BISECT_STEPS = 80


class Containment(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


def _as_points(p) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    if pts.shape[-1] != 2:
        raise ValueError(f"expected 2-D points, got shape {pts.shape}")
    return pts


class Domain:
    """Base class: strictly convex bounded planar region."""

    center: tuple[float, float]

    def diameter(self) -> float:
        raise NotImplementedError

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the closure."""
        raise NotImplementedError

    def level_many(self, pts: np.ndarray) -> np.ndarray:
        """Shape function: < 1 inside, = 1 on the boundary, > 1 outside."""
        raise NotImplementedError

    def boundary_point(self, t):
        """Point on the boundary at parameter t (2*pi periodic)."""
        return self.boundary_points(np.asarray([t], dtype=float))[0]

    def boundary_points(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_many(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest boundary points and unsigned Euclidean distances."""
        raise NotImplementedError

    # -- shared scalar API -------------------------------------------------

    def contains(self, p, tol: float = TOL_GEOM) -> Containment:
        pts = _as_points(p)
        inside = self.level_many(pts)[0] < 1.0
        _, d = self.project_many(pts)
        if d[0] <= tol:
            return Containment.BOUNDARY
        return Containment.INTERIOR if inside else Containment.EXTERIOR

    def dist_to_boundary(self, p) -> float:
        """Euclidean distance to the boundary; 0 for exterior points.

        Exterior points report 0 by convention so that the extension rule in
        gridfield can treat them as carrying boundary-band data.
        """
        pts = _as_points(p)
        if self.level_many(pts)[0] >= 1.0:
            return 0.0
        _, d = self.project_many(pts)
        return float(d[0])

    def dist_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised interior distance (0 outside), used by grid builders."""
        pts = _as_points(pts)
        inside = self.level_many(pts) < 1.0
        _, d = self.project_many(pts)
        return np.where(inside, d, 0.0)

    def project_to_boundary(self, p) -> tuple[float, float]:
        proj, _ = self.project_many(_as_points(p))
        return (float(proj[0, 0]), float(proj[0, 1]))

    def theta_of(self, pts: np.ndarray) -> np.ndarray:
        """Polar angle of points relative to the domain center."""
        pts = _as_points(pts)
        cx, cy = self.center
        return np.arctan2(pts[:, 1] - cy, pts[:, 0] - cx)


@dataclass(frozen=True)
class Disk(Domain):
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    def diameter(self) -> float:
        return 2.0 * self.radius

    def bounding_box(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def level_many(self, pts):
        pts = _as_points(pts)
        cx, cy = self.center
        return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) / self.radius

    def boundary_points(self, ts):
        ts = np.asarray(ts, dtype=float)
        cx, cy = self.center
        return np.stack([cx + self.radius * np.cos(ts),
                         cy + self.radius * np.sin(ts)], axis=-1)

    def project_many(self, pts):
        pts = _as_points(pts)
        cx, cy = self.center
        dx = pts[:, 0] - cx
        dy = pts[:, 1] - cy
        rho = np.hypot(dx, dy)
        # center projects to angle 0 (documented tie-break)
        safe = rho > 0
        ux = np.where(safe, np.divide(dx, rho, where=safe), 1.0)
        uy = np.where(safe, np.divide(dy, rho, where=safe), 0.0)
        proj = np.stack([cx + self.radius * ux, cy + self.radius * uy], axis=-1)
        return proj, np.abs(self.radius - rho)


class _ParametricDomain(Domain):
    """Projection via coarse scan + damped Newton, bisection fallback.

    Subclasses supply the boundary parametrization gamma(t) and its first
    two derivatives; the squared-distance stationarity g(t) = (p-gamma).gamma'
    is solved per query point.
    """

    def _gamma(self, ts):
        raise NotImplementedError

    def _dgamma(self, ts):
        raise NotImplementedError

    def _ddgamma(self, ts):
        raise NotImplementedError

    def boundary_points(self, ts):
        return self._gamma(np.asarray(ts, dtype=float))

    def project_many(self, pts):
        pts = _as_points(pts)
        n = len(pts)
        ts_scan = np.linspace(0.0, 2 * np.pi, _SCAN_SAMPLES, endpoint=False)
        bpts = self._gamma(ts_scan)  # (S, 2)
        d2 = ((pts[:, None, :] - bpts[None, :, :]) ** 2).sum(axis=2)
        best = np.argmin(d2, axis=1)
        t = ts_scan[best]

        def g_and_dg(tv):
            gam = self._gamma(tv)
            dg = self._dgamma(tv)
            ddg = self._ddgamma(tv)
            diff = pts - gam
            g = (diff * dg).sum(axis=1)
            dgdt = -(dg * dg).sum(axis=1) + (diff * ddg).sum(axis=1)
            return g, dgdt

        g, dgdt = g_and_dg(t)
        for _ in range(_NEWTON_STEPS):
            step = np.where(dgdt != 0, -g / np.where(dgdt != 0, dgdt, 1.0), 0.0)
            step = np.clip(step, -0.5, 0.5)  # damping
            t_new = t + step
            g_new, dgdt_new = g_and_dg(t_new)
            accept = np.abs(g_new) <= np.abs(g)
            t = np.where(accept, t_new, t)
            g = np.where(accept, g_new, g)
            dgdt = np.where(accept, dgdt_new, dgdt)
            if np.max(np.abs(np.where(accept, step, 0.0))) < 1e-15:
                break

        # Bisection fallback where Newton stalled: g changes sign across the
        # scan minimizer on a strictly convex boundary.
        dt = 2 * np.pi / _SCAN_SAMPLES
        stalled = np.abs(g) > 1e-12 * max(1.0, self.diameter())
        if stalled.any():
            idx = np.where(stalled)[0]
            lo = t[idx] - dt
            hi = t[idx] + dt
            sub = pts[idx]

            def g_of(tv, sub_pts):
                gam = self._gamma(tv)
                dg = self._dgamma(tv)
                return ((sub_pts - gam) * dg).sum(axis=1)

            glo = g_of(lo, sub)
            for _ in range(_BISECT_STEPS):
                mid = 0.5 * (lo + hi)
                gm = g_of(mid, sub)
                take_lo = (glo * gm) <= 0
                hi = np.where(take_lo, mid, hi)
                lo = np.where(take_lo, lo, mid)
                glo = np.where(take_lo, glo, gm)
            t[idx] = 0.5 * (lo + hi)

        proj = self._gamma(t)
        d = np.hypot(*(pts - proj).T)
        return proj, d


@dataclass(frozen=True)
class Ellipse(_ParametricDomain):
    """Axis-aligned ellipse with semi-axes a >= b > 0."""

    center: tuple[float, float] = (0.0, 0.0)
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise ValueError(f"ellipse needs a >= b > 0, got a={self.a}, b={self.b}")

    def diameter(self) -> float:
        return 2.0 * self.a

    def bounding_box(self):
        cx, cy = self.center
        return (cx - self.a, cy - self.b, cx + self.a, cy + self.b)

    def level_many(self, pts):
        pts = _as_points(pts)
        cx, cy = self.center
        return np.sqrt(((pts[:, 0] - cx) / self.a) ** 2
                       + ((pts[:, 1] - cy) / self.b) ** 2)

    def _gamma(self, ts):
        ts = np.asarray(ts, dtype=float)
        cx, cy = self.center
        return np.stack([cx + self.a * np.cos(ts), cy + self.b * np.sin(ts)], axis=-1)

    def _dgamma(self, ts):
        ts = np.asarray(ts, dtype=float)
        return np.stack([-self.a * np.sin(ts), self.b * np.cos(ts)], axis=-1)

    def _ddgamma(self, ts):
        ts = np.asarray(ts, dtype=float)
        return np.stack([-self.a * np.cos(ts), -self.b * np.sin(ts)], axis=-1)


@dataclass(frozen=True)
class PNormBall(_ParametricDomain):
    """{ |x - c|_q <= R } for 1 < q < inf; strictly convex for all such q."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    exponent: float = 4.0

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not (1.0 < self.exponent < math.inf):
            raise ValueError(f"exponent must satisfy 1 < q < inf, got {self.exponent}")

    def diameter(self) -> float:
        # farthest boundary point from center: axes for q < 2, the diagonal
        # for q > 2 where |gamma| = R * 2^(1/2 - 1/q)
        q = self.exponent
        return 2.0 * self.radius * max(1.0, 2.0 ** (0.5 - 1.0 / q))

    def bounding_box(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def level_many(self, pts):
        pts = _as_points(pts)
        cx, cy = self.center
        q = self.exponent
        return (np.abs(pts[:, 0] - cx) ** q + np.abs(pts[:, 1] - cy) ** q) ** (1.0 / q)

    def _rho(self, ts):
        q = self.exponent
        w = np.abs(np.cos(ts)) ** q + np.abs(np.sin(ts)) ** q
        return self.radius * w ** (-1.0 / q)

    def _rho_prime(self, ts):
        q = self.exponent
        c, s = np.cos(ts), np.sin(ts)
        w = np.abs(c) ** q + np.abs(s) ** q
        wp = q * (np.abs(s) ** (q - 1) * np.sign(s) * c
                  - np.abs(c) ** (q - 1) * np.sign(c) * s)
        return self.radius * (-1.0 / q) * w ** (-1.0 / q - 1.0) * wp

    def _gamma(self, ts):
        ts = np.asarray(ts, dtype=float)
        cx, cy = self.center
        rho = self._rho(ts)
        return np.stack([cx + rho * np.cos(ts), cy + rho * np.sin(ts)], axis=-1)

    def _dgamma(self, ts):
        ts = np.asarray(ts, dtype=float)
        rho = self._rho(ts)
        rp = self._rho_prime(ts)
        c, s = np.cos(ts), np.sin(ts)
        return np.stack([rp * c - rho * s, rp * s + rho * c], axis=-1)

    def _ddgamma(self, ts, _h=1e-6):
        # second derivative via central difference of the analytic first
        # derivative; only feeds the damped Newton step, bisection cleans up
        return (self._dgamma(ts + _h) - self._dgamma(ts - _h)) / (2 * _h)


def domain_from_config(cfg: dict) -> Domain:
    """Build a catalog domain from its config dictionary."""
    if not isinstance(cfg, dict) or "shape" not in cfg:
        raise ValueError("domain config must be a mapping with a 'shape' key")
    shape = cfg["shape"]
    center = tuple(cfg.get("center", (0.0, 0.0)))
    if len(center) != 2:
        raise ValueError(f"domain center must have 2 coordinates, got {center}")
    if shape == "disk":
        return Disk(center=center, radius=float(cfg.get("radius", 1.0)))
    if shape == "ellipse":
        return Ellipse(center=center, a=float(cfg["a"]), b=float(cfg["b"]))
    if shape == "pnorm":
        return PNormBall(center=center, radius=float(cfg.get("radius", 1.0)),
                         exponent=float(cfg["exponent"]))
    raise ValueError(f"unknown shape {shape!r}; expected disk | ellipse | pnorm")
