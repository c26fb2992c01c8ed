"""Longitude-latitude grid, solid-body rotation winds and polar ghost rows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (BoundaryKind, FaceVelocity, Field3, Grid3, apply_boundary,
                   fill_static_halos, fill_velocity_halos)

SPHERE_BOUNDARIES = ((BoundaryKind.PERIODIC, BoundaryKind.PERIODIC),
                     (BoundaryKind.POLE, BoundaryKind.POLE),
                     (BoundaryKind.COPY, BoundaryKind.COPY))


@dataclass(eq=False)
class SphereGrid:
    """Regular lon-lat grid with cell centres offset half a cell from the poles.

    The metric factor is ``G = cos(latitude)`` at cell centres.  The
    wrapped :class:`Grid3` uses ``dx = dlon``, ``dy = dlat``, ``dz = 1``
    so its cell volume times ``G * radius**2`` is the cell area.
    """

    nlon: int
    nlat: int
    nlev: int = 1
    radius: float = 1.0
    halo: int = 2
    dtype: type = np.float64

    def __post_init__(self):
        if self.nlon % 2:
            raise ValueError(f"nlon must be even, got {self.nlon}")
        self.dlon = 2.0 * math.pi / self.nlon
        self.dlat = math.pi / self.nlat
        self.lon = (np.arange(self.nlon) + 0.5) * self.dlon
        self.lat = -0.5 * math.pi + (np.arange(self.nlat) + 0.5) * self.dlat
        G = np.broadcast_to(np.cos(self.lat)[None, :, None], (self.nlon, self.nlat, self.nlev))
        grid = Grid3(self.nlon, self.nlat, self.nlev, self.dlon, self.dlat, 1.0,
                     halo=self.halo, dtype=self.dtype, G=G)
        self.grid = fill_static_halos(grid, SPHERE_BOUNDARIES)

    @property
    def G(self):
        return self.grid.G

    @property
    def boundaries(self):
        return SPHERE_BOUNDARIES

    def corner_lon(self):
        return np.arange(self.nlon + 1) * self.dlon

    def corner_lat(self):
        """Face latitudes with (sin, cos) exact at the poles."""
        phi = -0.5 * math.pi + np.arange(self.nlat + 1) * self.dlat
        s, c = np.sin(phi), np.cos(phi)
        s[0], s[-1] = -1.0, 1.0
        c[0], c[-1] = 0.0, 0.0
        return phi, s, c

    def centers_xyz(self):
        lam, phi = np.meshgrid(self.lon, self.lat, indexing="ij")
        return np.stack([np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi)])


def solid_body_components(lon, lat, alpha, u0):
    """Zonal and meridional wind of a rotation about an axis tilted by ``alpha``."""
    u = u0 * (np.cos(lat) * math.cos(alpha) + np.sin(lat) * np.cos(lon) * math.sin(alpha))
    v = -u0 * np.sin(lon) * math.sin(alpha)
    return u, v


def rotation_axis(alpha):
    """Unit axis whose solid-body rotation yields :func:`solid_body_components`."""
    return np.array([-math.sin(alpha), 0.0, math.cos(alpha)])


def _streamfunction(slon_cos, slat_sin, slat_cos, alpha, u0, radius):
    # u = -(1/R) dS/dphi, v = 1/(R cos phi) dS/dlambda
    return -u0 * radius * (slat_sin * math.cos(alpha) - slon_cos * slat_cos * math.sin(alpha))


def solid_body_wind(sphere: SphereGrid, alpha: float, u0: float, dt: float = 1.0) -> FaceVelocity:
    """Courant-form face fluxes of solid-body rotation.

    Face values are differences of the streamfunction at face corners,
    which makes the discrete divergence of every cell vanish up to
    round-off and gives exactly zero flux through the pole faces.
    """
    if not u0 > 0:
        raise ValueError("u0 must be positive")
    g = sphere.grid
    H = g.halo
    R = sphere.radius
    scale = dt / (R * R * sphere.dlon * sphere.dlat)
    clon = np.cos(sphere.corner_lon())
    _, slat, clat = sphere.corner_lat()
    S = _streamfunction(clon[:, None], slat[None, :], clat[None, :], alpha, u0, R)
    vel = FaceVelocity.zeros(g)
    nlon, nlat, nlev = g.shape
    u1 = -(S[:, 1:] - S[:, :-1]) * scale        # (nlon+1, nlat)
    u2 = (S[1:, :] - S[:-1, :]) * scale          # (nlon, nlat+1)
    vel.u1[H:H + nlon + 1, H:H + nlat, H:H + nlev] = u1[:, :, None]
    vel.u2[H:H + nlon, H:H + nlat + 1, H:H + nlev] = u2[:, :, None]
    return fill_velocity_halos(vel, g, SPHERE_BOUNDARIES)


def max_outflow_courant(vel: FaceVelocity, grid: Grid3) -> float:
    """Largest per-cell sum of outgoing face Courant numbers (``flux / G h``)."""
    H = grid.halo
    nx, ny, nz = grid.shape
    inner = grid.interior_slices
    total = np.zeros(grid.shape)
    for d, u in enumerate(vel.components):
        lo = [slice(H, H + n) for n in grid.shape]
        hi = list(lo)
        hi[d] = slice(H + 1, H + 1 + grid.shape[d])
        total += np.maximum(0.0, u[tuple(hi)]) - np.minimum(0.0, u[tuple(lo)])
    return float(np.max(total / grid.density[inner]))


def pole_halo_update(field: Field3, sphere: SphereGrid, staggered_axis=None,
                     sign: float = 1.0) -> Field3:
    """Fill ghosts of a lon-lat field: periodic in longitude, pole rule in
    latitude, copy in the vertical.

    Use ``staggered_axis=1, sign=-1`` for the meridional face component.
    """
    if sphere.nlon % 2:
        raise ValueError("pole ghost rows need an even number of longitudes")
    return apply_boundary(field, SPHERE_BOUNDARIES, staggered_axis=staggered_axis, sign=sign)
