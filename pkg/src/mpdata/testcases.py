"""Initial conditions, exact solutions and named verification presets.

Presets
-------
sine1d
    Periodic 1D sine wave (an ``n x 1 x 1`` grid) in a uniform wind.
cart32, cart59
    A ball revolving rigidly about a tilted axis inside a periodic cube.
sphere-pole, sphere-equator, sphere-diagonal
    Cosine bell in solid-body rotation on a lon-lat sphere, with the
    rotation axis tilted by 90, 0 and 45 degrees.

Every preset returns to its initial state after ``steps_per_period``
steps, where the exact solution coincides with the initial field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import (BoundaryKind, FaceVelocity, Field3, Grid3, fill_velocity_halos,
                   make_boundaries)
from .sphere import (SPHERE_BOUNDARIES, SphereGrid, max_outflow_courant, rotation_axis,
                     solid_body_wind)

PERIODIC = make_boundaries(BoundaryKind.PERIODIC)


@dataclass(eq=False)
class TestPreset:
    name: str
    grid: Grid3
    boundaries: tuple
    vel: FaceVelocity
    initial: Field3
    dt: float
    period: float
    steps_per_period: int
    exact: Callable[[float], np.ndarray] = field(repr=False)
    variant: str = "gauge"
    sphere: SphereGrid | None = None

    __test__ = False  # keep pytest from collecting this class

    def analytic(self, t: float) -> Field3:
        return analytic_solution(self, t)


def _phase(t, period):
    """Fraction of a period elapsed at ``t``; exactly 0 on whole periods."""
    r = t / period
    r -= math.floor(r)
    if r < 1e-12 or 1.0 - r < 1e-12:
        return 0.0
    return r


def analytic_solution(preset: TestPreset, t: float) -> Field3:
    """Initial condition transported to time ``t``, sampled at cell centres."""
    phase = _phase(t, preset.period)
    if phase == 0.0:
        return preset.initial.copy()
    return Field3.from_interior(preset.grid, preset.exact(phase * preset.period))


def _rotation_matrix(axis, angle):
    k = np.asarray(axis, dtype=np.float64)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


# -- sine1d -----------------------------------------------------------------

def sine1d(n: int = 64, courant: float = 0.5, halo: int = 2, dtype=np.float64) -> TestPreset:
    """Unit-amplitude sine on a periodic unit interval, velocity 1."""
    if n < 16:
        raise ValueError("sine1d needs n >= 16")
    steps = n / courant
    if abs(steps - round(steps)) > 1e-9:
        raise ValueError(f"n / courant must be an integer (got {steps})")
    steps = int(round(steps))
    dx = 1.0 / n
    grid = Grid3(n, 1, 1, dx, 1.0, 1.0, halo=halo, dtype=dtype)
    vel = FaceVelocity.zeros(grid)
    vel.u1[...] = courant
    xc = (np.arange(n) + 0.5) * dx

    def exact(t):
        return np.sin(2.0 * math.pi * (xc - t))[:, None, None]

    initial = Field3.from_interior(grid, np.sin(2.0 * math.pi * xc)[:, None, None])
    return TestPreset("sine1d", grid, PERIODIC, vel, initial, dt=courant * dx, period=1.0,
                      steps_per_period=steps, exact=exact)


# -- revolving ball in a cube --------------------------------------------------

CART_AXIS = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
CART_OFFSET_DIR = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)


def rotating_sphere_cartesian(n: int = 32, radius: float | None = None,
                              orbit: float | None = None, amplitude: float = 4.0,
                              background: float = 0.0, steps: int | None = None,
                              halo: int = 2, dtype=np.float64) -> TestPreset:
    """Ball of value ``amplitude`` revolving about a tilted axis in a cube.

    Defaults scale the 59-cell configuration (ball radius 7 cells, orbit
    radius 15 cells, 556 steps per revolution) linearly with ``n``.  Unit
    cells, unit time step; the rotation axis passes through the cube
    centre along (1, 1, 1).  Each face-normal wind component is
    independent of its own coordinate, so the wind is exactly
    divergence-free and periodic across the cube faces.
    """
    if n < 16:
        raise ValueError("the revolving-ball test needs n >= 16")
    scale = n / 59.0
    radius = 7.0 * scale if radius is None else radius
    orbit = 15.0 * scale if orbit is None else orbit
    steps = int(round(556 * scale)) if steps is None else int(steps)
    omega = 2.0 * math.pi / steps
    grid = Grid3(n, n, n, 1.0, 1.0, 1.0, halo=halo, dtype=dtype)
    H = halo
    center = n / 2.0
    # padded cell-centre coordinates relative to the axis point; each face-normal
    # component only depends on the two transverse (centre) coordinates
    pc = np.arange(n + 2 * H) - H + 0.5 - center   # cell centres
    k = CART_AXIS
    X, Y, Z = np.meshgrid(pc, pc, pc, indexing="ij")
    u1 = omega * (k[1] * Z - k[2] * Y)
    u2 = omega * (k[2] * X - k[0] * Z)
    u3 = omega * (k[0] * Y - k[1] * X)
    vel = FaceVelocity(u1, u2, u3).astype(dtype)
    vel = fill_velocity_halos(vel, grid, PERIODIC)

    ball0 = center + orbit * CART_OFFSET_DIR
    xc = np.arange(n) + 0.5
    Xi, Yi, Zi = np.meshgrid(xc, xc, xc, indexing="ij")

    def exact(t):
        b = center + _rotation_matrix(k, omega * t) @ (ball0 - center)
        r2 = (Xi - b[0]) ** 2 + (Yi - b[1]) ** 2 + (Zi - b[2]) ** 2
        return np.where(r2 <= radius * radius, amplitude, background)

    initial = Field3.from_interior(grid, exact(0.0))
    return TestPreset(f"cart{n}", grid, PERIODIC, vel, initial, dt=1.0,
                      period=float(steps), steps_per_period=steps, exact=exact)


# -- solid-body rotation on the sphere -------------------------------------------

SPHERE_ALPHA = {"sphere-pole": 0.5 * math.pi, "sphere-equator": 0.0,
                "sphere-diagonal": 0.25 * math.pi}


def sphere_solid_body(alpha: float, nlon: int = 128, nlat: int = 64, nlev: int = 1,
                      courant: float = 0.5, halo: int = 2, dtype=np.float64,
                      name: str = "sphere") -> TestPreset:
    """Cosine bell (radius 1/3, height 1) starting on the equator at 270 E.

    Unit sphere, one revolution per unit time.  The step count is the
    smallest one keeping every cell's outgoing Courant sum at or below
    ``courant``.
    """
    sg = SphereGrid(nlon, nlat, nlev, halo=halo, dtype=np.float64)
    u0 = 2.0 * math.pi
    period = 1.0
    probe = solid_body_wind(sg, alpha, u0, dt=1.0)
    cmax = max_outflow_courant(probe, sg.grid)
    steps = max(1, math.ceil(cmax * period / courant - 1e-9))
    dt = period / steps
    vel = solid_body_wind(sg, alpha, u0, dt=dt).astype(dtype)
    grid = sg.grid.with_dtype(dtype)

    axis = rotation_axis(alpha)
    xyz = sg.centers_xyz()
    bell_lon, bell_lat, bell_r = 1.5 * math.pi, 0.0, 1.0 / 3.0
    bell = np.array([math.cos(bell_lat) * math.cos(bell_lon),
                     math.cos(bell_lat) * math.sin(bell_lon), math.sin(bell_lat)])

    def exact(t):
        c = _rotation_matrix(axis, u0 * t) @ bell
        dot = np.clip(np.tensordot(c, xyz, axes=1), -1.0, 1.0)
        r = np.arccos(dot)
        psi = np.where(r < bell_r, 0.5 * (1.0 + np.cos(math.pi * r / bell_r)), 0.0)
        return np.broadcast_to(psi[:, :, None], (nlon, nlat, nlev))

    initial = Field3.from_interior(grid, exact(0.0))
    return TestPreset(name, grid, sg.boundaries, vel, initial, dt=dt, period=period,
                      steps_per_period=steps, exact=exact, variant="sphere", sphere=sg)


# -- registry ----------------------------------------------------------------------

PRESET_NAMES = ("sine1d", "cart32", "cart59", "sphere-pole", "sphere-equator",
                "sphere-diagonal")


def make_preset(name: str, dtype=np.float64, **overrides) -> TestPreset:
    """Build a preset by name.

    ``overrides`` are forwarded to the constructor: ``n`` and ``courant``
    for sine1d, ``n``, ``radius``, ``orbit``, ``steps`` for the cubes, and
    ``nlon``, ``nlat``, ``nlev``, ``courant`` for the spheres.
    """
    if name == "sine1d":
        return sine1d(dtype=dtype, **overrides)
    if name in ("cart32", "cart59"):
        overrides.setdefault("n", int(name[4:]))
        p = rotating_sphere_cartesian(dtype=dtype, **overrides)
        p.name = name
        return p
    if name in SPHERE_ALPHA:
        return sphere_solid_body(SPHERE_ALPHA[name], dtype=dtype, name=name, **overrides)
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def preset_boundaries(name: str):
    """Tracer boundary rules of a preset."""
    if name in SPHERE_ALPHA:
        return SPHERE_BOUNDARIES
    if name in PRESET_NAMES:
        return PERIODIC
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def preset_shape(name: str, **overrides) -> tuple[int, int, int]:
    """Global cell counts of a preset without building it."""
    if name == "sine1d":
        return (overrides.get("n", 64), 1, 1)
    if name in ("cart32", "cart59"):
        n = overrides.get("n", int(name[4:]))
        return (n, n, n)
    if name in SPHERE_ALPHA:
        return (overrides.get("nlon", 128), overrides.get("nlat", 64), overrides.get("nlev", 1))
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
