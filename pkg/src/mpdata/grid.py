"""Structured grids, padded fields and ghost-cell boundary operators.

Every array in the package is stored *padded*: an interior block of
``nx * ny * nz`` cells surrounded by ``halo`` ghost layers on each side,
indexed ``[i, j, k]`` with ``i`` running along x.  Face-normal velocities
share the padded cell shape; ``u1[i, j, k]`` lives on the face between
cells ``i - 1`` and ``i`` (the ``i - 1/2`` face), so the interior faces of
an axis with ``n`` cells are ``halo .. halo + n`` inclusive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np


class BoundaryKind(str, Enum):
    """Ghost-cell fill rule for one side of one axis.

    ``POLE`` is only valid on the latitude axis of a longitude-latitude
    grid: ghost rows beyond a pole are filled from the interior rows on
    the far side of the pole, shifted by half a revolution in longitude.
    """

    COPY = "copy"
    NEGATE = "negate"
    ZERO = "zero"
    PERIODIC = "periodic"
    POLE = "pole"


Boundaries = tuple[tuple[BoundaryKind, BoundaryKind], ...]


def make_boundaries(spec) -> Boundaries:
    """Normalise a boundary specification to three ``(lo, hi)`` pairs.

    Accepts a single kind for every side, three kinds (one per axis) or
    three ``(lo, hi)`` pairs.
    """
    if isinstance(spec, (str, BoundaryKind)):
        k = BoundaryKind(spec)
        return ((k, k),) * 3
    spec = list(spec)
    if len(spec) != 3:
        raise ValueError("boundary specification needs one entry per axis")
    out = []
    for entry in spec:
        if isinstance(entry, (str, BoundaryKind)):
            k = BoundaryKind(entry)
            out.append((k, k))
        else:
            lo, hi = entry
            out.append((BoundaryKind(lo), BoundaryKind(hi)))
    return tuple(out)


class Grid3:
    """Cartesian cell grid with halo and the per-cell density/metric fields.

    Parameters
    ----------
    nx, ny, nz : int
        Interior cell counts.
    dx, dy, dz : float
        Cell spacings.
    halo : int
        Ghost layers on every side.
    dtype : numpy dtype
        Floating type of every array (float32 or float64).
    h, rhr, G : ndarray, optional
        Padded density, density ratio between consecutive steps and metric
        factor.  Default to ones.
    """

    def __init__(self, nx, ny, nz, dx=1.0, dy=1.0, dz=1.0, halo=2,
                 dtype=np.float64, h=None, rhr=None, G=None):
        for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
            if int(n) != n or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n}")
        if int(halo) != halo or halo < 0:
            raise ValueError(f"halo must be a non-negative integer, got {halo}")
        self.nx, self.ny, self.nz = int(nx), int(ny), int(nz)
        self.dx, self.dy, self.dz = float(dx), float(dy), float(dz)
        self.halo = int(halo)
        self.dtype = np.dtype(dtype)
        if self.dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
            raise ValueError(f"unsupported precision {self.dtype}")
        self.h = self._field_or_ones(h, "h")
        self.rhr = self._field_or_ones(rhr, "rhr")
        self.G = self._field_or_ones(G, "G")
        inner = self.interior_slices
        if not np.all(self.h[inner] > 0):
            raise ValueError("density h must be positive")
        if not np.all(self.G[inner] > 0):
            raise ValueError("metric factor G must be positive")
        with np.errstate(divide="ignore"):
            self.hi = (1.0 / self.h).astype(self.dtype)

    def _field_or_ones(self, a, name):
        if a is None:
            return np.ones(self.padded_shape, dtype=self.dtype)
        a = np.asarray(a)
        if a.shape == self.shape:
            out = np.ones(self.padded_shape, dtype=self.dtype)
            out[self.interior_slices] = a
            return out
        if a.shape != self.padded_shape:
            raise ValueError(f"{name} has shape {a.shape}, expected {self.shape} "
                             f"or padded {self.padded_shape}")
        return np.array(a, dtype=self.dtype)

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def padded_shape(self):
        H = self.halo
        return (self.nx + 2 * H, self.ny + 2 * H, self.nz + 2 * H)

    @property
    def interior_slices(self):
        H = self.halo
        return tuple(slice(H, H + n) for n in self.shape)

    @property
    def cell_volume(self):
        return self.dx * self.dy * self.dz

    # Kernel-side density is G*h, so a metric factor enters the stencils
    # exactly like a density does.  On cartesian grids G == 1 and these
    # reduce bitwise to h and 1/h.
    @cached_property
    def density(self):
        return (self.G * self.h).astype(self.dtype)

    @cached_property
    def inv_density(self):
        with np.errstate(divide="ignore"):
            return (1.0 / self.density).astype(self.dtype)

    @cached_property
    def face_inv_density(self):
        """``1 / (0.5 * (d[i-1] + d[i]))`` on the faces of each axis."""
        d = self.density
        out = []
        for axis in range(3):
            hm = np.ones_like(d)
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(0, -1)
            hi[axis] = slice(1, None)
            with np.errstate(divide="ignore"):
                hm[tuple(hi)] = 1.0 / (0.5 * (d[tuple(lo)] + d[tuple(hi)]))
            out.append(hm.astype(self.dtype))
        return tuple(out)

    def subgrid(self, offset, shape) -> "Grid3":
        """Grid of the block of ``shape`` cells starting at interior ``offset``.

        Static fields are sliced from this grid's padded arrays, so their
        halos must already be populated.
        """
        sl = tuple(slice(o, o + n + 2 * self.halo) for o, n in zip(offset, shape))
        return Grid3(*shape, dx=self.dx, dy=self.dy, dz=self.dz, halo=self.halo,
                     dtype=self.dtype, h=self.h[sl].copy(), rhr=self.rhr[sl].copy(),
                     G=self.G[sl].copy())

    def with_dtype(self, dtype) -> "Grid3":
        return Grid3(self.nx, self.ny, self.nz, self.dx, self.dy, self.dz, self.halo,
                     dtype, h=self.h, rhr=self.rhr, G=self.G)

    def __repr__(self):
        return (f"Grid3({self.nx}x{self.ny}x{self.nz}, halo={self.halo}, "
                f"dtype={self.dtype.name})")


@dataclass(eq=False)
class Field3:
    """One scalar per cell of ``grid``, halo included."""

    grid: Grid3
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != self.grid.padded_shape:
            raise ValueError(f"data shape {self.data.shape} does not match grid "
                             f"{self.grid.padded_shape}")

    @classmethod
    def zeros(cls, grid: Grid3) -> "Field3":
        return cls(grid, np.zeros(grid.padded_shape, dtype=grid.dtype))

    @classmethod
    def from_interior(cls, grid: Grid3, values) -> "Field3":
        f = cls.zeros(grid)
        f.interior[...] = np.broadcast_to(np.asarray(values), grid.shape)
        return f

    @property
    def interior(self) -> np.ndarray:
        return self.data[self.grid.interior_slices]

    def copy(self) -> "Field3":
        return Field3(self.grid, self.data.copy())


@dataclass(eq=False)
class FaceVelocity:
    """Face-normal transport components in Courant form (C-grid).

    ``u1`` holds x-face values, ``u2`` y-face values and ``u3`` z-face
    values, each in the padded cell layout described in the module
    docstring.  The same container carries antidiffusive pseudo-velocities.
    """

    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    @classmethod
    def zeros(cls, grid: Grid3) -> "FaceVelocity":
        return cls(*(np.zeros(grid.padded_shape, dtype=grid.dtype) for _ in range(3)))

    @property
    def components(self):
        return (self.u1, self.u2, self.u3)

    def astype(self, dtype) -> "FaceVelocity":
        return FaceVelocity(*(np.asarray(c, dtype=dtype) for c in self.components))

    def block(self, offset, shape, halo) -> "FaceVelocity":
        sl = tuple(slice(o, o + n + 2 * halo) for o, n in zip(offset, shape))
        return FaceVelocity(*(c[sl].copy() for c in self.components))


def _axis_index(axis, idx):
    sl = [slice(None)] * 3
    sl[axis] = idx
    return tuple(sl)


def fill_side(a: np.ndarray, axis: int, side: int, kind: BoundaryKind, halo: int,
              n: int, staggered: bool = False, sign: float = 1.0) -> None:
    """Fill the ghost layers of one side of one axis of padded array ``a``.

    ``side`` is 0 for the low end and 1 for the high end.  With
    ``staggered`` the axis is the array's own face axis: the boundary face
    (index ``halo`` or ``halo + n``) is treated as interior for the
    non-periodic rules.  ``sign`` multiplies the values copied by the
    ``POLE`` rule.
    """
    H = halo
    kind = BoundaryKind(kind)
    if kind is BoundaryKind.PERIODIC:
        if n >= H:
            if side == 0:
                a[_axis_index(axis, slice(0, H))] = a[_axis_index(axis, slice(n, n + H))]
            else:
                a[_axis_index(axis, slice(H + n, n + 2 * H))] = a[_axis_index(axis, slice(H, 2 * H))]
            return
        ghosts = range(0, H) if side == 0 else range(H + n, n + 2 * H)
        for g in ghosts:
            a[_axis_index(axis, g)] = a[_axis_index(axis, H + (g - H) % n)]
        return
    if kind is BoundaryKind.POLE:
        _fill_pole(a, axis, side, H, n, staggered, sign)
        return
    # Face arrays keep their boundary face; ghosts start one further out.
    s = 1 if staggered else 0
    if side == 0:
        edge = H
        ghosts = [H - 1 - m for m in range(H - s)] if not staggered else [H - m for m in range(1, H + 1)]
    else:
        edge = H + n - 1 + s
        ghosts = [H + n + s + m for m in range(H - s)]
    for m, g in enumerate(ghosts):
        dst = _axis_index(axis, g)
        if kind is BoundaryKind.ZERO:
            a[dst] = 0
        elif kind is BoundaryKind.COPY:
            a[dst] = a[_axis_index(axis, edge)]
        elif kind is BoundaryKind.NEGATE:
            # mirror about the boundary: ghost m <- interior m (cells), or
            # ghost m+1 <- interior m+1 about the boundary face (faces)
            off = m + s
            src = edge + off if side == 0 else edge - off
            a[dst] = -a[_axis_index(axis, src)]


def _fill_pole(a, axis, side, H, n, staggered, sign, source=None, lon_index=None):
    if axis != 1:
        raise ValueError("pole boundary is only defined on the latitude axis")
    nlon = source.shape[0] if source is not None else a.shape[0] - 2 * H
    if nlon % 2:
        raise ValueError(f"pole boundary needs an even longitude count, got {nlon}")
    if source is None:
        source = a[H:H + nlon]
        lon_index = np.arange(a.shape[0]) - H
    shifted = (lon_index + nlon // 2) % nlon
    if staggered:
        pairs = ([(H - m, H + m) for m in range(1, H + 1)] if side == 0
                 else [(H + n + m, H + n - m) for m in range(1, H)])
    else:
        pairs = ([(H - 1 - m, H + m) for m in range(H)] if side == 0
                 else [(H + n + m, H + n - 1 - m) for m in range(H)])
    for dst, src in pairs:
        a[:, dst, :] = sign * source[shifted, src, :]


def apply_boundary(field, kinds, staggered_axis: int | None = None,
                   sign: float = 1.0):
    """Populate every ghost cell of ``field`` according to ``kinds``.

    Axes are filled in x, y, z order over the full padded extent of the
    other axes, so edge and corner ghosts end up consistent.

    Parameters
    ----------
    field : Field3 or ndarray
        Field (or padded array, together with a grid-shaped halo) to fill
        in place.
    kinds : boundary specification
        Anything accepted by :func:`make_boundaries`.
    staggered_axis : int, optional
        Face axis when ``field`` is a face-velocity component.
    sign : float
        Factor for values copied across a pole.

    Returns
    -------
    The same ``field``.
    """
    a = field.data if isinstance(field, Field3) else field
    if isinstance(field, Field3):
        H, shape = field.grid.halo, field.grid.shape
    else:
        raise TypeError("apply_boundary needs a Field3; wrap raw arrays first")
    if H == 0:
        raise ValueError("no halo allocated")
    kinds = make_boundaries(kinds)
    for axis in range(3):
        for side in (0, 1):
            fill_side(a, axis, side, kinds[axis][side], H, shape[axis],
                      staggered=(staggered_axis == axis), sign=sign)
    return field


def total_mass(field: Field3) -> float:
    """Sum of ``G * h * psi * cell_volume`` over the interior cells."""
    g = field.grid
    inner = g.interior_slices
    w = g.G[inner].astype(np.float64) * g.h[inner].astype(np.float64)
    return float(np.sum(w * field.interior.astype(np.float64)) * g.cell_volume)


def static_boundaries(kinds: Boundaries) -> Boundaries:
    """Boundary rules for positive static fields (densities, ratios)."""
    def conv(k):
        return k if k in (BoundaryKind.PERIODIC, BoundaryKind.POLE) else BoundaryKind.COPY
    return tuple((conv(lo), conv(hi)) for lo, hi in kinds)


def fill_static_halos(grid: Grid3, kinds) -> Grid3:
    """Return a copy of ``grid`` whose h, rhr and G halos follow ``kinds``."""
    kinds = static_boundaries(make_boundaries(kinds))
    arrays = {}
    for name in ("h", "rhr", "G"):
        f = Field3(grid, getattr(grid, name).copy())
        apply_boundary(f, kinds)
        arrays[name] = f.data
    return Grid3(grid.nx, grid.ny, grid.nz, grid.dx, grid.dy, grid.dz, grid.halo,
                 grid.dtype, **arrays)


def fill_velocity_halos(vel: FaceVelocity, grid: Grid3, kinds) -> FaceVelocity:
    """Populate face-velocity ghosts; across a pole the y component flips sign."""
    kinds = make_boundaries(kinds)
    for axis, comp in enumerate(vel.components):
        f = Field3(grid, comp)
        a = f.data
        for ax in range(3):
            for side in (0, 1):
                kind = kinds[ax][side]
                sign = -1.0 if (kind is BoundaryKind.POLE and axis == 1) else 1.0
                fill_side(a, ax, side, kind, grid.halo, grid.shape[ax],
                          staggered=(ax == axis), sign=sign)
    return vel
