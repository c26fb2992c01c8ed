"""In-process domain decomposition and halo exchange.

A global grid is tiled into ``nprocx * nprocy * nprocz`` equal blocks.
Each block owns a padded local copy of every dynamic field; the halo
exchange copies neighbour interiors into local ghost layers (and applies
physical boundary rules where a side has no neighbour), producing exactly
the ghost values a single-domain run would hold.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import (BoundaryKind, Field3, FaceVelocity, Grid3, _fill_pole,
                   fill_side, make_boundaries)


@dataclass(frozen=True)
class Subdomain:
    rank: int
    coords: tuple[int, int, int]
    offset: tuple[int, int, int]
    shape: tuple[int, int, int]
    # neighbors[axis][side] -> rank or None for a physical boundary
    neighbors: tuple[tuple[int | None, int | None], ...]


@dataclass
class Decomposition:
    grid: Grid3
    nprocs: tuple[int, int, int]
    boundaries: tuple
    subdomains: list[Subdomain]
    grids: list[Grid3] = field(repr=False)

    @property
    def size(self):
        return len(self.subdomains)

    def rank_of(self, coords):
        px, py, pz = self.nprocs
        cx, cy, cz = coords
        return (cz * py + cy) * px + cx

    def neighbor_pairs(self):
        """Unordered set of ranks sharing an interior face."""
        pairs = set()
        for s in self.subdomains:
            for axis in range(3):
                for nb in s.neighbors[axis]:
                    if nb is not None and nb != s.rank:
                        pairs.add((min(s.rank, nb), max(s.rank, nb), axis))
        return pairs


def decompose(grid: Grid3, nprocx: int, nprocy: int, nprocz: int,
              boundaries=BoundaryKind.COPY) -> Decomposition:
    """Split ``grid`` into equal blocks.

    Each count must divide the matching global extent.  Periodic sides
    link the first and last blocks of an axis (a block may be its own
    neighbour); any other boundary kind leaves the side without neighbour.
    """
    counts = (int(nprocx), int(nprocy), int(nprocz))
    kinds = make_boundaries(boundaries)
    for axis, (p, n) in enumerate(zip(counts, grid.shape)):
        if p < 1:
            raise ValueError(f"subdomain count along axis {axis} must be >= 1")
        if n % p:
            raise ValueError(
                f"{'xyz'[axis]} extent {n} is not divisible by nproc{'xyz'[axis]}={p}; "
                f"choose a divisor of {n}")
    for axis in range(3):
        lo, hi = kinds[axis]
        if (lo is BoundaryKind.PERIODIC) != (hi is BoundaryKind.PERIODIC):
            raise ValueError(f"axis {axis}: periodic boundary must be set on both sides")
    if BoundaryKind.POLE in kinds[1] and (counts[1] != 1 or counts[2] != 1):
        raise ValueError("grids with pole boundaries can only be split in longitude")
    local = tuple(n // p for n, p in zip(grid.shape, counts))
    for axis, (p, n) in enumerate(zip(counts, local)):
        if p > 1 and n < grid.halo:
            raise ValueError(f"subdomains along axis {axis} are thinner ({n}) than the halo")
    subs, grids = [], []
    px, py, pz = counts
    for cz in range(pz):
        for cy in range(py):
            for cx in range(px):
                coords = (cx, cy, cz)
                nbs = []
                for axis in range(3):
                    side_nbs = []
                    for step in (-1, 1):
                        c = list(coords)
                        c[axis] += step
                        if 0 <= c[axis] < counts[axis]:
                            side_nbs.append(c)
                        elif kinds[axis][0] is BoundaryKind.PERIODIC:
                            c[axis] %= counts[axis]
                            side_nbs.append(c)
                        else:
                            side_nbs.append(None)
                    nbs.append(tuple(None if c is None else (c[2] * py + c[1]) * px + c[0]
                                     for c in side_nbs))
                offset = tuple(c * n for c, n in zip(coords, local))
                rank = (cz * py + cy) * px + cx
                subs.append(Subdomain(rank, coords, offset, local, tuple(nbs)))
                grids.append(grid.subgrid(offset, local))
    return Decomposition(grid, counts, kinds, subs, grids)


def scatter(field: Field3, decomp: Decomposition) -> list[Field3]:
    """Local copies (halo included) of a global field, one per subdomain."""
    H = decomp.grid.halo
    parts = []
    for s, g in zip(decomp.subdomains, decomp.grids):
        sl = tuple(slice(o, o + n + 2 * H) for o, n in zip(s.offset, s.shape))
        parts.append(Field3(g, field.data[sl].copy()))
    return parts


def scatter_velocity(vel: FaceVelocity, decomp: Decomposition) -> list[FaceVelocity]:
    H = decomp.grid.halo
    return [vel.block(s.offset, s.shape, H) for s in decomp.subdomains]


def gather(parts: Sequence[Field3], decomp: Decomposition) -> Field3:
    """Assemble subdomain interiors into a global field (ghosts left zero)."""
    out = Field3.zeros(decomp.grid)
    H = decomp.grid.halo
    for s, p in zip(decomp.subdomains, parts):
        sl = tuple(slice(H + o, H + o + n) for o, n in zip(s.offset, s.shape))
        out.data[sl] = p.interior
    return out


def _slab(axis, lo, hi):
    sl = [slice(None)] * 3
    sl[axis] = slice(lo, hi)
    return tuple(sl)


def halo_update(parts: Sequence[Field3], decomp: Decomposition, kinds=None,
                sign_across_pole: float = 1.0,
                staggered_axis: int | None = None) -> Sequence[Field3]:
    """Refresh every ghost layer of every subdomain, in place.

    Axes are processed in x, y, z order; each pass copies full transverse
    slabs (ghosts included) so edges and corners match a single-domain
    :func:`~mpdata.grid.apply_boundary`.  ``kinds`` overrides the
    decomposition's boundary rules for physical sides (a periodic axis
    stays periodic).  ``staggered_axis`` marks face-velocity components.
    """
    if len(parts) != decomp.size:
        raise ValueError(f"expected {decomp.size} subdomain fields, got {len(parts)}")
    H = decomp.grid.halo
    if H == 0:
        raise ValueError("no halo allocated")
    for p, s in zip(parts, decomp.subdomains):
        if p.grid.halo != H or p.grid.shape != s.shape:
            raise ValueError("subdomain field structure does not match the decomposition "
                             f"(halo {p.grid.halo} vs {H}, shape {p.grid.shape} vs {s.shape})")
    kinds = decomp.boundaries if kinds is None else make_boundaries(kinds)
    for axis in range(3):
        pole_rows = None
        for s, p in zip(decomp.subdomains, parts):
            n = s.shape[axis]
            a = p.data
            for side in (0, 1):
                nb = s.neighbors[axis][side]
                stag = staggered_axis == axis
                if nb == s.rank:
                    fill_side(a, axis, side, BoundaryKind.PERIODIC, H, n, staggered=stag)
                    continue
                if nb is not None:
                    src = parts[nb].data
                    if side == 0:
                        a[_slab(axis, 0, H)] = src[_slab(axis, n, n + H)]
                    else:
                        a[_slab(axis, H + n, n + 2 * H)] = src[_slab(axis, H, 2 * H)]
                    continue
                kind = kinds[axis][side]
                if kind is BoundaryKind.POLE:
                    if pole_rows is None:
                        pole_rows = _longitude_rows(parts, decomp)
                    lon_index = s.offset[0] + np.arange(a.shape[0]) - H
                    _fill_pole(a, axis, side, H, n, stag, sign_across_pole,
                               source=pole_rows, lon_index=lon_index)
                else:
                    fill_side(a, axis, side, kind, H, n, staggered=stag)
    return parts


def _longitude_rows(parts, decomp):
    """Interior x-range of every subdomain, stitched along longitude."""
    H = decomp.grid.halo
    return np.concatenate([p.data[H:H + s.shape[0]] for s, p in
                           sorted(zip(decomp.subdomains, parts), key=lambda t: t[0].coords[0])],
                          axis=0)
