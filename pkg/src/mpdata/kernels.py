"""The stencil phases of one MPDATA step on a padded block.

Each phase reads padded input arrays and writes a fresh output over the
interior cells (or, for pseudo-velocities, over every interior face).
Neighbour reads reach one cell into the halo.

Two flavours share the code.  The *gauge* flavour (infinite-gauge MPDATA,
also used on the sphere) treats the pseudo-velocity itself as the
antidiffusive flux and uses plain differences::

    rat2(x1, x2)         = 0.5 * (x2 - x1)
    rat4(z0, z1, z2, z3) = 0.25 * (z3 + z2 - z1 - z0)

The *standard* flavour normalises those differences by the local field
magnitude, turning them into true velocities; its antidiffusive flux is
the donor-cell flux of the running solution::

    rat2(x1, x2)         = (x2 - x1) / (|x1| + |x2| + ep)
    rat4(z0, z1, z2, z3) = (z3 + z2 - z1 - z0) / (|z0| + |z1| + |z2| + |z3| + ep)

Both reduce to the same second-order truncation-error correction.
"""
from __future__ import annotations

import numpy as np

from . import _loops
from .grid import FaceVelocity, Field3, Grid3

GAUGE_VARIANTS = ("gauge", "sphere")
VARIANTS = ("gauge", "standard", "sphere")

def donor(y1, y2, a):
    """Donor-cell flux through a face with Courant number ``a``."""
    return np.maximum(0.0, a) * y1 - (-np.minimum(0.0, a) * y2)


def pp(y):
    return np.maximum(0.0, y)


def pn(y):
    return -np.minimum(0.0, y)


def rat2(x1, x2, variant="gauge", ep=1e-10):
    if variant in GAUGE_VARIANTS:
        return (x2 - x1) * 0.5
    return (x2 - x1) / (np.abs(x1) + np.abs(x2) + ep)


def rat4(z0, z1, z2, z3, variant="gauge", ep=1e-10):
    if variant in GAUGE_VARIANTS:
        return (z3 + z2 - z1 - z0) * 0.25
    return (z3 + z2 - z1 - z0) / (np.abs(z0) + np.abs(z1) + np.abs(z2) + np.abs(z3) + ep)


def vdyf(x1, x2, a, rinv, variant="gauge", ep=1e-10):
    """Diffusive part of the pseudo-velocity on a face."""
    return (np.abs(a) - a ** 2 * rinv) * rat2(x1, x2, variant, ep)


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValueError(f"unknown MPDATA variant {variant!r}; expected one of {VARIANTS}")


def _require_halo(grid):
    if grid.halo < 1:
        raise ValueError("MPDATA stencils need at least one halo layer")


def _dims(grid):
    return (*grid.shape, grid.halo)


def upwind_pass(x_in: Field3, vel: FaceVelocity, grid: Grid3 | None = None) -> Field3:
    """First-order donor-cell step: ``xant = rhr*(x_in - div(F)*hi)``."""
    grid = grid or x_in.grid
    _require_halo(grid)
    out = Field3.zeros(grid)
    _loops.upwind(x_in.data, *vel.components, grid.rhr, grid.inv_density, out.data,
                  *_dims(grid), _loops.constants(grid.dtype, 0.0))
    return out


def pseudo_velocities(xant: Field3, vel: FaceVelocity, grid: Grid3 | None = None,
                      variant: str = "gauge", ep: float = 1e-10) -> FaceVelocity:
    """Antidiffusive pseudo-velocities on every interior face.

    The x-face formula is applied along each axis with the axes permuted
    cyclically (x -> y -> z), so the y-face value uses the z then x
    transverse terms and the z-face value the x then y terms.
    """
    grid = grid or xant.grid
    _require_halo(grid)
    _check_variant(variant)
    comps = vel.components
    out = FaceVelocity.zeros(grid)
    k = _loops.constants(grid.dtype, ep)
    gauge = variant in GAUGE_VARIANTS
    for d in range(3):
        a, b = (d + 1) % 3, (d + 2) % 3
        _loops.pseudo_axis(xant.data, comps[d], comps[a], comps[b],
                           grid.face_inv_density[d], out.components[d],
                           *_dims(grid), d, a, b, gauge, k)
    return out


def local_extrema(x_in: Field3, xant: Field3) -> tuple[Field3, Field3]:
    """Max and min over each cell and its six face neighbours, both fields."""
    grid = x_in.grid
    _require_halo(grid)
    mx, mn = Field3.zeros(grid), Field3.zeros(grid)
    _loops.extrema(x_in.data, xant.data, mx.data, mn.data, *_dims(grid))
    return mx, mn


def antidiffusive_fluxes(x: Field3, pv: FaceVelocity, variant: str = "gauge") -> FaceVelocity:
    """Flux carried by the pseudo-velocities.

    In the gauge flavour the pseudo-velocity already is the flux.  In the
    standard flavour it is the donor-cell flux of ``x`` on each face.
    """
    _check_variant(variant)
    if variant in GAUGE_VARIANTS:
        return pv
    grid = x.grid
    out = FaceVelocity.zeros(grid)
    k = _loops.constants(grid.dtype, 0.0)
    for d, v in enumerate(pv.components):
        _loops.donor_fluxes(x.data, v, out.components[d], *_dims(grid), d, k)
    return out


def fct_coefficients(xant: Field3, mx: Field3, mn: Field3, pv: FaceVelocity,
                     grid: Grid3 | None = None, ep: float = 1e-10,
                     variant: str = "gauge") -> tuple[Field3, Field3]:
    """Limiting ratios ``cp`` (room to grow) and ``cn`` (room to shrink)."""
    grid = grid or xant.grid
    _require_halo(grid)
    F = antidiffusive_fluxes(xant, pv, variant).components
    cp, cn = Field3.zeros(grid), Field3.zeros(grid)
    _loops.limiters(xant.data, mx.data, mn.data, *F, grid.density, cp.data, cn.data,
                    *_dims(grid), _loops.constants(grid.dtype, ep))
    return cp, cn


def corrective_pass(xant: Field3, pv: FaceVelocity, cp: Field3 | None, cn: Field3 | None,
                    grid: Grid3 | None = None, fct: bool = True, variant: str = "gauge",
                    divide_rhr: bool = True) -> Field3:
    """Second upwind iteration with (optionally limited) antidiffusive fluxes."""
    grid = grid or xant.grid
    _require_halo(grid)
    F = antidiffusive_fluxes(xant, pv, variant).components
    if fct:
        k = _loops.constants(grid.dtype, 0.0)
        limited = FaceVelocity.zeros(grid)
        for d in range(3):
            _loops.limit_axis(F[d], cp.data, cn.data, limited.components[d],
                              *_dims(grid), d, k)
        F = limited.components
    out = Field3.zeros(grid)
    _loops.correct(xant.data, *F, grid.rhr, grid.inv_density, out.data, *_dims(grid),
                   bool(divide_rhr))
    return out
