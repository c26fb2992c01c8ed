"""Orchestration of MPDATA time steps over a decomposed domain."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .decomposition import (Decomposition, decompose, gather, halo_update, scatter,
                            scatter_velocity)
from .diagnostics import Timers
from .grid import (BoundaryKind, FaceVelocity, Field3, Grid3, apply_boundary,
                   fill_static_halos, make_boundaries, static_boundaries)


class NumericalInstabilityError(RuntimeError):
    """Raised when a phase produces a non-finite value."""

    def __init__(self, phase, step=None):
        self.phase = phase
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite values after phase '{phase}'{where}")


PRECISIONS = {"f32": np.float32, "f64": np.float64}


@dataclass(frozen=True)
class MpdataOptions:
    """Scheme switches.

    ``fct`` defaults to off for the gauge and sphere variants and on for
    the standard variant.  ``upwind_only`` skips every corrective pass
    (plain donor-cell reference runs).
    """

    variant: str = "gauge"
    fct: bool | None = None
    corrective_passes: int = 1
    ep: float | None = None
    precision: str = "f64"
    upwind_only: bool = False

    def __post_init__(self):
        if self.variant not in kernels.VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {sorted(PRECISIONS)}")
        if self.fct is None:
            object.__setattr__(self, "fct", self.variant == "standard")
        if self.ep is None:
            object.__setattr__(self, "ep", 1e-10 if self.precision == "f64" else 1e-6)
        if not self.ep > 0:
            raise ValueError("ep must be positive")
        if int(self.corrective_passes) != self.corrective_passes or self.corrective_passes < 1:
            raise ValueError("corrective_passes must be an integer >= 1")
        # gauge pseudo-velocities are fluxes; the next pass would need a
        # velocity, and in the infinite-gauge limit its correction vanishes
        if self.variant in kernels.GAUGE_VARIANTS and self.corrective_passes > 1:
            raise ValueError(f"the {self.variant} variant supports a single corrective pass")

    @property
    def dtype(self):
        return np.dtype(PRECISIONS[self.precision])


@dataclass(eq=False)
class StepState:
    """Fields of one block during a step.  Only ``x_in`` persists."""

    x_in: Field3
    xant: Field3 | None = None
    pv: FaceVelocity | None = None
    mx: Field3 | None = None
    mn: Field3 | None = None
    cp: Field3 | None = None
    cn: Field3 | None = None


def _check(phase, *arrays, step=None):
    for a in arrays:
        if not np.isfinite(a).all():
            raise NumericalInstabilityError(phase, step)


class MpdataSolver:
    """Advance a tracer with MPDATA on a decomposed grid.

    Parameters
    ----------
    grid : Grid3
        Global grid; static halos (h, rhr, G) must already be filled.
    vel : FaceVelocity
        Global Courant-form face velocities with populated halos.
    opts : MpdataOptions
    boundaries : boundary specification for the tracer
    nprocs : (nprocx, nprocy, nprocz)
    workers : int
        Threads processing subdomains inside each phase.
    timers : Timers, optional
    """

    def __init__(self, grid: Grid3, vel: FaceVelocity, opts: MpdataOptions,
                 boundaries=BoundaryKind.PERIODIC, nprocs=(1, 1, 1), workers=1,
                 timers: Timers | None = None):
        if grid.dtype != opts.dtype:
            grid = grid.with_dtype(opts.dtype)
        if grid.halo < 1:
            raise ValueError("MPDATA needs at least one halo layer")
        self.kinds = make_boundaries(boundaries)
        self.grid = grid = fill_static_halos(grid, self.kinds)
        self.opts = opts
        self.limiter_kinds = static_boundaries(self.kinds)
        self.decomp = decompose(grid, *nprocs, boundaries=self.kinds)
        self.vel = scatter_velocity(vel.astype(opts.dtype), self.decomp)
        self.workers = max(1, int(workers))
        self.timers = timers if timers is not None else Timers()
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None
        self.states: list[StepState] = []
        self.nstep = 0

    # -- state ---------------------------------------------------------
    def set_tracer(self, field: Field3):
        data = np.asarray(field.data, dtype=self.opts.dtype)
        parts = scatter(Field3(self.grid, data), self.decomp)
        self.states = [StepState(p) for p in parts]

    def tracer(self) -> Field3:
        return gather([s.x_in for s in self.states], self.decomp)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- execution -----------------------------------------------------
    def _map(self, name, fn):
        ranks = range(self.decomp.size)

        def run(rank):
            with self.timers.scope(name, worker=rank):
                return fn(rank)

        if self._pool is None:
            return [run(r) for r in ranks]
        return list(self._pool.map(run, ranks))

    def _exchange(self, fields, kinds):
        with self.timers.scope("halo_update"):
            halo_update(fields, self.decomp, kinds)

    def step(self):
        """Advance one time step."""
        self.nstep += 1
        with self.timers.scope("mpdata_step"):
            self._step()

    def _step(self):
        o = self.opts
        step = self.nstep
        states = self.states
        grids = self.decomp.grids
        vel = self.vel
        self._exchange([s.x_in for s in states], self.kinds)

        def upwind(r):
            s = states[r]
            s.xant = kernels.upwind_pass(s.x_in, vel[r], grids[r])
            _check("upwind_pass", s.xant.interior, step=step)

        self._map("upwind_pass", upwind)
        if o.upwind_only:
            for s in states:
                s.x_in, s.xant = s.xant, None
            return
        self._exchange([s.xant for s in states], self.kinds)

        if o.fct:
            def extrema(r):
                s = states[r]
                s.mx, s.mn = kernels.local_extrema(s.x_in, s.xant)
            self._map("local_extrema", extrema)

        current = [s.xant for s in states]
        transport = vel
        for npass in range(o.corrective_passes):
            pvs = [None] * len(states)

            def pseudo(r):
                pvs[r] = kernels.pseudo_velocities(current[r], transport[r], grids[r],
                                                   o.variant, o.ep)
                _check("pseudo_velocities", *(pvs[r].components), step=step)

            self._map("pseudo_velocities", pseudo)

            if o.fct:
                def limit(r):
                    s = states[r]
                    s.cp, s.cn = kernels.fct_coefficients(current[r], s.mx, s.mn, pvs[r],
                                                          grids[r], o.ep, o.variant)
                    _check("fct_coefficients", s.cp.interior, s.cn.interior, step=step)

                self._map("fct_coefficients", limit)
                self._exchange([s.cp for s in states], self.limiter_kinds)
                self._exchange([s.cn for s in states], self.limiter_kinds)

            def correct(r, first=(npass == 0)):
                s = states[r]
                out = kernels.corrective_pass(current[r], pvs[r], s.cp, s.cn, grids[r],
                                              o.fct, o.variant, divide_rhr=first)
                _check("corrective_pass", out.interior, step=step)
                current[r] = out

            self._map("corrective_pass", correct)
            for s, pv in zip(states, pvs):
                s.pv = pv
            if npass + 1 < o.corrective_passes:
                self._exchange(current, self.kinds)
                with self.timers.scope("halo_update"):
                    for d in range(3):
                        comps = [Field3(g, pv.components[d]) for g, pv in zip(grids, pvs)]
                        halo_update(comps, self.decomp, self.kinds,
                                    sign_across_pole=-1.0 if d == 1 else 1.0,
                                    staggered_axis=d)
                transport = pvs
        for s, x in zip(states, current):
            s.x_in = x

    def run(self, nsteps, callback=None):
        for _ in range(nsteps):
            self.step()
            if callback is not None:
                callback(self)


def mpdata_step(state: StepState, vel: FaceVelocity, grid: Grid3 | None = None,
                opts: MpdataOptions | None = None, decomposition=(1, 1, 1),
                boundaries=BoundaryKind.PERIODIC, workers=1) -> StepState:
    """One MPDATA step on a global field.

    ``decomposition`` is either an ``(nprocx, nprocy, nprocz)`` tuple or a
    :class:`Decomposition`.  Returns a new state whose ``x_in`` holds the
    advanced tracer with ghost cells filled.
    """
    opts = opts or MpdataOptions()
    grid = grid or state.x_in.grid
    if isinstance(decomposition, Decomposition):
        nprocs = decomposition.nprocs
        boundaries = decomposition.boundaries
    else:
        nprocs = tuple(decomposition)
    with MpdataSolver(grid, vel, opts, boundaries, nprocs, workers) as solver:
        solver.set_tracer(state.x_in)
        solver.step()
        out = solver.tracer()
    apply_boundary(out, solver.kinds)
    return StepState(out)
