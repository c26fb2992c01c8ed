"""MPDATA advection on structured grids."""
from .grid import BoundaryKind, FaceVelocity, Field3, Grid3, apply_boundary, total_mass
from .decomposition import Decomposition, decompose, gather, halo_update, scatter
from .kernels import (corrective_pass, donor, fct_coefficients, local_extrema,
                      pseudo_velocities, rat4, upwind_pass, vdyf)
from .stepper import (MpdataOptions, MpdataSolver, NumericalInstabilityError, StepState,
                      mpdata_step)
from .diagnostics import ErrorNorms, TimerReport, Timers, error_norms
from .testcases import TestPreset, analytic_solution, make_preset

__version__ = "0.1.0"
