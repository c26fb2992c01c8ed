import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from mpdata import FaceVelocity, Field3, Grid3  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

DTYPES = [np.float64, np.float32]
# relative tolerance of kernel-vs-oracle comparisons per precision
ORACLE_TOL = {np.float64: 1e-14, np.float32: 1e-5}


class Instance:
    """Random padded inputs for the kernels (every ghost populated)."""

    def __init__(self, rng, dtype=np.float64, shape=None, halo=2, metric=True,
                 cmax=0.4, positive=False):
        shape = shape or tuple(int(s) for s in rng.integers(5, 7, size=3))
        P = tuple(s + 2 * halo for s in shape)

        def r(lo, hi):
            return rng.uniform(lo, hi, P).astype(dtype)

        self.shape, self.H, self.dtype = shape, halo, dtype
        self.grid = Grid3(*shape, halo=halo, dtype=dtype, h=r(0.5, 2.0), rhr=r(0.8, 1.25),
                          G=r(0.5, 1.5) if metric else None)
        lo = 0.0 if positive else -1.0
        self.x_in = Field3(self.grid, r(lo, 1.0))
        self.xant = Field3(self.grid, r(lo, 1.0))
        self.vel = FaceVelocity(r(-cmax, cmax), r(-cmax, cmax), r(-cmax, cmax))

    @property
    def static(self):
        g = self.grid
        return g.h, g.G, g.rhr


def rel_err(got, want, inner=None):
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    if inner is not None:
        got, want = got[inner], want[inner]
    scale = np.max(np.abs(want))
    return float(np.max(np.abs(got - want)) / (scale if scale > 0 else 1.0))


def face_slices(grid, axis):
    H = grid.halo
    sl = [slice(H, H + n) for n in grid.shape]
    sl[axis] = slice(H, H + grid.shape[axis] + 1)
    return tuple(sl)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items())
                if name.split(".")[-1] == "test_acceptance"), None)
    lines = mod.summary_lines() if mod is not None else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
