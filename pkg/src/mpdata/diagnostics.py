"""Error norms against an exact solution and per-routine wall-clock timers.

Norm definitions (``w`` are the per-cell weights ``G * volume``,
``mean`` and ``var`` are weighted)::

    err0 = sqrt(sum(w * (num - exact)**2) / sum(w))
    linf = max|num - exact|
    emin = min(num) - min(exact)
    emax = max(num) - max(exact)
    err1 = (mean(num) - mean(exact)) / (|mean(exact)| + ep)
    err2 = (var(num) - var(exact)) / (var(exact) + ep)

err1 and err2 are relative differences of the first two moments.
"""
from __future__ import annotations

import csv
import io
import math
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import astuple, dataclass, fields

import numpy as np

NORM_FIELDS = ("emin", "emax", "err0", "err1", "err2", "linf")


@dataclass(frozen=True)
class ErrorNorms:
    emin: float
    emax: float
    err0: float
    err1: float
    err2: float
    linf: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _interior(x):
    # Field3 or a bare interior array
    return np.asarray(x.interior if hasattr(x, "interior") else x, dtype=np.float64)


def default_weights(field):
    g = field.grid
    inner = g.interior_slices
    return g.G[inner].astype(np.float64) * g.cell_volume


def error_norms(num, exact, weights=None, ep: float = 1e-12) -> ErrorNorms:
    """Compare a numerical field against the exact one.

    Parameters
    ----------
    num, exact : Field3 or ndarray
        Interior values on the same grid.
    weights : ndarray, optional
        Per-cell weights; defaults to ``G * volume`` of ``num``'s grid
        (uniform weights for a bare array).
    ep : float
        Guard for the relative moment errors.
    """
    if hasattr(num, "grid") and hasattr(exact, "grid") and num.grid.shape != exact.grid.shape:
        raise ValueError(f"grid mismatch: {num.grid.shape} vs {exact.grid.shape}")
    a, b = _interior(num), _interior(exact)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape} vs {b.shape}")
    if weights is None:
        w = default_weights(num) if hasattr(num, "grid") else np.ones_like(a)
    else:
        w = np.broadcast_to(np.asarray(weights, dtype=np.float64), a.shape)
    wsum = w.sum()
    d = a - b
    mean_a = (w * a).sum() / wsum
    mean_b = (w * b).sum() / wsum
    var_a = (w * (a - mean_a) ** 2).sum() / wsum
    var_b = (w * (b - mean_b) ** 2).sum() / wsum
    return ErrorNorms(
        emin=float(a.min() - b.min()),
        emax=float(a.max() - b.max()),
        err0=float(math.sqrt((w * d * d).sum() / wsum)),
        err1=float((mean_a - mean_b) / (abs(mean_b) + ep)),
        err2=float((var_a - var_b) / (var_b + ep)),
        linf=float(np.abs(d).max()),
    )


@dataclass(frozen=True)
class TimerRow:
    name: str
    calls: int
    avg: float
    min: float
    max: float
    malformed: bool = False


@dataclass
class TimerReport:
    rows: list[TimerRow]

    def __getitem__(self, name) -> TimerRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self):
        return [r.name for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["routine", "calls", "avg", "min", "max"])
        for r in self.rows:
            w.writerow([r.name + (" (malformed)" if r.malformed else ""), r.calls,
                        repr(r.avg), repr(r.min), repr(r.max)])
        return buf.getvalue()

    def to_table(self) -> str:
        width = max([len("routine")] + [len(r.name) + 12 * r.malformed for r in self.rows])
        head = f"{'routine':<{width}} {'calls':>8} {'avg [s]':>12} {'min [s]':>12} {'max [s]':>12}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            name = r.name + (" (malformed)" if r.malformed else "")
            lines.append(f"{name:<{width}} {r.calls:>8d} {r.avg:>12.6f} "
                         f"{r.min:>12.6f} {r.max:>12.6f}")
        return "\n".join(lines)


class Timers:
    """Inclusive wall-clock accumulators keyed by routine and worker.

    The report gives, per routine, the call count (largest over workers)
    and the average, minimum and maximum of the per-worker total times.
    """

    def __init__(self, clock=time.perf_counter):
        self._clock = clock
        self._total = defaultdict(float)
        self._calls = defaultdict(int)
        self._open = {}
        self._bad = set()
        self._lock = threading.Lock()

    def start(self, name, worker=0):
        key = (name, worker)
        with self._lock:
            if key in self._open:
                self._bad.add(name)
            self._open[key] = self._clock()

    def stop(self, name, worker=0):
        key = (name, worker)
        now = self._clock()
        with self._lock:
            t0 = self._open.pop(key, None)
            if t0 is None:
                self._bad.add(name)
                return
            self._total[key] += now - t0
            self._calls[key] += 1

    @contextmanager
    def scope(self, name, worker=0):
        self.start(name, worker)
        try:
            yield
        finally:
            self.stop(name, worker)

    def report(self) -> TimerReport:
        with self._lock:
            names = list(dict.fromkeys([k[0] for k in self._total]
                                       + [k[0] for k in self._open] + sorted(self._bad)))
            rows = []
            for name in names:
                totals = [t for (n, _), t in self._total.items() if n == name]
                calls = [c for (n, _), c in self._calls.items() if n == name]
                malformed = name in self._bad or any(n == name for n, _ in self._open)
                if totals:
                    # clamp: summation rounding must not push avg outside [min, max]
                    avg = min(max(sum(totals) / len(totals), min(totals)), max(totals))
                    rows.append(TimerRow(name, max(calls), avg, min(totals), max(totals),
                                         malformed))
                else:
                    rows.append(TimerRow(name, 0, 0.0, 0.0, 0.0, True))
        return TimerReport(rows)
