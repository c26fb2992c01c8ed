"""Compiled inner loops behind :mod:`mpdata.kernels`.

Each loop reproduces the arithmetic of the array formulas in
``kernels`` term by term, in the same order, so results do not depend on
which path produced them.  Scalar constants arrive in a small array of
the field dtype (``k``) so single precision stays single precision:
``k = [0, 1, 0.125, 0.25, 0.5, ep]``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)


def constants(dtype, ep):
    return np.array([0.0, 1.0, 0.125, 0.25, 0.5, ep], dtype=dtype)


@njit(**_OPTS)
def _donor(y1, y2, a, zero):
    return max(zero, a) * y1 - (-min(zero, a) * y2)


@njit(**_OPTS)
def _rat2(x1, x2, gauge, k):
    if gauge:
        return (x2 - x1) * k[4]
    return (x2 - x1) / (abs(x1) + abs(x2) + k[5])


@njit(**_OPTS)
def _rat4(z0, z1, z2, z3, gauge, k):
    if gauge:
        return (z3 + z2 - z1 - z0) * k[3]
    return (z3 + z2 - z1 - z0) / (abs(z0) + abs(z1) + abs(z2) + abs(z3) + k[5])


@njit(**_OPTS)
def upwind(x, u1, u2, u3, rhr, invd, out, n0, n1, n2, H, k):
    zero = k[0]
    for i in range(H, H + n0):
        for j in range(H, H + n1):
            for l in range(H, H + n2):
                xc = x[i, j, l]
                div = (_donor(xc, x[i + 1, j, l], u1[i + 1, j, l], zero)
                       - _donor(x[i - 1, j, l], xc, u1[i, j, l], zero))
                div = (div + _donor(xc, x[i, j + 1, l], u2[i, j + 1, l], zero)
                       - _donor(x[i, j - 1, l], xc, u2[i, j, l], zero))
                div = (div + _donor(xc, x[i, j, l + 1], u3[i, j, l + 1], zero)
                       - _donor(x[i, j, l - 1], xc, u3[i, j, l], zero))
                out[i, j, l] = rhr[i, j, l] * (xc - div * invd[i, j, l])


@njit(**_OPTS)
def pseudo_axis(xa, ud, ua, ub, hm, out, n0, n1, n2, H, d, a, b, gauge, k):
    """Pseudo-velocity on the faces of axis ``d``; ``a``, ``b`` transverse."""
    d0, d1, d2 = int(d == 0), int(d == 1), int(d == 2)
    a0, a1, a2 = int(a == 0), int(a == 1), int(a == 2)
    b0, b1, b2 = int(b == 0), int(b == 1), int(b == 2)
    # z outermost: single-level sphere grids would otherwise run a length-one
    # inner loop; cubes lose little
    for l in range(H, H + n2 + d2):
        for i in range(H, H + n0 + d0):
            for j in range(H, H + n1 + d1):
                u = ud[i, j, l]
                h = hm[i, j, l]
                im, jm, lm = i - d0, j - d1, l - d2
                first = (abs(u) - u * u * h) * _rat2(xa[im, jm, lm], xa[i, j, l], gauge, k)
                sa = (ua[im, jm, lm] + ua[im + a0, jm + a1, lm + a2]
                      + ua[i + a0, j + a1, l + a2] + ua[i, j, l])
                ra = _rat4(xa[im - a0, jm - a1, lm - a2], xa[i - a0, j - a1, l - a2],
                           xa[im + a0, jm + a1, lm + a2], xa[i + a0, j + a1, l + a2], gauge, k)
                sb = (ub[im, jm, lm] + ub[im + b0, jm + b1, lm + b2]
                      + ub[i + b0, j + b1, l + b2] + ub[i, j, l])
                rb = _rat4(xa[im - b0, jm - b1, lm - b2], xa[i - b0, j - b1, l - b2],
                           xa[im + b0, jm + b1, lm + b2], xa[i + b0, j + b1, l + b2], gauge, k)
                out[i, j, l] = first - k[2] * u * h * (sa * ra + sb * rb)


@njit(**_OPTS)
def extrema(xi, xa, mx, mn, n0, n1, n2, H):
    for i in range(H, H + n0):
        for j in range(H, H + n1):
            for l in range(H, H + n2):
                hi = xi[i - 1, j, l]
                lo = hi
                for src in (xi, xa):
                    for v in (src[i - 1, j, l], src[i, j, l], src[i + 1, j, l],
                              src[i, j - 1, l], src[i, j + 1, l],
                              src[i, j, l - 1], src[i, j, l + 1]):
                        hi = max(hi, v)
                        lo = min(lo, v)
                mx[i, j, l] = hi
                mn[i, j, l] = lo


@njit(**_OPTS)
def donor_fluxes(x, v, out, n0, n1, n2, H, d, k):
    """Standard-flavour antidiffusive flux on the faces of axis ``d``."""
    d0, d1, d2 = int(d == 0), int(d == 1), int(d == 2)
    zero = k[0]
    for i in range(H, H + n0 + d0):
        for j in range(H, H + n1 + d1):
            for l in range(H, H + n2 + d2):
                out[i, j, l] = _donor(x[i - d0, j - d1, l - d2], x[i, j, l], v[i, j, l], zero)


@njit(**_OPTS)
def limiters(xa, mx, mn, f1, f2, f3, dens, cp, cn, n0, n1, n2, H, k):
    zero = k[0]
    for i in range(H, H + n0):
        for j in range(H, H + n1):
            for l in range(H, H + n2):
                r1, l1 = f1[i + 1, j, l], f1[i, j, l]
                r2, l2 = f2[i, j + 1, l], f2[i, j, l]
                r3, l3 = f3[i, j, l + 1], f3[i, j, l]
                inflow = -min(zero, r1) + max(zero, l1)
                inflow = inflow + -min(zero, r2) + max(zero, l2)
                inflow = inflow + -min(zero, r3) + max(zero, l3)
                outflow = max(zero, r1) + -min(zero, l1)
                outflow = outflow + max(zero, r2) + -min(zero, l2)
                outflow = outflow + max(zero, r3) + -min(zero, l3)
                x = xa[i, j, l]
                cp[i, j, l] = (mx[i, j, l] - x) * dens[i, j, l] / (inflow + k[5])
                cn[i, j, l] = (x - mn[i, j, l]) * dens[i, j, l] / (outflow + k[5])


@njit(**_OPTS)
def limit_axis(f, cp, cn, out, n0, n1, n2, H, d, k):
    """Limited flux on the faces of axis ``d``."""
    d0, d1, d2 = int(d == 0), int(d == 1), int(d == 2)
    zero, one = k[0], k[1]
    for i in range(H, H + n0 + d0):
        for j in range(H, H + n1 + d1):
            for l in range(H, H + n2 + d2):
                v = f[i, j, l]
                im, jm, lm = i - d0, j - d1, l - d2
                out[i, j, l] = (max(zero, v) * min(min(one, cp[i, j, l]), cn[im, jm, lm])
                                - -min(zero, v) * min(min(one, cp[im, jm, lm]), cn[i, j, l]))


@njit(**_OPTS)
def correct(xa, f1, f2, f3, rhr, invd, out, n0, n1, n2, H, divide_rhr):
    for i in range(H, H + n0):
        for j in range(H, H + n1):
            for l in range(H, H + n2):
                div = f1[i + 1, j, l] - f1[i, j, l]
                div = div + f2[i, j + 1, l] - f2[i, j, l]
                div = div + f3[i, j, l + 1] - f3[i, j, l]
                base = xa[i, j, l] / rhr[i, j, l] if divide_rhr else xa[i, j, l]
                out[i, j, l] = base - div * invd[i, j, l]
