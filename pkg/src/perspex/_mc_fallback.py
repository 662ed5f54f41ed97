"""Vectorized numpy membership kernel, the fallback when the compiled
extension is not built.

Must take bit-identical hit decisions to ``perspex._mc_kernel``: same
comparison set, same arithmetic per sample (the compiled kernel is built
with fp contraction off for this reason).  Kind codes: 0 naive, 1
perspective, 2 PL perspective, 3 extended naive, 4 PL extended naive.
"""

from __future__ import annotations

import numpy as np

# below this the on-fraction x/z is considered the measure-zero z=0 face
Z_FLOOR = 1e-300


def _power(v: np.ndarray, q: float) -> np.ndarray:
    if q == 1.0:
        return v
    if q == 2.0:
        return v * v
    return np.power(v, q)


def _pl_eval(kx: np.ndarray, ky: np.ndarray, w: np.ndarray) -> np.ndarray:
    k = np.searchsorted(kx, w, side="right") - 1
    np.clip(k, 0, kx.size - 2, out=k)
    slope = (ky[k + 1] - ky[k]) / (kx[k + 1] - kx[k])
    return ky[k] + slope * (w - kx[k])


def membership_mask(kind, xs, ys, zs, lo, hi, p, sec_z, sec_x, kx, ky, ext_slope):
    box = (xs >= lo * zs) & (xs <= hi * zs) & (ys <= sec_z * zs + sec_x * xs)
    if kind == 0:
        lower = ys >= _power(xs, p)
    elif kind == 1:
        on = zs >= Z_FLOOR
        lower = on & (_power(xs, p) <= ys * _power(zs, p - 1.0))
    elif kind == 2:
        on = zs >= Z_FLOOR
        w = xs / np.where(on, zs, 1.0)
        lower = on & (zs * _pl_eval(kx, ky, w) <= ys)
    elif kind == 3:
        lower = ys >= np.where(xs < lo, ext_slope * xs, _power(xs, p))
    elif kind == 4:
        lower = ys >= np.where(xs < lo, ext_slope * xs, _pl_eval(kx, ky, xs))
    else:
        raise ValueError(f"unknown body kind code {kind}")
    return box & lower


def count_hits(kind, xs, ys, zs, lo, hi, p, sec_z, sec_x, kx, ky, ext_slope) -> int:
    return int(
        np.count_nonzero(
            membership_mask(kind, xs, ys, zs, lo, hi, p, sec_z, sec_x, kx, ky, ext_slope)
        )
    )
