# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo membership kernel.

Single tight loop per sample block.  Mirrors ``perspex._mc_fallback``
operation for operation so both backends count exactly the same hits; keep
the two files in sync.  Kind codes: 0 naive, 1 perspective, 2 PL
perspective, 3 extended naive, 4 PL extended naive.
"""

from libc.math cimport pow as c_pow

cdef double Z_FLOOR = 1e-300


cdef inline Py_ssize_t _segment(const double[::1] kx, double w) noexcept nogil:
    # rightmost k with kx[k] <= w, clipped to a valid piece index
    cdef Py_ssize_t lo = 0, hi = kx.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if w < kx[mid]:
            hi = mid
        else:
            lo = mid + 1
    lo -= 1
    if lo < 0:
        lo = 0
    if lo > kx.shape[0] - 2:
        lo = kx.shape[0] - 2
    return lo


cdef inline double _pl_eval(const double[::1] kx, const double[::1] ky, double w) noexcept nogil:
    cdef Py_ssize_t k = _segment(kx, w)
    cdef double slope = (ky[k + 1] - ky[k]) / (kx[k + 1] - kx[k])
    return ky[k] + slope * (w - kx[k])


def count_hits(int kind,
               const double[::1] xs, const double[::1] ys, const double[::1] zs,
               double lo, double hi, double p,
               double sec_z, double sec_x,
               const double[::1] kx, const double[::1] ky,
               double ext_slope):
    cdef Py_ssize_t i, n = xs.shape[0]
    cdef long long hits = 0
    cdef double x, y, z, lower
    cdef bint quad = p == 2.0
    if kind < 0 or kind > 4:
        raise ValueError(f"unknown body kind code {kind}")
    with nogil:
        for i in range(n):
            x = xs[i]
            y = ys[i]
            z = zs[i]
            if not (x >= lo * z and x <= hi * z and y <= sec_z * z + sec_x * x):
                continue
            if kind == 0:
                lower = x * x if quad else c_pow(x, p)
                if y >= lower:
                    hits += 1
            elif kind == 1:
                if z < Z_FLOOR:
                    continue
                if quad:
                    if x * x <= y * z:
                        hits += 1
                elif c_pow(x, p) <= y * c_pow(z, p - 1.0):
                    hits += 1
            elif kind == 2:
                if z < Z_FLOOR:
                    continue
                if z * _pl_eval(kx, ky, x / z) <= y:
                    hits += 1
            elif kind == 3:
                lower = ext_slope * x if x < lo else (x * x if quad else c_pow(x, p))
                if y >= lower:
                    hits += 1
            else:
                lower = ext_slope * x if x < lo else _pl_eval(kx, ky, x)
                if y >= lower:
                    hits += 1
    return int(hits)
