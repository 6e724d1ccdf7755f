# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of rttloc._purepy.

Same residual convention and the same adjacent-pair fold tree, so results
are bit-identical to the numpy fallback (the build disables FP contraction
for this reason). See _purepy.py for the shared contract.
"""

from libc.math cimport sqrt
from libc.stdlib cimport free, malloc


cdef double _fold_inplace(double* buf, Py_ssize_t n) noexcept nogil:
    # Adjacent-pair fold, destroying buf. Matches _purepy._fold_last.
    cdef Py_ssize_t m, i
    if n == 0:
        return 0.0
    while n > 1:
        m = n >> 1
        for i in range(m):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n & 1:
            buf[m] = buf[n - 1]
            n = m + 1
        else:
            n = m
    return buf[0]


def pairwise_sum(double[::1] values):
    cdef Py_ssize_t n = values.shape[0]
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t i
    cdef double total
    if n == 0:
        return 0.0
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                buf[i] = values[i]
            total = _fold_inplace(buf, n)
    finally:
        free(buf)
    return total


def loss_point(double[::1] sx, double[::1] sy, double[::1] st,
               double x, double y, double offset_ns, double slope):
    cdef Py_ssize_t n = sx.shape[0]
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t i
    cdef double dx, dy, d, pred, r, total
    if n == 0:
        return 0.0
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                dx = sx[i] - x
                dy = sy[i] - y
                d = sqrt(dx * dx + dy * dy)
                pred = slope * d
                r = st[i] - (pred + offset_ns)
                buf[i] = r * r
            total = _fold_inplace(buf, n)
    finally:
        free(buf)
    return total


def loss_grid(double[::1] sx, double[::1] sy, double[::1] st,
              double[::1] gx, double[::1] gy, double[::1] offsets,
              double slope, double[:, ::1] out):
    cdef Py_ssize_t npts = gx.shape[0]
    cdef Py_ssize_t noff = offsets.shape[0]
    cdef Py_ssize_t n = sx.shape[0]
    cdef double* dist = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t p, k, i
    cdef double dx, dy, pred, r, off
    if n == 0:
        for p in range(npts):
            for k in range(noff):
                out[p, k] = 0.0
        return
    if dist == NULL or buf == NULL:
        free(dist)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for p in range(npts):
                for i in range(n):
                    dx = sx[i] - gx[p]
                    dy = sy[i] - gy[p]
                    dist[i] = sqrt(dx * dx + dy * dy)
                for k in range(noff):
                    off = offsets[k]
                    for i in range(n):
                        pred = slope * dist[i]
                        r = st[i] - (pred + off)
                        buf[i] = r * r
                    out[p, k] = _fold_inplace(buf, n)
    finally:
        free(dist)
        free(buf)


def profile_loss_grid(double[::1] sx, double[::1] sy, double[::1] st,
                      double[::1] gx, double[::1] gy,
                      double slope, double off_lo, double off_hi,
                      double[::1] loss_out, double[::1] off_out):
    cdef Py_ssize_t npts = gx.shape[0]
    cdef Py_ssize_t n = sx.shape[0]
    cdef double* res = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t p, i
    cdef double dx, dy, d, r, m, off, rr
    if n == 0:
        for p in range(npts):
            loss_out[p] = 0.0
            off_out[p] = off_lo
        return
    if res == NULL or buf == NULL:
        free(res)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for p in range(npts):
                for i in range(n):
                    dx = sx[i] - gx[p]
                    dy = sy[i] - gy[p]
                    d = sqrt(dx * dx + dy * dy)
                    r = st[i] - slope * d
                    res[i] = r
                    buf[i] = r
                m = _fold_inplace(buf, n) / n
                off = m
                if off < off_lo:
                    off = off_lo
                if off > off_hi:
                    off = off_hi
                for i in range(n):
                    rr = res[i] - off
                    buf[i] = rr * rr
                loss_out[p] = _fold_inplace(buf, n)
                off_out[p] = off
    finally:
        free(res)
        free(buf)


def client_loss_point(double[::1] ax, double[::1] ay, double[::1] aoff,
                      double[::1] aslope, double[::1] art, double[::1] weights,
                      double x, double y):
    cdef Py_ssize_t n = ax.shape[0]
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t i
    cdef double dx, dy, d, pred, r, total
    if n == 0:
        return 0.0
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                dx = ax[i] - x
                dy = ay[i] - y
                d = sqrt(dx * dx + dy * dy)
                pred = aslope[i] * d
                r = art[i] - (pred + aoff[i])
                buf[i] = weights[i] * (r * r)
            total = _fold_inplace(buf, n)
    finally:
        free(buf)
    return total


def client_loss_grid(double[::1] ax, double[::1] ay, double[::1] aoff,
                     double[::1] aslope, double[::1] art, double[::1] weights,
                     double[::1] gx, double[::1] gy, double[::1] out):
    cdef Py_ssize_t npts = gx.shape[0]
    cdef Py_ssize_t n = ax.shape[0]
    cdef double* buf = <double*> malloc(n * sizeof(double)) if n else NULL
    cdef Py_ssize_t p, i
    cdef double dx, dy, d, pred, r
    if n == 0:
        for p in range(npts):
            out[p] = 0.0
        return
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for p in range(npts):
                for i in range(n):
                    dx = ax[i] - gx[p]
                    dy = ay[i] - gy[p]
                    d = sqrt(dx * dx + dy * dy)
                    pred = aslope[i] * d
                    r = art[i] - (pred + aoff[i])
                    buf[i] = weights[i] * (r * r)
                out[p] = _fold_inplace(buf, n)
    finally:
        free(buf)
