# Compiled twins of protforge.kernels.pure: same contracts, same
# tie-breaking (lowest index wins), same energy rounding.

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, floor, sqrt

cnp.import_array()

BACKEND = "native"

cdef double COUPLING = 0.42 * 0.20 * 332.0
cdef double MIN_DIST = 0.5
cdef double ENERGY_FLOOR = -9.9


cdef inline double _dist(const double[:, ::1] a, Py_ssize_t i,
                         const double[:, ::1] b, Py_ssize_t j) nogil:
    cdef double dx = a[i, 0] - b[j, 0]
    cdef double dy = a[i, 1] - b[j, 1]
    cdef double dz = a[i, 2] - b[j, 2]
    return sqrt(dx * dx + dy * dy + dz * dz)


def hbond_best_two(object n_xyz, object h_xyz, object c_xyz, object o_xyz,
                   object donor_ok, object acceptor_ok, object ca_xyz,
                   double max_ca_dist=9.0):
    cdef const double[:, ::1] nv = np.ascontiguousarray(n_xyz, dtype=np.float64)
    cdef const double[:, ::1] hv = np.ascontiguousarray(h_xyz, dtype=np.float64)
    cdef const double[:, ::1] cv = np.ascontiguousarray(c_xyz, dtype=np.float64)
    cdef const double[:, ::1] ov = np.ascontiguousarray(o_xyz, dtype=np.float64)
    cdef const double[:, ::1] cav = np.ascontiguousarray(ca_xyz, dtype=np.float64)
    cdef const cnp.uint8_t[::1] don = np.ascontiguousarray(donor_ok, dtype=np.uint8)
    cdef const cnp.uint8_t[::1] acc = np.ascontiguousarray(acceptor_ok, dtype=np.uint8)

    cdef Py_ssize_t n = cav.shape[0]
    idx_arr = np.full((n, 2), -1, dtype=np.int64)
    e_arr = np.zeros((n, 2), dtype=np.float64)
    cdef cnp.int64_t[:, ::1] idx = idx_arr
    cdef double[:, ::1] e = e_arr

    cdef Py_ssize_t i, j
    cdef double d_ho, d_hc, d_no, d_nc, energy
    cdef double e0, e1
    cdef Py_ssize_t j0, j1

    with nogil:
        for i in range(n):
            if not don[i]:
                continue
            e0 = INFINITY
            e1 = INFINITY
            j0 = -1
            j1 = -1
            for j in range(n):
                # j == i - 1 is the geometric artifact of the rebuilt H
                if j == i or j == i - 1 or not acc[j]:
                    continue
                if _dist(cav, i, cav, j) >= max_ca_dist:
                    continue
                d_ho = _dist(hv, i, ov, j)
                d_hc = _dist(hv, i, cv, j)
                d_no = _dist(nv, i, ov, j)
                d_nc = _dist(nv, i, cv, j)
                if (d_ho < MIN_DIST or d_hc < MIN_DIST
                        or d_no < MIN_DIST or d_nc < MIN_DIST):
                    energy = ENERGY_FLOOR
                else:
                    energy = COUPLING * (1.0 / d_no + 1.0 / d_hc
                                         - 1.0 / d_ho - 1.0 / d_nc)
                    if energy < ENERGY_FLOOR:
                        energy = ENERGY_FLOOR
                energy = floor(energy * 1000.0 + 0.5) / 1000.0
                if energy >= 0.0:
                    continue
                if energy < e0:
                    e1 = e0
                    j1 = j0
                    e0 = energy
                    j0 = j
                elif energy < e1:
                    e1 = energy
                    j1 = j
            if j0 >= 0:
                idx[i, 0] = j0
                e[i, 0] = e0
            if j1 >= 0:
                idx[i, 1] = j1
                e[i, 1] = e1
    return idx_arr, e_arr


def nearest_centroids(object points, object centroids):
    cdef const double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = c.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    out_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr

    cdef Py_ssize_t i, j, m
    cdef double best, d2, diff
    with nogil:
        for i in range(n):
            best = INFINITY
            out[i] = 0
            for j in range(k):
                d2 = 0.0
                for m in range(d):
                    diff = x[i, m] - c[j, m]
                    d2 += diff * diff
                if d2 < best:
                    best = d2
                    out[i] = j
    return out_arr


def nearest_spatial_neighbors(object ca_xyz, Py_ssize_t min_sep=2):
    cdef const double[:, ::1] ca = np.ascontiguousarray(ca_xyz, dtype=np.float64)
    cdef Py_ssize_t n = ca.shape[0]
    out_arr = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_arr

    cdef Py_ssize_t i, j, sep
    cdef double best, dist
    with nogil:
        for i in range(n):
            best = INFINITY
            for j in range(n):
                sep = i - j if i > j else j - i
                if sep < min_sep:
                    continue
                # 1e-6 A grid: symmetric geometries tie deterministically
                dist = floor(_dist(ca, i, ca, j) * 1e6 + 0.5)
                if dist < best:
                    best = dist
                    out[i] = j
    return out_arr
