# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. ``_kernels_py`` is the reference implementation; keep them in step."""

import numpy as np

from libc.math cimport exp, pow, sqrt


cdef inline double _expected(double r_self, double r_opp) nogil:
    return 1.0 / (1.0 + pow(10.0, (r_opp - r_self) / 400.0))


def elo_walk(double r0, double r_opp, const double[::1] scores, double k):
    cdef Py_ssize_t n = scores.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double r = r0
    with nogil:
        for i in range(n):
            r = r + k * (scores[i] - _expected(r, r_opp))
            o[i] = r
    return out


def elo_batch_delta(double r_self, const double[::1] r_opp, const double[:, ::1] scores, double k):
    cdef Py_ssize_t b, g, nb = scores.shape[0], ng = scores.shape[1]
    cdef double e, total = 0.0
    with nogil:
        for b in range(nb):
            e = _expected(r_self, r_opp[b])
            for g in range(ng):
                total = total + (scores[b, g] - e)
    return k * total


def group_advantages(const double[:, ::1] rewards):
    cdef Py_ssize_t b, g, nb = rewards.shape[0], ng = rewards.shape[1]
    out = np.zeros((nb, ng), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double mean, var, sd, lo, hi, d
    with nogil:
        for b in range(nb):
            lo = rewards[b, 0]
            hi = lo
            mean = 0.0
            for g in range(ng):
                mean = mean + rewards[b, g]
                if rewards[b, g] < lo:
                    lo = rewards[b, g]
                if rewards[b, g] > hi:
                    hi = rewards[b, g]
            if lo == hi:
                continue
            mean = mean / ng
            var = 0.0
            for g in range(ng):
                d = rewards[b, g] - mean
                var = var + d * d
            sd = sqrt(var / ng)
            if sd == 0.0:
                continue
            for g in range(ng):
                o[b, g] = (rewards[b, g] - mean) / sd
    return out


def clipped_surrogate(const double[:, ::1] outputs, const double[:, ::1] advantages,
                      double skill, double skill_old, double spread, double eps):
    """Batch mean of the per-group clipped surrogate and its derivative in ``skill``."""
    cdef Py_ssize_t b, g, nb = outputs.shape[0], ng = outputs.shape[1]
    cdef double inv_var = 1.0 / (spread * spread)
    cdef double o, a, rho, drho, unclipped, clipped, value = 0.0, grad = 0.0
    cdef double lo = 1.0 - eps, hi = 1.0 + eps
    with nogil:
        for b in range(nb):
            for g in range(ng):
                o = outputs[b, g]
                a = advantages[b, g]
                rho = exp(0.5 * inv_var * ((o - skill_old) * (o - skill_old) - (o - skill) * (o - skill)))
                drho = rho * (o - skill) * inv_var
                unclipped = rho * a
                if rho > hi:
                    clipped = hi * a
                elif rho < lo:
                    clipped = lo * a
                else:
                    clipped = unclipped
                if clipped < unclipped:
                    value = value + clipped
                else:
                    value = value + unclipped
                    grad = grad + drho * a
    return value / (nb * ng), grad / (nb * ng)


def inverse_cdf_sample(const double[::1] probs, const double[::1] u):
    cdef Py_ssize_t n = u.shape[0], m = probs.shape[0], i, j
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] o = out
    cdef double c
    with nogil:
        for i in range(n):
            c = 0.0
            for j in range(m):
                c = c + probs[j]
                if u[i] < c:
                    break
            o[i] = j
    return out
