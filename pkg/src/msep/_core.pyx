# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evaluation kernels: likelihood, intensity, compensator, baseline.

Mirrors msep._kernels_py; the backend shim exposes whichever is available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, isfinite, log, pow

cnp.import_array()


cdef inline double _phi(double t, double d1, double d2) nogil:
    return (d2 * (d1 - 1.0) / d1) * pow(1.0 + (d2 / d1) * t, -d1)


cdef inline double _phi_cdf(double t, double d1, double d2) nogil:
    return 1.0 - pow(1.0 + (d2 / d1) * t, 1.0 - d1)


def loglik(const double[::1] times, const double[::1] logm, double T,
           double a, double b, double g, double d1, double d2):
    cdef Py_ssize_t n = times.shape[0]
    cdef Py_ssize_t i, j
    cdef double ll = 0.0, comp, lam, ti
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    with nogil:
        for i in range(n):
            w[i] = exp(-b * times[i]) * (g * logm[i])
        comp = a * _phi_cdf(T, d1, d2)
        for i in range(n):
            comp += w[i] * _phi_cdf(T - times[i], d1, d2)
        for i in range(n):
            ti = times[i]
            lam = a * _phi(ti, d1, d2)
            for j in range(i):
                if times[j] < ti:
                    lam += w[j] * _phi(ti - times[j], d1, d2)
            if lam > 0.0:
                ll += log(lam)
            else:
                ll = -INFINITY
                break
        if isfinite(ll):
            ll -= comp
    if not isfinite(ll):
        return -INFINITY
    return ll


def intensity_at(const double[::1] ts, const double[::1] times, const double[::1] logm,
                 double a, double b, double g, double d1, double d2):
    cdef Py_ssize_t m = ts.shape[0], n = times.shape[0]
    cdef Py_ssize_t k, j
    cdef double acc, t
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    with nogil:
        for j in range(n):
            w[j] = exp(-b * times[j]) * (g * logm[j])
        for k in range(m):
            t = ts[k]
            acc = a * _phi(t, d1, d2)
            for j in range(n):
                if times[j] < t:
                    acc += w[j] * _phi(t - times[j], d1, d2)
                else:
                    break
            out[k] = acc
    return out_arr


def compensator_at(const double[::1] ts, const double[::1] times, const double[::1] logm,
                   double a, double b, double g, double d1, double d2):
    cdef Py_ssize_t m = ts.shape[0], n = times.shape[0]
    cdef Py_ssize_t k, j
    cdef double acc, t
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    with nogil:
        for j in range(n):
            w[j] = exp(-b * times[j]) * (g * logm[j])
        for k in range(m):
            t = ts[k]
            acc = a * _phi_cdf(t, d1, d2)
            for j in range(n):
                if times[j] < t:
                    acc += w[j] * _phi_cdf(t - times[j], d1, d2)
                else:
                    break
            out[k] = acc
    return out_arr


def shifted_rate_at(const double[::1] us, double T,
                    const double[::1] times, const double[::1] logm,
                    double a, double b, double g, double d1, double d2):
    cdef Py_ssize_t m = us.shape[0], n = times.shape[0]
    cdef Py_ssize_t k, j
    cdef double acc, t
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] w = np.empty(n, dtype=np.float64)
    with nogil:
        for j in range(n):
            w[j] = exp(-b * times[j]) * (g * logm[j])
        for k in range(m):
            t = T + us[k]
            acc = a * _phi(t, d1, d2)
            for j in range(n):
                acc += w[j] * _phi(t - times[j], d1, d2)
            out[k] = acc
    return out_arr
