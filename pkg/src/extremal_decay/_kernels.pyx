# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernels.

Both kernels draw from a numpy ``Generator``'s bit generator in exactly the
order used by :mod:`extremal_decay._fallback`, so the two backends produce
the same numbers for the same generator state.
"""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, pow
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal

cnp.import_array()


cdef bitgen_t* _bitgen(object generator) except NULL:
    capsule = generator.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


def gauss_walk_sup(generator, Py_ssize_t n_paths, Py_ssize_t n_steps,
                   double[:, ::1] load, double[::1] drift, double[::1] q):
    """Per-path ``max_{0<=n<=n_steps} min_i W_n[i] / q[i]`` for a Gaussian random walk.

    Increments are ``load @ z - drift`` with ``z`` standard normal, drawn
    path by path, step by step, coordinate by coordinate.
    """
    cdef Py_ssize_t d = load.shape[0]
    cdef bitgen_t* rng = _bitgen(generator)
    out_arr = np.empty(n_paths, dtype=np.float64)
    cdef double[::1] out = out_arr
    w_arr = np.empty(d, dtype=np.float64)
    z_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] z = z_arr
    cdef Py_ssize_t p, n, i, j
    cdef double acc, m, best, r
    lock = generator.bit_generator.lock
    with lock, nogil:
        for p in range(n_paths):
            for i in range(d):
                w[i] = 0.0
            best = 0.0
            for n in range(n_steps):
                for j in range(d):
                    z[j] = random_standard_normal(rng)
                m = 0.0
                for i in range(d):
                    acc = 0.0
                    for j in range(d):
                        acc = acc + load[i, j] * z[j]
                    w[i] = w[i] + (acc - drift[i])
                    r = w[i] / q[i]
                    if i == 0 or r < m:
                        m = r
                if m > best:
                    best = m
            out[p] = best
    return out_arr


cdef inline Py_ssize_t _fill_source(bitgen_t* rng, double[:, :, ::1] Z, Py_ssize_t p,
                                    Py_ssize_t col, Py_ssize_t n_int, double c,
                                    double inv_V) noexcept nogil:
    cdef double state = 1.0 if rng.next_double(rng.state) < 0.5 else 0.0
    cdef double t = 0.0, ontime = 0.0, h, end
    cdef Py_ssize_t k = 0, sojourns = 0
    while k <= n_int:
        h = pow(-log(rng.next_double(rng.state)), inv_V)
        end = t + h
        while k <= n_int and <double> k <= end:
            Z[p, k, col] = (ontime + state * (<double> k - t)) - c * <double> k
            k += 1
        ontime = ontime + state * h
        t = end
        state = 1.0 - state
        sojourns += 1
    return sojourns


def onoff_sources(generator, Py_ssize_t n_paths, Py_ssize_t n_int, double c1, double c2,
                  double V):
    """Two independent integrated on-off sources sampled at times ``0..n_int``.

    Returns ``Z`` with shape ``(n_paths, n_int + 1, 2)``. Each source starts
    on or off with probability 1/2 and alternates sojourns
    ``(-log U)**(1/V)``.
    """
    cdef bitgen_t* rng = _bitgen(generator)
    Z_arr = np.empty((n_paths, n_int + 1, 2), dtype=np.float64)
    cdef double[:, :, ::1] Z = Z_arr
    cdef double inv_V = 1.0 / V
    cdef Py_ssize_t p
    lock = generator.bit_generator.lock
    with lock, nogil:
        for p in range(n_paths):
            _fill_source(rng, Z, p, 0, n_int, c1, inv_V)
            _fill_source(rng, Z, p, 1, n_int, c2, inv_V)
    return Z_arr
