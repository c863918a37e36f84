# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled loop recursion. Mirrors ``loopqrc._fallback.loop_recursion``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, cosh, sinh, pow

cnp.import_array()


def loop_recursion(double[:, ::1] S, double R, double[:, ::1] gamma0,
                   double[::1] phases, double r_input):
    cdef Py_ssize_t n2 = S.shape[0]
    cdef Py_ssize_t N = n2 // 2
    cdef Py_ssize_t L = phases.shape[0]
    cdef Py_ssize_t k, i, j, l
    cdef double a, b, c, ch, sh, c2, s2, acc
    cdef double keep = 1.0 - R

    G_arr = np.array(gamma0, dtype=np.float64, copy=True, order="C")
    M_arr = np.empty((n2, n2), dtype=np.float64)
    T_arr = np.empty((n2, n2), dtype=np.float64)
    out_arr = np.empty((L, N, N), dtype=np.float64)
    cdef double[:, ::1] G = G_arr
    cdef double[:, ::1] M = M_arr
    cdef double[:, ::1] T = T_arr
    cdef double[:, :, ::1] out = out_arr

    ch = cosh(r_input)
    sh = sinh(r_input)
    for k in range(L):
        c2 = cos(2.0 * phases[k])
        s2 = sin(2.0 * phases[k])
        a = 0.5 * (ch - sh * c2)
        b = -0.5 * sh * s2
        c = 0.5 * (ch + sh * c2)

        # out-coupled pulse, x-x block only
        for i in range(N):
            for j in range(N):
                out[k, i, j] = keep * G[2 * i, 2 * j]
            out[k, i, i] += R * a

        # mixed pulse entering the crystal
        for i in range(n2):
            for j in range(n2):
                M[i, j] = R * G[i, j]
        for i in range(N):
            M[2 * i, 2 * i] += keep * a
            M[2 * i, 2 * i + 1] += keep * b
            M[2 * i + 1, 2 * i] += keep * b
            M[2 * i + 1, 2 * i + 1] += keep * c

        # T = S M ; G = T S^T
        for i in range(n2):
            for j in range(n2):
                acc = 0.0
                for l in range(n2):
                    acc += S[i, l] * M[l, j]
                T[i, j] = acc
        for i in range(n2):
            for j in range(i + 1):
                acc = 0.0
                for l in range(n2):
                    acc += T[i, l] * S[j, l]
                G[i, j] = acc
        for i in range(n2):
            for j in range(i + 1, n2):
                G[i, j] = G[j, i]

    return out_arr, G_arr


cdef inline double _mg_rhs(double x, double xd, double beta, double gamma, double power):
    return -gamma * x + beta * xd / (1.0 + pow(xd, power))


def mackey_glass_grid(double history, Py_ssize_t n_steps, Py_ssize_t lag, double h,
                      double beta, double gamma, double power, bint hermite):
    cdef Py_ssize_t n, j0
    cdef double xn, d0, d1, dm, fa, fb, k1, k2, k3, k4
    x_arr = np.empty(lag + n_steps + 1, dtype=np.float64)
    f_arr = np.zeros(lag + n_steps + 1, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] f = f_arr
    for n in range(lag + 1):
        x[n] = history
    for n in range(lag, lag + n_steps):
        xn = x[n]
        j0 = n - lag
        d0 = x[j0]
        d1 = x[j0 + 1]
        dm = 0.5 * (d0 + d1)
        if hermite:
            fa = f[j0]
            fb = 0.0 if j0 + 1 == lag else f[j0 + 1]
            dm = dm + h / 8.0 * (fa - fb)
        k1 = _mg_rhs(xn, d0, beta, gamma, power)
        f[n] = k1
        k2 = _mg_rhs(xn + 0.5 * h * k1, dm, beta, gamma, power)
        k3 = _mg_rhs(xn + 0.5 * h * k2, dm, beta, gamma, power)
        k4 = _mg_rhs(xn + h * k3, d1, beta, gamma, power)
        x[n + 1] = xn + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x_arr[lag:]
