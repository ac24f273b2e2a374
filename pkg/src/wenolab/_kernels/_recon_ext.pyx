# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused per-cell WENO3/CWENO3 reconstruction loop."""

import numpy as np


cdef inline double ipow(double x, int n) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(n):
        r *= x
    return r


def reconstruct_faces_ext(
    const double[:, ::1] u,
    const double[::1] h,
    int kind,
    int eps_kind,
    double eps_scale,
    int tau,
    double cl,
    double cr,
    double c0,
    bint linear,
):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = u.shape[1] - 2
    left_arr = np.empty((m, n), dtype=np.float64)
    right_arr = np.empty((m, n), dtype=np.float64)
    center_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] left = left_arr
    cdef double[:, ::1] right = right_arr
    cdef double[:, ::1] center = center_arr

    cdef Py_ssize_t k, j
    cdef double hc, hh, beta, gamma, s, um, u0, up, sm, sp, a, b, c
    cdef double eps, il, ir, i0, dmin, wl, wr, w0, wsum
    cdef double a0, b0, q0, A, B, Q
    cdef double cpl, cpr, cml, cmr, wml, wmr

    with nogil:
        for k in range(m):
            for j in range(n):
                hc = h[j + 1]
                hh = 0.5 * hc
                beta = h[j] / hc
                gamma = h[j + 2] / hc
                s = 1.0 + beta + gamma
                um = u[k, j]
                u0 = u[k, j + 1]
                up = u[k, j + 2]

                sm = 2.0 * (u0 - um) / ((1.0 + beta) * hc)
                sp = 2.0 * (up - u0) / ((1.0 + gamma) * hc)
                c = 1.5 * (sp - sm) / (hc * s)
                b = ((0.5 + beta) * sp + (0.5 + gamma) * sm) / s
                a = u0 - c * hc * hc / 12.0

                if eps_kind == 0:
                    eps = eps_scale
                elif eps_kind == 1:
                    eps = eps_scale * hc
                else:
                    eps = eps_scale * hc * hc

                il = sm * sm * hc * hc + eps
                ir = sp * sp * hc * hc + eps

                if kind == 0:
                    cpl = gamma / s
                    cpr = (1.0 + beta) / s
                    cml = (1.0 + gamma) / s
                    cmr = beta / s
                    if linear:
                        wl = cpl
                        wr = cpr
                        wml = cml
                        wmr = cmr
                    else:
                        dmin = il if il < ir else ir
                        wl = cpl * ipow(dmin / il, tau)
                        wr = cpr * ipow(dmin / ir, tau)
                        wml = cml * ipow(dmin / il, tau)
                        wmr = cmr * ipow(dmin / ir, tau)
                        wsum = wl + wr
                        wl = wl / wsum
                        wr = wr / wsum
                        wsum = wml + wmr
                        wml = wml / wsum
                        wmr = wmr / wsum
                    right[k, j] = wl * (u0 + sm * hh) + wr * (u0 + sp * hh)
                    left[k, j] = wml * (u0 + sm * (-hh)) + wmr * (u0 + sp * (-hh))
                    center[k, j] = a
                else:
                    a0 = (a - (cl + cr) * u0) / c0
                    b0 = (b - cl * sm - cr * sp) / c0
                    q0 = c / c0
                    if linear:
                        wl = cl
                        wr = cr
                        w0 = c0
                    else:
                        i0 = b0 * b0 * hc * hc + (13.0 / 3.0) * q0 * q0 * hc * hc * hc * hc + eps
                        dmin = il if il < ir else ir
                        dmin = dmin if dmin < i0 else i0
                        wl = cl * ipow(dmin / il, tau)
                        wr = cr * ipow(dmin / ir, tau)
                        w0 = c0 * ipow(dmin / i0, tau)
                        wsum = wl + wr + w0
                        wl = wl / wsum
                        wr = wr / wsum
                        w0 = w0 / wsum
                    A = (wl + wr) * u0 + w0 * a0
                    B = wl * sm + wr * sp + w0 * b0
                    Q = w0 * q0
                    left[k, j] = A - B * hh + Q * hh * hh
                    right[k, j] = A + B * hh + Q * hh * hh
                    center[k, j] = A

    return left_arr, right_arr, center_arr
