# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled triplet backprop kernel; mirrors kernels.numpy_backend exactly."""

from libc.math cimport sqrt

import numpy as np


def triplet_linear_grad(double[:, ::1] W, double[:, ::1] C, double[:, ::1] P,
                        double[:, ::1] negs, long[::1] offsets, double beta):
    cdef Py_ssize_t K = C.shape[0]
    cdef Py_ssize_t Din = C.shape[1]
    cdef Py_ssize_t Dout = W.shape[0]
    cdef Py_ssize_t i, j, k, d, m

    dW_arr = np.zeros((Dout, Din), dtype=np.float64)
    dC_arr = np.zeros((K, Din), dtype=np.float64)
    u_arr = np.empty(Dout, dtype=np.float64)
    z_arr = np.empty(Dout, dtype=np.float64)
    gz_arr = np.empty(Dout, dtype=np.float64)
    gu_arr = np.empty(Dout, dtype=np.float64)
    cdef double[:, ::1] dW = dW_arr
    cdef double[:, ::1] dC = dC_arr
    cdef double[::1] u = u_arr
    cdef double[::1] z = z_arr
    cdef double[::1] gz = gz_arr
    cdef double[::1] gu = gu_arr

    cdef double loss = 0.0, li, n, dpos, dneg, h, acc, gdotz, scale

    for i in range(K):
        m = offsets[i + 1] - offsets[i]
        if m == 0:
            continue
        # u = W @ c_i
        n = 0.0
        for d in range(Dout):
            acc = 0.0
            for k in range(Din):
                acc += W[d, k] * C[i, k]
            u[d] = acc
            n += acc * acc
        n = sqrt(n)
        if n > 0.0:
            for d in range(Dout):
                z[d] = u[d] / n
        else:
            for d in range(Dout):
                z[d] = 0.0

        dpos = 0.0
        for d in range(Dout):
            acc = z[d] - P[i, d]
            dpos += acc * acc
        dpos = sqrt(dpos)

        for d in range(Dout):
            gz[d] = 0.0
        li = 0.0
        for j in range(offsets[i], offsets[i + 1]):
            dneg = 0.0
            for d in range(Dout):
                acc = z[d] - negs[j, d]
                dneg += acc * acc
            dneg = sqrt(dneg)
            h = dpos - dneg + beta
            if h > 0.0:
                li += h
                if dpos > 0.0:
                    for d in range(Dout):
                        gz[d] += (z[d] - P[i, d]) / dpos
                if dneg > 0.0:
                    for d in range(Dout):
                        gz[d] -= (z[d] - negs[j, d]) / dneg
        loss += li / m
        if n > 0.0:
            scale = 1.0 / (K * m)
            gdotz = 0.0
            for d in range(Dout):
                gz[d] *= scale
                gdotz += gz[d] * z[d]
            for d in range(Dout):
                gu[d] = (gz[d] - gdotz * z[d]) / n
            for d in range(Dout):
                for k in range(Din):
                    dW[d, k] += gu[d] * C[i, k]
            for k in range(Din):
                acc = 0.0
                for d in range(Dout):
                    acc += W[d, k] * gu[d]
                dC[i, k] = acc

    return loss / K, dW_arr, dC_arr
