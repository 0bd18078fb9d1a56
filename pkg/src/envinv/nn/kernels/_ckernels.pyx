# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Dilated causal conv kernels in C loops.

Same contract as numpy_backend: x (B, C, T), w (O, C, K), bias (O,), tap k
reads x at t - k*dilation.  Inner loops run over contiguous time so the
compiler can vectorize them; no temporaries are allocated for the shifted
views the numpy path needs.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv1d_forward(double[:, :, ::1] x, double[:, :, ::1] w, double[::1] b, int dilation):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t O = w.shape[0], K = w.shape[2]
    out_arr = np.empty((B, O, T), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t bi, o, c, k, t, kd
    cdef double wv, bias
    with nogil:
        for bi in range(B):
            for o in range(O):
                bias = b[o]
                for t in range(T):
                    out[bi, o, t] = bias
                for c in range(C):
                    for k in range(K):
                        kd = k * dilation
                        if kd >= T:
                            continue
                        wv = w[o, c, k]
                        for t in range(T - kd):
                            out[bi, o, t + kd] += wv * x[bi, c, t]
    return out_arr


def conv1d_backward(double[:, :, ::1] x, double[:, :, ::1] w, double[:, :, ::1] gy, int dilation):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], T = x.shape[2]
    cdef Py_ssize_t O = w.shape[0], K = w.shape[2]
    gx_arr = np.zeros((B, C, T), dtype=np.float64)
    gw_arr = np.zeros((O, C, K), dtype=np.float64)
    gb_arr = np.zeros(O, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t bi, o, c, k, t, kd
    cdef double wv, acc
    with nogil:
        for bi in range(B):
            for o in range(O):
                acc = 0.0
                for t in range(T):
                    acc += gy[bi, o, t]
                gb[o] += acc
                for c in range(C):
                    for k in range(K):
                        kd = k * dilation
                        if kd >= T:
                            continue
                        wv = w[o, c, k]
                        acc = 0.0
                        for t in range(T - kd):
                            acc += gy[bi, o, t + kd] * x[bi, c, t]
                            gx[bi, c, t] += wv * gy[bi, o, t + kd]
                        gw[o, c, k] += acc
    return gx_arr, gw_arr, gb_arr
